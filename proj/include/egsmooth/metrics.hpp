#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "egsmooth/error.hpp"

namespace egsmooth {

struct ScoredLabel {
  double score = 0.0;
  bool label = false;
};

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;
  double threshold = 0.0;

  friend bool operator==(const PRPoint&, const PRPoint&) = default;
};

struct PRCurve {
  std::vector<PRPoint> points;  // recall non-decreasing

  bool empty() const noexcept { return points.empty(); }
  double max_recall() const noexcept { return points.empty() ? 0.0 : points.back().recall; }
};

namespace detail {

inline std::size_t count_positives(std::span<const ScoredLabel> scored) {
  return static_cast<std::size_t>(
      std::count_if(scored.begin(), scored.end(), [](const ScoredLabel& s) { return s.label; }));
}

inline std::vector<ScoredLabel> by_score_descending(std::span<const ScoredLabel> scored) {
  std::vector<ScoredLabel> sorted(scored.begin(), scored.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });
  return sorted;
}

}  // namespace detail

/// Precision/recall at each distinct score held by a positive example, from
/// the highest down. An example is predicted to entail iff its score reaches
/// the threshold and is positive; tied scores enter together, and zero scores
/// are never predicted.
inline PRCurve pr_curve(std::span<const ScoredLabel> scored) {
  const auto positives = detail::count_positives(scored);
  if (positives == 0) throw DataError("precision-recall curve needs at least one positive example");
  const auto sorted = detail::by_score_descending(scored);
  PRCurve curve;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double threshold = sorted[i].score;
    if (!(threshold > 0.0)) break;
    bool has_positive = false;
    for (; i < sorted.size() && sorted[i].score == threshold; ++i) {
      if (sorted[i].label) {
        ++tp;
        has_positive = true;
      } else {
        ++fp;
      }
    }
    if (has_positive)
      curve.points.push_back({static_cast<double>(tp) / static_cast<double>(positives),
                              static_cast<double>(tp) / static_cast<double>(tp + fp), threshold});
  }
  return curve;
}

/// Area under the precision-recall curve above the random-guess baseline,
/// normalised by the largest such area, (1 - baseline):
///
///   AUC_n = integral over [r_min, r_max] of max(P(r) - baseline, 0) dr / (1 - baseline)
///
/// with P(r) linear between curve points. Below the smallest recall the curve
/// is held flat at that point's precision, so a perfect classifier scores 1.
/// An empty curve scores 0.
inline double auc_norm(const PRCurve& curve, double baseline) {
  if (!(baseline > 0.0 && baseline < 1.0)) throw std::invalid_argument("baseline must lie in (0, 1)");
  if (curve.points.empty()) return 0.0;
  std::vector<PRPoint> pts;
  pts.reserve(curve.points.size() + 1);
  if (curve.points.front().recall > 0.0) pts.push_back({0.0, curve.points.front().precision, curve.points.front().threshold});
  pts.insert(pts.end(), curve.points.begin(), curve.points.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double width = pts[i].recall - pts[i - 1].recall;
    if (width <= 0.0) continue;
    const double y0 = pts[i - 1].precision - baseline;
    const double y1 = pts[i].precision - baseline;
    if (y0 >= 0.0 && y1 >= 0.0) {
      area += width * (y0 + y1) / 2.0;
    } else if (y0 > 0.0) {
      area += width * y0 * y0 / (2.0 * (y0 - y1));
    } else if (y1 > 0.0) {
      area += width * y1 * y1 / (2.0 * (y1 - y0));
    }
  }
  return area / (1.0 - baseline);
}

/// Mean over positive examples of the precision at the threshold where each
/// is first retrieved; positives scored 0 are never retrieved and contribute 0.
inline double average_precision(std::span<const ScoredLabel> scored) {
  const auto positives = detail::count_positives(scored);
  if (positives == 0) throw DataError("average precision needs at least one positive example");
  const auto sorted = detail::by_score_descending(scored);
  double sum = 0.0;
  std::size_t tp = 0, retrieved = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double threshold = sorted[i].score;
    if (!(threshold > 0.0)) break;
    std::size_t group_pos = 0;
    for (; i < sorted.size() && sorted[i].score == threshold; ++i, ++retrieved)
      if (sorted[i].label) ++group_pos;
    tp += group_pos;
    sum += static_cast<double>(group_pos) * static_cast<double>(tp) / static_cast<double>(retrieved);
  }
  return sum / static_cast<double>(positives);
}

struct MetricsReport {
  std::size_t n_examples = 0;
  std::size_t n_positive = 0;
  double baseline = 0.0;  // positive rate
  double auc_norm = 0.0;
  double average_precision = 0.0;
  double max_recall = 0.0;
  PRCurve curve;
};

inline MetricsReport compute_metrics(std::span<const ScoredLabel> scored) {
  MetricsReport r;
  r.n_examples = scored.size();
  r.n_positive = detail::count_positives(scored);
  if (r.n_positive == 0 || r.n_positive == r.n_examples)
    throw DataError("metrics need both positive and negative examples");
  r.baseline = static_cast<double>(r.n_positive) / static_cast<double>(r.n_examples);
  r.curve = pr_curve(scored);
  r.auc_norm = egsmooth::auc_norm(r.curve, r.baseline);
  r.average_precision = egsmooth::average_precision(scored);
  r.max_recall = r.curve.max_recall();
  return r;
}

inline nlohmann::json to_json(const MetricsReport& r) {
  return {{"n_examples", r.n_examples},
          {"n_positive", r.n_positive},
          {"baseline", r.baseline},
          {"auc_norm", r.auc_norm},
          {"auc_norm_pct", 100.0 * r.auc_norm},
          {"average_precision", r.average_precision},
          {"max_recall", r.max_recall},
          {"curve_points", r.curve.points.size()}};
}

/// CSV with header "threshold,recall,precision".
inline void write_curve_csv(const PRCurve& curve, std::ostream& out) {
  out << "threshold,recall,precision\n";
  for (const auto& p : curve.points) {
    out << nlohmann::json(p.threshold).dump() << ',' << nlohmann::json(p.recall).dump() << ','
        << nlohmann::json(p.precision).dump() << '\n';
  }
}

}  // namespace egsmooth
