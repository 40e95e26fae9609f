#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "egsmooth/metrics.hpp"

// From-scratch reference metrics: every threshold is evaluated by recounting
// the confusion matrix over the whole dataset.
namespace egsmooth::testing {

inline std::vector<ScoredLabel> random_scored(std::mt19937_64& rng) {
  const std::size_t n = 1 + rng() % 50;
  const int levels = 1 + static_cast<int>(rng() % 12);  // few levels -> many ties
  std::vector<ScoredLabel> out(n);
  for (auto& s : out) {
    s.score = static_cast<double>(rng() % (levels + 1)) / levels;
    s.label = rng() % 2 == 0;
  }
  if (std::none_of(out.begin(), out.end(), [](const ScoredLabel& s) { return s.label; })) out[rng() % n].label = true;
  return out;
}

inline double baseline(const std::vector<ScoredLabel>& d) {
  double p = 0;
  for (const auto& s : d) p += s.label;
  return p / static_cast<double>(d.size());
}

inline std::vector<PRPoint> oracle_curve(const std::vector<ScoredLabel>& d) {
  std::set<double, std::greater<>> thresholds;
  double positives = 0;
  for (const auto& s : d) {
    positives += s.label;
    if (s.label && s.score > 0) thresholds.insert(s.score);
  }
  std::vector<PRPoint> out;
  for (double t : thresholds) {
    double tp = 0, fp = 0;
    for (const auto& s : d)
      if (s.score > 0 && s.score >= t) (s.label ? tp : fp) += 1;
    out.push_back({tp / positives, tp / (tp + fp), t});
  }
  return out;
}

inline double oracle_auc_norm(const std::vector<ScoredLabel>& d, double base) {
  auto pts = oracle_curve(d);
  if (pts.empty()) return 0.0;
  pts.insert(pts.begin(), PRPoint{0.0, pts.front().precision, 0.0});
  double area = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double r0 = pts[i].recall, r1 = pts[i + 1].recall;
    const double p0 = pts[i].precision, p1 = pts[i + 1].precision;
    // Split the segment where it crosses the baseline, then integrate the
    // pieces that lie above it.
    std::vector<std::pair<double, double>> knots = {{r0, p0}};
    if ((p0 - base) * (p1 - base) < 0) {
      const double rc = r0 + (base - p0) / (p1 - p0) * (r1 - r0);
      knots.emplace_back(rc, base);
    }
    knots.emplace_back(r1, p1);
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
      const double mid = (knots[k].second + knots[k + 1].second) / 2.0;
      if (mid > base) area += (knots[k + 1].first - knots[k].first) * (mid - base);
    }
  }
  return area / (1.0 - base);
}

inline double oracle_average_precision(const std::vector<ScoredLabel>& d) {
  double positives = 0, sum = 0;
  for (const auto& s : d) positives += s.label;
  for (const auto& s : d) {
    if (!s.label || !(s.score > 0)) continue;
    double tp = 0, retrieved = 0;
    for (const auto& o : d)
      if (o.score > 0 && o.score >= s.score) {
        retrieved += 1;
        tp += o.label;
      }
    sum += tp / retrieved;
  }
  return sum / positives;
}

}  // namespace egsmooth::testing
