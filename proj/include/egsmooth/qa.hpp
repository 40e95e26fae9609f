#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "egsmooth/error.hpp"
#include "egsmooth/metrics.hpp"
#include "egsmooth/parallel.hpp"
#include "egsmooth/predicate.hpp"
#include "egsmooth/smoother.hpp"

namespace egsmooth {

/// An (entity, relation, entity) triple with entity-linked arguments.
struct QAStatement {
  Predicate relation;
  std::string arg1;
  std::string arg2;
};

/// "Is it true that <question>?" together with context triples about the
/// same entities.
struct QAExample {
  QAStatement question;
  std::vector<QAStatement> contexts;
  bool label = false;
};

namespace detail {

inline QAStatement parse_statement(const nlohmann::json& j) {
  QAStatement s{Predicate::parse(j.at("rel").get<std::string>()), j.at("arg1").get<std::string>(),
                j.at("arg2").get<std::string>()};
  if (j.contains("types")) {
    const auto pair = TypeSignature::parse(j.at("types").get<std::string>());
    auto [l, r] = base_types(pair.left.str(), pair.right.str());
    if (s.relation.signature() != TypeSignature{TypeName(l), TypeName(r)})
      throw ParseError("relation " + s.relation.str() + " does not carry types " + pair.str());
  }
  return s;
}

inline nlohmann::json statement_json(const QAStatement& s) {
  return {{"rel", s.relation.str()}, {"arg1", s.arg1}, {"arg2", s.arg2}, {"types", s.relation.signature().str()}};
}

}  // namespace detail

/// JSON lines: {"question": {"rel", "arg1", "arg2", "types"}, "contexts": [...], "label": bool}
inline std::vector<QAExample> parse_qa(std::istream& in) {
  std::vector<QAExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      QAExample ex;
      ex.question = detail::parse_statement(rec.at("question"));
      for (const auto& c : rec.at("contexts")) ex.contexts.push_back(detail::parse_statement(c));
      ex.label = rec.at("label").get<bool>();
      out.push_back(std::move(ex));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    } catch (const DataError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (out.empty()) throw DataError("QA file contains no questions");
  return out;
}

inline std::vector<QAExample> load_qa(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open QA file " + path);
  try {
    return parse_qa(in);
  } catch (const DataError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_qa(const std::vector<QAExample>& examples, std::ostream& out) {
  for (const auto& ex : examples) {
    nlohmann::json rec;
    rec["question"] = detail::statement_json(ex.question);
    rec["contexts"] = nlohmann::json::array();
    for (const auto& c : ex.contexts) rec["contexts"].push_back(detail::statement_json(c));
    rec["label"] = ex.label;
    out << rec.dump() << '\n';
  }
}

/// Context relations that can entail the question: same entity pair in order,
/// or reversed (then the relation's slots are swapped), with the question's
/// type signature after alignment. Returned in context order.
inline std::vector<Predicate> eligible_contexts(const QAExample& q) {
  std::vector<Predicate> out;
  const auto& sig = q.question.relation.signature();
  for (const auto& c : q.contexts) {
    if (c.arg1 == q.question.arg1 && c.arg2 == q.question.arg2) {
      if (c.relation.signature() == sig) out.push_back(c.relation);
    } else if (c.arg1 == q.question.arg2 && c.arg2 == q.question.arg1) {
      auto swapped = c.relation.swapped();
      if (swapped.signature() == sig) out.push_back(std::move(swapped));
    }
  }
  return out;
}

/// Maximum over eligible contexts of the smoothed score for
/// context relation => question relation; 0 when nothing is eligible.
inline double answer_question(const QAExample& q, const SmoothingResources& res, const SmoothingConfig& config) {
  double best = 0.0;
  for (const auto& ctx : eligible_contexts(q))
    best = std::max(best, score_query(ctx, q.question.relation, res, config).score);
  return best;
}

/// True when no eligible context relation is a vertex of the graph (including
/// the case of no eligible context at all).
inline bool all_contexts_missing(const QAExample& q, const EntailmentGraph& graph) {
  const auto ctx = eligible_contexts(q);
  return std::none_of(ctx.begin(), ctx.end(), [&](const Predicate& p) { return graph.contains_predicate(p); });
}

/// Half-open range [lower, upper) of context counts; upper absent means open.
struct ContextBand {
  std::size_t lower = 0;
  std::optional<std::size_t> upper;

  bool contains(std::size_t n) const { return n >= lower && (!upper || n < *upper); }
  std::string label() const {
    if (!upper) return std::to_string(lower) + "+";
    return "[" + std::to_string(lower) + ", " + std::to_string(*upper) + ")";
  }
};

/// "2,5,10,15" -> [2,5), [5,10), [10,15), 15+.
inline std::vector<ContextBand> parse_bands(const std::string& spec) {
  std::vector<std::size_t> edges;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      const auto v = std::stoul(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      edges.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad band edge '" + tok + "'");
    }
  }
  if (edges.empty()) throw std::invalid_argument("no band edges given");
  if (!std::is_sorted(edges.begin(), edges.end()) || std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw std::invalid_argument("band edges must be strictly increasing");
  std::vector<ContextBand> bands;
  for (std::size_t i = 0; i < edges.size(); ++i)
    bands.push_back({edges[i], i + 1 < edges.size() ? std::optional<std::size_t>(edges[i + 1]) : std::nullopt});
  return bands;
}

inline std::vector<ContextBand> default_bands() { return parse_bands("2,5,10,15"); }

struct BandPartition {
  std::vector<ContextBand> bands;
  std::vector<std::vector<std::size_t>> members;  // example indices per band
  std::vector<std::size_t> dropped;               // in no band
};

/// Assigns each example to the band containing its context count.
inline BandPartition band_partition(const std::vector<QAExample>& examples, std::vector<ContextBand> bands) {
  for (const auto& b : bands)
    if (b.upper && *b.upper <= b.lower) throw std::invalid_argument("empty band " + b.label());
  for (std::size_t i = 0; i < bands.size(); ++i)
    for (std::size_t j = i + 1; j < bands.size(); ++j) {
      const auto& a = bands[i];
      const auto& b = bands[j];
      const auto a_hi = a.upper.value_or(std::numeric_limits<std::size_t>::max());
      const auto b_hi = b.upper.value_or(std::numeric_limits<std::size_t>::max());
      if (a.lower < b_hi && b.lower < a_hi)
        throw std::invalid_argument("overlapping bands " + a.label() + " and " + b.label());
    }
  BandPartition part;
  part.bands = std::move(bands);
  part.members.resize(part.bands.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto n = examples[i].contexts.size();
    auto it = std::find_if(part.bands.begin(), part.bands.end(), [&](const ContextBand& b) { return b.contains(n); });
    if (it == part.bands.end())
      part.dropped.push_back(i);
    else
      part.members[static_cast<std::size_t>(it - part.bands.begin())].push_back(i);
  }
  return part;
}

struct BandReport {
  ContextBand band;
  std::size_t n_questions = 0;
  std::size_t n_positive = 0;
  std::optional<double> auc_norm;  // undefined without both classes
  std::optional<double> average_precision;
  std::optional<double> max_recall;
  double miss_rate = 0.0;
};

namespace detail {

inline BandReport band_report(ContextBand band, const std::vector<std::size_t>& members,
                              const std::vector<double>& scores, const std::vector<QAExample>& examples,
                              const EntailmentGraph& graph) {
  BandReport r;
  r.band = std::move(band);
  r.n_questions = members.size();
  std::vector<ScoredLabel> scored;
  std::size_t missing = 0;
  for (auto i : members) {
    scored.push_back({scores[i], examples[i].label});
    r.n_positive += examples[i].label ? 1 : 0;
    missing += all_contexts_missing(examples[i], graph) ? 1 : 0;
  }
  r.miss_rate = members.empty() ? 0.0 : static_cast<double>(missing) / static_cast<double>(members.size());
  if (r.n_positive > 0 && r.n_positive < r.n_questions) {
    const auto m = compute_metrics(scored);
    r.auc_norm = m.auc_norm;
    r.average_precision = m.average_precision;
    r.max_recall = m.max_recall;
  }
  return r;
}

}  // namespace detail

struct QAReport {
  std::vector<BandReport> bands;
  BandReport overall;  // all retained questions
  std::size_t dropped = 0;
  std::vector<double> scores;  // per input question; 0 for dropped ones
};

/// Answers every retained question and reports AUC_n and miss rate per band.
inline QAReport band_metrics(const BandPartition& part, const std::vector<QAExample>& examples,
                             const SmoothingResources& res, const SmoothingConfig& config, std::size_t threads = 0) {
  config.validate();
  QAReport report;
  report.scores.assign(examples.size(), 0.0);
  std::vector<std::size_t> retained;
  for (const auto& m : part.members) retained.insert(retained.end(), m.begin(), m.end());
  std::sort(retained.begin(), retained.end());
  parallel_for(
      retained.size(),
      [&](std::size_t k) { report.scores[retained[k]] = answer_question(examples[retained[k]], res, config); },
      threads);
  for (std::size_t b = 0; b < part.bands.size(); ++b)
    report.bands.push_back(detail::band_report(part.bands[b], part.members[b], report.scores, examples, *res.graph));
  ContextBand all{part.bands.empty() ? 0 : part.bands.front().lower, std::nullopt};
  report.overall = detail::band_report(all, retained, report.scores, examples, *res.graph);
  report.dropped = part.dropped.size();
  return report;
}

inline nlohmann::json to_json(const BandReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"band", r.band.label()},      {"n_questions", r.n_questions},
          {"n_positive", r.n_positive},  {"auc_norm", opt(r.auc_norm)},
          {"average_precision", opt(r.average_precision)},
          {"max_recall", opt(r.max_recall)}, {"miss_rate", r.miss_rate}};
}

inline nlohmann::json to_json(const QAReport& r) {
  nlohmann::json j;
  j["bands"] = nlohmann::json::array();
  for (const auto& b : r.bands) j["bands"].push_back(to_json(b));
  j["all_questions"] = to_json(r.overall);
  j["dropped"] = r.dropped;
  return j;
}

/// CSV with header "band,n_questions,n_positive,auc_norm,average_precision,max_recall,miss_rate";
/// undefined metrics are left empty.
inline void write_band_csv(const QAReport& r, std::ostream& out) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v).dump() : std::string(); };
  out << "band,n_questions,n_positive,auc_norm,average_precision,max_recall,miss_rate\n";
  auto row = [&](const BandReport& b, const std::string& label) {
    out << '"' << label << "\"," << b.n_questions << ',' << b.n_positive << ',' << opt(b.auc_norm) << ','
        << opt(b.average_precision) << ',' << opt(b.max_recall) << ',' << nlohmann::json(b.miss_rate).dump() << '\n';
  };
  for (const auto& b : r.bands) row(b, b.band.label());
  row(r.overall, "all");
}

}  // namespace egsmooth
