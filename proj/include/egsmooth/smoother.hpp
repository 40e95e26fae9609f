#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "egsmooth/embedding.hpp"
#include "egsmooth/error.hpp"
#include "egsmooth/graph.hpp"
#include "egsmooth/index.hpp"
#include "egsmooth/lexical.hpp"
#include "egsmooth/predicate.hpp"
#include "egsmooth/sentence.hpp"

namespace egsmooth {

enum class SmoothingMode { off, knn, lex_hypernym, lex_hyponym };
enum class Trigger { on_miss, always };

inline std::string_view to_string(SmoothingMode m) {
  switch (m) {
    case SmoothingMode::off: return "off";
    case SmoothingMode::knn: return "knn";
    case SmoothingMode::lex_hypernym: return "hypernym";
    case SmoothingMode::lex_hyponym: return "hyponym";
  }
  return "?";
}

inline SmoothingMode parse_smoothing_mode(std::string_view s) {
  if (s == "off") return SmoothingMode::off;
  if (s == "knn") return SmoothingMode::knn;
  if (s == "hypernym" || s == "lex_hypernym") return SmoothingMode::lex_hypernym;
  if (s == "hyponym" || s == "lex_hyponym") return SmoothingMode::lex_hyponym;
  throw std::invalid_argument("unknown smoothing mode '" + std::string(s) + "'");
}

inline std::string_view to_string(Trigger t) { return t == Trigger::on_miss ? "on-miss" : "always"; }

inline Trigger parse_trigger(std::string_view s) {
  if (s == "on-miss" || s == "on_miss") return Trigger::on_miss;
  if (s == "always") return Trigger::always;
  throw std::invalid_argument("unknown trigger '" + std::string(s) + "'");
}

struct SmoothingConfig {
  SmoothingMode premise_mode = SmoothingMode::off;
  SmoothingMode hypothesis_mode = SmoothingMode::off;
  std::size_t k_prem = 4;
  std::size_t k_hyp = 2;
  Trigger trigger = Trigger::on_miss;
  /// Weight knn-derived edge scores by exp(-decay * distance). 0 disables.
  double distance_decay = 0.0;

  void validate() const {
    if (k_prem < 1 || k_hyp < 1) throw std::invalid_argument("K values must be at least 1");
    if (!(distance_decay >= 0.0) || !std::isfinite(distance_decay))
      throw std::invalid_argument("distance decay must be a finite non-negative number");
  }
};

/// How a candidate predicate was obtained.
struct Provenance {
  enum class Kind { direct, knn, lexical };
  Kind kind = Kind::direct;
  double distance = 0.0;  // knn only
  LexicalRelation relation = LexicalRelation::hypernym;  // lexical only
  std::string source_word;                                // lexical only

  static Provenance direct() { return {}; }
  static Provenance nearest(double d) { return {Kind::knn, d, {}, {}}; }
  static Provenance lexical(LexicalRelation r, std::string word) { return {Kind::lexical, 0.0, r, std::move(word)}; }
};

struct Candidate {
  Predicate predicate;
  Provenance provenance;
};

struct SmoothedQuery {
  Predicate premise;
  Predicate hypothesis;
  std::vector<Candidate> premise_candidates;
  std::vector<Candidate> hypothesis_candidates;

  const TypeSignature& signature() const noexcept { return premise.signature(); }
};

struct Witness {
  Candidate premise;
  Candidate hypothesis;
  double edge_score = 0.0;
};

struct EntailmentVerdict {
  double score = 0.0;
  std::optional<Witness> witness;  // absent iff score == 0
  std::string explanation;
  SmoothedQuery query;
};

/// Read-only inputs shared by all queries. Only `graph` is mandatory; the
/// rest are needed by the corresponding smoothing modes.
struct SmoothingResources {
  const EntailmentGraph* graph = nullptr;
  const IndexSet* indexes = nullptr;
  const EmbeddingStore* embeddings = nullptr;  // vectors for query predicates
  const LexicalDB* lexdb = nullptr;
};

namespace detail {

inline std::vector<Candidate> smooth(const Predicate& p, SmoothingMode mode, std::size_t k,
                                     const SmoothingResources& res, const SmoothingConfig& config) {
  if (res.graph == nullptr) throw std::invalid_argument("smoothing requires a graph");
  const bool present = res.graph->contains_predicate(p);
  std::vector<Candidate> out;
  if (present) out.push_back({p, Provenance::direct()});
  if (mode == SmoothingMode::off || (present && config.trigger == Trigger::on_miss)) return out;

  auto push = [&](Predicate q, Provenance prov) {
    for (const auto& c : out)
      if (c.predicate == q) return;
    out.push_back({std::move(q), std::move(prov)});
  };

  if (mode == SmoothingMode::knn) {
    const auto* sub = res.graph->subgraph(p.signature());
    if (sub == nullptr) return out;  // nothing to retrieve from
    const auto* index = res.indexes ? res.indexes->find(p.signature()) : nullptr;
    if (index == nullptr) throw DataError("no embedding index for signature " + p.signature().str());
    if (res.embeddings == nullptr) throw DataError("knn smoothing requires query embeddings");
    const auto x = res.embeddings->find(p);
    if (!x) return out;  // query predicate was never embedded
    for (auto& n : knn_query(*index, *x, k)) push(std::move(n.predicate), Provenance::nearest(n.distance));
    return out;
  }

  const auto relation = mode == SmoothingMode::lex_hypernym ? LexicalRelation::hypernym : LexicalRelation::hyponym;
  if (res.lexdb == nullptr) throw DataError("lexical smoothing requires a lexical database");
  for (auto& q : lexical_replacements(p, relation, *res.lexdb))
    if (res.graph->contains_predicate(q)) push(std::move(q), Provenance::lexical(relation, p.head_word()));
  return out;
}

inline std::string describe_smoothing(const Candidate& c) {
  std::ostringstream os;
  switch (c.provenance.kind) {
    case Provenance::Kind::direct: break;
    case Provenance::Kind::knn: os << "smoothed, knn d=" << c.provenance.distance; break;
    case Provenance::Kind::lexical:
      os << "smoothed, " << to_string(c.provenance.relation) << " of " << c.provenance.source_word;
      break;
  }
  return os.str();
}

inline std::string explain(const SmoothedQuery& q, const std::optional<Witness>& w) {
  if (!w) return "no entailment found for " + predicate_phrase(q.premise) + " => " + predicate_phrase(q.hypothesis) +
                  " (score 0)";
  std::ostringstream os;
  const auto& pw = w->premise;
  const auto& hw = w->hypothesis;
  if (pw.provenance.kind != Provenance::Kind::direct)
    os << predicate_phrase(q.premise) << " → " << predicate_phrase(pw.predicate) << " ("
       << describe_smoothing(pw) << "); ";
  os << predicate_phrase(pw.predicate) << " ⊨ " << predicate_phrase(hw.predicate) << " " << w->edge_score;
  if (hw.provenance.kind != Provenance::Kind::direct)
    os << "; " << predicate_phrase(hw.predicate) << " → " << predicate_phrase(q.hypothesis) << " ("
       << describe_smoothing(hw) << ")";
  return os.str();
}

}  // namespace detail

/// Premise candidates: the premise itself when it is in the graph and
/// trigger is on_miss, otherwise replacements expected to be more general
/// (nearest neighbours or hypernym substitutions) that exist in the graph.
inline std::vector<Candidate> smooth_premise(const Predicate& p, const SmoothingResources& res,
                                             const SmoothingConfig& config) {
  return detail::smooth(p, config.premise_mode, config.k_prem, res, config);
}

/// Hypothesis candidates, mirroring smooth_premise with the hypothesis mode and
/// K; lexical specialization uses hyponyms.
inline std::vector<Candidate> smooth_hypothesis(const Predicate& h, const SmoothingResources& res,
                                                const SmoothingConfig& config) {
  return detail::smooth(h, config.hypothesis_mode, config.k_hyp, res, config);
}

inline SmoothedQuery smooth_query(const Predicate& p, const Predicate& h, const SmoothingResources& res,
                                  const SmoothingConfig& config) {
  if (p.signature() != h.signature())
    throw SignatureMismatch("premise " + p.str() + " and hypothesis " + h.str() + " have different type signatures");
  return {p, h, smooth_premise(p, res, config), smooth_hypothesis(h, res, config)};
}

/// Scores p => h as the maximum edge weight over all (premise candidate,
/// hypothesis candidate) pairs; absent edges count as 0. The first maximal
/// pair in candidate order is the witness.
inline EntailmentVerdict score_query(const Predicate& p, const Predicate& h, const SmoothingResources& res,
                                     const SmoothingConfig& config) {
  EntailmentVerdict verdict;
  verdict.query = smooth_query(p, h, res, config);
  const auto& q = verdict.query;
  for (const auto& pc : q.premise_candidates) {
    for (const auto& hc : q.hypothesis_candidates) {
      const auto edge = res.graph->lookup_edge(pc.predicate, hc.predicate);
      if (!edge || *edge <= 0.0) continue;
      double score = *edge;
      if (config.distance_decay > 0.0) {
        if (pc.provenance.kind == Provenance::Kind::knn) score *= std::exp(-config.distance_decay * pc.provenance.distance);
        if (hc.provenance.kind == Provenance::Kind::knn) score *= std::exp(-config.distance_decay * hc.provenance.distance);
      }
      if (score > verdict.score) {
        verdict.score = score;
        verdict.witness = Witness{pc, hc, *edge};
      }
    }
  }
  verdict.explanation = detail::explain(q, verdict.witness);
  return verdict;
}

}  // namespace egsmooth
