#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "egsmooth/error.hpp"
#include "egsmooth/predicate.hpp"

namespace egsmooth {

/// Directed edge "source entails target" with confidence in [0, 1].
struct EntailmentEdge {
  Predicate target;
  double score = 0.0;
};

/// Vertices and weighted directed edges for one ordered type pair. Immutable
/// once built; see GraphBuilder.
class TypedSubgraph {
 public:
  explicit TypedSubgraph(TypeSignature signature) : signature_(std::move(signature)) {}

  const TypeSignature& signature() const noexcept { return signature_; }

  /// Vertices in lexicographic order of their relation strings.
  const std::vector<Predicate>& vertices() const noexcept { return vertices_; }
  std::size_t num_vertices() const noexcept { return vertices_.size(); }
  std::size_t num_edges() const noexcept {
    std::size_t n = 0;
    for (const auto& adj : out_) n += adj.size();
    return n;
  }

  bool contains(const Predicate& p) const { return ids_.contains(p.str()); }

  std::optional<double> edge(const Predicate& source, const Predicate& target) const {
    auto s = ids_.find(source.str());
    auto t = ids_.find(target.str());
    if (s == ids_.end() || t == ids_.end()) return std::nullopt;
    const auto& adj = out_[s->second];
    auto it = std::lower_bound(adj.begin(), adj.end(), t->second,
                               [](const auto& e, std::uint32_t id) { return e.first < id; });
    if (it == adj.end() || it->first != t->second) return std::nullopt;
    return it->second;
  }

  /// Out-edges of `source`, ordered by target relation string.
  std::vector<EntailmentEdge> out_edges(const Predicate& source) const {
    std::vector<EntailmentEdge> result;
    auto s = ids_.find(source.str());
    if (s == ids_.end()) return result;
    for (const auto& [id, score] : out_[s->second]) result.push_back({vertices_[id], score});
    return result;
  }

 private:
  friend class GraphBuilder;

  TypeSignature signature_;
  std::vector<Predicate> vertices_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  // Per-vertex adjacency sorted by target id; ids follow vertex order.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> out_;
};

/// A typed entailment graph: one subgraph per ordered type pair.
class EntailmentGraph {
 public:
  EntailmentGraph() = default;
  explicit EntailmentGraph(std::string name) : name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }
  const std::map<TypeSignature, TypedSubgraph>& subgraphs() const noexcept { return subgraphs_; }

  const TypedSubgraph* subgraph(const TypeSignature& sig) const {
    auto it = subgraphs_.find(sig);
    return it == subgraphs_.end() ? nullptr : &it->second;
  }

  bool contains_predicate(const Predicate& p) const {
    const auto* g = subgraph(p.signature());
    return g != nullptr && g->contains(p);
  }
  bool contains_predicate(std::string_view relation) const { return contains_predicate(Predicate::parse(relation)); }

  /// Weight of the directed edge premise => hypothesis. A stored predicate
  /// entails itself with weight 1.
  std::optional<double> lookup_edge(const Predicate& premise, const Predicate& hypothesis) const {
    if (premise.signature() != hypothesis.signature())
      throw SignatureMismatch("premise " + premise.str() + " and hypothesis " + hypothesis.str() +
                              " have different type signatures");
    const auto* g = subgraph(premise.signature());
    if (g == nullptr) return std::nullopt;
    if (premise == hypothesis) return g->contains(premise) ? std::optional<double>(1.0) : std::nullopt;
    return g->edge(premise, hypothesis);
  }

  std::size_t num_vertices() const {
    std::size_t n = 0;
    for (const auto& [_, g] : subgraphs_) n += g.num_vertices();
    return n;
  }
  std::size_t num_edges() const {
    std::size_t n = 0;
    for (const auto& [_, g] : subgraphs_) n += g.num_edges();
    return n;
  }

 private:
  friend class GraphBuilder;

  std::string name_;
  std::map<TypeSignature, TypedSubgraph> subgraphs_;
};

/// Accumulates vertices and edges, validating as it goes, and produces an
/// immutable EntailmentGraph.
class GraphBuilder {
 public:
  explicit GraphBuilder(std::string name = {}) : name_(std::move(name)) {}

  void add_vertex(const Predicate& p) { pending(p.signature()).vertices.emplace(p.str(), p); }

  void add_edge(const Predicate& source, const Predicate& target, double score) {
    if (source.signature() != target.signature())
      throw SignatureMismatch("edge " + source.str() + " => " + target.str() + " crosses type signatures");
    if (!std::isfinite(score) || score < 0.0 || score > 1.0)
      throw DataError("edge score " + std::to_string(score) + " outside [0,1] for " + source.str() + " => " +
                      target.str());
    auto& sub = pending(source.signature());
    sub.vertices.emplace(source.str(), source);
    sub.vertices.emplace(target.str(), target);
    if (!sub.edges.emplace(std::make_pair(source.str(), target.str()), score).second)
      throw DataError("duplicate edge " + source.str() + " => " + target.str());
  }

  EntailmentGraph build() && {
    EntailmentGraph graph(std::move(name_));
    for (auto& [sig, pend] : pending_) {
      TypedSubgraph sub(sig);
      sub.vertices_.reserve(pend.vertices.size());
      for (auto& [key, p] : pend.vertices) {
        sub.ids_.emplace(key, static_cast<std::uint32_t>(sub.vertices_.size()));
        sub.vertices_.push_back(std::move(p));
      }
      sub.out_.resize(sub.vertices_.size());
      // pend.edges is ordered by (source, target) string, matching vertex id order.
      for (const auto& [key, score] : pend.edges)
        sub.out_[sub.ids_.at(key.first)].emplace_back(sub.ids_.at(key.second), score);
      graph.subgraphs_.emplace(sig, std::move(sub));
    }
    pending_.clear();
    return graph;
  }

 private:
  struct Pending {
    std::map<std::string, Predicate> vertices;
    std::map<std::pair<std::string, std::string>, double> edges;
  };

  Pending& pending(const TypeSignature& sig) { return pending_[sig]; }

  std::string name_;
  std::map<TypeSignature, Pending> pending_;
};

/// Reads the JSON-lines graph format. Each non-blank line is
///   {"types": [left, right], "pred": string, "entails": [{"pred": string, "score": number}, ...]}
/// Errors carry the 1-based line number.
inline EntailmentGraph parse_graph(std::istream& in, std::string name = {}) {
  GraphBuilder builder(std::move(name));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      if (!rec.is_object()) throw ParseError("record is not a JSON object");
      const auto& types = rec.at("types");
      if (!types.is_array() || types.size() != 2 || !types[0].is_string() || !types[1].is_string())
        throw ParseError("\"types\" must be an array of two strings");
      const TypeSignature sig{TypeName(types[0].get<std::string>()), TypeName(types[1].get<std::string>())};
      const auto source = Predicate::parse(rec.at("pred").get<std::string>());
      if (source.signature() != sig)
        throw ParseError("predicate " + source.str() + " does not carry types " + sig.str());
      builder.add_vertex(source);
      const auto& entails = rec.at("entails");
      if (!entails.is_array()) throw ParseError("\"entails\" must be an array");
      for (const auto& e : entails) {
        const auto target = Predicate::parse(e.at("pred").get<std::string>());
        if (target.signature() != sig)
          throw ParseError("entailed predicate " + target.str() + " does not carry types " + sig.str());
        const auto& score = e.at("score");
        if (!score.is_number()) throw ParseError("\"score\" must be a number");
        builder.add_edge(source, target, score.get<double>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    } catch (const DataError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return std::move(builder).build();
}

inline EntailmentGraph load_graph(const std::string& path, std::string name = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file " + path);
  try {
    return parse_graph(in, std::move(name));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

/// Writes the canonical JSON-lines form: subgraphs by signature, vertices and
/// targets by relation string, object keys sorted.
inline void serialize_graph(const EntailmentGraph& graph, std::ostream& out) {
  for (const auto& [sig, sub] : graph.subgraphs()) {
    for (const auto& v : sub.vertices()) {
      nlohmann::json rec;
      rec["types"] = {sig.left.str(), sig.right.str()};
      rec["pred"] = v.str();
      rec["entails"] = nlohmann::json::array();
      for (const auto& e : sub.out_edges(v)) rec["entails"].push_back({{"pred", e.target.str()}, {"score", e.score}});
      out << rec.dump() << '\n';
    }
  }
}

inline std::string serialize_graph(const EntailmentGraph& graph) {
  std::ostringstream out;
  serialize_graph(graph, out);
  return out.str();
}

}  // namespace egsmooth
