#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "egsmooth/ball_tree.hpp"
#include "egsmooth/embedding.hpp"
#include "egsmooth/error.hpp"
#include "egsmooth/graph.hpp"
#include "egsmooth/predicate.hpp"

namespace egsmooth {

struct PredicateDistance {
  Predicate predicate;
  double distance = 0.0;

  friend bool operator==(const PredicateDistance&, const PredicateDistance&) = default;
};

/// Exact KNN index over the embedded vertices of one typed subgraph.
/// The vocabulary is sorted by relation string; tree point i is vocabulary[i],
/// so index order doubles as the lexicographic tie-break.
class SubgraphEmbeddingIndex {
 public:
  SubgraphEmbeddingIndex(TypeSignature signature, std::vector<Predicate> vocabulary, BallTree<float> tree)
      : signature_(std::move(signature)), vocabulary_(std::move(vocabulary)), tree_(std::move(tree)) {
    if (vocabulary_.size() != tree_.size()) throw DataError("index vocabulary and tree sizes differ");
    if (!std::is_sorted(vocabulary_.begin(), vocabulary_.end()) ||
        std::adjacent_find(vocabulary_.begin(), vocabulary_.end()) != vocabulary_.end())
      throw DataError("index vocabulary must be strictly sorted");
  }

  const TypeSignature& signature() const noexcept { return signature_; }
  const std::vector<Predicate>& vocabulary() const noexcept { return vocabulary_; }
  const BallTree<float>& tree() const noexcept { return tree_; }
  std::size_t size() const noexcept { return vocabulary_.size(); }
  std::size_t dim() const noexcept { return tree_.dim(); }

 private:
  TypeSignature signature_;
  std::vector<Predicate> vocabulary_;
  BallTree<float> tree_;
};

struct IndexBuild {
  SubgraphEmbeddingIndex index;
  /// Subgraph vertices with no vector in the store; excluded from the index.
  std::vector<Predicate> missing;
};

inline IndexBuild build_index(const TypedSubgraph& subgraph, const EmbeddingStore& store, std::size_t leaf_size = 40) {
  std::vector<Predicate> vocab;
  std::vector<Predicate> missing;
  std::vector<float> data;
  for (const auto& v : subgraph.vertices()) {  // already sorted
    if (auto row = store.find(v)) {
      vocab.push_back(v);
      data.insert(data.end(), row->begin(), row->end());
    } else {
      missing.push_back(v);
    }
  }
  if (vocab.empty())
    throw DataError("no embedded vertices for subgraph " + subgraph.signature().str() + " (" +
                    std::to_string(subgraph.num_vertices()) + " vertices, none in the embedding store)");
  BallTree<float> tree(std::move(data), store.dim(), leaf_size);
  return {SubgraphEmbeddingIndex(subgraph.signature(), std::move(vocab), std::move(tree)), std::move(missing)};
}

/// The min(k, |vocabulary|) nearest vocabulary predicates to `x`, ascending by
/// L2 distance, ties broken by relation string.
inline std::vector<PredicateDistance> knn_query(const SubgraphEmbeddingIndex& index, std::span<const float> x,
                                                std::size_t k) {
  if (k == 0) throw std::invalid_argument("knn_query: K must be at least 1");
  std::vector<PredicateDistance> out;
  for (const auto& n : index.tree().query(x, k)) out.push_back({index.vocabulary()[n.index], n.distance});
  return out;
}

/// Exhaustive-scan reference with the same contract as knn_query. Candidates
/// are the given predicates that have a vector in `store`.
inline std::vector<PredicateDistance> brute_force_knn(std::span<const Predicate> candidates,
                                                      const EmbeddingStore& store, std::span<const float> x,
                                                      std::size_t k) {
  if (!candidates.empty() && x.size() != store.dim())
    throw DimensionMismatch("query dim " + std::to_string(x.size()) + " != store dim " + std::to_string(store.dim()));
  std::vector<PredicateDistance> all;
  for (const auto& p : candidates)
    if (auto row = store.find(p)) all.push_back({p, l2_distance(*row, x)});
  std::sort(all.begin(), all.end(), [](const PredicateDistance& a, const PredicateDistance& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.predicate.str() < b.predicate.str());
  });
  all.resize(std::min(all.size(), k));
  return all;
}

/// One index per typed subgraph.
class IndexSet {
 public:
  void add(SubgraphEmbeddingIndex index) {
    auto sig = index.signature();
    if (!indexes_.emplace(sig, std::move(index)).second) throw DataError("duplicate index for " + sig.str());
  }
  const SubgraphEmbeddingIndex* find(const TypeSignature& sig) const {
    auto it = indexes_.find(sig);
    return it == indexes_.end() ? nullptr : &it->second;
  }
  const std::map<TypeSignature, SubgraphEmbeddingIndex>& all() const noexcept { return indexes_; }
  std::size_t size() const noexcept { return indexes_.size(); }
  bool empty() const noexcept { return indexes_.empty(); }

 private:
  std::map<TypeSignature, SubgraphEmbeddingIndex> indexes_;
};

struct IndexSetReport {
  std::map<TypeSignature, std::vector<Predicate>> missing;  // per indexed subgraph
  std::vector<TypeSignature> skipped;                        // no embedded vertex at all
  std::size_t missing_total() const {
    std::size_t n = 0;
    for (const auto& [_, v] : missing) n += v.size();
    return n;
  }
};

/// Builds an index for every subgraph with at least one embedded vertex.
/// Subgraphs without any are reported in `report.skipped`, not fatal.
inline IndexSet build_indexes(const EntailmentGraph& graph, const EmbeddingStore& store, std::size_t leaf_size = 40,
                              IndexSetReport* report = nullptr) {
  IndexSet set;
  for (const auto& [sig, sub] : graph.subgraphs()) {
    const bool any = std::any_of(sub.vertices().begin(), sub.vertices().end(),
                                 [&](const Predicate& p) { return store.contains(p); });
    if (!any) {
      if (report) report->skipped.push_back(sig);
      continue;
    }
    auto built = build_index(sub, store, leaf_size);
    if (report && !built.missing.empty()) report->missing[sig] = built.missing;
    set.add(std::move(built.index));
  }
  return set;
}

namespace egix {

inline constexpr std::array<char, 4> kMagic = {'E', 'G', 'I', 'X'};
inline constexpr std::uint32_t kVersion = 1;

inline void put_string(std::ostream& out, const std::string& s) {
  if (s.size() > 0xFFFF) throw DataError("string too long for index bundle");
  egem::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  const auto len = egem::get_le<std::uint16_t>(in, "string length");
  std::string s(len, '\0');
  if (!in.read(s.data(), len)) throw ParseError("truncated index bundle while reading a string");
  return s;
}

inline void put_f64(std::ostream& out, double v) { egem::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(egem::get_le<std::uint64_t>(in, "f64")); }

}  // namespace egix

/// Persists indexes including their tree structure (little-endian):
///   "EGIX" | u32 version=1 | u64 n_indexes | per index:
///     str signature "l#r" | u32 dim | u32 leaf_size | u64 n | n x str predicate |
///     n*dim x f32 vectors | u64 n_nodes | per node (u32 begin, u32 end,
///     i32 left, i32 right, f64 radius, dim x f64 center) | n x u32 order
/// where str is a u16 byte length followed by UTF-8 bytes.
inline void write_index_bundle(const IndexSet& set, std::ostream& out) {
  out.write(egix::kMagic.data(), egix::kMagic.size());
  egem::put_le<std::uint32_t>(out, egix::kVersion);
  egem::put_le<std::uint64_t>(out, set.size());
  for (const auto& [sig, idx] : set.all()) {
    const auto& tree = idx.tree();
    egix::put_string(out, sig.str());
    egem::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tree.dim()));
    egem::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tree.leaf_size()));
    egem::put_le<std::uint64_t>(out, idx.size());
    for (const auto& p : idx.vocabulary()) egix::put_string(out, p.str());
    for (float v : tree.data()) egem::put_f32(out, v);
    egem::put_le<std::uint64_t>(out, tree.nodes().size());
    for (std::size_t n = 0; n < tree.nodes().size(); ++n) {
      const auto& nd = tree.nodes()[n];
      egem::put_le<std::uint32_t>(out, nd.begin);
      egem::put_le<std::uint32_t>(out, nd.end);
      egem::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(nd.left));
      egem::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(nd.right));
      egix::put_f64(out, nd.radius);
      for (std::size_t d = 0; d < tree.dim(); ++d) egix::put_f64(out, tree.centers()[n * tree.dim() + d]);
    }
    for (auto o : tree.order()) egem::put_le<std::uint32_t>(out, o);
  }
  if (!out) throw IoError("failed writing index bundle");
}

inline IndexSet read_index_bundle(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != egix::kMagic) throw ParseError("not an EGIX index bundle");
  const auto version = egem::get_le<std::uint32_t>(in, "version");
  if (version != egix::kVersion) throw ParseError("unsupported EGIX version " + std::to_string(version));
  const auto count = egem::get_le<std::uint64_t>(in, "index count");
  IndexSet set;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto sig = TypeSignature::parse(egix::get_string(in));
    const auto dim = egem::get_le<std::uint32_t>(in, "dim");
    const auto leaf = egem::get_le<std::uint32_t>(in, "leaf size");
    const auto n = egem::get_le<std::uint64_t>(in, "vocabulary size");
    std::vector<Predicate> vocab;
    vocab.reserve(n);
    for (std::uint64_t j = 0; j < n; ++j) {
      vocab.push_back(Predicate::parse(egix::get_string(in)));
      if (vocab.back().signature() != sig)
        throw ParseError("index " + sig.str() + " holds predicate of another signature: " + vocab.back().str());
    }
    std::vector<float> data(n * dim);
    for (auto& v : data) v = egem::get_f32(in);
    const auto n_nodes = egem::get_le<std::uint64_t>(in, "node count");
    std::vector<BallTree<float>::Node> nodes(n_nodes);
    std::vector<double> centers(n_nodes * dim);
    for (std::uint64_t k = 0; k < n_nodes; ++k) {
      auto& nd = nodes[k];
      nd.begin = egem::get_le<std::uint32_t>(in, "node");
      nd.end = egem::get_le<std::uint32_t>(in, "node");
      nd.left = static_cast<std::int32_t>(egem::get_le<std::uint32_t>(in, "node"));
      nd.right = static_cast<std::int32_t>(egem::get_le<std::uint32_t>(in, "node"));
      nd.radius = egix::get_f64(in);
      for (std::uint32_t d = 0; d < dim; ++d) centers[k * dim + d] = egix::get_f64(in);
    }
    std::vector<std::uint32_t> order(n);
    for (auto& o : order) o = egem::get_le<std::uint32_t>(in, "order");
    auto tree = BallTree<float>::from_parts(std::move(data), dim, leaf, std::move(order), std::move(nodes),
                                            std::move(centers));
    set.add(SubgraphEmbeddingIndex(sig, std::move(vocab), std::move(tree)));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes in index bundle");
  return set;
}

inline void save_index_bundle(const IndexSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_index_bundle(set, out);
}

inline IndexSet load_index_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index bundle " + path);
  try {
    return read_index_bundle(in);
  } catch (const DataError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace egsmooth
