#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "egsmooth/error.hpp"

namespace egsmooth {

/// Euclidean distance with 64-bit accumulation. Every KNN path in the library
/// goes through this function so that equal inputs give bit-equal distances.
template <typename A, typename B>
inline double l2_distance(std::span<const A> a, std::span<const B> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Strict weak order used for KNN results: by distance, then by point index.
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) noexcept {
  return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

/// Exhaustive KNN over a row-major matrix. Same ordering contract as
/// BallTree::query.
template <typename Scalar>
std::vector<Neighbor> brute_force_knn(std::span<const Scalar> data, std::size_t dim, std::span<const Scalar> x,
                                      std::size_t k) {
  if (x.size() != dim)
    throw DimensionMismatch("query dim " + std::to_string(x.size()) + " != index dim " + std::to_string(dim));
  const std::size_t n = dim == 0 ? 0 : data.size() / dim;
  std::vector<Neighbor> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = {i, l2_distance(data.subspan(i * dim, dim), x)};
  const std::size_t m = std::min(k, n);
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m), all.end(), neighbor_less);
  all.resize(m);
  return all;
}

/// Exact K-nearest-neighbour search under L2 using a ball tree.
///
/// Each node covers a contiguous range of the permutation `order()` and stores
/// the centroid and covering radius of its points. Queries prune a node only
/// when the triangle-inequality lower bound strictly exceeds the current K-th
/// distance, so the result is identical to brute_force_knn, including
/// tie-breaking by point index.
template <typename Scalar = float>
class BallTree {
 public:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;  // -1 for leaves
    std::int32_t right = -1;
    double radius = 0.0;
  };

  BallTree() = default;

  BallTree(std::vector<Scalar> data, std::size_t dim, std::size_t leaf_size = 40)
      : data_(std::move(data)), dim_(dim), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    if (dim_ == 0) throw DimensionMismatch("ball tree dimension must be positive");
    if (data_.size() % dim_ != 0) throw DimensionMismatch("data size is not a multiple of dim");
    order_.resize(size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (size() > 0) build(0, static_cast<std::uint32_t>(size()));
  }

  /// Restores a tree from its persisted parts. The structure is validated,
  /// including that every radius covers its points, so a corrupted bundle
  /// cannot silently produce inexact answers.
  static BallTree from_parts(std::vector<Scalar> data, std::size_t dim, std::size_t leaf_size,
                             std::vector<std::uint32_t> order, std::vector<Node> nodes, std::vector<double> centers) {
    BallTree t;
    t.data_ = std::move(data);
    t.dim_ = dim;
    t.leaf_size_ = leaf_size;
    t.order_ = std::move(order);
    t.nodes_ = std::move(nodes);
    t.centers_ = std::move(centers);
    t.validate();
    return t;
  }

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t leaf_size() const noexcept { return leaf_size_; }
  std::span<const Scalar> point(std::size_t i) const { return std::span<const Scalar>(data_).subspan(i * dim_, dim_); }
  std::span<const Scalar> data() const noexcept { return data_; }
  const std::vector<std::uint32_t>& order() const noexcept { return order_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& centers() const noexcept { return centers_; }

  /// The min(k, size()) nearest points, ascending by (distance, index).
  std::vector<Neighbor> query(std::span<const Scalar> x, std::size_t k) const {
    if (x.size() != dim_)
      throw DimensionMismatch("query dim " + std::to_string(x.size()) + " != index dim " + std::to_string(dim_));
    std::vector<Neighbor> heap;
    if (k == 0 || nodes_.empty()) return heap;
    heap.reserve(k + 1);
    search(0, x, k, heap, center_distance(0, x));
    std::sort_heap(heap.begin(), heap.end(), neighbor_less);
    return heap;
  }

 private:
  std::span<const double> center(std::size_t node) const {
    return std::span<const double>(centers_).subspan(node * dim_, dim_);
  }

  double center_distance(std::size_t node, std::span<const Scalar> x) const { return l2_distance(center(node), x); }

  std::int32_t build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({begin, end, -1, -1, 0.0});
    centers_.resize(centers_.size() + dim_, 0.0);

    auto c = std::span<double>(centers_).subspan(static_cast<std::size_t>(id) * dim_, dim_);
    for (auto i = begin; i < end; ++i) {
      const auto p = point(order_[i]);
      for (std::size_t d = 0; d < dim_; ++d) c[d] += static_cast<double>(p[d]);
    }
    for (auto& v : c) v /= static_cast<double>(end - begin);
    double radius = 0.0;
    for (auto i = begin; i < end; ++i) radius = std::max(radius, l2_distance(point(order_[i]), std::span<const double>(c)));
    nodes_[id].radius = radius;

    if (end - begin <= leaf_size_) return id;

    // Split along the dimension of greatest spread at the median.
    std::size_t split_dim = 0;
    Scalar best_spread = -1;
    for (std::size_t d = 0; d < dim_; ++d) {
      Scalar lo = point(order_[begin])[d], hi = lo;
      for (auto i = begin + 1; i < end; ++i) {
        const Scalar v = point(order_[i])[d];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        split_dim = d;
      }
    }
    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       const Scalar va = point(a)[split_dim], vb = point(b)[split_dim];
                       return va < vb || (va == vb && a < b);
                     });
    const auto left = build(begin, mid);
    const auto right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  // Slack on the pruning bound absorbs rounding in centroid distances; it only
  // ever makes the search visit more nodes.
  static bool prunable(double lower_bound, double worst) noexcept {
    return lower_bound > worst + 1e-10 * (1.0 + worst + std::abs(lower_bound));
  }

  void search(std::size_t node_id, std::span<const Scalar> x, std::size_t k, std::vector<Neighbor>& heap,
              double dist_to_center) const {
    const Node& node = nodes_[node_id];
    if (heap.size() == k && prunable(dist_to_center - node.radius, heap.front().distance)) return;

    if (node.left < 0) {
      for (auto i = node.begin; i < node.end; ++i) {
        const Neighbor cand{order_[i], l2_distance(point(order_[i]), x)};
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end(), neighbor_less);
        } else if (neighbor_less(cand, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), neighbor_less);
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end(), neighbor_less);
        }
      }
      return;
    }

    const auto l = static_cast<std::size_t>(node.left), r = static_cast<std::size_t>(node.right);
    const double dl = center_distance(l, x), dr = center_distance(r, x);
    if (dl <= dr) {
      search(l, x, k, heap, dl);
      search(r, x, k, heap, dr);
    } else {
      search(r, x, k, heap, dr);
      search(l, x, k, heap, dl);
    }
  }

  void validate() const {
    if (dim_ == 0) throw ParseError("ball tree: dimension must be positive");
    if (data_.size() % dim_ != 0) throw ParseError("ball tree: data size is not a multiple of dim");
    const std::size_t n = size();
    if (order_.size() != n) throw ParseError("ball tree: permutation size mismatch");
    std::vector<bool> seen(n, false);
    for (auto i : order_) {
      if (i >= n || seen[i]) throw ParseError("ball tree: order is not a permutation");
      seen[i] = true;
    }
    if (n == 0) {
      if (!nodes_.empty()) throw ParseError("ball tree: nodes present for empty data");
      return;
    }
    if (nodes_.empty() || centers_.size() != nodes_.size() * dim_) throw ParseError("ball tree: node table mismatch");
    if (nodes_[0].begin != 0 || nodes_[0].end != n) throw ParseError("ball tree: root does not cover all points");
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
      const Node& nd = nodes_[id];
      if (nd.begin >= nd.end || nd.end > n) throw ParseError("ball tree: bad node range");
      if ((nd.left < 0) != (nd.right < 0)) throw ParseError("ball tree: node with a single child");
      if (nd.left >= 0) {
        const auto l = static_cast<std::size_t>(nd.left), r = static_cast<std::size_t>(nd.right);
        if (l <= id || r <= id || l >= nodes_.size() || r >= nodes_.size()) throw ParseError("ball tree: bad child id");
        if (nodes_[l].begin != nd.begin || nodes_[l].end != nodes_[r].begin || nodes_[r].end != nd.end)
          throw ParseError("ball tree: children do not partition the parent range");
      }
      for (auto i = nd.begin; i < nd.end; ++i)
        if (l2_distance(point(order_[i]), center(id)) > nd.radius)
          throw ParseError("ball tree: node radius does not cover its points");
    }
  }

  std::vector<Scalar> data_;
  std::size_t dim_ = 0;
  std::size_t leaf_size_ = 40;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::vector<double> centers_;  // node-major, dim_ per node
};

}  // namespace egsmooth
