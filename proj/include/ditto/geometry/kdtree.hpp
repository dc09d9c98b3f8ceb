// Copyright 2026 The Ditto Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "ditto/geometry/types.hpp"

namespace ditto::geometry {

struct Neighbor {
  int index = -1;
  double dist2 = 0.0;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  }
};

/// Static 3-d tree over a borrowed point array. Queries are exact and ties
/// are broken by point index, so results are deterministic.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points) : points_(points) {
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!order_.empty()) nodes_.reserve(2 * points.size() / kLeafSize + 2);
    if (!order_.empty()) build(0, static_cast<int>(order_.size()));
  }

  std::size_t size() const { return points_.size(); }

  /// The k nearest points to `q`, ascending by distance. `exclude` drops one index (self queries).
  std::vector<Neighbor> knn(const Vec3& q, int k, int exclude = -1) const {
    std::vector<Neighbor> heap;
    if (k <= 0 || nodes_.empty()) return heap;
    heap.reserve(k + 1);
    search(0, q, k, exclude, heap);
    std::sort_heap(heap.begin(), heap.end());
    return heap;
  }

  Neighbor nearest(const Vec3& q) const {
    auto r = knn(q, 1);
    return r.empty() ? Neighbor{} : r.front();
  }

 private:
  static constexpr int kLeafSize = 8;

  struct Node {
    int begin = 0;
    int end = 0;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    int left = -1;
    int right = -1;
  };

  int build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;
    Vec3 lo = points_[order_[begin]], hi = lo;
    for (int i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]]);
      hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
      const double pa = points_[a][axis], pb = points_[b][axis];
      return pa < pb || (pa == pb && a < b);
    });
    const double split = points_[order_[mid]][axis];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void offer(std::vector<Neighbor>& heap, int k, Neighbor n) const {
    if (static_cast<int>(heap.size()) < k) {
      heap.push_back(n);
      std::push_heap(heap.begin(), heap.end());
    } else if (n < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = n;
      std::push_heap(heap.begin(), heap.end());
    }
  }

  void search(int id, const Vec3& q, int k, int exclude, std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        if (idx == exclude) continue;
        offer(heap, k, {idx, (points_[idx] - q).squaredNorm()});
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    search(near, q, k, exclude, heap);
    // Equal distances must still be visited so index tie-breaking stays exact.
    if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().dist2) search(far, q, k, exclude, heap);
  }

  std::span<const Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace ditto::geometry
