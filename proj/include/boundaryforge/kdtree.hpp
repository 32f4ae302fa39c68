#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace bforge {

// Exact k-d tree over N points in D dimensions. Balanced (median split on
// the widest axis), exact queries, deterministic tie-breaking: at equal
// distance the smaller point index wins.
class KdTree {
 public:
  KdTree() = default;

  // data is row-major N x D.
  KdTree(const std::vector<double> &data, int dim) : data_(data), dim_(dim) {
    if (dim_ < 1) throw std::invalid_argument("KdTree: dim must be >= 1");
    if (data_.size() % dim_ != 0) throw std::invalid_argument("KdTree: data size not divisible by dim");
    n_ = static_cast<int>(data_.size()) / dim_;
    for (double v : data_)
      if (!std::isfinite(v)) throw std::invalid_argument("KdTree: nonfinite coordinate");
    perm_.resize(n_);
    std::iota(perm_.begin(), perm_.end(), 0);
    nodes_.reserve(2 * n_ + 1);
    if (n_ > 0) root_ = build(0, n_);
  }

  int size() const { return n_; }
  int dim() const { return dim_; }

  struct Hit {
    double d2;
    int index;
  };

  // k nearest neighbors of an arbitrary query point; skip_index (if >= 0)
  // is excluded (used for self-exclusion). Result sorted by (distance, index).
  std::vector<Hit> knn(const double *query, int k, int skip_index = -1) const {
    if (k < 1) throw std::invalid_argument("KdTree::knn: k must be >= 1");
    int avail = n_ - (skip_index >= 0 ? 1 : 0);
    if (k > avail) throw std::invalid_argument("KdTree::knn: k exceeds point count");
    std::vector<Hit> heap;  // max-heap on (d2, index)
    heap.reserve(k + 1);
    search(root_, query, k, skip_index, heap);
    std::sort(heap.begin(), heap.end(), [](const Hit &a, const Hit &b) {
      return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
    });
    return heap;
  }

  // All points within radius (inclusive) of the query; sorted by (distance, index).
  std::vector<Hit> radius(const double *query, double r) const {
    std::vector<Hit> out;
    radius_search(root_, query, r * r, out);
    std::sort(out.begin(), out.end(), [](const Hit &a, const Hit &b) {
      return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
    });
    return out;
  }

  bool any_within(const double *query, double r) const {
    return any_within_search(root_, query, r * r);
  }

  double nearest_dist2(const double *query, int skip_index = -1) const {
    auto h = knn(query, 1, skip_index);
    return h[0].d2;
  }

 private:
  struct Node {
    int axis = -1;        // -1 for leaf
    double split = 0;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range in perm_
  };

  static constexpr int kLeafSize = 16;

  const double *pt(int i) const { return &data_[static_cast<size_t>(i) * dim_]; }

  int build(int begin, int end) {
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    if (end - begin <= kLeafSize) {
      nodes_[id].begin = begin;
      nodes_[id].end = end;
      return id;
    }
    // widest axis
    int axis = 0;
    double best_extent = -1;
    for (int d = 0; d < dim_; ++d) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int i = begin; i < end; ++i) {
        double v = pt(perm_[i])[d];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_extent) {
        best_extent = hi - lo;
        axis = d;
      }
    }
    int mid = (begin + end) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                     [&](int a, int b) {
                       double va = pt(a)[axis], vb = pt(b)[axis];
                       return va < vb || (va == vb && a < b);
                     });
    Node node;
    node.axis = axis;
    node.split = pt(perm_[mid])[axis];
    nodes_[id] = node;
    int l = build(begin, mid);
    int r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  double dist2(const double *a, const double *b) const {
    double s = 0;
    for (int d = 0; d < dim_; ++d) {
      double diff = a[d] - b[d];
      s += diff * diff;
    }
    return s;
  }

  static bool worse(const Hit &a, const Hit &b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
  }

  void consider(std::vector<Hit> &heap, int k, Hit h) const {
    if (static_cast<int>(heap.size()) < k) {
      heap.push_back(h);
      std::push_heap(heap.begin(), heap.end(), worse);
    } else if (worse(h, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), worse);
      heap.back() = h;
      std::push_heap(heap.begin(), heap.end(), worse);
    }
  }

  void search(int id, const double *q, int k, int skip, std::vector<Hit> &heap) const {
    const Node &node = nodes_[id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        int p = perm_[i];
        if (p == skip) continue;
        consider(heap, k, {dist2(q, pt(p)), p});
      }
      return;
    }
    double diff = q[node.axis] - node.split;
    int near = diff < 0 ? node.left : node.right;
    int far = diff < 0 ? node.right : node.left;
    search(near, q, k, skip, heap);
    double d2 = diff * diff;
    if (static_cast<int>(heap.size()) < k || d2 <= heap.front().d2) search(far, q, k, skip, heap);
  }

  void radius_search(int id, const double *q, double r2, std::vector<Hit> &out) const {
    if (id < 0) return;
    const Node &node = nodes_[id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        int p = perm_[i];
        double d2 = dist2(q, pt(p));
        if (d2 <= r2) out.push_back({d2, p});
      }
      return;
    }
    double diff = q[node.axis] - node.split;
    int near = diff < 0 ? node.left : node.right;
    int far = diff < 0 ? node.right : node.left;
    radius_search(near, q, r2, out);
    if (diff * diff <= r2) radius_search(far, q, r2, out);
  }

  bool any_within_search(int id, const double *q, double r2) const {
    if (id < 0) return false;
    const Node &node = nodes_[id];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i)
        if (dist2(q, pt(perm_[i])) <= r2) return true;
      return false;
    }
    double diff = q[node.axis] - node.split;
    int near = diff < 0 ? node.left : node.right;
    int far = diff < 0 ? node.right : node.left;
    if (any_within_search(near, q, r2)) return true;
    if (diff * diff <= r2) return any_within_search(far, q, r2);
    return false;
  }

  std::vector<double> data_;
  std::vector<int> perm_;
  std::vector<Node> nodes_;
  int dim_ = 0;
  int n_ = 0;
  int root_ = -1;
};

}  // namespace bforge
