#pragma once

// Graph-cuts label refinement over a K=4 nearest-neighbor graph, with
// boundary-probability and normal-angle pairwise terms, plus BFS watershed
// segmentation and IoU scoring.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "boundaryforge/cloud.hpp"

namespace bforge {

// cost of cutting an edge whose endpoints carry boundary probabilities b_i, b_j
inline double pairwise_boundary(double b_i, double b_j, double lambda) {
  if (b_i < 0 || b_i > 1 || b_j < 0 || b_j > 1)
    throw std::invalid_argument("pairwise_boundary: probabilities outside [0,1]");
  if (lambda < 0) throw std::invalid_argument("pairwise_boundary: lambda < 0");
  return -lambda * std::log(std::min(std::max(b_i, b_j) + 1e-3, 1.0));
}

// cost of cutting an edge whose normals subtend omega degrees; free at >= 90
inline double pairwise_normal(double omega_deg, double lambda) {
  if (omega_deg < 0 || omega_deg > 180)
    throw std::invalid_argument("pairwise_normal: angle outside [0,180]");
  if (lambda < 0) throw std::invalid_argument("pairwise_normal: lambda < 0");
  return -lambda * std::log(std::min(std::max(omega_deg / 90.0, 1e-3), 1.0));
}

inline double normal_angle_deg(const Vec3 &a, const Vec3 &b) {
  double c = dot(normalized(a), normalized(b));
  return rad2deg(std::acos(std::clamp(c, -1.0, 1.0)));
}

// unique undirected edges of the symmetrized K-NN graph
inline std::vector<std::pair<int, int>> knn_edges(const PointCloud &cloud, int k = 4) {
  NeighborGraph g = knn(cloud, k);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.k; ++j) {
      int a = i, b = g.at(i, j);
      if (a > b) std::swap(a, b);
      edges.push_back({a, b});
    }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

struct MrfProblem {
  int n = 0;
  int labels = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> unary;      // n x labels, clamped -log P, finite and >= 0
  std::vector<double> edge_cost;  // Potts cost per edge for unequal labels

  double unary_at(int i, int l) const { return unary[static_cast<size_t>(i) * labels + l]; }

  void validate() const {
    if (n < 1 || labels < 1) throw std::invalid_argument("MrfProblem: empty problem");
    if (unary.size() != static_cast<size_t>(n) * labels)
      throw std::invalid_argument("MrfProblem: unary size mismatch");
    if (edge_cost.size() != edges.size())
      throw std::invalid_argument("MrfProblem: edge cost size mismatch");
    for (double u : unary)
      if (!std::isfinite(u) || u < 0) throw std::logic_error("MrfProblem: bad unary term");
    for (double w : edge_cost)
      if (!std::isfinite(w) || w < 0) throw std::logic_error("MrfProblem: negative edge cost");
    for (const auto &[a, b] : edges)
      if (a < 0 || b < 0 || a >= n || b >= n || a == b)
        throw std::invalid_argument("MrfProblem: bad edge");
  }
};

enum class PairwiseMode { Boundary, Normal, Both };

// Assemble Eq.-style unary (-log P, clamped) plus the selected pairwise terms
// over the symmetrized K=4 graph.
inline MrfProblem make_mrf(const PointCloud &cloud, const std::vector<std::vector<double>> &probs,
                           const std::vector<double> &boundary_prob, PairwiseMode mode,
                           double lambda, double lambda_normal, int k = 4) {
  int n = cloud.size();
  if (static_cast<int>(probs.size()) != n) throw std::invalid_argument("make_mrf: probs size");
  MrfProblem mrf;
  mrf.n = n;
  mrf.labels = static_cast<int>(probs.front().size());
  for (const auto &row : probs) {
    if (static_cast<int>(row.size()) != mrf.labels)
      throw std::invalid_argument("make_mrf: ragged probability rows");
    for (double p : row) mrf.unary.push_back(-std::log(std::clamp(p, 1e-12, 1.0)));
  }
  mrf.edges = knn_edges(cloud, k);
  bool use_b = mode == PairwiseMode::Boundary || mode == PairwiseMode::Both;
  bool use_n = mode == PairwiseMode::Normal || mode == PairwiseMode::Both;
  if (use_b && static_cast<int>(boundary_prob.size()) != n)
    throw std::invalid_argument("make_mrf: boundary probability size");
  for (const auto &[a, b] : mrf.edges) {
    double w = 0;
    if (use_b) w += pairwise_boundary(boundary_prob[a], boundary_prob[b], lambda);
    if (use_n) w += pairwise_normal(normal_angle_deg(cloud.normals[a], cloud.normals[b]),
                                    lambda_normal);
    mrf.edge_cost.push_back(w);
  }
  mrf.validate();
  return mrf;
}

inline double mrf_energy(const MrfProblem &p, const std::vector<int> &labels) {
  double e = 0;
  for (int i = 0; i < p.n; ++i) e += p.unary_at(i, labels[i]);
  for (size_t k = 0; k < p.edges.size(); ++k)
    if (labels[p.edges[k].first] != labels[p.edges[k].second]) e += p.edge_cost[k];
  return e;
}

namespace detail {

// Dinic max-flow; deterministic augmenting order.
class MaxFlow {
 public:
  explicit MaxFlow(int nodes) : head_(nodes, -1), level_(nodes), it_(nodes) {}

  void add_edge(int u, int v, double cap_uv, double cap_vu) {
    push(u, v, cap_uv);
    push(v, u, cap_vu);
  }

  double solve(int s, int t) {
    double flow = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), -1);
      for (int u = 0; u < static_cast<int>(head_.size()); ++u) it_[u] = head_[u];
      double f;
      while ((f = dfs(s, t, std::numeric_limits<double>::infinity())) > 1e-12) flow += f;
    }
    return flow;
  }

  // after solve: true if `u` is on the source side of the min cut
  bool source_side(int u) const { return level_[u] >= 0; }

 private:
  struct Edge {
    int to, next;
    double cap;
  };

  void push(int u, int v, double cap) {
    edges_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(edges_.size()) - 1;
  }

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int e = head_[u]; e != -1; e = edges_[e].next)
        if (edges_[e].cap > 1e-12 && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push(edges_[e].to);
        }
    }
    return level_[t] >= 0;
  }

  double dfs(int u, int t, double pushed) {
    if (u == t) return pushed;
    for (int &e = it_[u]; e != -1; e = edges_[e].next) {
      Edge &ed = edges_[e];
      if (ed.cap > 1e-12 && level_[ed.to] == level_[u] + 1) {
        double f = dfs(ed.to, t, std::min(pushed, ed.cap));
        if (f > 1e-12) {
          ed.cap -= f;
          edges_[e ^ 1].cap += f;
          return f;
        }
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> it_;
};

// exact binary cut: label 0 on the source side
inline std::vector<int> binary_cut(const MrfProblem &p) {
  MaxFlow mf(p.n + 2);
  int s = p.n, t = p.n + 1;
  for (int i = 0; i < p.n; ++i) {
    // i -> t cut when i is on the source side (label 0): pays unary(i, 0)
    mf.add_edge(s, i, p.unary_at(i, 1), 0);
    mf.add_edge(i, t, p.unary_at(i, 0), 0);
  }
  for (size_t e = 0; e < p.edges.size(); ++e)
    mf.add_edge(p.edges[e].first, p.edges[e].second, p.edge_cost[e], p.edge_cost[e]);
  mf.solve(s, t);
  std::vector<int> out(p.n);
  for (int i = 0; i < p.n; ++i) out[i] = mf.source_side(i) ? 0 : 1;
  return out;
}

// one alpha-expansion move; returns the exact best labeling within the move space
inline std::vector<int> expand(const MrfProblem &p, const std::vector<int> &cur, int alpha) {
  // binary var x_i: 0 = keep cur[i], 1 = switch to alpha; aux node per edge
  // with unequal current labels (Potts construction)
  int aux = p.n;
  std::vector<int> aux_of(p.edges.size(), -1);
  for (size_t e = 0; e < p.edges.size(); ++e)
    if (cur[p.edges[e].first] != cur[p.edges[e].second] && p.edge_cost[e] > 0)
      aux_of[e] = aux++;
  MaxFlow mf(aux + 2);
  int s = aux, t = aux + 1;
  // source side = x=0 (keep); i->t cut pays E(x=0), s->i cut pays E(x=1)
  for (int i = 0; i < p.n; ++i)
    mf.add_edge(s, i, p.unary_at(i, alpha), 0), mf.add_edge(i, t, p.unary_at(i, cur[i]), 0);
  for (size_t e = 0; e < p.edges.size(); ++e) {
    auto [i, j] = p.edges[e];
    double w = p.edge_cost[e];
    if (w <= 0) continue;
    if (cur[i] == cur[j]) {
      if (cur[i] != alpha) mf.add_edge(i, j, w, w);
    } else {
      int a = aux_of[e];
      if (cur[i] == alpha) {
        // (x_i=0) already alpha: differ cost applies iff x_j=0
        mf.add_edge(j, t, w, 0);
      } else if (cur[j] == alpha) {
        mf.add_edge(i, t, w, 0);
      } else {
        mf.add_edge(i, a, w, w);
        mf.add_edge(j, a, w, w);
        mf.add_edge(a, t, w, 0);
      }
    }
  }
  mf.solve(s, t);
  std::vector<int> out(p.n);
  for (int i = 0; i < p.n; ++i) out[i] = mf.source_side(i) ? cur[i] : alpha;
  return out;
}

}  // namespace detail

struct SolveResult {
  std::vector<int> labels;
  double energy = 0;
};

inline std::vector<int> unary_argmin(const MrfProblem &p) {
  std::vector<int> out(p.n, 0);
  for (int i = 0; i < p.n; ++i)
    for (int l = 1; l < p.labels; ++l)
      if (p.unary_at(i, l) < p.unary_at(i, out[i])) out[i] = l;
  return out;
}

// Minimize the unary + Potts energy: exact min-cut for 2 labels,
// alpha-expansion cycles for 3 or more. Never increases the energy of the
// initialization.
inline SolveResult solve_mrf(const MrfProblem &p, std::vector<int> init = {}) {
  p.validate();
  if (init.empty()) init = unary_argmin(p);
  if (static_cast<int>(init.size()) != p.n) throw std::invalid_argument("solve_mrf: bad init");
  for (int l : init)
    if (l < 0 || l >= p.labels) throw std::invalid_argument("solve_mrf: init label out of range");
  double init_energy = mrf_energy(p, init);

  SolveResult res;
  if (p.labels == 1) {
    res.labels.assign(p.n, 0);
  } else if (p.labels == 2) {
    res.labels = detail::binary_cut(p);
    if (mrf_energy(p, res.labels) > init_energy) res.labels = init;  // fp safety net
  } else {
    res.labels = init;
    double best = init_energy;
    bool improved = true;
    while (improved) {
      improved = false;
      for (int alpha = 0; alpha < p.labels; ++alpha) {
        std::vector<int> cand = detail::expand(p, res.labels, alpha);
        double e = mrf_energy(p, cand);
        if (e < best - 1e-12) {
          best = e;
          res.labels = std::move(cand);
          improved = true;
        }
      }
    }
  }
  res.energy = mrf_energy(p, res.labels);
  if (res.energy > init_energy + 1e-9)
    throw std::logic_error("solve_mrf: energy increased over initialization");
  return res;
}

// ---------------------------------------------------------------------------
// IoU scoring

struct IouResult {
  double shape_iou = 0;               // mean IoU over labels present in the shape
  std::vector<double> per_label;      // IoU per label, -1 when absent from both
};

inline IouResult labeling_iou(const std::vector<int> &pred, const std::vector<int> &gt, int L) {
  if (pred.size() != gt.size() || pred.empty())
    throw std::invalid_argument("labeling_iou: size mismatch");
  IouResult res;
  res.per_label.assign(L, -1.0);
  double sum = 0;
  int present = 0;
  for (int l = 0; l < L; ++l) {
    int inter = 0, uni = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] < 0 || pred[i] >= L || gt[i] < 0 || gt[i] >= L)
        throw std::invalid_argument("labeling_iou: label out of range");
      bool a = pred[i] == l, b = gt[i] == l;
      inter += a && b;
      uni += a || b;
    }
    if (uni == 0) continue;
    res.per_label[l] = static_cast<double>(inter) / uni;
    sum += res.per_label[l];
    ++present;
  }
  res.shape_iou = present > 0 ? sum / present : 0.0;
  return res;
}

struct DatasetIou {
  double shape_iou = 0;  // per-shape shape IoU, averaged over shapes
  double part_iou = 0;   // per-label IoU averaged over shapes where present, then labels
};

inline DatasetIou dataset_iou(const std::vector<std::vector<int>> &pred,
                              const std::vector<std::vector<int>> &gt, int L) {
  if (pred.size() != gt.size() || pred.empty())
    throw std::invalid_argument("dataset_iou: size mismatch");
  DatasetIou out;
  std::vector<double> label_sum(L, 0);
  std::vector<int> label_cnt(L, 0);
  for (size_t s = 0; s < pred.size(); ++s) {
    IouResult r = labeling_iou(pred[s], gt[s], L);
    out.shape_iou += r.shape_iou;
    for (int l = 0; l < L; ++l)
      if (r.per_label[l] >= 0) {
        label_sum[l] += r.per_label[l];
        ++label_cnt[l];
      }
  }
  out.shape_iou /= pred.size();
  double sum = 0;
  int present = 0;
  for (int l = 0; l < L; ++l)
    if (label_cnt[l] > 0) {
      sum += label_sum[l] / label_cnt[l];
      ++present;
    }
  out.part_iou = present > 0 ? sum / present : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// lambda grid search

inline const std::vector<double> &lambda_grid() {
  static const std::vector<double> grid = {0, 0.01, 0.03, 0.1, 0.3, 1, 3, 10};
  return grid;
}

struct ValidationShape {
  PointCloud cloud;
  std::vector<std::vector<double>> probs;  // unary model output, N x L
  std::vector<double> boundary_prob;       // boundary model output
  std::vector<int> gt_labels;
};

// Grid search maximizing mean shape IoU on the validation set; ties resolve
// to the smallest grid values. Returns (lambda, lambda') with the unused
// component zero outside Both mode.
inline std::pair<double, double> tune_lambda(const std::vector<ValidationShape> &shapes,
                                             PairwiseMode mode, int k = 4) {
  if (shapes.empty()) throw std::invalid_argument("tune_lambda: empty validation set");
  auto score = [&](double lb, double ln) {
    double total = 0;
    for (const auto &s : shapes) {
      MrfProblem mrf = make_mrf(s.cloud, s.probs, s.boundary_prob, mode, lb, ln, k);
      SolveResult res = solve_mrf(mrf);
      total += labeling_iou(res.labels, s.gt_labels, mrf.labels).shape_iou;
    }
    return total / shapes.size();
  };
  double best = -1, best_lb = 0, best_ln = 0;
  const auto &grid = lambda_grid();
  std::vector<double> grid_b = mode == PairwiseMode::Normal ? std::vector<double>{0} : grid;
  std::vector<double> grid_n = mode == PairwiseMode::Boundary ? std::vector<double>{0} : grid;
  for (double ln : grid_n)
    for (double lb : grid_b) {
      double v = score(lb, ln);
      if (v > best + 1e-12) {
        best = v;
        best_lb = lb;
        best_ln = ln;
      }
    }
  return {best_lb, best_ln};
}

// ---------------------------------------------------------------------------
// watershed flood fill

// BFS over the symmetrized K-NN graph restricted to non-boundary points;
// seeds in ascending index order, boundary points get id -1.
inline std::vector<int> flood_fill_segments(const PointCloud &cloud,
                                            const std::vector<uint8_t> &boundary, int k = 4) {
  int n = cloud.size();
  if (static_cast<int>(boundary.size()) != n)
    throw std::invalid_argument("flood_fill_segments: flag size mismatch");
  std::vector<std::vector<int>> adj(n);
  for (const auto &[a, b] : knn_edges(cloud, k)) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> seg(n, -1);
  int next = 0;
  for (int seed = 0; seed < n; ++seed) {
    if (boundary[seed] || seg[seed] >= 0) continue;
    std::queue<int> q;
    seg[seed] = next;
    q.push(seed);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (!boundary[v] && seg[v] < 0) {
          seg[v] = next;
          q.push(v);
        }
    }
    ++next;
  }
  if (next == 0) std::cerr << "flood_fill_segments: all points are boundary, zero segments\n";
  return seg;
}

}  // namespace bforge
