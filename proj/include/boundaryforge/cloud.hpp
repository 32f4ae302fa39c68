#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "boundaryforge/geom.hpp"
#include "boundaryforge/kdtree.hpp"

namespace bforge {

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  bool normalized = false;  // centered at origin, inside the unit sphere

  int size() const { return static_cast<int>(positions.size()); }

  void validate() const {
    if (positions.empty()) throw std::invalid_argument("PointCloud: empty");
    if (positions.size() != normals.size())
      throw std::invalid_argument("PointCloud: positions/normals size mismatch");
    for (const auto &p : positions)
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
        throw std::invalid_argument("PointCloud: nonfinite position");
    for (const auto &n : normals)
      if (std::abs(norm(n) - 1.0) > 1e-6)
        throw std::invalid_argument("PointCloud: normal not unit length");
  }

  std::vector<double> flat_positions() const {
    std::vector<double> out(positions.size() * 3);
    for (size_t i = 0; i < positions.size(); ++i) {
      out[3 * i] = positions[i].x;
      out[3 * i + 1] = positions[i].y;
      out[3 * i + 2] = positions[i].z;
    }
    return out;
  }
};

enum class NeighborMetric { Euclidean, Feature };

struct NeighborGraph {
  int k = 0;
  int n = 0;
  std::vector<int> indices;  // n x k, nondecreasing distance, ties to smaller index
  NeighborMetric metric = NeighborMetric::Euclidean;

  int at(int i, int j) const { return indices[static_cast<size_t>(i) * k + j]; }
};

// Exact k-nearest-neighbor graph in a D-dimensional feature space.
inline NeighborGraph knn_feature(const std::vector<double> &features, int n, int dim, int k) {
  if (n < 1 || dim < 1) throw std::invalid_argument("knn_feature: bad matrix shape");
  if (k < 1 || k >= n) throw std::invalid_argument("knn_feature: require 1 <= k < N");
  KdTree tree(features, dim);  // throws on nonfinite entries
  NeighborGraph g;
  g.k = k;
  g.n = n;
  g.metric = NeighborMetric::Feature;
  g.indices.resize(static_cast<size_t>(n) * k);
  for (int i = 0; i < n; ++i) {
    auto hits = tree.knn(&features[static_cast<size_t>(i) * dim], k, i);
    for (int j = 0; j < k; ++j) g.indices[static_cast<size_t>(i) * k + j] = hits[j].index;
  }
  return g;
}

// Exact Euclidean k-NN graph over cloud positions.
inline NeighborGraph knn(const PointCloud &cloud, int k) {
  if (k < 1 || k >= cloud.size()) throw std::invalid_argument("knn: require 1 <= k < N");
  NeighborGraph g = knn_feature(cloud.flat_positions(), cloud.size(), 3, k);
  g.metric = NeighborMetric::Euclidean;
  return g;
}

// epsilon = max over points of the distance to that point's nearest neighbor.
inline double compute_epsilon(const std::vector<Vec3> &points) {
  if (points.size() < 2) throw std::invalid_argument("compute_epsilon: need at least 2 points");
  std::vector<double> flat(points.size() * 3);
  for (size_t i = 0; i < points.size(); ++i) {
    flat[3 * i] = points[i].x;
    flat[3 * i + 1] = points[i].y;
    flat[3 * i + 2] = points[i].z;
  }
  KdTree tree(flat, 3);
  double eps2 = 0;
  for (size_t i = 0; i < points.size(); ++i)
    eps2 = std::max(eps2, tree.nearest_dist2(&flat[3 * i], static_cast<int>(i)));
  return std::sqrt(eps2);
}

inline double compute_epsilon(const PointCloud &cloud) { return compute_epsilon(cloud.positions); }

// Per-point rotation matrices with columns [u, v, n].
struct LocalFrames {
  std::vector<Mat3> rotation;
};

// Build one frame from a unit normal and a random draw. The tangent u comes
// from Gram-Schmidt of a random direction against n; v = n x u gives a
// right-handed [u v n].
inline Mat3 make_frame(const Vec3 &n, const Vec3 &draw) {
  if (norm(n) < 1e-12) throw std::invalid_argument("make_frame: zero-length normal");
  Vec3 u = normalized(draw - dot(draw, n) * n);
  Vec3 v = cross(n, u);
  return Mat3::from_columns(u, v, n);
}

inline Mat3 make_frame(const Vec3 &n, Rng &rng) {
  if (norm(n) < 1e-12) throw std::invalid_argument("make_frame: zero-length normal");
  for (;;) {
    Vec3 r = random_unit_vector(rng);
    if (std::abs(dot(r, n)) > 0.99) continue;
    return make_frame(n, r);
  }
}

inline Mat3 frame_from_tangents(const Vec3 &u, const Vec3 &v, const Vec3 &n) {
  return Mat3::from_columns(u, v, n);
}

inline LocalFrames build_local_frames(const PointCloud &cloud, uint64_t tangent_seed) {
  LocalFrames frames;
  frames.rotation.reserve(cloud.size());
  Rng rng(tangent_seed);
  for (const auto &n : cloud.normals) frames.rotation.push_back(make_frame(n, rng));
  return frames;
}

// ---------------------------------------------------------------------------
// Principal curvature directions from a local quadric fit.

struct PrincipalDirections {
  std::vector<Vec3> dir1;   // larger |curvature|
  std::vector<Vec3> dir2;
  std::vector<double> k1, k2;
  std::vector<uint8_t> degenerate;  // 1 = fell back to seeded random tangents
};

namespace detail {

// Jacobi eigen-decomposition of a symmetric 3x3 matrix. Returns eigenvalues
// ascending and corresponding eigenvectors as columns of V.
inline void eig_sym3(const Mat3 &a_in, Vec3 &evals, Mat3 &evecs) {
  Mat3 a = a_in;
  Mat3 v = Mat3::identity();
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(a(0, 1)) + std::abs(a(0, 2)) + std::abs(a(1, 2));
    if (off < 1e-15) break;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a(p, q)) < 1e-18) continue;
        double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
        Mat3 rot = Mat3::identity();
        rot(p, p) = c; rot(q, q) = c; rot(p, q) = s; rot(q, p) = -s;
        a = rot.transposed() * a * rot;
        v = v * rot;
      }
  }
  // sort ascending
  int order[3] = {0, 1, 2};
  double d[3] = {a(0, 0), a(1, 1), a(2, 2)};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (d[order[j]] < d[order[i]]) std::swap(order[i], order[j]);
  evals = {d[order[0]], d[order[1]], d[order[2]]};
  evecs = Mat3::from_columns(v.col(order[0]), v.col(order[1]), v.col(order[2]));
}

// Solve a small dense symmetric system by Gaussian elimination with partial
// pivoting. Returns false when rank-deficient.
inline bool solve_dense(std::vector<double> &a, std::vector<double> &b, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-12) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      double f = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
  return true;
}

}  // namespace detail

// Least-squares quadric height field over the PCA tangent plane of each
// k-neighborhood; principal directions ordered by |curvature|, defined up to
// sign. Degenerate fits (rank deficiency or vanishing curvature) fall back to
// seeded random tangents and are flagged.
inline PrincipalDirections estimate_principal_directions(const PointCloud &cloud, int k,
                                                         uint64_t fallback_seed = 1234) {
  if (k < 6) throw std::invalid_argument("estimate_principal_directions: need k >= 6");
  if (k >= cloud.size()) throw std::invalid_argument("estimate_principal_directions: k >= N");
  NeighborGraph g = knn(cloud, k);
  PrincipalDirections out;
  int n = cloud.size();
  out.dir1.resize(n);
  out.dir2.resize(n);
  out.k1.assign(n, 0);
  out.k2.assign(n, 0);
  out.degenerate.assign(n, 0);
  Rng fallback_rng(fallback_seed);

  for (int i = 0; i < n; ++i) {
    const Vec3 pi = cloud.positions[i];
    const Vec3 ni = cloud.normals[i];
    std::vector<Vec3> nb;
    nb.reserve(k + 1);
    nb.push_back(Vec3{0, 0, 0});
    for (int j = 0; j < k; ++j) nb.push_back(cloud.positions[g.at(i, j)] - pi);

    // PCA tangent plane
    Vec3 mean{0, 0, 0};
    for (const auto &q : nb) mean += q;
    mean = mean / static_cast<double>(nb.size());
    Mat3 cov{};
    for (const auto &q : nb) {
      Vec3 d = q - mean;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) cov(r, c) += d[r] * d[c];
    }
    Vec3 evals;
    Mat3 evecs;
    detail::eig_sym3(cov, evals, evecs);
    Vec3 e3 = evecs.col(0);  // smallest variance ~ surface normal
    if (dot(e3, ni) < 0) e3 = -e3;
    Vec3 e1 = evecs.col(2);
    Vec3 e2 = cross(e3, e1);

    // fit h = a x^2 + b xy + c y^2 + d x + e y + f
    std::vector<double> ata(36, 0.0), atb(6, 0.0);
    for (const auto &q : nb) {
      double x = dot(q, e1), y = dot(q, e2), h = dot(q, e3);
      double row[6] = {x * x, x * y, y * y, x, y, 1.0};
      for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) ata[r * 6 + c] += row[r] * row[c];
        atb[r] += row[r] * h;
      }
    }
    bool ok = detail::solve_dense(ata, atb, 6);
    double ka = 0, kb = 0;
    Vec3 d1, d2;
    if (ok) {
      double a = atb[0], b = atb[1], c = atb[2], dd = atb[3], ee = atb[4];
      double w = std::sqrt(1 + dd * dd + ee * ee);
      double E = 1 + dd * dd, F = dd * ee, G = 1 + ee * ee;
      double L = 2 * a / w, M = b / w, N = 2 * c / w;
      double det1 = E * G - F * F;
      // shape operator S = I^{-1} II
      double s00 = (G * L - F * M) / det1, s01 = (G * M - F * N) / det1;
      double s10 = (E * M - F * L) / det1, s11 = (E * N - F * M) / det1;
      double tr = s00 + s11, dt = s00 * s11 - s01 * s10;
      double disc = tr * tr / 4 - dt;
      if (disc < 0) disc = 0;
      double r = std::sqrt(disc);
      ka = tr / 2 + r;
      kb = tr / 2 - r;
      auto eigvec2 = [&](double lam) {
        double vx = s01, vy = lam - s00;
        if (std::abs(vx) + std::abs(vy) < 1e-12) { vx = lam - s11; vy = s10; }
        if (std::abs(vx) + std::abs(vy) < 1e-12) { vx = 1; vy = 0; }
        return std::array<double, 2>{vx, vy};
      };
      if (std::abs(ka) < std::abs(kb)) std::swap(ka, kb);
      auto v1 = eigvec2(ka);
      Vec3 tx = e1 + dd * e3, ty = e2 + ee * e3;
      Vec3 raw1 = v1[0] * tx + v1[1] * ty;
      // project to the tangent plane of the point normal, orthonormalize
      Vec3 p1 = raw1 - dot(raw1, ni) * ni;
      if (norm(p1) < 1e-9 || std::max(std::abs(ka), std::abs(kb)) < 1e-4) {
        ok = false;
      } else {
        d1 = normalized(p1);
        d2 = cross(ni, d1);
      }
    }
    if (!ok) {
      Mat3 f = make_frame(ni, fallback_rng);
      d1 = f.col(0);
      d2 = f.col(1);
      ka = kb = 0;
      out.degenerate[i] = 1;
    }
    out.dir1[i] = d1;
    out.dir2[i] = d2;
    out.k1[i] = ka;
    out.k2[i] = kb;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Noise augmentation.

// Gaussian position jitter plus normal rotation about a random axis by an
// angle from a normal distribution truncated to [-limit, +limit] degrees.
inline PointCloud perturb(const PointCloud &cloud, double sigma, double angle_limit_deg,
                          uint64_t seed) {
  if (sigma < 0 || angle_limit_deg < 0) throw std::invalid_argument("perturb: negative magnitude");
  PointCloud out = cloud;
  Rng rng(seed);
  for (int i = 0; i < cloud.size(); ++i) {
    if (sigma > 0) {
      out.positions[i].x += normal(rng, 0, sigma);
      out.positions[i].y += normal(rng, 0, sigma);
      out.positions[i].z += normal(rng, 0, sigma);
    }
    if (angle_limit_deg > 0) {
      Vec3 axis = random_unit_vector(rng);
      double angle;
      do {
        angle = normal(rng, 0, angle_limit_deg);
      } while (std::abs(angle) > angle_limit_deg);
      out.normals[i] = normalized(axis_angle(axis, deg2rad(angle)) * out.normals[i]);
    }
  }
  out.normalized = false;
  return out;
}

// Center at the centroid and scale into the unit sphere; returns {center, scale}
// so that auxiliary geometry (e.g. curve samples) can follow the same map.
struct NormalizeTransform {
  Vec3 center{0, 0, 0};
  double scale = 1.0;
  Vec3 apply(const Vec3 &p) const { return (p - center) * scale; }
};

inline NormalizeTransform normalize_to_unit_sphere(PointCloud &cloud) {
  Vec3 c{0, 0, 0};
  for (const auto &p : cloud.positions) c += p;
  c = c / static_cast<double>(cloud.size());
  double max_r = 0;
  for (const auto &p : cloud.positions) max_r = std::max(max_r, norm(p - c));
  NormalizeTransform t;
  t.center = c;
  t.scale = max_r > 0 ? 1.0 / max_r : 1.0;
  for (auto &p : cloud.positions) p = t.apply(p);
  cloud.normalized = true;
  return t;
}

}  // namespace bforge
