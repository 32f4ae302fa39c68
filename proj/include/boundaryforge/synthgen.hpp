#pragma once

// Synthetic labeled point-cloud generation from analytic primitive assemblies
// and labeled triangle meshes. All generators are pure functions of their
// inputs and seed.

#include <cstdint>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "boundaryforge/cloud.hpp"
#include "boundaryforge/io.hpp"
#include "boundaryforge/kdtree.hpp"

namespace bforge {

enum class PrimitiveKind { Plane, Sphere, Cylinder, Cone, Torus };

inline const char *to_string(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::Plane: return "plane";
    case PrimitiveKind::Sphere: return "sphere";
    case PrimitiveKind::Cylinder: return "cylinder";
    case PrimitiveKind::Cone: return "cone";
    case PrimitiveKind::Torus: return "torus";
  }
  return "?";
}

struct SurfaceSample {
  Vec3 p;
  Vec3 n;
};

// A trimmed analytic surface patch. `at` maps the unit square to the untrimmed
// patch with uniform area density; `keep` trims by 3D position (empty = keep
// all); `dist` is the unsigned distance to the untrimmed carrier surface.
struct Primitive {
  PrimitiveKind kind;
  int part_id = 0;
  double area = 0;  // untrimmed patch area
  std::function<SurfaceSample(double, double)> at;
  std::function<bool(const Vec3 &)> keep;
  std::function<double(const Vec3 &)> dist;
};

// Parametric boundary curve over t in [0,1] between two incident primitives,
// with the surface normal of each side along the curve.
struct BoundaryCurve {
  int prim_a = 0;
  int prim_b = 0;
  std::function<Vec3(double)> point;
  std::function<Vec3(double)> normal_a;
  std::function<Vec3(double)> normal_b;
};

struct PrimitiveScene {
  std::vector<Primitive> primitives;
  std::vector<BoundaryCurve> curves;

  void validate() const {
    if (primitives.empty()) throw std::invalid_argument("scene: no primitives");
    for (const auto &pr : primitives) {
      if (!(pr.area > 0)) throw std::invalid_argument("scene: degenerate primitive (area <= 0)");
      if (!pr.at || !pr.dist) throw std::invalid_argument("scene: primitive missing callbacks");
    }
    for (const auto &c : curves) {
      if (c.prim_a < 0 || c.prim_a >= static_cast<int>(primitives.size()) || c.prim_b < 0 ||
          c.prim_b >= static_cast<int>(primitives.size()) || c.prim_a == c.prim_b)
        throw std::invalid_argument("scene: curve with bad incident primitives");
      for (int s = 0; s <= 16; ++s) {
        Vec3 p = c.point(s / 16.0);
        if (primitives[c.prim_a].dist(p) > 1e-6 || primitives[c.prim_b].dist(p) > 1e-6)
          throw std::invalid_argument("scene: curve leaves its incident surfaces");
      }
    }
  }
};

struct LabeledCloud {
  PointCloud cloud;
  std::vector<int> labels;        // per-point part id
  std::vector<uint8_t> boundary;  // t-hat flags
  double epsilon = 0;
};

// ---------------------------------------------------------------------------
// primitive constructors

namespace detail {

// deterministic tangent frame about an axis
inline void axis_frame(const Vec3 &axis, Vec3 &e1, Vec3 &e2) {
  Vec3 a = normalized(axis);
  Vec3 pick = std::abs(a[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  e1 = normalized(pick - dot(pick, a) * a);
  e2 = cross(a, e1);
}

}  // namespace detail

inline Primitive make_plane_rect(const Vec3 &origin, const Vec3 &eu, const Vec3 &ev, double su,
                                 double sv, int part) {
  if (!(su > 0) || !(sv > 0)) throw std::invalid_argument("make_plane_rect: degenerate extent");
  Vec3 u = normalized(eu), v = normalized(ev);
  if (std::abs(dot(u, v)) > 1e-9) throw std::invalid_argument("make_plane_rect: axes not orthogonal");
  Vec3 n = cross(u, v);
  Primitive p;
  p.kind = PrimitiveKind::Plane;
  p.part_id = part;
  p.area = su * sv;
  p.at = [=](double a, double b) { return SurfaceSample{origin + a * su * u + b * sv * v, n}; };
  p.dist = [=](const Vec3 &q) { return std::abs(dot(q - origin, n)); };
  return p;
}

inline Primitive make_disk(const Vec3 &center, const Vec3 &axis, double r0, double r1, int part) {
  if (!(r1 > r0) || r0 < 0) throw std::invalid_argument("make_disk: bad radii");
  Vec3 n = normalized(axis), e1, e2;
  detail::axis_frame(n, e1, e2);
  Primitive p;
  p.kind = PrimitiveKind::Plane;
  p.part_id = part;
  p.area = M_PI * (r1 * r1 - r0 * r0);
  p.at = [=](double a, double b) {
    double rho = std::sqrt(r0 * r0 + a * (r1 * r1 - r0 * r0));
    double phi = 2 * M_PI * b;
    return SurfaceSample{center + rho * (std::cos(phi) * e1 + std::sin(phi) * e2), n};
  };
  p.dist = [=](const Vec3 &q) { return std::abs(dot(q - center, n)); };
  return p;
}

// band t = dot(p - c, axis)/R restricted to [t0, t1] within [-1, 1]
inline Primitive make_sphere_band(const Vec3 &center, double radius, double t0, double t1,
                                  int part) {
  if (!(radius > 0) || !(t1 > t0) || t0 < -1 || t1 > 1)
    throw std::invalid_argument("make_sphere_band: bad parameters");
  Vec3 n{0, 0, 1}, e1, e2;
  detail::axis_frame(n, e1, e2);
  Primitive p;
  p.kind = PrimitiveKind::Sphere;
  p.part_id = part;
  p.area = 2 * M_PI * radius * radius * (t1 - t0);
  p.at = [=](double a, double b) {
    double t = t0 + a * (t1 - t0);
    double rho = radius * std::sqrt(std::max(0.0, 1 - t * t));
    double phi = 2 * M_PI * b;
    Vec3 dir = rho / radius * (std::cos(phi) * e1 + std::sin(phi) * e2) + t * n;
    return SurfaceSample{center + radius * dir, dir};
  };
  p.dist = [=](const Vec3 &q) { return std::abs(norm(q - center) - radius); };
  return p;
}

inline Primitive make_cylinder(const Vec3 &center, const Vec3 &axis, double radius, double h0,
                               double h1, int part) {
  if (!(radius > 0) || !(h1 > h0)) throw std::invalid_argument("make_cylinder: bad parameters");
  Vec3 a = normalized(axis), e1, e2;
  detail::axis_frame(a, e1, e2);
  Primitive p;
  p.kind = PrimitiveKind::Cylinder;
  p.part_id = part;
  p.area = 2 * M_PI * radius * (h1 - h0);
  p.at = [=](double u, double v) {
    double phi = 2 * M_PI * u;
    Vec3 dir = std::cos(phi) * e1 + std::sin(phi) * e2;
    return SurfaceSample{center + radius * dir + (h0 + v * (h1 - h0)) * a, dir};
  };
  p.dist = [=](const Vec3 &q) {
    Vec3 d = q - center;
    Vec3 radial = d - dot(d, a) * a;
    return std::abs(norm(radial) - radius);
  };
  return p;
}

// frustum of a cone: apex, axis toward the opening, half-angle, slant range
inline Primitive make_cone(const Vec3 &apex, const Vec3 &axis, double half_angle, double s0,
                           double s1, int part) {
  if (!(half_angle > 0) || half_angle >= M_PI / 2 || !(s1 > s0) || s0 < 0)
    throw std::invalid_argument("make_cone: bad parameters");
  Vec3 a = normalized(axis), e1, e2;
  detail::axis_frame(a, e1, e2);
  double ca = std::cos(half_angle), sa = std::sin(half_angle);
  Primitive p;
  p.kind = PrimitiveKind::Cone;
  p.part_id = part;
  p.area = M_PI * sa * (s1 * s1 - s0 * s0);
  p.at = [=](double u, double v) {
    double s = std::sqrt(s0 * s0 + u * (s1 * s1 - s0 * s0));
    double phi = 2 * M_PI * v;
    Vec3 dir = std::cos(phi) * e1 + std::sin(phi) * e2;
    return SurfaceSample{apex + s * (ca * a + sa * dir), ca * dir - sa * a};
  };
  p.dist = [=](const Vec3 &q) {
    Vec3 d = q - apex;
    double h = dot(d, a);
    double rho = norm(d - h * a);
    return std::abs(rho * ca - h * sa);
  };
  return p;
}

// ring torus patch: tube angle theta in [theta0, theta1], full sweep in phi;
// theta = 0 is the outer equator, z = r sin(theta) along the axis
inline Primitive make_torus(const Vec3 &center, double R, double r, double theta0, double theta1,
                            int part) {
  if (!(R > r) || !(r > 0) || !(theta1 > theta0))
    throw std::invalid_argument("make_torus: bad parameters");
  Vec3 a{0, 0, 1}, e1, e2;
  detail::axis_frame(a, e1, e2);
  Primitive p;
  p.kind = PrimitiveKind::Torus;
  p.part_id = part;
  p.area = r * (R * (theta1 - theta0) + r * (std::sin(theta1) - std::sin(theta0))) * 2 * M_PI;
  // area density over theta is proportional to R + r*cos(theta): invert the
  // cumulative integral by bisection
  p.at = [=](double u, double v) {
    double f1 = R * (theta1 - theta0) + r * (std::sin(theta1) - std::sin(theta0));
    double target = u * f1;
    double lo = theta0, hi = theta1;
    for (int it = 0; it < 48; ++it) {
      double mid = 0.5 * (lo + hi);
      double f = R * (mid - theta0) + r * (std::sin(mid) - std::sin(theta0));
      (f < target ? lo : hi) = mid;
    }
    double th = 0.5 * (lo + hi), phi = 2 * M_PI * v;
    Vec3 dir = std::cos(phi) * e1 + std::sin(phi) * e2;
    Vec3 n = std::cos(th) * dir + std::sin(th) * a;
    return SurfaceSample{center + R * dir + r * n, n};
  };
  p.dist = [=](const Vec3 &q) {
    Vec3 d = q - center;
    double z = dot(d, a);
    double rho = norm(d - z * a);
    return std::abs(std::hypot(rho - R, z) - r);
  };
  return p;
}

// ---------------------------------------------------------------------------
// Poisson-disk dart throwing over an arbitrary surface sampler

namespace detail {

// spatial hash grid with cell size r/sqrt(3): any two points in one cell
// conflict, and a conflict query only needs the +-2 cell neighborhood
class DartGrid {
 public:
  DartGrid(double r) : r2_(r * r), cell_(r / std::sqrt(3.0)) {}

  bool conflicts(const Vec3 &p, const std::vector<Vec3> &pts) const {
    int64_t cx = key_coord(p[0]), cy = key_coord(p[1]), cz = key_coord(p[2]);
    for (int64_t dx = -2; dx <= 2; ++dx)
      for (int64_t dy = -2; dy <= 2; ++dy)
        for (int64_t dz = -2; dz <= 2; ++dz) {
          auto it = cells_.find(pack(cx + dx, cy + dy, cz + dz));
          if (it == cells_.end()) continue;
          for (int idx : it->second) {
            Vec3 d = pts[idx] - p;
            if (dot(d, d) < r2_) return true;
          }
        }
    return false;
  }

  void insert(const Vec3 &p, int idx) {
    cells_[pack(key_coord(p[0]), key_coord(p[1]), key_coord(p[2]))].push_back(idx);
  }

 private:
  int64_t key_coord(double x) const { return static_cast<int64_t>(std::floor(x / cell_)); }
  static uint64_t pack(int64_t x, int64_t y, int64_t z) {
    auto h = [](int64_t v) { return static_cast<uint64_t>(v) * 0x9e3779b97f4a7c15ull; };
    return h(x) ^ (h(y) << 21 | h(y) >> 43) ^ (h(z) << 42 | h(z) >> 22);
  }
  double r2_;
  double cell_;
  std::unordered_map<uint64_t, std::vector<int>> cells_;
};

struct DartResult {
  std::vector<Vec3> pos;
  std::vector<Vec3> nrm;
  std::vector<int> tag;  // primitive / triangle index per sample
  double r = 0;          // final minimum-distance radius
};

// `draw` produces one uniform candidate over the (trimmed) surface, returning
// false for candidates rejected by a trim. `area` is the effective surface
// area used to auto-tune the initial radius. The radius shrinks geometrically
// until ~n_target samples fit; the min-distance guarantee holds for the final
// radius.
inline DartResult dart_throw(const std::function<bool(Rng &, Vec3 &, Vec3 &, int &)> &draw,
                             double area, int n_target, Rng &rng) {
  if (n_target < 16) throw std::invalid_argument("dart_throw: n_target < 16");
  if (!(area > 0)) throw std::invalid_argument("dart_throw: nonpositive area");
  DartResult out;
  out.r = 0.7 * std::sqrt(area / n_target);
  while (true) {
    DartGrid grid(out.r);
    for (size_t i = 0; i < out.pos.size(); ++i) grid.insert(out.pos[i], static_cast<int>(i));
    int64_t fails = 0;
    const int64_t fail_limit = 30ll * n_target;
    while (static_cast<int>(out.pos.size()) < n_target && fails < fail_limit) {
      Vec3 p, n;
      int tag = -1;
      if (!draw(rng, p, n, tag) || grid.conflicts(p, out.pos)) {
        ++fails;
        continue;
      }
      grid.insert(p, static_cast<int>(out.pos.size()));
      out.pos.push_back(p);
      out.nrm.push_back(n);
      out.tag.push_back(tag);
      fails = 0;
    }
    if (static_cast<int>(out.pos.size()) >= n_target || out.r < 1e-7) break;
    out.r *= 0.85;
  }
  if (static_cast<int>(out.pos.size()) < (n_target + 1) / 2)
    throw std::runtime_error("dart_throw: achieved " + std::to_string(out.pos.size()) +
                             " of " + std::to_string(n_target) + " samples");
  if (static_cast<int>(out.pos.size()) < n_target)
    std::cerr << "dart_throw: achieved " << out.pos.size() << " of " << n_target << " samples\n";
  return out;
}

inline DartResult dart_throw_scene(const PrimitiveScene &scene, int n_target, Rng &rng) {
  scene.validate();
  // cumulative untrimmed areas for primitive selection
  std::vector<double> cum;
  double total = 0;
  for (const auto &p : scene.primitives) cum.push_back(total += p.area);
  // effective area (after trims) for radius tuning, by Monte Carlo
  int kept = 0;
  const int trials = 2048;
  for (int t = 0; t < trials; ++t) {
    double pick = uniform01(rng) * total;
    size_t i = std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
    if (i >= scene.primitives.size()) i = scene.primitives.size() - 1;
    const auto &pr = scene.primitives[i];
    SurfaceSample s = pr.at(uniform01(rng), uniform01(rng));
    if (!pr.keep || pr.keep(s.p)) ++kept;
  }
  double area = total * std::max(kept, 1) / trials;
  auto draw = [&](Rng &r, Vec3 &p, Vec3 &n, int &tag) {
    double pick = uniform01(r) * total;
    size_t i = std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
    if (i >= scene.primitives.size()) i = scene.primitives.size() - 1;
    const auto &pr = scene.primitives[i];
    SurfaceSample s = pr.at(uniform01(r), uniform01(r));
    if (pr.keep && !pr.keep(s.p)) return false;
    p = s.p;
    n = s.n;
    tag = static_cast<int>(i);
    return true;
  };
  return dart_throw(draw, area, n_target, rng);
}

}  // namespace detail

// scene samples with part labels and the normalization applied
struct SceneSamples {
  PointCloud cloud;
  std::vector<int> part;
  double r = 0;  // Poisson-disk radius in normalized coordinates
  NormalizeTransform xf;
};

inline SceneSamples sample_scene(const PrimitiveScene &scene, int n_target, uint64_t seed) {
  Rng rng(seed);
  detail::DartResult raw = detail::dart_throw_scene(scene, n_target, rng);
  SceneSamples out;
  out.cloud.positions = std::move(raw.pos);
  out.cloud.normals = std::move(raw.nrm);
  for (int tag : raw.tag) out.part.push_back(scene.primitives[tag].part_id);
  out.xf = normalize_to_unit_sphere(out.cloud);
  out.r = raw.r * out.xf.scale;
  return out;
}

inline PointCloud poisson_sample(const PrimitiveScene &scene, int n_target, uint64_t seed) {
  return sample_scene(scene, n_target, seed).cloud;
}

// ---------------------------------------------------------------------------
// boundary curves: arc-length tables, the same-local-geometry filter

namespace detail {

struct ArcTable {
  std::vector<double> cum;  // cumulative chord length at 1 + segments knots
  double length = 0;
};

inline ArcTable arc_table(const std::function<Vec3(double)> &f, int segments = 1024) {
  ArcTable t;
  t.cum.resize(segments + 1, 0.0);
  Vec3 prev = f(0.0);
  for (int i = 1; i <= segments; ++i) {
    Vec3 cur = f(static_cast<double>(i) / segments);
    t.cum[i] = t.cum[i - 1] + norm(cur - prev);
    prev = cur;
  }
  t.length = t.cum.back();
  return t;
}

// map a fraction of total arc length back to the curve parameter
inline double arc_to_param(const ArcTable &t, double s01) {
  double target = s01 * t.length;
  size_t hi = std::lower_bound(t.cum.begin(), t.cum.end(), target) - t.cum.begin();
  if (hi == 0) return 0.0;
  if (hi >= t.cum.size()) return 1.0;
  double seg = t.cum[hi] - t.cum[hi - 1];
  double frac = seg > 0 ? (target - t.cum[hi - 1]) / seg : 0.0;
  int n = static_cast<int>(t.cum.size()) - 1;
  return (hi - 1 + frac) / n;
}

}  // namespace detail

// A curve between two primitives of identical kind whose side normals agree
// within 1 degree everywhere carries no geometric boundary.
inline bool same_local_geometry(const PrimitiveScene &scene, const BoundaryCurve &c) {
  if (scene.primitives[c.prim_a].kind != scene.primitives[c.prim_b].kind) return false;
  const double cos_tol = std::cos(deg2rad(1.0));
  for (int s = 0; s <= 32; ++s) {
    double t = s / 32.0;
    if (dot(normalized(c.normal_a(t)), normalized(c.normal_b(t))) < cos_tol) return false;
  }
  return true;
}

inline std::vector<int> filtered_curves(const PrimitiveScene &scene) {
  std::vector<int> kept;
  for (size_t i = 0; i < scene.curves.size(); ++i)
    if (!same_local_geometry(scene, scene.curves[i])) kept.push_back(static_cast<int>(i));
  return kept;
}

// ---------------------------------------------------------------------------
// generators

// Three-pass procedure: Poisson-disk surface samples, then boundary-curve
// samples flagged t-hat = 1, then deletion of surface samples within epsilon
// of any boundary sample. epsilon comes from the pass-1 cloud.
inline LabeledCloud make_geometric_training_cloud(const PrimitiveScene &scene, int n_surface,
                                                  int n_boundary, uint64_t seed) {
  if (scene.curves.empty())
    throw std::invalid_argument("make_geometric_training_cloud: scene has no boundary curves");
  SceneSamples s = sample_scene(scene, n_surface, seed);
  double eps = compute_epsilon(s.cloud);

  std::vector<int> kept = filtered_curves(scene);
  std::vector<Vec3> bpos, bnrm;
  std::vector<int> blabel;
  if (!kept.empty() && n_boundary > 0) {
    std::vector<detail::ArcTable> tables;
    double total_len = 0;
    for (int ci : kept) {
      tables.push_back(detail::arc_table(scene.curves[ci].point));
      total_len += tables.back().length;
    }
    // largest-remainder allocation so the counts sum to exactly n_boundary
    std::vector<int> counts(kept.size(), 0);
    std::vector<std::pair<double, int>> rem;
    int assigned = 0;
    for (size_t i = 0; i < kept.size(); ++i) {
      double exact = n_boundary * tables[i].length / total_len;
      counts[i] = static_cast<int>(exact);
      assigned += counts[i];
      rem.push_back({counts[i] - exact, static_cast<int>(i)});
    }
    std::sort(rem.begin(), rem.end());
    for (int i = 0; assigned < n_boundary; ++i, ++assigned) counts[rem[i % rem.size()].second]++;

    Rng brng(seed ^ 0x9e3779b97f4a7c15ull);
    for (size_t i = 0; i < kept.size(); ++i) {
      const BoundaryCurve &c = scene.curves[kept[i]];
      for (int j = 0; j < counts[i]; ++j) {
        double t = detail::arc_to_param(tables[i], uniform01(brng));
        bpos.push_back(s.xf.apply(c.point(t)));
        bnrm.push_back(normalized(c.normal_a(t)));
        blabel.push_back(scene.primitives[c.prim_a].part_id);
      }
    }
  }

  LabeledCloud out;
  out.epsilon = eps;
  if (bpos.empty()) {
    out.cloud = std::move(s.cloud);
    out.labels = std::move(s.part);
    out.boundary.assign(out.cloud.size(), 0);
    return out;
  }

  // pass 3: drop surface samples within epsilon of any boundary sample
  std::vector<double> flat;
  for (const auto &p : bpos) {
    flat.push_back(p[0]);
    flat.push_back(p[1]);
    flat.push_back(p[2]);
  }
  KdTree btree(flat, 3);
  for (int i = 0; i < s.cloud.size(); ++i) {
    const double q[3] = {s.cloud.positions[i][0], s.cloud.positions[i][1],
                         s.cloud.positions[i][2]};
    if (btree.any_within(q, eps)) continue;
    out.cloud.positions.push_back(s.cloud.positions[i]);
    out.cloud.normals.push_back(s.cloud.normals[i]);
    out.labels.push_back(s.part[i]);
    out.boundary.push_back(0);
  }
  for (size_t i = 0; i < bpos.size(); ++i) {
    out.cloud.positions.push_back(bpos[i]);
    out.cloud.normals.push_back(bnrm[i]);
    out.labels.push_back(blabel[i]);
    out.boundary.push_back(1);
  }
  return out;
}

// Arc-length-uniform samples of every boundary curve that survives the
// same-local-geometry filter, mapped through xf, at the given spacing.
inline std::vector<Vec3> dense_curve_samples(const PrimitiveScene &scene,
                                             const NormalizeTransform &xf, double spacing) {
  if (!(spacing > 0)) throw std::invalid_argument("dense_curve_samples: spacing must be > 0");
  std::vector<Vec3> out;
  for (int ci : filtered_curves(scene)) {
    const BoundaryCurve &c = scene.curves[ci];
    auto in_frame = [&](double t) { return xf.apply(c.point(t)); };
    detail::ArcTable table = detail::arc_table(in_frame);
    int m = std::max(1, static_cast<int>(std::ceil(table.length / spacing)));
    for (int j = 0; j <= m; ++j)
      out.push_back(in_frame(detail::arc_to_param(table, static_cast<double>(j) / m)));
  }
  return out;
}

struct EvalCloud {
  LabeledCloud labeled;
  std::vector<Vec3> curve_samples;  // dense ground-truth boundary samples
};

// Poisson surface samples only (no injected boundary points), perturbed by the
// noise profile; ground truth is returned as a dense curve sampling at spacing
// epsilon/4, independent of the cloud. epsilon is computed before the noise.
inline EvalCloud make_eval_cloud(const PrimitiveScene &scene, int n_surface, uint64_t seed,
                                 double sigma = 0.005, double angle_limit_deg = 3.0) {
  SceneSamples s = sample_scene(scene, n_surface, seed);
  EvalCloud out;
  out.labeled.epsilon = compute_epsilon(s.cloud);
  out.labeled.cloud = perturb(s.cloud, sigma, angle_limit_deg, seed ^ 0x517cc1b727220a95ull);
  out.labeled.labels = std::move(s.part);
  out.labeled.boundary.assign(out.labeled.cloud.size(), 0);

  out.curve_samples = dense_curve_samples(scene, s.xf, out.labeled.epsilon / 4);
  return out;
}

// Poisson-disk sample a labeled triangle mesh; a point is a boundary point iff
// a differently-labeled point lies within epsilon.
inline LabeledCloud mark_semantic_boundaries(const std::vector<LabeledTriangle> &tris,
                                             int n_points, uint64_t seed) {
  if (tris.empty()) throw std::invalid_argument("mark_semantic_boundaries: empty mesh");
  std::vector<double> cum;
  std::vector<Vec3> face_n;
  double total = 0;
  for (const auto &t : tris) {
    Vec3 cr = cross(t.b - t.a, t.c - t.a);
    double a2 = norm(cr);
    cum.push_back(total += 0.5 * a2);
    face_n.push_back(a2 > 0 ? cr / a2 : Vec3{0, 0, 1});
  }
  if (!(total > 0)) throw std::invalid_argument("mark_semantic_boundaries: degenerate mesh");

  Rng rng(seed);
  auto draw = [&](Rng &r, Vec3 &p, Vec3 &n, int &tag) {
    double pick = uniform01(r) * total;
    size_t i = std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
    if (i >= tris.size()) i = tris.size() - 1;
    double u = uniform01(r), v = uniform01(r);
    if (u + v > 1) {
      u = 1 - u;
      v = 1 - v;
    }
    const auto &t = tris[i];
    p = t.a + u * (t.b - t.a) + v * (t.c - t.a);
    n = face_n[i];
    tag = static_cast<int>(i);
    return true;
  };
  detail::DartResult raw = detail::dart_throw(draw, total, n_points, rng);

  LabeledCloud out;
  out.cloud.positions = std::move(raw.pos);
  out.cloud.normals = std::move(raw.nrm);
  for (int tag : raw.tag) out.labels.push_back(tris[tag].label);
  normalize_to_unit_sphere(out.cloud);
  out.epsilon = compute_epsilon(out.cloud);

  bool multi = false;
  for (int l : out.labels)
    if (l != out.labels.front()) multi = true;
  out.boundary.assign(out.cloud.size(), 0);
  if (!multi) {
    std::cerr << "mark_semantic_boundaries: single-label mesh, no boundaries\n";
    return out;
  }
  KdTree tree(out.cloud.flat_positions(), 3);
  for (int i = 0; i < out.cloud.size(); ++i) {
    const double q[3] = {out.cloud.positions[i][0], out.cloud.positions[i][1],
                         out.cloud.positions[i][2]};
    for (const auto &hit : tree.radius(q, out.epsilon)) {
      if (out.labels[hit.index] != out.labels[i]) {
        out.boundary[i] = 1;
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// shipped scene templates

namespace detail {

inline void add_box(PrimitiveScene &scene, double half, int part_base, bool per_face_parts,
                    const std::function<bool(const Vec3 &)> &top_keep = {}) {
  int base = static_cast<int>(scene.primitives.size());
  const double h = half, s = 2 * half;
  struct Face {
    Vec3 origin, eu, ev;
  };
  // eu x ev = outward normal; faces ordered -x +x -y +y -z +z
  std::vector<Face> faces = {
      {{-h, -h, -h}, {0, 0, 1}, {0, 1, 0}},  // -x
      {{h, -h, -h}, {0, 1, 0}, {0, 0, 1}},   // +x
      {{-h, -h, -h}, {1, 0, 0}, {0, 0, 1}},  // -y
      {{-h, h, -h}, {0, 0, 1}, {1, 0, 0}},   // +y
      {{-h, -h, -h}, {0, 1, 0}, {1, 0, 0}},  // -z
      {{-h, -h, h}, {1, 0, 0}, {0, 1, 0}},   // +z
  };
  for (int f = 0; f < 6; ++f) {
    Primitive p = make_plane_rect(faces[f].origin, faces[f].eu, faces[f].ev, s, s,
                                  per_face_parts ? part_base + f : part_base);
    if (f == 5 && top_keep) p.keep = top_keep;
    scene.primitives.push_back(p);
  }
  // 12 edges: for each axis pair, the segment where two faces meet
  auto face_index = [](int axis, int sign) { return axis * 2 + (sign > 0 ? 1 : 0); };
  Vec3 axes[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  Vec3 outward[6] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
  for (int a = 0; a < 3; ++a) {
    int b = (a + 1) % 3, c = (a + 2) % 3;
    for (int sb : {-1, 1})
      for (int sc : {-1, 1}) {
        Vec3 start = -h * axes[a] + sb * h * axes[b] + sc * h * axes[c];
        Vec3 dir = axes[a];
        int fb = base + face_index(b, sb), fc = base + face_index(c, sc);
        BoundaryCurve curve;
        curve.prim_a = fb;
        curve.prim_b = fc;
        curve.point = [=](double t) { return start + t * s * dir; };
        Vec3 nb = outward[face_index(b, sb)], nc = outward[face_index(c, sc)];
        curve.normal_a = [=](double) { return nb; };
        curve.normal_b = [=](double) { return nc; };
        scene.curves.push_back(curve);
      }
  }
}

inline BoundaryCurve circle_curve(int pa, int pb, double radius, double z,
                                  const std::function<Vec3(double)> &na,
                                  const std::function<Vec3(double)> &nb) {
  BoundaryCurve c;
  c.prim_a = pa;
  c.prim_b = pb;
  c.point = [=](double t) {
    double phi = 2 * M_PI * t;
    return Vec3{radius * std::cos(phi), radius * std::sin(phi), z};
  };
  c.normal_a = na;
  c.normal_b = nb;
  return c;
}

inline std::function<Vec3(double)> radial_normal(double sign = 1.0) {
  return [=](double t) {
    double phi = 2 * M_PI * t;
    return Vec3{sign * std::cos(phi), sign * std::sin(phi), 0};
  };
}

inline std::function<Vec3(double)> const_normal(const Vec3 &n) {
  return [=](double) { return n; };
}

}  // namespace detail

inline PrimitiveScene scene_dihedral() {
  PrimitiveScene s;
  s.primitives.push_back(make_plane_rect({-0.5, 0, 0}, {1, 0, 0}, {0, 1, 0}, 1, 1, 0));
  s.primitives.push_back(make_plane_rect({-0.5, 0, 0}, {1, 0, 0}, {0, 0, 1}, 1, 1, 1));
  BoundaryCurve c;
  c.prim_a = 0;
  c.prim_b = 1;
  c.point = [](double t) { return Vec3{-0.5 + t, 0, 0}; };
  c.normal_a = detail::const_normal({0, 0, 1});
  c.normal_b = detail::const_normal({0, -1, 0});
  s.curves.push_back(c);
  return s;
}

inline PrimitiveScene scene_box() {
  PrimitiveScene s;
  detail::add_box(s, 0.5, 0, /*per_face_parts=*/true);
  return s;
}

inline PrimitiveScene scene_capped_cylinder() {
  PrimitiveScene s;
  const double R = 0.4, h = 0.5;
  s.primitives.push_back(make_cylinder({0, 0, 0}, {0, 0, 1}, R, -h, h, 0));
  s.primitives.push_back(make_disk({0, 0, h}, {0, 0, 1}, 0, R, 1));
  s.primitives.push_back(make_disk({0, 0, -h}, {0, 0, -1}, 0, R, 2));
  s.curves.push_back(detail::circle_curve(0, 1, R, h, detail::radial_normal(),
                                          detail::const_normal({0, 0, 1})));
  s.curves.push_back(detail::circle_curve(0, 2, R, -h, detail::radial_normal(),
                                          detail::const_normal({0, 0, -1})));
  return s;
}

inline PrimitiveScene scene_cylinder_box() {
  PrimitiveScene s;
  const double rc = 0.25, z0 = 0.5, z1 = 1.0;
  detail::add_box(s, 0.5, 0, /*per_face_parts=*/false,
                  [=](const Vec3 &p) { return std::hypot(p[0], p[1]) > rc; });
  int side = static_cast<int>(s.primitives.size());
  s.primitives.push_back(make_cylinder({0, 0, 0}, {0, 0, 1}, rc, z0, z1, 1));
  s.primitives.push_back(make_disk({0, 0, z1}, {0, 0, 1}, 0, rc, 2));
  s.curves.push_back(detail::circle_curve(5, side, rc, z0, detail::const_normal({0, 0, 1}),
                                          detail::radial_normal()));
  s.curves.push_back(detail::circle_curve(side, side + 1, rc, z1, detail::radial_normal(),
                                          detail::const_normal({0, 0, 1})));
  return s;
}

inline PrimitiveScene scene_sphere_cylinder() {
  PrimitiveScene s;
  const double R = 0.5, rc = 0.25, z1 = 0.9;
  const double zc = std::sqrt(R * R - rc * rc);
  Primitive sph = make_sphere_band({0, 0, 0}, R, -1, 1, 0);
  sph.keep = [=](const Vec3 &p) { return !(p[2] > 0 && std::hypot(p[0], p[1]) < rc); };
  s.primitives.push_back(sph);
  s.primitives.push_back(make_cylinder({0, 0, 0}, {0, 0, 1}, rc, zc, z1, 1));
  s.primitives.push_back(make_disk({0, 0, z1}, {0, 0, 1}, 0, rc, 2));
  auto sphere_normal = [=](double t) {
    double phi = 2 * M_PI * t;
    return Vec3{rc * std::cos(phi) / R, rc * std::sin(phi) / R, zc / R};
  };
  s.curves.push_back(detail::circle_curve(0, 1, rc, zc, sphere_normal, detail::radial_normal()));
  s.curves.push_back(detail::circle_curve(1, 2, rc, z1, detail::radial_normal(),
                                          detail::const_normal({0, 0, 1})));
  return s;
}

inline PrimitiveScene scene_torus_plane() {
  PrimitiveScene s;
  const double R = 0.5, r = 0.15;
  Primitive plane = make_plane_rect({-1, -1, 0}, {1, 0, 0}, {0, 1, 0}, 2, 2, 0);
  plane.keep = [=](const Vec3 &p) {
    double rho = std::hypot(p[0], p[1]);
    return rho < R - r || rho > R + r;
  };
  s.primitives.push_back(plane);
  s.primitives.push_back(make_torus({0, 0, 0}, R, r, 0, M_PI, 1));
  s.curves.push_back(detail::circle_curve(0, 1, R + r, 0, detail::const_normal({0, 0, 1}),
                                          detail::radial_normal(1.0)));
  s.curves.push_back(detail::circle_curve(0, 1, R - r, 0, detail::const_normal({0, 0, 1}),
                                          detail::radial_normal(-1.0)));
  return s;
}

inline const std::vector<std::string> &scene_template_names() {
  static const std::vector<std::string> names = {"dihedral",     "box",
                                                 "capped_cylinder", "cylinder_box",
                                                 "sphere_cylinder", "torus_plane"};
  return names;
}

inline PrimitiveScene scene_template(const std::string &name) {
  if (name == "dihedral") return scene_dihedral();
  if (name == "box") return scene_box();
  if (name == "capped_cylinder") return scene_capped_cylinder();
  if (name == "cylinder_box") return scene_cylinder_box();
  if (name == "sphere_cylinder") return scene_sphere_cylinder();
  if (name == "torus_plane") return scene_torus_plane();
  throw std::invalid_argument("unknown scene template: " + name);
}

}  // namespace bforge
