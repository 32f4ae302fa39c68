#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "boundaryforge/cloud.hpp"

using namespace bforge;

namespace {

// O(N^2) full-sort oracle with the same tie rule (smaller index wins).
std::vector<int> brute_knn_row(const std::vector<double> &feat, int n, int dim, int i, int k) {
  std::vector<std::pair<double, int>> d;
  d.reserve(n - 1);
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    double s = 0;
    for (int c = 0; c < dim; ++c) {
      double diff = feat[i * dim + c] - feat[j * dim + c];
      s += diff * diff;
    }
    d.push_back({s, j});
  }
  std::sort(d.begin(), d.end());
  std::vector<int> out(k);
  for (int j = 0; j < k; ++j) out[j] = d[j].second;
  return out;
}

PointCloud random_cloud(int n, Rng &rng) {
  PointCloud c;
  for (int i = 0; i < n; ++i) {
    c.positions.push_back({2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1});
    c.normals.push_back(random_unit_vector(rng));
  }
  return c;
}

}  // namespace

TEST_CASE("knn on collinear points") {
  PointCloud c;
  c.positions = {{0, 0, 0}, {1, 0, 0}, {3, 0, 0}};
  c.normals = {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}};
  NeighborGraph g = knn(c, 1);
  CHECK(g.at(0, 0) == 1);
  CHECK(g.at(1, 0) == 0);
  CHECK(g.at(2, 0) == 1);
}

TEST_CASE("knn on unit square corners excludes the diagonal") {
  PointCloud c;
  c.positions = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  c.normals.assign(4, {0, 0, 1});
  NeighborGraph g = knn(c, 2);
  for (int i = 0; i < 4; ++i) {
    int diag = (i + 2) % 4;
    CHECK(g.at(i, 0) != diag);
    CHECK(g.at(i, 1) != diag);
  }
}

TEST_CASE("knn matches brute-force oracle on random clouds") {
  Rng rng(7);
  for (int trial = 0; trial < 12; ++trial) {
    int n = 16 + static_cast<int>(uniform01(rng) * 496);
    int k = 1 + static_cast<int>(uniform01(rng) * std::min(n - 2, 12));
    PointCloud c = random_cloud(n, rng);
    NeighborGraph g = knn(c, k);
    auto flat = c.flat_positions();
    for (int i = 0; i < n; ++i) {
      auto expect = brute_knn_row(flat, n, 3, i, k);
      for (int j = 0; j < k; ++j) REQUIRE(g.at(i, j) == expect[j]);
    }
  }
}

TEST_CASE("knn with 256 uniform points and k=8 equals oracle") {
  Rng rng(99);
  PointCloud c = random_cloud(256, rng);
  NeighborGraph g = knn(c, 8);
  auto flat = c.flat_positions();
  for (int i = 0; i < 256; ++i) {
    auto expect = brute_knn_row(flat, 256, 3, i, 8);
    for (int j = 0; j < 8; ++j) REQUIRE(g.at(i, j) == expect[j]);
  }
}

TEST_CASE("knn tie-breaking prefers the smaller index") {
  // four points at equal distance from the origin point
  PointCloud c;
  c.positions = {{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  c.normals.assign(5, {0, 0, 1});
  NeighborGraph g = knn(c, 2);
  CHECK(g.at(0, 0) == 1);
  CHECK(g.at(0, 1) == 2);
}

TEST_CASE("knn rejects k >= N") {
  Rng rng(1);
  PointCloud c = random_cloud(4, rng);
  CHECK_THROWS_AS(knn(c, 4), std::invalid_argument);
  CHECK_THROWS_AS(knn(c, 0), std::invalid_argument);
}

TEST_CASE("knn_feature on positions equals knn") {
  Rng rng(17);
  PointCloud c = random_cloud(64, rng);
  NeighborGraph a = knn(c, 5);
  NeighborGraph b = knn_feature(c.flat_positions(), 64, 3, 5);
  CHECK(a.indices == b.indices);
}

TEST_CASE("knn_feature in 1-D") {
  std::vector<double> f = {0, 10, 11};
  NeighborGraph g = knn_feature(f, 3, 1, 1);
  CHECK(g.at(0, 0) == 1);
  CHECK(g.at(1, 0) == 2);
  CHECK(g.at(2, 0) == 1);
}

TEST_CASE("knn_feature matches brute force in 16-D") {
  Rng rng(23);
  int n = 64, dim = 16, k = 4;
  std::vector<double> f(n * dim);
  for (auto &v : f) v = normal(rng);
  NeighborGraph g = knn_feature(f, n, dim, k);
  for (int i = 0; i < n; ++i) {
    auto expect = brute_knn_row(f, n, dim, i, k);
    for (int j = 0; j < k; ++j) REQUIRE(g.at(i, j) == expect[j]);
  }
}

TEST_CASE("knn_feature rejects nonfinite entries") {
  std::vector<double> f = {0, 1, std::nan("")};
  CHECK_THROWS_AS(knn_feature(f, 3, 1, 1), std::invalid_argument);
}

TEST_CASE("local frames are orthonormal right-handed with n in the third column") {
  Rng rng(31);
  PointCloud c = random_cloud(50, rng);
  LocalFrames fr = build_local_frames(c, 42);
  for (int i = 0; i < c.size(); ++i) {
    const Mat3 &R = fr.rotation[i];
    Vec3 u = R.col(0), v = R.col(1), n = R.col(2);
    CHECK(std::abs(norm(u) - 1) < 1e-9);
    CHECK(std::abs(dot(u, v)) < 1e-5);
    CHECK(std::abs(dot(u, n)) < 1e-5);
    CHECK(std::abs(dot(v, n)) < 1e-5);
    CHECK(std::abs(R.det() - 1.0) < 1e-5);
    CHECK(norm(n - c.normals[i]) < 1e-6);
  }
  LocalFrames fr2 = build_local_frames(c, 42);
  for (int i = 0; i < c.size(); ++i) CHECK(fr.rotation[i].m == fr2.rotation[i].m);
}

TEST_CASE("build_local_frames rejects zero normals") {
  PointCloud c;
  c.positions = {{0, 0, 0}};
  c.normals = {{0, 0, 0}};
  CHECK_THROWS_AS(build_local_frames(c, 1), std::invalid_argument);
}

TEST_CASE("frame-relative displacements are invariant under co-rotation") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Vec3 n = random_unit_vector(rng);
    Vec3 draw = random_unit_vector(rng);
    if (std::abs(dot(draw, n)) > 0.99) continue;
    Vec3 d{normal(rng), normal(rng), normal(rng)};
    Mat3 Q = random_rotation(rng);
    Mat3 R = make_frame(n, draw);
    Mat3 Rq = make_frame(Q * n, Q * draw);
    Vec3 a = R.tmul(d);
    Vec3 b = Rq.tmul(Q * d);
    CHECK(norm(a - b) < 1e-10 * std::max(1.0, norm(d)));
    // and the frames themselves co-rotate: R' = Q R
    Mat3 QR = Q * R;
    for (int e = 0; e < 9; ++e) CHECK(std::abs(Rq.m[e] - QR.m[e]) < 1e-10);
  }
}

TEST_CASE("principal directions on a cylinder") {
  PointCloud c;
  int nt = 48, nz = 12;
  for (int iz = 0; iz < nz; ++iz)
    for (int it = 0; it < nt; ++it) {
      double t = 2 * M_PI * it / nt + 0.03 * iz;
      double z = 0.25 * iz;
      c.positions.push_back({std::cos(t), std::sin(t), z});
      c.normals.push_back({std::cos(t), std::sin(t), 0});
    }
  auto pd = estimate_principal_directions(c, 12);
  int checked = 0;
  for (int i = 0; i < c.size(); ++i) {
    // skip the open-boundary rings: one-sided neighborhoods there make the
    // fitted patch nearly umbilic, so the directions are ill-conditioned
    int iz = i / nt;
    if (iz == 0 || iz == nz - 1) continue;
    if (pd.degenerate[i]) continue;
    Vec3 circum = normalized(cross(Vec3{0, 0, 1}, c.normals[i]));
    double a1 = rad2deg(std::acos(std::min(1.0, std::abs(dot(pd.dir1[i], circum)))));
    double a2 = rad2deg(std::acos(std::min(1.0, std::abs(dot(pd.dir2[i], Vec3{0, 0, 1})))));
    CHECK(a1 < 5.0);
    CHECK(a2 < 5.0);
    ++checked;
  }
  CHECK(checked > c.size() / 2);
}

TEST_CASE("principal directions on a plane fall back with a flag") {
  PointCloud c;
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    c.positions.push_back({uniform01(rng), uniform01(rng), 0});
    c.normals.push_back({0, 0, 1});
  }
  auto pd = estimate_principal_directions(c, 10);
  int flagged = 0;
  for (auto f : pd.degenerate) flagged += f;
  CHECK(flagged == c.size());
  for (int i = 0; i < c.size(); ++i) {
    CHECK(std::abs(dot(pd.dir1[i], pd.dir2[i])) < 1e-5);
    CHECK(std::abs(dot(pd.dir1[i], c.normals[i])) < 1e-5);
  }
}

TEST_CASE("principal directions on a sphere stay orthonormal") {
  PointCloud c;
  Rng rng(11);
  for (int i = 0; i < 400; ++i) {
    Vec3 p = random_unit_vector(rng);
    c.positions.push_back(p);
    c.normals.push_back(p);
  }
  auto pd = estimate_principal_directions(c, 12);
  for (int i = 0; i < c.size(); ++i) {
    CHECK(std::abs(norm(pd.dir1[i]) - 1) < 1e-6);
    CHECK(std::abs(dot(pd.dir1[i], pd.dir2[i])) < 1e-5);
  }
}

TEST_CASE("perturb with zero magnitudes is the identity") {
  Rng rng(13);
  PointCloud c = random_cloud(20, rng);
  PointCloud p = perturb(c, 0, 0, 77);
  for (int i = 0; i < c.size(); ++i) {
    CHECK(norm(p.positions[i] - c.positions[i]) == 0.0);
    CHECK(norm(p.normals[i] - c.normals[i]) == 0.0);
  }
}

TEST_CASE("perturb respects the noise model") {
  PointCloud c;
  int n = 10000;
  Rng rng(19);
  for (int i = 0; i < n; ++i) {
    c.positions.push_back({0, 0, 0});
    c.normals.push_back(random_unit_vector(rng));
  }
  PointCloud p = perturb(c, 0.005, 3.0, 123);
  double max_dev = 0;
  double sx = 0, sx2 = 0;
  for (int i = 0; i < n; ++i) {
    double cosang = std::clamp(dot(p.normals[i], c.normals[i]), -1.0, 1.0);
    max_dev = std::max(max_dev, rad2deg(std::acos(cosang)));
    sx += p.positions[i].x;
    sx2 += p.positions[i].x * p.positions[i].x;
  }
  CHECK(max_dev <= 3.0 + 1e-9);
  double var = sx2 / n - (sx / n) * (sx / n);
  CHECK(std::sqrt(var) == Catch::Approx(0.005).margin(0.0005));
}

TEST_CASE("perturb is deterministic per seed") {
  Rng rng(29);
  PointCloud c = random_cloud(40, rng);
  PointCloud a = perturb(c, 0.01, 2.0, 555);
  PointCloud b = perturb(c, 0.01, 2.0, 555);
  for (int i = 0; i < c.size(); ++i) {
    CHECK(a.positions[i].x == b.positions[i].x);
    CHECK(a.normals[i].x == b.normals[i].x);
  }
}

TEST_CASE("compute_epsilon hand cases") {
  std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {3, 0, 0}};
  CHECK(compute_epsilon(pts) == Catch::Approx(2.0));
  std::vector<Vec3> grid;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) grid.push_back({double(i), double(j), 0});
  CHECK(compute_epsilon(grid) == Catch::Approx(1.0));
  CHECK_THROWS_AS(compute_epsilon(std::vector<Vec3>{{0, 0, 0}}), std::invalid_argument);
}

TEST_CASE("compute_epsilon matches brute force on random points") {
  Rng rng(37);
  std::vector<Vec3> pts;
  for (int i = 0; i < 512; ++i) pts.push_back({uniform01(rng), uniform01(rng), uniform01(rng)});
  double brute = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    double best = 1e300;
    for (size_t j = 0; j < pts.size(); ++j)
      if (j != i) best = std::min(best, dist(pts[i], pts[j]));
    brute = std::max(brute, best);
  }
  CHECK(compute_epsilon(pts) == Catch::Approx(brute).epsilon(1e-12));
}

TEST_CASE("normalize_to_unit_sphere centers and bounds the cloud") {
  Rng rng(41);
  PointCloud c = random_cloud(100, rng);
  for (auto &p : c.positions) p += Vec3{5, -2, 3};
  normalize_to_unit_sphere(c);
  Vec3 centroid{0, 0, 0};
  double max_r = 0;
  for (const auto &p : c.positions) {
    centroid += p;
    max_r = std::max(max_r, norm(p));
  }
  centroid = centroid / c.size();
  CHECK(norm(centroid) < 1e-6);
  CHECK(max_r <= 1 + 1e-6);
}
