#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "boundaryforge/autograd.hpp"
#include "boundaryforge/cloud.hpp"

namespace bforge {

enum class FirstLayerKind { EdgeConv, LocalEdgeConv, LocalEdgeConvCurv };

inline std::string to_string(FirstLayerKind k) {
  switch (k) {
    case FirstLayerKind::EdgeConv: return "edgeconv";
    case FirstLayerKind::LocalEdgeConv: return "localedgeconv";
    case FirstLayerKind::LocalEdgeConvCurv: return "localedgeconv_curv";
  }
  return "?";
}

inline FirstLayerKind first_layer_from_string(const std::string &s) {
  if (s == "edgeconv") return FirstLayerKind::EdgeConv;
  if (s == "localedgeconv") return FirstLayerKind::LocalEdgeConv;
  if (s == "localedgeconv_curv") return FirstLayerKind::LocalEdgeConvCurv;
  throw std::invalid_argument("unknown first-layer kind: " + s);
}

struct NetConfig {
  int k = 20;
  FirstLayerKind first_layer = FirstLayerKind::LocalEdgeConv;
  bool use_normals = true;
  std::vector<int> first_widths = {64, 64};
  std::vector<int> ec2_widths = {64};
  std::vector<int> ec3_widths = {64};
  int global_width = 256;
  std::vector<int> head_widths = {256, 128, 64};  // hidden head layers; output appended
  bool use_spatial_transformer = false;
  int curv_k = 12;  // neighborhood for the curvature-direction variant

  void validate() const {
    if (k < 1) throw std::invalid_argument("NetConfig: k must be >= 1");
    if (first_widths.empty() || ec2_widths.empty() || ec3_widths.empty() || head_widths.empty())
      throw std::invalid_argument("NetConfig: width lists must be nonempty");
  }
};

namespace detail {

inline std::string join_widths(const std::vector<int> &w) {
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s;
}

inline std::vector<int> parse_widths(const std::string &s) {
  std::vector<int> out;
  std::istringstream iss(s);
  std::string tok;
  while (std::getline(iss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

}  // namespace detail

inline void write_net_config(std::ostream &out, const NetConfig &cfg) {
  out << "k=" << cfg.k << '\n';
  out << "first_layer=" << to_string(cfg.first_layer) << '\n';
  out << "use_normals=" << (cfg.use_normals ? 1 : 0) << '\n';
  out << "first_widths=" << detail::join_widths(cfg.first_widths) << '\n';
  out << "ec2_widths=" << detail::join_widths(cfg.ec2_widths) << '\n';
  out << "ec3_widths=" << detail::join_widths(cfg.ec3_widths) << '\n';
  out << "global_width=" << cfg.global_width << '\n';
  out << "head_widths=" << detail::join_widths(cfg.head_widths) << '\n';
  out << "use_spatial_transformer=" << (cfg.use_spatial_transformer ? 1 : 0) << '\n';
  out << "curv_k=" << cfg.curv_k << '\n';
}

inline NetConfig read_net_config(std::istream &in) {
  NetConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("net config: expected key=value, got: " + line);
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "k") cfg.k = std::stoi(val);
    else if (key == "first_layer") cfg.first_layer = first_layer_from_string(val);
    else if (key == "use_normals") cfg.use_normals = std::stoi(val) != 0;
    else if (key == "first_widths") cfg.first_widths = detail::parse_widths(val);
    else if (key == "ec2_widths") cfg.ec2_widths = detail::parse_widths(val);
    else if (key == "ec3_widths") cfg.ec3_widths = detail::parse_widths(val);
    else if (key == "global_width") cfg.global_width = std::stoi(val);
    else if (key == "head_widths") cfg.head_widths = detail::parse_widths(val);
    else if (key == "use_spatial_transformer") cfg.use_spatial_transformer = std::stoi(val) != 0;
    else if (key == "curv_k") cfg.curv_k = std::stoi(val);
    else throw std::runtime_error("net config: unknown key " + key);
  }
  cfg.validate();
  return cfg;
}

inline void save_net_config(const std::string &path, const NetConfig &cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_net_config(out, cfg);
}

inline NetConfig load_net_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_net_config(in);
}

// ---------------------------------------------------------------------------
// Parameter construction.

namespace detail {

template <typename T>
void init_mlp_head(ParamSet<T> &ps, const std::string &prefix, int in_dim, std::vector<int> widths,
                   int out_dim, Rng &rng) {
  // hidden layers carry batch-norm; the output affine does not
  int d = in_dim;
  for (size_t l = 0; l < widths.size(); ++l) {
    std::string name = prefix + "." + std::to_string(l);
    init_linear(ps, name, d, widths[l], rng);
    Tensor<T> gamma({widths[l]});
    std::fill(gamma.v.begin(), gamma.v.end(), T(1));
    ps.add(name + ".gamma", std::move(gamma));
    ps.add(name + ".beta", Tensor<T>({widths[l]}));
    ps.add_stat(name + ".mean", Tensor<T>({widths[l]}));
    Tensor<T> var({widths[l]});
    std::fill(var.v.begin(), var.v.end(), T(1));
    ps.add_stat(name + ".var", std::move(var));
    d = widths[l];
  }
  init_linear(ps, prefix + "." + std::to_string(widths.size()), d, out_dim, rng);
}

template <typename T>
typename Tape<T>::Var mlp_head_forward(Tape<T> &tape, typename Tape<T>::Var x, ParamSet<T> &ps,
                                       const std::string &prefix, const std::vector<int> &widths,
                                       int out_dim, bool train) {
  std::vector<int> all = widths;
  all.push_back(out_dim);
  return mlp_forward(tape, x, ps, prefix, all, /*bn=*/true, train, T(0.2), /*activate_last=*/false);
}

}  // namespace detail

inline int first_layer_input_width(const NetConfig &cfg) { return cfg.use_normals ? 6 : 3; }

template <typename T>
ParamSet<T> init_net_params(const NetConfig &cfg, int out_dim, uint64_t seed) {
  cfg.validate();
  ParamSet<T> ps;
  Rng rng(seed);
  int in0 = 2 * first_layer_input_width(cfg);
  init_mlp(ps, "l1", in0, cfg.first_widths, /*bn=*/true, rng);
  init_mlp(ps, "ec2", 2 * cfg.first_widths.back(), cfg.ec2_widths, true, rng);
  init_mlp(ps, "ec3", 2 * cfg.ec2_widths.back(), cfg.ec3_widths, true, rng);
  int cat_w = cfg.first_widths.back() + cfg.ec2_widths.back() + cfg.ec3_widths.back();
  init_mlp(ps, "glob", cat_w, {cfg.global_width}, true, rng);
  detail::init_mlp_head(ps, "head", cat_w + cfg.global_width, cfg.head_widths, out_dim, rng);
  if (cfg.use_spatial_transformer) {
    init_mlp(ps, "st.mlp", 6, {32, 64}, true, rng);
    init_mlp(ps, "st.fc", 64, {32}, true, rng);
    // output affine initialized to the identity matrix
    ps.add("st.out.W", Tensor<T>({32, 9}));
    Tensor<T> b({9});
    b[0] = b[4] = b[8] = T(1);
    ps.add("st.out.b", std::move(b));
  }
  return ps;
}

template <typename T>
ParamSet<T> init_boundary_params(const NetConfig &cfg, uint64_t seed) {
  return init_net_params<T>(cfg, 1, seed);
}

template <typename T>
ParamSet<T> init_parts_params(const NetConfig &cfg, int n_labels, uint64_t seed) {
  if (n_labels < 2) throw std::invalid_argument("init_parts_params: need n_labels >= 2");
  return init_net_params<T>(cfg, n_labels, seed);
}

// ---------------------------------------------------------------------------
// Forward pipeline.

namespace detail {

template <typename T>
Tensor<T> point_features(const PointCloud &cloud, bool with_normals) {
  int n = cloud.size();
  int f = with_normals ? 6 : 3;
  Tensor<T> t({n, f});
  for (int i = 0; i < n; ++i) {
    t[static_cast<int64_t>(i) * f + 0] = static_cast<T>(cloud.positions[i].x);
    t[static_cast<int64_t>(i) * f + 1] = static_cast<T>(cloud.positions[i].y);
    t[static_cast<int64_t>(i) * f + 2] = static_cast<T>(cloud.positions[i].z);
    if (with_normals) {
      t[static_cast<int64_t>(i) * f + 3] = static_cast<T>(cloud.normals[i].x);
      t[static_cast<int64_t>(i) * f + 4] = static_cast<T>(cloud.normals[i].y);
      t[static_cast<int64_t>(i) * f + 5] = static_cast<T>(cloud.normals[i].z);
    }
  }
  return t;
}

template <typename T>
std::vector<double> to_double_matrix(const Tensor<T> &t) {
  std::vector<double> out(t.v.size());
  for (size_t i = 0; i < t.v.size(); ++i) out[i] = static_cast<double>(t.v[i]);
  return out;
}

inline Mat3 mat3_inverse(const Mat3 &a) {
  double d = a.det();
  if (std::abs(d) < 1e-12) throw std::runtime_error("singular 3x3 matrix");
  Mat3 r;
  r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) / d;
  r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) / d;
  r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) / d;
  r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) / d;
  r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) / d;
  r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) / d;
  r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) / d;
  r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) / d;
  r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) / d;
  return r;
}

}  // namespace detail

// One EdgeConv block on explicit features: edge features, shared MLP, max-pool.
template <typename T>
typename Tape<T>::Var edgeconv(Tape<T> &tape, typename Tape<T>::Var features,
                               const NeighborGraph &graph, ParamSet<T> &ps,
                               const std::string &prefix, const std::vector<int> &widths,
                               bool train) {
  auto edges = tape.edge_concat(features, graph);
  auto h = mlp_forward(tape, edges, ps, prefix, widths, /*bn=*/true, train);
  return tape.maxpool_mid(h);
}

// LocalEdgeConv: neighbor differences expressed in per-point frames.
template <typename T>
typename Tape<T>::Var local_edgeconv(Tape<T> &tape, typename Tape<T>::Var features,
                                     const NeighborGraph &graph, const std::vector<Mat3> &frames,
                                     ParamSet<T> &ps, const std::string &prefix,
                                     const std::vector<int> &widths, bool train) {
  auto edges = tape.edge_concat_rotated(features, graph, frames);
  auto h = mlp_forward(tape, edges, ps, prefix, widths, true, train);
  return tape.maxpool_mid(h);
}

// Curvature-direction variant: evaluates the edge MLP under both sign choices
// of the principal-direction frame and max-pools over signs x neighbors.
template <typename T>
typename Tape<T>::Var local_edgeconv_curv(Tape<T> &tape, typename Tape<T>::Var features,
                                          const NeighborGraph &graph,
                                          const std::vector<Mat3> &frames_pos,
                                          const std::vector<Mat3> &frames_neg, ParamSet<T> &ps,
                                          const std::string &prefix, const std::vector<int> &widths,
                                          bool train) {
  auto e1 = tape.edge_concat_rotated(features, graph, frames_pos);
  auto e2 = tape.edge_concat_rotated(features, graph, frames_neg);
  auto edges = tape.concat_mid(e1, e2);
  auto h = mlp_forward(tape, edges, ps, prefix, widths, true, train);
  return tape.maxpool_mid(h);
}

struct SpatialTransformResult {
  PointCloud cloud;  // transformed values
  Mat3 matrix;       // the applied 3x3 (acting on column vectors)
};

// Predict one 3x3 matrix from the cloud and apply it to positions (and its
// inverse-transpose to normals, renormalized). Identity at fresh initialization.
// Returns the transformed-position Var so gradients reach the predictor.
template <typename T>
std::pair<typename Tape<T>::Var, SpatialTransformResult> spatial_transform(
    Tape<T> &tape, const PointCloud &cloud, const NetConfig &cfg, ParamSet<T> &ps, bool train) {
  int n = cloud.size();
  int k = std::min(cfg.k, n - 1);
  NeighborGraph g = knn(cloud, k);
  auto pos = tape.input(detail::point_features<T>(cloud, false), true);
  auto h = edgeconv(tape, pos, g, ps, "st.mlp", {32, 64}, train);
  auto gd = tape.global_maxpool(h);
  // lift the [64] descriptor to a 1-row matrix for the fc stack
  auto fc_in = tape.tile_concat(tape.input(Tensor<T>({1, 0})), gd);
  auto fc = mlp_forward(tape, fc_in, ps, "st.fc", {32}, true, train);
  auto nine = tape.add_bias(tape.matmul(fc, tape.param(ps.at("st.out.W"))), tape.param(ps.at("st.out.b")));
  // nine: [1,9] row-major A; transformed positions = P * A (so M = A^T on columns)
  auto posA = tape.apply_rowmat3(pos, nine);
  SpatialTransformResult res;
  Mat3 a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a(r, c) = static_cast<double>(tape.val(nine)[3 * r + c]);
  res.matrix = a.transposed();
  Mat3 normal_map = detail::mat3_inverse(res.matrix).transposed();
  res.cloud = cloud;
  const Tensor<T> &pv = tape.val(posA);
  for (int i = 0; i < n; ++i) {
    res.cloud.positions[i] = {double(pv[3 * i]), double(pv[3 * i + 1]), double(pv[3 * i + 2])};
    res.cloud.normals[i] = normalized(normal_map * cloud.normals[i]);
  }
  res.cloud.normalized = false;
  return {posA, res};
}

// Full backbone: first layer -> EdgeConv -> EdgeConv (dynamic graphs in
// feature space) -> concat -> global descriptor -> tile+concat -> head MLP.
// Returns head logits [N, out_dim].
template <typename T>
typename Tape<T>::Var forward_logits(Tape<T> &tape, const PointCloud &cloud_in, const NetConfig &cfg,
                                     ParamSet<T> &ps, int out_dim, bool train, uint64_t frame_seed) {
  cfg.validate();
  cloud_in.validate();
  int n = cloud_in.size();
  if (cfg.k >= n) throw std::invalid_argument("forward: config.k must be < N");

  PointCloud cloud = cloud_in;
  typename Tape<T>::Var pos_var = -1;
  if (cfg.use_spatial_transformer) {
    auto [pvar, res] = spatial_transform(tape, cloud_in, cfg, ps, train);
    pos_var = pvar;
    cloud = res.cloud;
  }

  NeighborGraph g1 = knn(cloud, cfg.k);
  typename Tape<T>::Var x0;
  if (cfg.use_spatial_transformer && !cfg.use_normals) {
    x0 = pos_var;
  } else if (cfg.use_spatial_transformer) {
    // concatenate differentiable positions with (constant) transformed normals
    Tensor<T> nrm({n, 3});
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) nrm[static_cast<int64_t>(i) * 3 + c] = static_cast<T>(cloud.normals[i][c]);
    x0 = tape.concat_features({pos_var, tape.input(std::move(nrm))});
  } else {
    x0 = tape.input(detail::point_features<T>(cloud, cfg.use_normals));
  }

  typename Tape<T>::Var f1;
  if (cfg.first_layer == FirstLayerKind::EdgeConv) {
    f1 = edgeconv(tape, x0, g1, ps, "l1", cfg.first_widths, train);
  } else if (cfg.first_layer == FirstLayerKind::LocalEdgeConv) {
    LocalFrames frames = build_local_frames(cloud, frame_seed);
    f1 = local_edgeconv(tape, x0, g1, frames.rotation, ps, "l1", cfg.first_widths, train);
  } else {
    int ck = std::min(std::max(cfg.curv_k, 6), n - 1);
    PrincipalDirections pd = estimate_principal_directions(cloud, ck, frame_seed);
    std::vector<Mat3> fpos(n), fneg(n);
    for (int i = 0; i < n; ++i) {
      fpos[i] = frame_from_tangents(pd.dir1[i], pd.dir2[i], cloud.normals[i]);
      fneg[i] = frame_from_tangents(-pd.dir1[i], -pd.dir2[i], cloud.normals[i]);
    }
    f1 = local_edgeconv_curv(tape, x0, g1, fpos, fneg, ps, "l1", cfg.first_widths, train);
  }

  NeighborGraph g2 = knn_feature(detail::to_double_matrix(tape.val(f1)), n,
                                 tape.val(f1).dim(1), cfg.k);
  auto f2 = edgeconv(tape, f1, g2, ps, "ec2", cfg.ec2_widths, train);
  NeighborGraph g3 = knn_feature(detail::to_double_matrix(tape.val(f2)), n,
                                 tape.val(f2).dim(1), cfg.k);
  auto f3 = edgeconv(tape, f2, g3, ps, "ec3", cfg.ec3_widths, train);

  auto cat = tape.concat_features({f1, f2, f3});
  auto glob = mlp_forward(tape, cat, ps, "glob", {cfg.global_width}, true, train);
  auto gd = tape.global_maxpool(glob);
  auto tiled = tape.tile_concat(cat, gd);
  return detail::mlp_head_forward(tape, tiled, ps, "head", cfg.head_widths, out_dim, train);
}

// Joint forward over a batch of clouds. Graph construction, tangent frames,
// and the global descriptor stay per-cloud (segment pooling), but every affine
// and batch-norm sees the concatenated rows, so train-mode batch statistics
// span the whole batch. With per-cloud statistics the tiled global descriptor
// is a constant column that mean-subtraction silently cancels; batching keeps
// it alive and makes the running stats usable at eval time.
template <typename T>
typename Tape<T>::Var forward_logits_batch(Tape<T> &tape,
                                           const std::vector<const PointCloud *> &clouds,
                                           const NetConfig &cfg, ParamSet<T> &ps, int out_dim,
                                           bool train, uint64_t frame_seed) {
  if (clouds.empty()) throw std::invalid_argument("forward_logits_batch: empty batch");
  if (clouds.size() == 1) return forward_logits(tape, *clouds[0], cfg, ps, out_dim, train, frame_seed);
  cfg.validate();
  std::vector<int> offsets{0};
  for (const PointCloud *c : clouds) {
    c->validate();
    if (cfg.k >= c->size()) throw std::invalid_argument("forward: config.k must be < N");
    offsets.push_back(offsets.back() + c->size());
  }
  int n = offsets.back();
  int nc = static_cast<int>(clouds.size());

  std::vector<PointCloud> working(nc);
  std::vector<typename Tape<T>::Var> x0_parts;
  for (int c = 0; c < nc; ++c) {
    if (cfg.use_spatial_transformer) {
      auto [pvar, res] = spatial_transform(tape, *clouds[c], cfg, ps, train);
      working[c] = std::move(res.cloud);
      if (!cfg.use_normals) {
        x0_parts.push_back(pvar);
      } else {
        int m = working[c].size();
        Tensor<T> nrm({m, 3});
        for (int i = 0; i < m; ++i)
          for (int d = 0; d < 3; ++d)
            nrm[static_cast<int64_t>(i) * 3 + d] = static_cast<T>(working[c].normals[i][d]);
        x0_parts.push_back(tape.concat_features({pvar, tape.input(std::move(nrm))}));
      }
    } else {
      working[c] = *clouds[c];
      x0_parts.push_back(tape.input(detail::point_features<T>(working[c], cfg.use_normals)));
    }
  }
  auto x0 = tape.concat_rows(x0_parts);

  auto merge_graphs = [&](const std::vector<NeighborGraph> &gs) {
    NeighborGraph g;
    g.k = cfg.k;
    g.n = n;
    g.indices.reserve(static_cast<size_t>(n) * cfg.k);
    for (int c = 0; c < nc; ++c)
      for (int idx : gs[c].indices) g.indices.push_back(idx + offsets[c]);
    return g;
  };

  std::vector<NeighborGraph> g1s(nc);
  for (int c = 0; c < nc; ++c) g1s[c] = knn(working[c], cfg.k);
  NeighborGraph g1 = merge_graphs(g1s);

  typename Tape<T>::Var f1;
  if (cfg.first_layer == FirstLayerKind::EdgeConv) {
    f1 = edgeconv(tape, x0, g1, ps, "l1", cfg.first_widths, train);
  } else if (cfg.first_layer == FirstLayerKind::LocalEdgeConv) {
    std::vector<Mat3> rot;
    rot.reserve(n);
    for (int c = 0; c < nc; ++c) {
      LocalFrames frames = build_local_frames(working[c], frame_seed + c);
      rot.insert(rot.end(), frames.rotation.begin(), frames.rotation.end());
    }
    f1 = local_edgeconv(tape, x0, g1, rot, ps, "l1", cfg.first_widths, train);
  } else {
    std::vector<Mat3> fpos, fneg;
    fpos.reserve(n);
    fneg.reserve(n);
    for (int c = 0; c < nc; ++c) {
      int m = working[c].size();
      int ck = std::min(std::max(cfg.curv_k, 6), m - 1);
      PrincipalDirections pd = estimate_principal_directions(working[c], ck, frame_seed + c);
      for (int i = 0; i < m; ++i) {
        fpos.push_back(frame_from_tangents(pd.dir1[i], pd.dir2[i], working[c].normals[i]));
        fneg.push_back(frame_from_tangents(-pd.dir1[i], -pd.dir2[i], working[c].normals[i]));
      }
    }
    f1 = local_edgeconv_curv(tape, x0, g1, fpos, fneg, ps, "l1", cfg.first_widths, train);
  }

  // dynamic feature graphs stay within each cloud
  auto feature_graph = [&](typename Tape<T>::Var feat) {
    const Tensor<T> &tv = tape.val(feat);
    int f = tv.dim(1);
    std::vector<NeighborGraph> gs(nc);
    for (int c = 0; c < nc; ++c) {
      int m = offsets[c + 1] - offsets[c];
      std::vector<double> slice(static_cast<size_t>(m) * f);
      for (int64_t i = 0; i < static_cast<int64_t>(m) * f; ++i)
        slice[i] = static_cast<double>(tv[static_cast<int64_t>(offsets[c]) * f + i]);
      gs[c] = knn_feature(slice, m, f, cfg.k);
    }
    return merge_graphs(gs);
  };
  auto f2 = edgeconv(tape, f1, feature_graph(f1), ps, "ec2", cfg.ec2_widths, train);
  auto f3 = edgeconv(tape, f2, feature_graph(f2), ps, "ec3", cfg.ec3_widths, train);

  auto cat = tape.concat_features({f1, f2, f3});
  auto glob = mlp_forward(tape, cat, ps, "glob", {cfg.global_width}, true, train);
  auto gd = tape.segment_maxpool(glob, offsets);
  auto tiled = tape.tile_concat_rows(cat, gd, offsets);
  return detail::mlp_head_forward(tape, tiled, ps, "head", cfg.head_widths, out_dim, train);
}

template <typename T>
typename Tape<T>::Var forward_boundary_var(Tape<T> &tape, const PointCloud &cloud,
                                           const NetConfig &cfg, ParamSet<T> &ps, bool train,
                                           uint64_t frame_seed) {
  return tape.sigmoid(forward_logits(tape, cloud, cfg, ps, 1, train, frame_seed));
}

template <typename T>
typename Tape<T>::Var forward_boundary_batch_var(Tape<T> &tape,
                                                 const std::vector<const PointCloud *> &clouds,
                                                 const NetConfig &cfg, ParamSet<T> &ps, bool train,
                                                 uint64_t frame_seed) {
  return tape.sigmoid(forward_logits_batch(tape, clouds, cfg, ps, 1, train, frame_seed));
}

template <typename T>
typename Tape<T>::Var forward_parts_logits_batch_var(Tape<T> &tape,
                                                     const std::vector<const PointCloud *> &clouds,
                                                     const NetConfig &cfg, ParamSet<T> &ps,
                                                     int n_labels, bool train, uint64_t frame_seed) {
  if (n_labels < 2) throw std::invalid_argument("forward_parts: need n_labels >= 2");
  return forward_logits_batch(tape, clouds, cfg, ps, n_labels, train, frame_seed);
}

// Per-point boundary probabilities b_i in (0,1).
template <typename T>
std::vector<double> forward_boundary(const PointCloud &cloud, const NetConfig &cfg, ParamSet<T> &ps,
                                     bool train = false, uint64_t frame_seed = 0) {
  Tape<T> tape;
  auto probs = forward_boundary_var(tape, cloud, cfg, ps, train, frame_seed);
  const Tensor<T> &t = tape.val(probs);
  std::vector<double> out(t.numel());
  for (int64_t i = 0; i < t.numel(); ++i) out[i] = static_cast<double>(t[i]);
  return out;
}

template <typename T>
typename Tape<T>::Var forward_parts_logits_var(Tape<T> &tape, const PointCloud &cloud,
                                               const NetConfig &cfg, ParamSet<T> &ps, int n_labels,
                                               bool train, uint64_t frame_seed) {
  if (n_labels < 2) throw std::invalid_argument("forward_parts: need n_labels >= 2");
  return forward_logits(tape, cloud, cfg, ps, n_labels, train, frame_seed);
}

// Per-point label distribution P(c_i); each row sums to 1.
template <typename T>
std::vector<std::vector<double>> forward_parts(const PointCloud &cloud, const NetConfig &cfg,
                                               ParamSet<T> &ps, int n_labels, bool train = false,
                                               uint64_t frame_seed = 0) {
  Tape<T> tape;
  auto probs = tape.softmax_rows(forward_parts_logits_var(tape, cloud, cfg, ps, n_labels, train, frame_seed));
  const Tensor<T> &t = tape.val(probs);
  std::vector<std::vector<double>> out(cloud.size(), std::vector<double>(n_labels));
  for (int i = 0; i < cloud.size(); ++i)
    for (int j = 0; j < n_labels; ++j) out[i][j] = static_cast<double>(t[static_cast<int64_t>(i) * n_labels + j]);
  return out;
}

}  // namespace bforge
