// boundaryforge: generate synthetic part-boundary datasets, train and run the
// boundary / part networks, evaluate, and refine labelings with graph cuts.
//
// Exit codes: 0 success, 2 usage or parse failure, 3 numeric failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "boundaryforge/io.hpp"
#include "boundaryforge/metrics.hpp"
#include "boundaryforge/net.hpp"
#include "boundaryforge/refine.hpp"
#include "boundaryforge/synthgen.hpp"
#include "boundaryforge/trainer.hpp"

namespace fs = std::filesystem;
using namespace bforge;

namespace {

struct Global {
  uint64_t seed = 0;
  int workers = 0;  // 0 = available parallelism; all reductions deterministic
};

// resolved-config snapshot written next to every command's outputs
void write_snapshot(const fs::path &dir, const std::string &cmd,
                    const std::vector<std::pair<std::string, std::string>> &kv) {
  if (!dir.empty()) fs::create_directories(dir);
  std::ofstream out(dir / (cmd + ".config"));
  if (!out) throw std::runtime_error("cannot write config snapshot in " + dir.string());
  for (const auto &[k, v] : kv) out << k << '=' << v << '\n';
}

void ensure_parent(const std::string &path) {
  fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string num(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

std::vector<fs::path> list_files(const fs::path &dir, const std::string &ext) {
  if (!fs::is_directory(dir)) throw ParseError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ParseError("no " + ext + " files in " + dir.string());
  return out;
}

LabeledCloud to_labeled(const CloudRecord &rec) {
  LabeledCloud lc;
  lc.cloud = rec.cloud;
  lc.labels = rec.has_labels() ? rec.labels : std::vector<int>(rec.cloud.size(), 0);
  lc.boundary =
      rec.has_boundary() ? rec.boundary : std::vector<uint8_t>(rec.cloud.size(), 0);
  lc.epsilon = compute_epsilon(lc.cloud);
  return lc;
}

std::vector<LabeledCloud> load_split(const fs::path &dir) {
  std::vector<LabeledCloud> out;
  for (const auto &p : list_files(dir, ".pcb1")) out.push_back(to_labeled(load_pcb1(p.string())));
  return out;
}

// model directory sidecar describing what the checkpoint is
struct ModelMeta {
  std::string task = "boundary";
  int n_labels = 0;
  int fp = 32;
};

void save_meta(const fs::path &dir, const ModelMeta &m) {
  std::ofstream out(dir / "model.meta");
  out << "task=" << m.task << "\nn_labels=" << m.n_labels << "\nfp=" << m.fp << '\n';
}

ModelMeta load_meta(const fs::path &dir) {
  std::ifstream in(dir / "model.meta");
  if (!in) throw ParseError("missing model.meta in " + dir.string());
  ModelMeta m;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "task") m.task = val;
    if (key == "n_labels") m.n_labels = std::stoi(val);
    if (key == "fp") m.fp = std::stoi(val);
  }
  return m;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string tmpl = "mixed";
  int n = 0;
  std::string split = "70/10/20";
  int points = 1024;
  int boundary = 128;
  double sigma = 0.005;
  double angle = 3.0;
  std::string out;
};

std::array<int, 3> parse_split(const std::string &s, int n) {
  int a, b, c;
  char s1, s2;
  std::istringstream iss(s);
  if (!(iss >> a >> s1 >> b >> s2 >> c) || s1 != '/' || s2 != '/' || a < 0 || b < 0 || c < 0 ||
      a + b + c != 100)
    throw ParseError("bad --split '" + s + "', expected percentages like 70/10/20");
  int train = static_cast<int>(std::lround(n * a / 100.0));
  int val = static_cast<int>(std::lround(n * b / 100.0));
  if (train + val > n) val = n - train;
  return {train, val, n - train - val};
}

int cmd_gen(const Global &g, const GenArgs &a) {
  std::vector<std::string> names =
      a.tmpl == "mixed" ? scene_template_names() : std::vector<std::string>{a.tmpl};
  for (const auto &nm : names) scene_template(nm);  // validates the name early

  auto counts = parse_split(a.split, a.n);
  fs::path root(a.out);
  const char *splits[3] = {"train", "val", "test"};
  for (const char *s : splits) fs::create_directories(root / s);

  std::ofstream manifest(root / "manifest.txt");
  if (!manifest) throw std::runtime_error("cannot write manifest in " + a.out);
  manifest << "split\tfile\tseed\ttemplate\tepsilon\n";

  int index = 0;
  for (int si = 0; si < 3; ++si) {
    for (int j = 0; j < counts[si]; ++j, ++index) {
      const std::string &nm = names[index % names.size()];
      PrimitiveScene scene = scene_template(nm);
      uint64_t seed = g.seed + static_cast<uint64_t>(index);
      char base[32];
      std::snprintf(base, sizeof(base), "shape_%04d", index);
      fs::path pcb = root / splits[si] / (std::string(base) + ".pcb1");
      fs::path crv = root / splits[si] / (std::string(base) + ".crv1");

      CloudRecord rec;
      std::vector<Vec3> curves;
      double epsilon;
      if (si < 2) {
        LabeledCloud lc = make_geometric_training_cloud(scene, a.points, a.boundary, seed);
        // the same seed reproduces the pass-1 frame the cloud was built in
        SceneSamples s = sample_scene(scene, a.points, seed);
        curves = dense_curve_samples(scene, s.xf, lc.epsilon / 4);
        epsilon = lc.epsilon;
        rec.cloud = std::move(lc.cloud);
        rec.labels = std::move(lc.labels);
        rec.boundary = std::move(lc.boundary);
      } else {
        EvalCloud ec = make_eval_cloud(scene, a.points, seed, a.sigma, a.angle);
        curves = std::move(ec.curve_samples);
        epsilon = ec.labeled.epsilon;
        rec.cloud = std::move(ec.labeled.cloud);
        rec.labels = std::move(ec.labeled.labels);
      }
      save_pcb1(pcb.string(), rec);
      save_crv1(crv.string(), curves);
      manifest << splits[si] << '\t' << fs::relative(pcb, root).string() << '\t' << seed << '\t'
               << nm << '\t' << detail::fmt9(epsilon) << '\n';
    }
  }
  write_snapshot(root, "gen",
                 {{"seed", std::to_string(g.seed)},
                  {"template", a.tmpl},
                  {"n", std::to_string(a.n)},
                  {"split", a.split},
                  {"points", std::to_string(a.points)},
                  {"boundary", std::to_string(a.boundary)},
                  {"sigma", num(a.sigma)},
                  {"angle", num(a.angle)}});
  std::cout << "gen: wrote " << index << " shapes to " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data;
  std::string out;
  std::string task = "boundary";
  std::string first_layer = "localedgeconv";
  int k = 20;
  bool no_normals = false;
  bool spatial_transformer = false;
  bool fp64 = false;
  bool no_calibrate = false;
  double calibrate_step = 0.01;
  TrainConfig cfg;
};

template <typename T>
void run_train(const TrainArgs &a, const NetConfig &net,
               const std::vector<LabeledCloud> &train_set,
               const std::vector<LabeledCloud> &val_set,
               const std::vector<std::vector<Vec3>> &val_curves) {
  TrainTask task = a.task == "parts" ? TrainTask::Parts : TrainTask::Boundary;
  auto res = train<T>(train_set, val_set, net, a.cfg, task);

  fs::path out(a.out);
  save_ckpt1((out / "model.ckpt1").string(), res.final_params);
  save_ckpt1((out / "model_best.ckpt1").string(), res.best_params);
  {
    std::ofstream log(out / "train_log.csv");
    write_train_log(log, res.log);
    std::ofstream nc(out / "net.config");
    write_net_config(nc, net);
  }
  ModelMeta meta;
  meta.task = a.task;
  meta.n_labels = task == TrainTask::Parts ? detail::infer_labels(train_set, val_set) : 0;
  meta.fp = a.fp64 ? 64 : 32;
  save_meta(out, meta);

  if (task == TrainTask::Boundary && !a.no_calibrate && !val_set.empty() &&
      !val_curves.empty()) {
    std::vector<PointCloud> clouds;
    std::vector<std::vector<double>> probs;
    for (const auto &lc : val_set) {
      clouds.push_back(lc.cloud);
      probs.push_back(forward_boundary(lc.cloud, net, res.best_params, false, 0));
    }
    Threshold t = calibrate_threshold(clouds, probs, val_curves, a.calibrate_step);
    std::ofstream ts(out / "threshold.txt");
    write_threshold(ts, t);
    std::cout << "train: calibrated threshold " << t.value << '\n';
  }
  std::cout << "train: best val loss " << res.best_val_loss << " at epoch " << res.best_epoch
            << '\n';
}

int cmd_train(const Global &g, TrainArgs &a) {
  NetConfig net;
  net.k = a.k;
  net.first_layer = first_layer_from_string(a.first_layer);
  net.use_normals = !a.no_normals;
  net.use_spatial_transformer = a.spatial_transformer;
  a.cfg.seed = g.seed;

  fs::path data(a.data);
  auto train_set = load_split(data / "train");
  std::vector<LabeledCloud> val_set;
  std::vector<std::vector<Vec3>> val_curves;
  if (fs::is_directory(data / "val")) {
    auto files = list_files(data / "val", ".pcb1");
    for (const auto &p : files) {
      val_set.push_back(to_labeled(load_pcb1(p.string())));
      fs::path crv = p;
      crv.replace_extension(".crv1");
      if (fs::exists(crv)) val_curves.push_back(load_crv1(crv.string()));
    }
    if (val_curves.size() != val_set.size()) val_curves.clear();
  }

  fs::create_directories(a.out);
  if (a.fp64)
    run_train<double>(a, net, train_set, val_set, val_curves);
  else
    run_train<float>(a, net, train_set, val_set, val_curves);

  write_snapshot(a.out, "train",
                 {{"seed", std::to_string(g.seed)},
                  {"data", a.data},
                  {"task", a.task},
                  {"first_layer", a.first_layer},
                  {"k", std::to_string(a.k)},
                  {"use_normals", a.no_normals ? "0" : "1"},
                  {"spatial_transformer", a.spatial_transformer ? "1" : "0"},
                  {"fp", a.fp64 ? "64" : "32"},
                  {"epochs", std::to_string(a.cfg.epochs)},
                  {"batch_size", std::to_string(a.cfg.batch_size)},
                  {"lr", num(a.cfg.lr)},
                  {"lr_halving_period", std::to_string(a.cfg.lr_halving_period)},
                  {"noise_sigma", num(a.cfg.noise_sigma)},
                  {"noise_angle_deg", num(a.cfg.noise_angle_deg)},
                  {"calibrate_step", num(a.calibrate_step)}});
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string model;
  std::string out;
  std::vector<std::string> inputs;
  bool final_ckpt = false;
};

template <typename T>
void run_predict(const PredictArgs &a, const NetConfig &net, const ModelMeta &meta) {
  fs::path model(a.model);
  fs::path ckpt = model / (a.final_ckpt ? "model.ckpt1" : "model_best.ckpt1");
  if (!fs::exists(ckpt)) ckpt = model / "model.ckpt1";
  ParamSet<T> ps = meta.task == "parts" ? init_parts_params<T>(net, meta.n_labels, 0)
                                        : init_boundary_params<T>(net, 0);
  load_ckpt1(ckpt.string(), ps);

  fs::create_directories(a.out);
  for (const auto &in : a.inputs) {
    CloudRecord rec = load_pcb1(in);
    fs::path dst = fs::path(a.out) / fs::path(in).filename();
    if (meta.task == "parts") {
      auto probs = forward_parts(rec.cloud, net, ps, meta.n_labels, false, 0);
      dst.replace_extension(".unr1");
      save_unr1(dst.string(), probs);
    } else {
      rec.prob = forward_boundary(rec.cloud, net, ps, false, 0);
      save_pcb1(dst.string(), rec);
    }
  }
}

int cmd_predict(const PredictArgs &a) {
  NetConfig net = load_net_config((fs::path(a.model) / "net.config").string());
  ModelMeta meta = load_meta(a.model);
  if (meta.fp == 64)
    run_predict<double>(a, net, meta);
  else
    run_predict<float>(a, net, meta);
  write_snapshot(a.out, "predict",
                 {{"model", a.model},
                  {"inputs", std::to_string(a.inputs.size())},
                  {"checkpoint", a.final_ckpt ? "final" : "best"}});
  std::cout << "predict: wrote " << a.inputs.size() << " outputs to " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string pred;
  std::string curves;
  std::string out;
  double tau = -1;  // <0: use --threshold-file or default 0.5
  std::string threshold_file;
  std::vector<double> multiples = {1.0};
};

int cmd_eval(const EvalArgs &a) {
  double tau = 0.5;
  if (!a.threshold_file.empty()) {
    std::ifstream in(a.threshold_file);
    if (!in) throw ParseError("cannot open threshold file: " + a.threshold_file);
    tau = read_threshold(in).value;
  }
  if (a.tau >= 0) tau = a.tau;

  std::vector<std::vector<Vec3>> pred, gt;
  std::vector<double> eps;
  for (const auto &p : list_files(a.pred, ".pcb1")) {
    CloudRecord rec = load_pcb1(p.string());
    if (!rec.has_prob()) throw ParseError(p.string() + ": no probability channel (P)");
    fs::path crv = fs::path(a.curves) / p.filename().replace_extension(".crv1");
    if (!fs::exists(crv)) throw ParseError("missing curve file: " + crv.string());
    pred.push_back(select_boundary_points(rec.cloud, rec.prob, tau));
    gt.push_back(load_crv1(crv.string()));
    eps.push_back(compute_epsilon(rec.cloud));
  }

  fs::create_directories(a.out);
  auto reports = evaluate_sweep(pred, gt, eps, a.multiples);
  for (const auto &rep : reports) {
    std::ostringstream name;
    name << "report_m" << rep.tolerance_multiple << ".csv";
    std::ofstream out(fs::path(a.out) / name.str());
    write_report_csv(out, rep);
    std::cout << summarize(rep) << '\n';
  }
  {
    std::ofstream sw(fs::path(a.out) / "sweep.csv");
    write_sweep_csv(sw, reports);
  }
  std::ostringstream mults;
  for (size_t i = 0; i < a.multiples.size(); ++i) mults << (i ? "," : "") << a.multiples[i];
  write_snapshot(a.out, "eval",
                 {{"pred", a.pred},
                  {"curves", a.curves},
                  {"tau", num(tau)},
                  {"multiples", mults.str()}});
  return 0;
}

// ---------------------------------------------------------------------------
// segment

struct SegmentArgs {
  std::string input;
  std::string out;
  double tau = -1;  // <0: require the B channel
  int k = 4;
};

int cmd_segment(const SegmentArgs &a) {
  CloudRecord rec = load_pcb1(a.input);
  std::vector<uint8_t> flags;
  if (a.tau >= 0) {
    if (!rec.has_prob()) throw ParseError(a.input + ": --tau given but no P channel");
    for (double b : rec.prob) flags.push_back(b >= a.tau ? 1 : 0);
  } else {
    if (!rec.has_boundary()) throw ParseError(a.input + ": no B channel; pass --tau to threshold P");
    flags = rec.boundary;
  }
  std::vector<int> seg = flood_fill_segments(rec.cloud, flags, a.k);
  int parts = *std::max_element(seg.begin(), seg.end()) + 1;
  ensure_parent(a.out);
  save_lbl1(a.out, seg);
  write_snapshot(fs::path(a.out).parent_path(), "segment",
                 {{"input", a.input}, {"tau", num(a.tau)}, {"k", std::to_string(a.k)}});
  std::cout << "segment: " << parts << " segments\n";
  return 0;
}

// ---------------------------------------------------------------------------
// refine

struct RefineArgs {
  std::string input;
  std::string unary;
  std::string out;
  std::string report;
  double lambda = 0;
  double lambda_normal = 0;
  int k = 4;
};

int cmd_refine(const RefineArgs &a) {
  CloudRecord rec = load_pcb1(a.input);
  auto probs = load_unr1(a.unary);
  if (probs.size() != static_cast<size_t>(rec.cloud.size()))
    throw ParseError(a.unary + ": row count differs from the cloud");

  PairwiseMode mode = a.lambda_normal > 0
                          ? (a.lambda > 0 ? PairwiseMode::Both : PairwiseMode::Normal)
                          : PairwiseMode::Boundary;
  std::vector<double> bprob = rec.prob;
  if (bprob.empty()) {
    if (a.lambda > 0) throw ParseError(a.input + ": --lambda > 0 needs the P channel");
    bprob.assign(rec.cloud.size(), 0.0);
  }
  MrfProblem mrf = make_mrf(rec.cloud, probs, bprob, mode, a.lambda, a.lambda_normal, a.k);
  SolveResult res = solve_mrf(mrf);
  ensure_parent(a.out);
  save_lbl1(a.out, res.labels);

  if (rec.has_labels()) {
    IouResult iou = labeling_iou(res.labels, rec.labels, mrf.labels);
    fs::path rpt = a.report.empty() ? fs::path(a.out).replace_extension(".iou.csv")
                                    : fs::path(a.report);
    std::ofstream out(rpt);
    out << "label,iou\n";
    for (size_t l = 0; l < iou.per_label.size(); ++l)
      if (iou.per_label[l] >= 0) out << l << ',' << iou.per_label[l] << '\n';
    out << "shape," << iou.shape_iou << '\n';
    std::cout << "refine: shape IoU " << iou.shape_iou << '\n';
  }
  write_snapshot(fs::path(a.out).parent_path(), "refine",
                 {{"input", a.input},
                  {"unary", a.unary},
                  {"lambda", num(a.lambda)},
                  {"lambda_normal", num(a.lambda_normal)},
                  {"k", std::to_string(a.k)}});
  return 0;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateArgs {
  std::string pred;
  std::string curves;
  std::string out = "threshold.txt";
  double step = 0.01;
};

int cmd_calibrate(const CalibrateArgs &a) {
  std::vector<PointCloud> clouds;
  std::vector<std::vector<double>> probs;
  std::vector<std::vector<Vec3>> gt;
  for (const auto &p : list_files(a.pred, ".pcb1")) {
    CloudRecord rec = load_pcb1(p.string());
    if (!rec.has_prob()) throw ParseError(p.string() + ": no probability channel (P)");
    fs::path crv = fs::path(a.curves) / p.filename().replace_extension(".crv1");
    if (!fs::exists(crv)) throw ParseError("missing curve file: " + crv.string());
    clouds.push_back(rec.cloud);
    probs.push_back(rec.prob);
    gt.push_back(load_crv1(crv.string()));
  }
  Threshold t = calibrate_threshold(clouds, probs, gt, a.step);
  ensure_parent(a.out);
  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  write_threshold(out, t);
  write_snapshot(fs::path(a.out).parent_path(), "calibrate",
                 {{"pred", a.pred}, {"curves", a.curves}, {"step", num(a.step)}});
  std::cout << "calibrate: threshold " << t.value << '\n';
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"boundaryforge: part-boundary detection on point clouds"};
  app.require_subcommand(1);

  Global g;
  app.add_option("--seed", g.seed, "global random seed")
      ->envname("BOUNDARYFORGE_SEED")
      ->capture_default_str();
  app.add_option("--workers", g.workers, "worker hint (0 = available parallelism)")
      ->capture_default_str();
  app.set_config("--config", "", "flat key=value config file");

  GenArgs ga;
  auto *gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--template", ga.tmpl, "scene template name or 'mixed'")->capture_default_str();
  gen->add_option("--n", ga.n, "total shape count")->required();
  gen->add_option("--split", ga.split, "train/val/test percentages")->capture_default_str();
  gen->add_option("--points", ga.points, "surface samples per shape")->capture_default_str();
  gen->add_option("--boundary", ga.boundary, "injected boundary samples per training shape")
      ->capture_default_str();
  gen->add_option("--sigma", ga.sigma, "test split position noise")->capture_default_str();
  gen->add_option("--angle", ga.angle, "test split normal noise limit, degrees")
      ->capture_default_str();
  gen->add_option("--out", ga.out, "output directory")->required();

  TrainArgs ta;
  auto *tr = app.add_subcommand("train", "train a boundary or part model");
  tr->add_option("--data", ta.data, "dataset root with train/ and val/")->required();
  tr->add_option("--out", ta.out, "model output directory")->required();
  tr->add_option("--task", ta.task, "boundary or parts")
      ->check(CLI::IsMember({"boundary", "parts"}))
      ->capture_default_str();
  tr->add_option("--first-layer", ta.first_layer, "edgeconv, localedgeconv, localedgeconv_curv")
      ->check(CLI::IsMember({"edgeconv", "localedgeconv", "localedgeconv_curv"}))
      ->capture_default_str();
  tr->add_option("--k", ta.k, "graph neighborhood size")->capture_default_str();
  tr->add_flag("--no-normals", ta.no_normals, "positions-only input");
  tr->add_flag("--spatial-transformer", ta.spatial_transformer, "enable the input transformer");
  tr->add_flag("--fp64", ta.fp64, "train in 64-bit floats");
  tr->add_option("--epochs", ta.cfg.epochs)->capture_default_str();
  tr->add_option("--batch", ta.cfg.batch_size)->capture_default_str();
  tr->add_option("--lr", ta.cfg.lr)->capture_default_str();
  tr->add_option("--period", ta.cfg.lr_halving_period, "epochs between halvings")
      ->capture_default_str();
  tr->add_option("--sigma", ta.cfg.noise_sigma, "augmentation position noise")
      ->capture_default_str();
  tr->add_option("--angle", ta.cfg.noise_angle_deg, "augmentation normal noise, degrees")
      ->capture_default_str();
  tr->add_flag("--no-calibrate", ta.no_calibrate, "skip threshold calibration");
  tr->add_option("--calibrate-step", ta.calibrate_step)->capture_default_str();

  PredictArgs pa;
  auto *pr = app.add_subcommand("predict", "run a trained model on PCB1 clouds");
  pr->add_option("--model", pa.model, "model directory from train")->required();
  pr->add_option("--out", pa.out, "output directory")->required();
  pr->add_option("inputs", pa.inputs, "input .pcb1 files")->required();
  pr->add_flag("--final", pa.final_ckpt, "use the final checkpoint, not best-validation");

  EvalArgs ea;
  auto *ev = app.add_subcommand("eval", "score predictions against curve files");
  ev->add_option("--pred", ea.pred, "directory of predicted .pcb1 (P channel)")->required();
  ev->add_option("--curves", ea.curves, "directory of matching .crv1")->required();
  ev->add_option("--out", ea.out, "report directory")->required();
  ev->add_option("--tau", ea.tau, "binarization threshold (overrides --threshold-file)");
  ev->add_option("--threshold-file", ea.threshold_file, "threshold sidecar from calibrate");
  ev->add_option("--multiples", ea.multiples, "tolerance multiples of epsilon")
      ->capture_default_str();

  SegmentArgs sa;
  auto *sg = app.add_subcommand("segment", "watershed flood fill from boundary flags");
  sg->add_option("--input", sa.input, "input .pcb1")->required();
  sg->add_option("--out", sa.out, "output .lbl1")->required();
  sg->add_option("--tau", sa.tau, "threshold the P channel instead of using B");
  sg->add_option("--k", sa.k, "graph neighborhood size")->capture_default_str();

  RefineArgs ra;
  auto *rf = app.add_subcommand("refine", "graph-cut label refinement");
  rf->add_option("--input", ra.input, "input .pcb1 (P optional, L for the IoU report)")
      ->required();
  rf->add_option("--unary", ra.unary, "per-point label probabilities (.unr1)")->required();
  rf->add_option("--out", ra.out, "output .lbl1")->required();
  rf->add_option("--report", ra.report, "IoU report path (default <out>.iou.csv)");
  rf->add_option("--lambda", ra.lambda, "boundary pairwise weight")->capture_default_str();
  rf->add_option("--lambda-normal", ra.lambda_normal, "normal-angle pairwise weight")
      ->capture_default_str();
  rf->add_option("--k", ra.k, "graph neighborhood size")->capture_default_str();

  CalibrateArgs ca;
  auto *cl = app.add_subcommand("calibrate", "pick the boundary threshold on validation data");
  cl->add_option("--pred", ca.pred, "directory of predicted .pcb1 (P channel)")->required();
  cl->add_option("--curves", ca.curves, "directory of matching .crv1")->required();
  cl->add_option("--out", ca.out, "threshold sidecar path")->capture_default_str();
  cl->add_option("--step", ca.step, "grid step")->capture_default_str();

  // global options (--seed, --workers, --config) may appear after a subcommand
  for (auto *sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      if (ga.tmpl != "mixed") {
        try {
          scene_template(ga.tmpl);
        } catch (const std::invalid_argument &) {
          std::cerr << "unknown template '" << ga.tmpl << "'; available: mixed";
          for (const auto &nm : scene_template_names()) std::cerr << ", " << nm;
          std::cerr << '\n';
          return 2;
        }
      }
      return cmd_gen(g, ga);
    }
    if (tr->parsed()) return cmd_train(g, ta);
    if (pr->parsed()) return cmd_predict(pa);
    if (ev->parsed()) return cmd_eval(ea);
    if (sg->parsed()) return cmd_segment(sa);
    if (rf->parsed()) return cmd_refine(ra);
    if (cl->parsed()) return cmd_calibrate(ca);
  } catch (const ParseError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
