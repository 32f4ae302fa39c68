#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <fstream>

#include "boundaryforge/trainer.hpp"

using namespace bforge;

namespace {

NetConfig tiny_net() {
  NetConfig cfg;
  cfg.k = 8;
  cfg.first_layer = FirstLayerKind::EdgeConv;
  cfg.use_normals = true;
  cfg.first_widths = {16, 16};
  cfg.ec2_widths = {16};
  cfg.ec3_widths = {16};
  cfg.global_width = 32;
  cfg.head_widths = {32, 16};
  return cfg;
}

std::vector<LabeledCloud> dihedral_set(int count, uint64_t seed0) {
  std::vector<LabeledCloud> out;
  PrimitiveScene scene = scene_template("dihedral");
  for (int i = 0; i < count; ++i)
    out.push_back(make_geometric_training_cloud(scene, 128, 32, seed0 + i));
  return out;
}

bool values_equal(const ParamSet<double> &a, const ParamSet<double> &b) {
  if (a.order != b.order) return false;
  for (const auto &name : a.order)
    if (a.at(name).value.v != b.at(name).value.v) return false;
  return true;
}

bool params_equal(const ParamSet<double> &a, const ParamSet<double> &b) {
  if (!values_equal(a, b) || a.stat_order != b.stat_order) return false;
  for (const auto &name : a.stat_order) {
    auto sa = a.stats.find(name)->second.v;
    auto sb = b.stats.find(name)->second.v;
    if (sa != sb) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("config validation") {
  TrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = TrainConfig{};
  bad.lr_halving_period = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = TrainConfig{};
  bad.epochs = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("zero learning rate leaves parameters at their initialization") {
  auto data = dihedral_set(2, 100);
  NetConfig net = tiny_net();
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 2;
  cfg.lr = 0;
  cfg.seed = 7;
  auto run = train(data, {}, net, cfg);
  TrainConfig none = cfg;
  none.epochs = 0;
  auto init = train(data, {}, net, none);
  // batch-norm running stats still move during train-mode forwards
  CHECK(values_equal(run.final_params, init.final_params));
}

TEST_CASE("epoch zero logs the untrained model's evaluation loss") {
  auto data = dihedral_set(2, 200);
  NetConfig net = tiny_net();
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 3;
  auto res = train(data, data, net, cfg);
  REQUIRE(res.log.size() == 1);
  CHECK(res.log[0].epoch == 0);
  CHECK(res.log[0].lr == cfg.lr);

  // recompute by hand: eval-mode forward at frame seed 0, boundary weight
  // over the whole set, loss per point
  std::vector<uint8_t> flags;
  int64_t points = 0;
  for (const auto &lc : data) {
    flags.insert(flags.end(), lc.boundary.begin(), lc.boundary.end());
    points += lc.cloud.size();
  }
  double wb = *auto_boundary_weight(flags);
  double total = 0;
  for (const auto &lc : data) {
    Tape<double> tape;
    auto probs = forward_boundary_var(tape, lc.cloud, net, res.final_params, false, 0);
    total += tape.val(tape.weighted_bce(probs, lc.boundary, wb))[0];
  }
  double expect = total / points;
  CHECK(res.log[0].train_loss == expect);
  CHECK(res.log[0].val_loss == expect);
}

TEST_CASE("training overfits a single shape") {
  auto data = dihedral_set(1, 300);
  NetConfig net = tiny_net();
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.batch_size = 1;
  cfg.lr = 0.003;
  cfg.noise_sigma = 0;       // no augmentation: pure memorization
  cfg.noise_angle_deg = 0;
  cfg.seed = 11;
  auto res = train(data, {}, net, cfg);
  REQUIRE(res.log.size() == static_cast<size_t>(cfg.epochs) + 1);
  double first = res.log.front().train_loss;
  double last = res.log.back().train_loss;
  INFO("first " << first << " last " << last);
  CHECK(last < 0.5 * first);
}

TEST_CASE("learning rate halves on schedule") {
  auto data = dihedral_set(1, 400);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.lr = 0.01;
  cfg.lr_halving_period = 2;
  cfg.seed = 1;
  auto res = train(data, {}, tiny_net(), cfg);
  // epochs 1,2 at lr; 3,4 at lr/2; 5 at lr/4
  CHECK(res.log[1].lr == 0.01);
  CHECK(res.log[2].lr == 0.01);
  CHECK(res.log[3].lr == 0.005);
  CHECK(res.log[4].lr == 0.005);
  CHECK(res.log[5].lr == 0.0025);
}

TEST_CASE("identical seeds give bit-identical runs") {
  auto data = dihedral_set(2, 500);
  auto val = dihedral_set(1, 510);
  NetConfig net = tiny_net();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 2;
  cfg.seed = 42;
  auto a = train(data, val, net, cfg);
  auto b = train(data, val, net, cfg);
  REQUIRE(a.log.size() == b.log.size());
  for (size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].train_loss == b.log[i].train_loss);
    CHECK(a.log[i].val_loss == b.log[i].val_loss);
  }
  CHECK(params_equal(a.final_params, b.final_params));
  CHECK(params_equal(a.best_params, b.best_params));
}

TEST_CASE("best parameters track the lowest validation loss") {
  auto data = dihedral_set(2, 600);
  auto val = dihedral_set(1, 610);
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.seed = 9;
  auto res = train(data, val, tiny_net(), cfg);
  double lo = res.log[0].val_loss;
  int lo_epoch = 0;
  for (const auto &e : res.log)
    if (e.val_loss < lo) {
      lo = e.val_loss;
      lo_epoch = e.epoch;
    }
  CHECK(res.best_val_loss == lo);
  CHECK(res.best_epoch == lo_epoch);
}

TEST_CASE("checkpoint round trip reproduces the forward pass") {
  auto data = dihedral_set(1, 700);
  NetConfig net = tiny_net();
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 5;

  // 32-bit parameters survive the 9-significant-digit checkpoint text exactly
  auto res32 = train<float>(data, {}, net, cfg);
  std::string path = "trainer_ckpt_roundtrip.ckpt1";
  save_ckpt1(path, res32.final_params);
  ParamSet<float> loaded32 = init_boundary_params<float>(net, 999);  // shapes only
  load_ckpt1(path, loaded32);
  auto a32 = forward_boundary(data[0].cloud, net, res32.final_params, false, 7);
  auto b32 = forward_boundary(data[0].cloud, net, loaded32, false, 7);
  REQUIRE(a32.size() == b32.size());
  for (size_t i = 0; i < a32.size(); ++i) CHECK(a32[i] == b32[i]);

  // 64-bit parameters are only stored to the same 9 digits
  auto res = train(data, {}, net, cfg);
  save_ckpt1(path, res.final_params);
  ParamSet<double> loaded = init_boundary_params<double>(net, 999);
  load_ckpt1(path, loaded);
  std::remove(path.c_str());
  auto a = forward_boundary(data[0].cloud, net, res.final_params, false, 7);
  auto b = forward_boundary(data[0].cloud, net, loaded, false, 7);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == Catch::Approx(b[i]).margin(1e-6));
}

TEST_CASE("a training set with no boundary points aborts") {
  auto data = dihedral_set(1, 800);
  std::fill(data[0].boundary.begin(), data[0].boundary.end(), uint8_t(0));
  CHECK_THROWS_AS(train(data, {}, tiny_net(), TrainConfig{}), std::runtime_error);
}

TEST_CASE("parts task learns a two-part labeling") {
  auto data = dihedral_set(1, 900);
  NetConfig net = tiny_net();
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 1;
  cfg.lr = 0.003;
  cfg.noise_sigma = 0;
  cfg.noise_angle_deg = 0;
  cfg.seed = 13;
  auto res = train(data, {}, net, cfg, TrainTask::Parts);
  CHECK(res.log.back().train_loss < 0.5 * res.log.front().train_loss);
  auto probs = forward_parts(data[0].cloud, net, res.final_params, 2, false, 0);
  int correct = 0;
  for (int i = 0; i < data[0].cloud.size(); ++i) {
    int arg = probs[i][1] > probs[i][0] ? 1 : 0;
    if (arg == data[0].labels[i]) ++correct;
  }
  CHECK(correct > 0.8 * data[0].cloud.size());
}

TEST_CASE("train log CSV layout") {
  std::vector<EpochLog> log = {{0, 0.5, 0.6, 0.001}, {1, 0.4, 0.55, 0.001}};
  std::ostringstream ss;
  write_train_log(ss, log);
  CHECK(ss.str() == "epoch,train_loss,val_loss,lr\n0,0.5,0.6,0.001\n1,0.4,0.55,0.001\n");
}

// --------------------------------------------------------------------------
// threshold calibration

namespace {

// a line of points; the middle third flagged as boundary
struct CalCase {
  PointCloud cloud;
  std::vector<double> exact_probs;  // b = t-hat
  std::vector<Vec3> gt;
};

CalCase line_case(int n) {
  CalCase c;
  for (int i = 0; i < n; ++i) {
    Vec3 p{-1.0 + 2.0 * i / (n - 1), 0, 0};
    c.cloud.positions.push_back(p);
    c.cloud.normals.push_back({0, 0, 1});
    bool b = i >= n / 3 && i < 2 * n / 3;
    c.exact_probs.push_back(b ? 1.0 : 0.0);
    if (b) c.gt.push_back(p);
  }
  return c;
}

}  // namespace

TEST_CASE("calibration on an exact model returns the smallest positive grid value") {
  CalCase c = line_case(30);
  Threshold t = calibrate_threshold({c.cloud}, {c.exact_probs}, {c.gt}, 0.05);
  CHECK(t.value == Catch::Approx(0.05).margin(1e-12));
  Threshold fine = calibrate_threshold({c.cloud}, {c.exact_probs}, {c.gt}, 0.01);
  CHECK(fine.value == Catch::Approx(0.01).margin(1e-12));
}

TEST_CASE("calibration tie among all grid values resolves to zero") {
  CalCase c = line_case(12);
  std::vector<double> ones(c.cloud.size(), 1.0);
  std::vector<Vec3> gt = c.cloud.positions;  // every point is boundary
  Threshold t = calibrate_threshold({c.cloud}, {ones}, {gt}, 0.1);
  CHECK(t.value == 0.0);
}

TEST_CASE("calibration grid includes tau = 1") {
  CalCase c = line_case(30);
  std::vector<double> probs;
  for (double b : c.exact_probs) probs.push_back(b == 1.0 ? 1.0 : 0.995);
  Threshold t = calibrate_threshold({c.cloud}, {probs}, {c.gt}, 0.01);
  CHECK(t.value == 1.0);
}

TEST_CASE("calibration matches a duplicated grid search on a noisy model") {
  Rng rng(17);
  CalCase c = line_case(40);
  std::vector<double> probs;
  for (double b : c.exact_probs)
    probs.push_back(std::clamp(b + 0.6 * (uniform01(rng) - 0.5), 0.0, 1.0));
  double step = 0.1;
  Threshold t = calibrate_threshold({c.cloud}, {probs}, {c.gt}, step);
  double best_cd = std::numeric_limits<double>::infinity(), best_tau = 0;
  for (int i = 0; i <= 10; ++i) {
    double tau = i * step;
    double cd = chamfer(select_boundary_points(c.cloud, probs, tau), c.gt);
    if (cd < best_cd - 1e-15) {
      best_cd = cd;
      best_tau = tau;
    }
  }
  CHECK(t.value == best_tau);
}

TEST_CASE("calibration input validation") {
  CalCase c = line_case(10);
  CHECK_THROWS_AS(calibrate_threshold({}, {}, {}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_threshold({c.cloud}, {}, {c.gt}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_threshold({c.cloud}, {c.exact_probs}, {c.gt}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("threshold sidecar round trip") {
  Threshold t{0.37, "cd"};
  std::ostringstream ss;
  write_threshold(ss, t);
  std::istringstream in(ss.str());
  Threshold back = read_threshold(in);
  CHECK(back.value == 0.37);
  CHECK(back.metric == "cd");
  std::istringstream bad("1.5 cd");
  CHECK_THROWS_AS(read_threshold(bad), std::runtime_error);
}
