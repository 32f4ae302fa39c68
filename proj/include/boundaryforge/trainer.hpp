#pragma once

// Training loop (Adam + per-batch boundary weighting), augmentation policy,
// and boundary-threshold calibration.

#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "boundaryforge/metrics.hpp"
#include "boundaryforge/net.hpp"
#include "boundaryforge/synthgen.hpp"

namespace bforge {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 8;  // clouds per optimizer step
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int lr_halving_period = 10;  // epochs
  double noise_sigma = 0.005;
  double noise_angle_deg = 3.0;
  uint64_t seed = 0;

  void validate() const {
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs < 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch size < 1");
    if (!(lr >= 0)) throw std::invalid_argument("TrainConfig: lr < 0");
    if (lr_halving_period < 1) throw std::invalid_argument("TrainConfig: period < 1");
  }
};

enum class TrainTask { Boundary, Parts };

struct EpochLog {
  int epoch = 0;  // 0 = untrained evaluation, no steps taken
  double train_loss = 0;
  double val_loss = 0;
  double lr = 0;
};

template <typename T>
struct TrainResult {
  ParamSet<T> final_params;
  ParamSet<T> best_params;  // lowest validation loss
  std::vector<EpochLog> log;
  double best_val_loss = 0;
  int best_epoch = 0;
};

inline void write_train_log(std::ostream &out, const std::vector<EpochLog> &log) {
  out << "epoch,train_loss,val_loss,lr\n";
  for (const auto &e : log)
    out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.lr << '\n';
}

namespace detail {

inline int infer_labels(const std::vector<LabeledCloud> &a, const std::vector<LabeledCloud> &b) {
  int max_label = -1;
  for (const auto *set : {&a, &b})
    for (const auto &lc : *set)
      for (int l : lc.labels) max_label = std::max(max_label, l);
  if (max_label < 1) throw std::invalid_argument("train: parts task needs >= 2 labels");
  return max_label + 1;
}

// mean per-point loss of a cloud group in eval mode; boundary weight over the
// whole group
template <typename T>
double eval_loss(const std::vector<const LabeledCloud *> &clouds, const NetConfig &cfg,
                 ParamSet<T> &ps, TrainTask task, int n_labels, uint64_t frame_seed) {
  int64_t total_points = 0;
  std::vector<uint8_t> all_flags;
  for (const auto *lc : clouds) {
    total_points += lc->cloud.size();
    all_flags.insert(all_flags.end(), lc->boundary.begin(), lc->boundary.end());
  }
  double wb = 1.0;
  if (task == TrainTask::Boundary) {
    auto w = auto_boundary_weight(all_flags);
    if (!w) return 0.0;
    wb = *w;
  }
  double total = 0;
  for (const auto *lc : clouds) {
    Tape<T> tape;
    if (task == TrainTask::Boundary) {
      auto probs = forward_boundary_var(tape, lc->cloud, cfg, ps, /*train=*/false, frame_seed);
      total += tape.val(tape.weighted_bce(probs, lc->boundary, static_cast<T>(wb)))[0];
    } else {
      auto logits = forward_parts_logits_var(tape, lc->cloud, cfg, ps, n_labels, false, frame_seed);
      total += tape.val(tape.softmax_nll(logits, lc->labels))[0];
    }
  }
  return total / total_points;
}

}  // namespace detail

// One run of the training loop. Boundary task: per-batch w_b weighted BCE
// with noise augmentation and resampled tangent frames; Parts task: softmax
// cross-entropy over part labels. Epoch 0 in the log is the untrained model.
template <typename T = double>
TrainResult<T> train(const std::vector<LabeledCloud> &train_set,
                     const std::vector<LabeledCloud> &val_set, const NetConfig &net_cfg,
                     const TrainConfig &cfg, TrainTask task = TrainTask::Boundary,
                     int n_labels = 0) {
  cfg.validate();
  net_cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  if (task == TrainTask::Parts && n_labels == 0)
    n_labels = detail::infer_labels(train_set, val_set);

  // boundary task skips clouds with no boundary points
  std::vector<const LabeledCloud *> usable;
  for (const auto &lc : train_set) {
    bool has_boundary = false;
    for (auto b : lc.boundary) has_boundary = has_boundary || b;
    if (task == TrainTask::Parts || has_boundary)
      usable.push_back(&lc);
    else
      std::cerr << "train: skipping a cloud with zero boundary points\n";
  }
  if (usable.empty())
    throw std::runtime_error("train: every training cloud was skipped (no boundary points)");
  std::vector<const LabeledCloud *> val_ptr;
  for (const auto &lc : val_set) val_ptr.push_back(&lc);

  Rng rng(cfg.seed);
  TrainResult<T> res;
  int out_dim = task == TrainTask::Boundary ? 1 : n_labels;
  res.final_params = init_net_params<T>(net_cfg, out_dim, cfg.seed ^ 0xb5297a4d4be752e3ull);
  ParamSet<T> &ps = res.final_params;

  const uint64_t eval_frame_seed = 0;
  auto log_epoch = [&](int epoch, double train_loss, double lr_now) {
    EpochLog e;
    e.epoch = epoch;
    e.train_loss = train_loss;
    e.val_loss = val_ptr.empty()
                     ? 0.0
                     : detail::eval_loss(val_ptr, net_cfg, ps, task, n_labels, eval_frame_seed);
    e.lr = lr_now;
    res.log.push_back(e);
    if (res.log.size() == 1 || e.val_loss < res.best_val_loss) {
      res.best_val_loss = e.val_loss;
      res.best_epoch = epoch;
      res.best_params = ps;
    }
  };

  log_epoch(0, detail::eval_loss(usable, net_cfg, ps, task, n_labels, eval_frame_seed), cfg.lr);

  std::vector<int> order(usable.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double lr_now = cfg.lr * std::pow(0.5, (epoch - 1) / cfg.lr_halving_period);
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    int64_t epoch_points = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      size_t stop = std::min(order.size(), start + cfg.batch_size);
      // augment the batch with fresh noise
      std::vector<LabeledCloud> batch;
      int64_t batch_points = 0;
      for (size_t b = start; b < stop; ++b) {
        const LabeledCloud &src = *usable[order[b]];
        LabeledCloud aug = src;
        aug.cloud = perturb(src.cloud, cfg.noise_sigma, cfg.noise_angle_deg, rng());
        batch.push_back(std::move(aug));
        batch_points += src.cloud.size();
      }
      double wb = 1.0;
      std::vector<uint8_t> flags;
      if (task == TrainTask::Boundary) {
        for (const auto &lc : batch)
          flags.insert(flags.end(), lc.boundary.begin(), lc.boundary.end());
        auto w = auto_boundary_weight(flags);
        if (!w) continue;  // skip-batch signal: no boundary points at all
        wb = *w;
      }
      ps.zero_grad();
      // one joint forward so batch-norm statistics span the whole batch
      uint64_t frame_seed = rng();  // tangent frames resampled every pass
      std::vector<const PointCloud *> batch_clouds;
      for (const auto &lc : batch) batch_clouds.push_back(&lc.cloud);
      Tape<T> tape;
      typename Tape<T>::Var loss;
      if (task == TrainTask::Boundary) {
        auto probs = forward_boundary_batch_var(tape, batch_clouds, net_cfg, ps, /*train=*/true,
                                                frame_seed);
        loss = tape.weighted_bce(probs, flags, static_cast<T>(wb));
      } else {
        std::vector<int> labels;
        for (const auto &lc : batch)
          labels.insert(labels.end(), lc.labels.begin(), lc.labels.end());
        auto logits = forward_parts_logits_batch_var(tape, batch_clouds, net_cfg, ps, n_labels,
                                                     true, frame_seed);
        loss = tape.softmax_nll(logits, labels);
      }
      loss = tape.scale(loss, static_cast<T>(1.0 / batch_points));
      double batch_loss = static_cast<double>(tape.val(loss)[0]);
      tape.backward(loss);
      adam_step(ps, static_cast<T>(lr_now), static_cast<T>(cfg.beta1), static_cast<T>(cfg.beta2));
      epoch_loss += batch_loss * batch_points;
      epoch_points += batch_points;
    }
    log_epoch(epoch, epoch_points > 0 ? epoch_loss / epoch_points : 0.0, lr_now);
  }
  return res;
}

// ---------------------------------------------------------------------------
// threshold calibration

struct Threshold {
  double value = 0.5;
  std::string metric = "cd";
};

inline void write_threshold(std::ostream &out, const Threshold &t) {
  out << t.value << ' ' << t.metric << '\n';
}

inline Threshold read_threshold(std::istream &in) {
  Threshold t;
  if (!(in >> t.value >> t.metric)) throw std::runtime_error("threshold: malformed sidecar");
  if (t.value < 0 || t.value > 1) throw std::runtime_error("threshold: value outside [0,1]");
  return t;
}

// Dense grid search over tau in {0, step, ..., 1}: minimize the mean symmetric
// Chamfer distance of thresholded predictions; ties resolve to the smaller tau.
inline Threshold calibrate_threshold(const std::vector<PointCloud> &clouds,
                                     const std::vector<std::vector<double>> &probs,
                                     const std::vector<std::vector<Vec3>> &gt_curves,
                                     double grid_step = 0.01) {
  if (clouds.empty() || clouds.size() != probs.size() || clouds.size() != gt_curves.size())
    throw std::invalid_argument("calibrate_threshold: per-shape input counts differ");
  if (!(grid_step > 0) || grid_step > 1)
    throw std::invalid_argument("calibrate_threshold: bad grid step");
  Threshold best;
  double best_cd = std::numeric_limits<double>::infinity();
  for (int step = 0;; ++step) {
    double tau = step * grid_step;
    if (tau > 1 + 1e-12) break;
    tau = std::min(tau, 1.0);
    double cd = 0;
    for (size_t s = 0; s < clouds.size(); ++s)
      cd += chamfer(select_boundary_points(clouds[s], probs[s], tau), gt_curves[s]);
    cd /= clouds.size();
    if (cd < best_cd - 1e-15) {
      best_cd = cd;
      best.value = tau;
    }
    if (tau >= 1.0) break;
  }
  return best;
}

}  // namespace bforge
