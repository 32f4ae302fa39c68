#pragma once

// Tolerance-based boundary evaluation: precision / recall / F1, boundary IoU,
// and symmetric Chamfer distance, per shape and averaged.

#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "boundaryforge/cloud.hpp"
#include "boundaryforge/kdtree.hpp"

namespace bforge {

// Chamfer sentinel when either set is empty: unit-sphere diameter, in the
// x100 reporting convention.
inline constexpr double kChamferSentinel = 200.0;

namespace detail {

inline KdTree tree_of(const std::vector<Vec3> &pts) {
  std::vector<double> flat;
  flat.reserve(pts.size() * 3);
  for (const auto &p : pts) {
    flat.push_back(p[0]);
    flat.push_back(p[1]);
    flat.push_back(p[2]);
  }
  return KdTree(flat, 3);
}

inline int matched_count(const std::vector<Vec3> &pts, const KdTree &other, double tol) {
  int matched = 0;
  for (const auto &p : pts) {
    const double q[3] = {p[0], p[1], p[2]};
    if (other.any_within(q, tol)) ++matched;
  }
  return matched;
}

inline double mean_nearest(const std::vector<Vec3> &pts, const KdTree &other) {
  double sum = 0;
  for (const auto &p : pts) {
    const double q[3] = {p[0], p[1], p[2]};
    sum += std::sqrt(other.nearest_dist2(q));
  }
  return sum / pts.size();
}

}  // namespace detail

// Fraction of predicted points within tol of the ground-truth set. An empty
// prediction is vacuously perfect; an empty ground truth makes the question
// ill-posed and scores 0 with a warning.
inline double precision(const std::vector<Vec3> &predicted, const std::vector<Vec3> &gt,
                        double tol) {
  if (!(tol > 0)) throw std::invalid_argument("precision: tol must be > 0");
  if (predicted.empty()) return 1.0;
  if (gt.empty()) {
    std::cerr << "precision: empty ground-truth set, scoring 0\n";
    return 0.0;
  }
  KdTree tree = detail::tree_of(gt);
  return static_cast<double>(detail::matched_count(predicted, tree, tol)) / predicted.size();
}

// Fraction of ground-truth samples within tol of any predicted point.
inline double recall(const std::vector<Vec3> &predicted, const std::vector<Vec3> &gt, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("recall: tol must be > 0");
  if (gt.empty()) {
    std::cerr << "recall: empty ground-truth set, vacuously 1\n";
    return 1.0;
  }
  if (predicted.empty()) return 0.0;
  KdTree tree = detail::tree_of(predicted);
  return static_cast<double>(detail::matched_count(gt, tree, tol)) / gt.size();
}

inline double f1(double p, double r) {
  if (p < 0 || p > 1 || r < 0 || r > 1) throw std::invalid_argument("f1: inputs outside [0,1]");
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

// Symmetric matched-fraction overlap: points of either set matched within tol
// of the other, over the total point count.
inline double boundary_iou(const std::vector<Vec3> &predicted, const std::vector<Vec3> &gt,
                           double tol) {
  if (!(tol > 0)) throw std::invalid_argument("boundary_iou: tol must be > 0");
  if (predicted.empty() && gt.empty()) return 1.0;
  if (predicted.empty() || gt.empty()) return 0.0;
  KdTree ptree = detail::tree_of(predicted);
  KdTree gtree = detail::tree_of(gt);
  int matched = detail::matched_count(predicted, gtree, tol) +
                detail::matched_count(gt, ptree, tol);
  return static_cast<double>(matched) / (predicted.size() + gt.size());
}

// Symmetric Chamfer distance x100 (unit-sphere coordinates).
inline double chamfer(const std::vector<Vec3> &a, const std::vector<Vec3> &b) {
  if (a.empty() || b.empty()) return kChamferSentinel;
  KdTree atree = detail::tree_of(a);
  KdTree btree = detail::tree_of(b);
  return 50.0 * (detail::mean_nearest(a, btree) + detail::mean_nearest(b, atree));
}

// Binarize a per-point boundary field: predicted boundary points have
// probability >= tau, so tau = 0 selects every point.
inline std::vector<Vec3> select_boundary_points(const PointCloud &cloud,
                                                const std::vector<double> &prob, double tau) {
  if (static_cast<int>(prob.size()) != cloud.size())
    throw std::invalid_argument("select_boundary_points: size mismatch");
  std::vector<Vec3> out;
  for (int i = 0; i < cloud.size(); ++i)
    if (prob[i] >= tau) out.push_back(cloud.positions[i]);
  return out;
}

struct ShapeEval {
  double p = 0, r = 0, f1 = 0, biou = 0, cd = 0;
  double epsilon = 0;
  bool vacuous = false;  // an empty-set convention fired
};

struct EvalReport {
  double tolerance_multiple = 1.0;
  std::vector<ShapeEval> shapes;
  ShapeEval mean;
};

// Per-shape metrics at tolerance m*epsilon, then the arithmetic mean over
// shapes. The mean row's F1 is the harmonic mean of the mean P and R.
inline EvalReport evaluate(const std::vector<std::vector<Vec3>> &predicted,
                           const std::vector<std::vector<Vec3>> &gt,
                           const std::vector<double> &epsilons, double tolerance_multiple) {
  if (predicted.size() != gt.size() || predicted.size() != epsilons.size())
    throw std::invalid_argument("evaluate: per-shape input counts differ");
  if (predicted.empty()) throw std::invalid_argument("evaluate: no shapes");
  EvalReport rep;
  rep.tolerance_multiple = tolerance_multiple;
  for (size_t s = 0; s < predicted.size(); ++s) {
    ShapeEval e;
    e.epsilon = epsilons[s];
    double tol = tolerance_multiple * epsilons[s];
    if (!(tol > 0)) throw std::invalid_argument("evaluate: nonpositive tolerance");
    e.p = precision(predicted[s], gt[s], tol);
    e.r = recall(predicted[s], gt[s], tol);
    e.f1 = f1(e.p, e.r);
    e.biou = boundary_iou(predicted[s], gt[s], tol);
    e.cd = chamfer(predicted[s], gt[s]);
    e.vacuous = predicted[s].empty() || gt[s].empty();
    rep.shapes.push_back(e);
    rep.mean.p += e.p;
    rep.mean.r += e.r;
    rep.mean.biou += e.biou;
    rep.mean.cd += e.cd;
    rep.mean.epsilon += e.epsilon;
    rep.mean.vacuous = rep.mean.vacuous || e.vacuous;
  }
  double n = static_cast<double>(rep.shapes.size());
  rep.mean.p /= n;
  rep.mean.r /= n;
  rep.mean.biou /= n;
  rep.mean.cd /= n;
  rep.mean.epsilon /= n;
  rep.mean.f1 = f1(rep.mean.p, rep.mean.r);
  return rep;
}

inline std::vector<EvalReport> evaluate_sweep(const std::vector<std::vector<Vec3>> &predicted,
                                              const std::vector<std::vector<Vec3>> &gt,
                                              const std::vector<double> &epsilons,
                                              const std::vector<double> &multiples) {
  std::vector<EvalReport> out;
  for (double m : multiples) out.push_back(evaluate(predicted, gt, epsilons, m));
  return out;
}

inline void write_report_csv(std::ostream &out, const EvalReport &rep) {
  out << "shape,tolerance_multiple,precision,recall,f1,biou,cd,epsilon,vacuous\n";
  auto row = [&](const std::string &name, const ShapeEval &e) {
    out << name << ',' << rep.tolerance_multiple << ',' << e.p << ',' << e.r << ',' << e.f1 << ','
        << e.biou << ',' << e.cd << ',' << e.epsilon << ',' << (e.vacuous ? 1 : 0) << '\n';
  };
  for (size_t s = 0; s < rep.shapes.size(); ++s) row(std::to_string(s), rep.shapes[s]);
  row("mean", rep.mean);
}

inline void write_sweep_csv(std::ostream &out, const std::vector<EvalReport> &reports) {
  out << "tolerance_multiple,precision,recall,f1,biou,cd\n";
  for (const auto &rep : reports)
    out << rep.tolerance_multiple << ',' << rep.mean.p << ',' << rep.mean.r << ',' << rep.mean.f1
        << ',' << rep.mean.biou << ',' << rep.mean.cd << '\n';
}

inline std::string summarize(const EvalReport &rep) {
  std::ostringstream ss;
  ss << "shapes=" << rep.shapes.size() << " m=" << rep.tolerance_multiple
     << " P=" << rep.mean.p << " R=" << rep.mean.r << " F1=" << rep.mean.f1
     << " bIoU=" << rep.mean.biou << " CD=" << rep.mean.cd;
  if (rep.mean.vacuous) ss << " [vacuous]";
  return ss.str();
}

}  // namespace bforge
