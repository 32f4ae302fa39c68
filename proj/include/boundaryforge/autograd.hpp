#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "boundaryforge/cloud.hpp"
#include "boundaryforge/geom.hpp"

namespace bforge {

template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(numel_of(shape), T(0));
  }
  Tensor(std::vector<int> s, std::vector<T> data) : shape(std::move(s)), v(std::move(data)) {
    if (static_cast<size_t>(numel_of(shape)) != v.size())
      throw std::invalid_argument("Tensor: value count does not match shape");
  }

  static int64_t numel_of(const std::vector<int> &s) {
    int64_t n = 1;
    for (int d : s) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  int64_t numel() const { return static_cast<int64_t>(v.size()); }
  int dim(int i) const { return shape[i]; }
  int ndim() const { return static_cast<int>(shape.size()); }
  int last_dim() const { return shape.empty() ? 1 : shape.back(); }
  int64_t rows() const { return last_dim() ? numel() / last_dim() : 0; }

  T &operator[](int64_t i) { return v[i]; }
  const T &operator[](int64_t i) const { return v[i]; }
};

// ---------------------------------------------------------------------------
// Parameters and optimizer state.

template <typename T>
struct Param {
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> adam_m, adam_v;
  bool grad_ready = false;
};

template <typename T>
struct ParamSet {
  std::vector<std::string> order;
  std::map<std::string, Param<T>> params;
  std::vector<std::string> stat_order;
  std::map<std::string, Tensor<T>> stats;  // running batch-norm statistics
  int64_t step = 0;

  Param<T> &add(const std::string &name, Tensor<T> init) {
    if (params.count(name)) throw std::invalid_argument("ParamSet: duplicate name " + name);
    Param<T> p;
    p.grad = Tensor<T>(init.shape);
    p.adam_m = Tensor<T>(init.shape);
    p.adam_v = Tensor<T>(init.shape);
    p.value = std::move(init);
    order.push_back(name);
    return params.emplace(name, std::move(p)).first->second;
  }
  Tensor<T> &add_stat(const std::string &name, Tensor<T> init) {
    if (stats.count(name)) throw std::invalid_argument("ParamSet: duplicate stat " + name);
    stat_order.push_back(name);
    return stats.emplace(name, std::move(init)).first->second;
  }
  Param<T> &at(const std::string &name) {
    auto it = params.find(name);
    if (it == params.end()) throw std::invalid_argument("ParamSet: unknown param " + name);
    return it->second;
  }
  const Param<T> &at(const std::string &name) const {
    auto it = params.find(name);
    if (it == params.end()) throw std::invalid_argument("ParamSet: unknown param " + name);
    return it->second;
  }
  Tensor<T> &stat(const std::string &name) {
    auto it = stats.find(name);
    if (it == stats.end()) throw std::invalid_argument("ParamSet: unknown stat " + name);
    return it->second;
  }
  bool has(const std::string &name) const { return params.count(name) > 0; }

  void zero_grad() {
    for (auto &kv : params) {
      std::fill(kv.second.grad.v.begin(), kv.second.grad.v.end(), T(0));
      kv.second.grad_ready = false;
    }
  }
};

// Standard bias-corrected Adam update; one shared step counter.
template <typename T>
void adam_step(ParamSet<T> &ps, T lr, T beta1 = T(0.9), T beta2 = T(0.999),
               T eps_adam = T(1e-8)) {
  for (const auto &name : ps.order)
    if (!ps.at(name).grad_ready)
      throw std::logic_error("adam_step: gradient missing for " + name);
  ps.step += 1;
  T bc1 = T(1) - std::pow(beta1, static_cast<T>(ps.step));
  T bc2 = T(1) - std::pow(beta2, static_cast<T>(ps.step));
  for (const auto &name : ps.order) {
    Param<T> &p = ps.at(name);
    for (int64_t i = 0; i < p.value.numel(); ++i) {
      T g = p.grad[i];
      p.adam_m[i] = beta1 * p.adam_m[i] + (T(1) - beta1) * g;
      p.adam_v[i] = beta2 * p.adam_v[i] + (T(1) - beta2) * g * g;
      T mhat = p.adam_m[i] / bc1;
      T vhat = p.adam_v[i] / bc2;
      p.value[i] -= lr * mhat / (std::sqrt(vhat) + eps_adam);
    }
  }
}

// ---------------------------------------------------------------------------
// Reverse-mode tape.

template <typename T>
class Tape {
 public:
  using Var = int;

  Var input(Tensor<T> t, bool needs_grad = false) {
    return push(std::move(t), needs_grad, nullptr);
  }

  // Leaf bound to a ParamSet entry; backward accumulates into the param grad.
  Var param(Param<T> &p) {
    Var id = push(p.value, true, nullptr);
    Param<T> *pp = &p;
    nodes_[id].back = [this, id, pp]() {
      const Tensor<T> &g = nodes_[id].grad;
      for (int64_t i = 0; i < g.numel(); ++i) pp->grad[i] += g[i];
      pp->grad_ready = true;
    };
    return id;
  }

  const Tensor<T> &val(Var id) const { return nodes_[id].val; }
  const Tensor<T> &grad(Var id) const { return nodes_[id].grad; }

  // C = A * B with A:[M,K], B:[K,N]; leading dims of A beyond the last are
  // flattened into M.
  Var matmul(Var a, Var b) {
    const Tensor<T> &ta = nodes_[a].val, &tb = nodes_[b].val;
    if (tb.ndim() != 2) throw std::invalid_argument("matmul: rhs must be 2-D");
    int k = tb.dim(0), n = tb.dim(1);
    if (ta.last_dim() != k) throw std::invalid_argument("matmul: inner dimension mismatch");
    int64_t m = ta.rows();
    std::vector<int> out_shape(ta.shape.begin(), ta.shape.end() - 1);
    out_shape.push_back(n);
    Tensor<T> out(out_shape);
    gemm(ta.v.data(), tb.v.data(), out.v.data(), m, k, n);
    Var id = push(std::move(out), needs(a) || needs(b), nullptr);
    nodes_[id].back = [this, id, a, b, m, k, n]() {
      const T *dc = nodes_[id].grad.v.data();
      if (needs(a)) {
        const T *bv = nodes_[b].val.v.data();
        T *da = nodes_[a].grad.v.data();
        for (int64_t i = 0; i < m; ++i)
          for (int kk = 0; kk < k; ++kk) {
            T s = 0;
            const T *dr = dc + i * n;
            const T *br = bv + static_cast<int64_t>(kk) * n;
            for (int j = 0; j < n; ++j) s += dr[j] * br[j];
            da[i * k + kk] += s;
          }
      }
      if (needs(b)) {
        const T *av = nodes_[a].val.v.data();
        T *db = nodes_[b].grad.v.data();
        for (int64_t i = 0; i < m; ++i)
          for (int kk = 0; kk < k; ++kk) {
            T s = av[i * k + kk];
            if (s == T(0)) continue;
            const T *dr = dc + i * n;
            T *dbr = db + static_cast<int64_t>(kk) * n;
            for (int j = 0; j < n; ++j) dbr[j] += s * dr[j];
          }
      }
    };
    return id;
  }

  // Broadcast-add a [F] bias over the last dimension.
  Var add_bias(Var x, Var b) {
    const Tensor<T> &tx = nodes_[x].val, &tb = nodes_[b].val;
    int f = tx.last_dim();
    if (tb.numel() != f) throw std::invalid_argument("add_bias: width mismatch");
    Tensor<T> out = tx;
    int64_t rows = tx.rows();
    for (int64_t r = 0; r < rows; ++r)
      for (int j = 0; j < f; ++j) out[r * f + j] += tb[j];
    Var id = push(std::move(out), needs(x) || needs(b), nullptr);
    nodes_[id].back = [this, id, x, b, rows, f]() {
      const Tensor<T> &g = nodes_[id].grad;
      if (needs(x))
        for (int64_t i = 0; i < g.numel(); ++i) nodes_[x].grad[i] += g[i];
      if (needs(b))
        for (int64_t r = 0; r < rows; ++r)
          for (int j = 0; j < f; ++j) nodes_[b].grad[j] += g[r * f + j];
    };
    return id;
  }

  Var add(Var a, Var b) {
    const Tensor<T> &ta = nodes_[a].val, &tb = nodes_[b].val;
    if (ta.numel() != tb.numel()) throw std::invalid_argument("add: size mismatch");
    Tensor<T> out = ta;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] += tb[i];
    Var id = push(std::move(out), needs(a) || needs(b), nullptr);
    nodes_[id].back = [this, id, a, b]() {
      const Tensor<T> &g = nodes_[id].grad;
      if (needs(a))
        for (int64_t i = 0; i < g.numel(); ++i) nodes_[a].grad[i] += g[i];
      if (needs(b))
        for (int64_t i = 0; i < g.numel(); ++i) nodes_[b].grad[i] += g[i];
    };
    return id;
  }

  Var scale(Var x, T s) {
    Tensor<T> out = nodes_[x].val;
    for (auto &e : out.v) e *= s;
    Var id = push(std::move(out), needs(x), nullptr);
    nodes_[id].back = [this, id, x, s]() {
      if (!needs(x)) return;
      const Tensor<T> &g = nodes_[id].grad;
      for (int64_t i = 0; i < g.numel(); ++i) nodes_[x].grad[i] += s * g[i];
    };
    return id;
  }

  Var leaky_relu(Var x, T slope) {
    Tensor<T> out = nodes_[x].val;
    for (auto &e : out.v)
      if (e < T(0)) e *= slope;
    Var id = push(std::move(out), needs(x), nullptr);
    nodes_[id].back = [this, id, x, slope]() {
      if (!needs(x)) return;
      const Tensor<T> &g = nodes_[id].grad;
      const Tensor<T> &xv = nodes_[x].val;
      for (int64_t i = 0; i < g.numel(); ++i)
        nodes_[x].grad[i] += (xv[i] >= T(0) ? g[i] : slope * g[i]);
    };
    return id;
  }

  Var sigmoid(Var x) {
    Tensor<T> out = nodes_[x].val;
    for (auto &e : out.v) e = T(1) / (T(1) + std::exp(-e));
    Var id = push(std::move(out), needs(x), nullptr);
    nodes_[id].back = [this, id, x]() {
      if (!needs(x)) return;
      const Tensor<T> &g = nodes_[id].grad;
      const Tensor<T> &y = nodes_[id].val;
      for (int64_t i = 0; i < g.numel(); ++i) nodes_[x].grad[i] += g[i] * y[i] * (T(1) - y[i]);
    };
    return id;
  }

  // Row-wise softmax over the last dimension.
  Var softmax_rows(Var x) {
    const Tensor<T> &tx = nodes_[x].val;
    int f = tx.last_dim();
    int64_t rows = tx.rows();
    Tensor<T> out = tx;
    for (int64_t r = 0; r < rows; ++r) {
      T *row = out.v.data() + r * f;
      T mx = row[0];
      for (int j = 1; j < f; ++j) mx = std::max(mx, row[j]);
      T s = 0;
      for (int j = 0; j < f; ++j) {
        row[j] = std::exp(row[j] - mx);
        s += row[j];
      }
      for (int j = 0; j < f; ++j) row[j] /= s;
    }
    Var id = push(std::move(out), needs(x), nullptr);
    nodes_[id].back = [this, id, x, rows, f]() {
      if (!needs(x)) return;
      const Tensor<T> &g = nodes_[id].grad;
      const Tensor<T> &y = nodes_[id].val;
      for (int64_t r = 0; r < rows; ++r) {
        T dotv = 0;
        for (int j = 0; j < f; ++j) dotv += g[r * f + j] * y[r * f + j];
        for (int j = 0; j < f; ++j)
          nodes_[x].grad[r * f + j] += y[r * f + j] * (g[r * f + j] - dotv);
      }
    };
    return id;
  }

  // Batch normalization over the channel (last) dimension. In train mode the
  // batch statistics normalize and update the running stats in place; eval
  // mode uses the running stats.
  Var batchnorm(Var x, Var gamma, Var beta, Tensor<T> &run_mean, Tensor<T> &run_var, bool train,
                T momentum = T(0.5), T eps = T(1e-5)) {
    const Tensor<T> &tx = nodes_[x].val;
    int f = tx.last_dim();
    int64_t rows = tx.rows();
    if (nodes_[gamma].val.numel() != f || run_mean.numel() != f)
      throw std::invalid_argument("batchnorm: channel mismatch");
    std::vector<T> mean(f, T(0)), var(f, T(0));
    if (train) {
      for (int64_t r = 0; r < rows; ++r)
        for (int j = 0; j < f; ++j) mean[j] += tx[r * f + j];
      for (int j = 0; j < f; ++j) mean[j] /= static_cast<T>(rows);
      for (int64_t r = 0; r < rows; ++r)
        for (int j = 0; j < f; ++j) {
          T d = tx[r * f + j] - mean[j];
          var[j] += d * d;
        }
      for (int j = 0; j < f; ++j) var[j] /= static_cast<T>(rows);
      for (int j = 0; j < f; ++j) {
        run_mean[j] = momentum * run_mean[j] + (T(1) - momentum) * mean[j];
        run_var[j] = momentum * run_var[j] + (T(1) - momentum) * var[j];
      }
    } else {
      for (int j = 0; j < f; ++j) {
        mean[j] = run_mean[j];
        var[j] = run_var[j];
      }
    }
    std::vector<T> istd(f);
    for (int j = 0; j < f; ++j) istd[j] = T(1) / std::sqrt(var[j] + eps);
    const Tensor<T> &gam = nodes_[gamma].val;
    const Tensor<T> &bet = nodes_[beta].val;
    Tensor<T> out(tx.shape);
    Tensor<T> xhat(tx.shape);
    for (int64_t r = 0; r < rows; ++r)
      for (int j = 0; j < f; ++j) {
        T xh = (tx[r * f + j] - mean[j]) * istd[j];
        xhat[r * f + j] = xh;
        out[r * f + j] = gam[j] * xh + bet[j];
      }
    Var id = push(std::move(out), needs(x) || needs(gamma) || needs(beta), nullptr);
    auto xh_store = std::make_shared<Tensor<T>>(std::move(xhat));
    auto istd_store = std::make_shared<std::vector<T>>(std::move(istd));
    nodes_[id].back = [this, id, x, gamma, beta, rows, f, train, xh_store, istd_store]() {
      const Tensor<T> &g = nodes_[id].grad;
      const Tensor<T> &xh = *xh_store;
      const std::vector<T> &is = *istd_store;
      const Tensor<T> &gam = nodes_[gamma].val;
      if (needs(gamma))
        for (int64_t r = 0; r < rows; ++r)
          for (int j = 0; j < f; ++j) nodes_[gamma].grad[j] += g[r * f + j] * xh[r * f + j];
      if (needs(beta))
        for (int64_t r = 0; r < rows; ++r)
          for (int j = 0; j < f; ++j) nodes_[beta].grad[j] += g[r * f + j];
      if (!needs(x)) return;
      if (!train) {
        for (int64_t r = 0; r < rows; ++r)
          for (int j = 0; j < f; ++j) nodes_[x].grad[r * f + j] += g[r * f + j] * gam[j] * is[j];
        return;
      }
      std::vector<T> sum_dy(f, T(0)), sum_dy_xh(f, T(0));
      for (int64_t r = 0; r < rows; ++r)
        for (int j = 0; j < f; ++j) {
          T dy = g[r * f + j] * gam[j];
          sum_dy[j] += dy;
          sum_dy_xh[j] += dy * xh[r * f + j];
        }
      T inv_n = T(1) / static_cast<T>(rows);
      for (int64_t r = 0; r < rows; ++r)
        for (int j = 0; j < f; ++j) {
          T dy = g[r * f + j] * gam[j];
          nodes_[x].grad[r * f + j] +=
              is[j] * (dy - inv_n * sum_dy[j] - xh[r * f + j] * inv_n * sum_dy_xh[j]);
        }
    };
    return id;
  }

  // [N,k,F] -> [N,F] max over the middle axis; ties take the lowest index.
  Var maxpool_mid(Var x) {
    const Tensor<T> &tx = nodes_[x].val;
    if (tx.ndim() != 3) throw std::invalid_argument("maxpool_mid: need a 3-D tensor");
    int n = tx.dim(0), k = tx.dim(1), f = tx.dim(2);
    Tensor<T> out({n, f});
    auto arg = std::make_shared<std::vector<int>>(static_cast<size_t>(n) * f, 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < f; ++j) {
        T best = tx[(static_cast<int64_t>(i) * k) * f + j];
        int bi = 0;
        for (int e = 1; e < k; ++e) {
          T v = tx[(static_cast<int64_t>(i) * k + e) * f + j];
          if (v > best) {
            best = v;
            bi = e;
          }
        }
        out[static_cast<int64_t>(i) * f + j] = best;
        (*arg)[static_cast<size_t>(i) * f + j] = bi;
      }
    Var id = push(std::move(out), needs(x), nullptr);
    nodes_[id].back = [this, id, x, n, k, f, arg]() {
      if (!needs(x)) return;
      const Tensor<T> &g = nodes_[id].grad;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < f; ++j) {
          int e = (*arg)[static_cast<size_t>(i) * f + j];
          nodes_[x].grad[(static_cast<int64_t>(i) * k + e) * f + j] +=
              g[static_cast<int64_t>(i) * f + j];
        }
    };
    return id;
  }

  // [N,F] -> [F] max over points; ties take the lowest index.
  Var global_maxpool(Var x) {
    const Tensor<T> &tx = nodes_[x].val;
    if (tx.ndim() != 2) throw std::invalid_argument("global_maxpool: need a 2-D tensor");
    int n = tx.dim(0), f = tx.dim(1);
    Tensor<T> out({f});
    auto arg = std::make_shared<std::vector<int>>(f, 0);
    for (int j = 0; j < f; ++j) {
      T best = tx[j];
      int bi = 0;
      for (int i = 1; i < n; ++i) {
        T v = tx[static_cast<int64_t>(i) * f + j];
        if (v > best) {
          best = v;
          bi = i;
        }
      }
      out[j] = best;
      (*arg)[j] = bi;
    }
    Var id = push(std::move(out), needs(x), nullptr);
    nodes_[id].back = [this, id, x, f, arg]() {
      if (!needs(x)) return;
      const Tensor<T> &g = nodes_[id].grad;
      for (int j = 0; j < f; ++j)
        nodes_[x].grad[static_cast<int64_t>((*arg)[j]) * f + j] += g[j];
    };
    return id;
  }

  // Concatenate 2-D tensors [Ni,F] along the row axis.
  Var concat_rows(const std::vector<Var> &xs) {
    if (xs.empty()) throw std::invalid_argument("concat_rows: empty");
    int f = nodes_[xs[0]].val.dim(1);
    int ntot = 0;
    bool ng = false;
    for (Var x : xs) {
      const Tensor<T> &t = nodes_[x].val;
      if (t.ndim() != 2 || t.dim(1) != f) throw std::invalid_argument("concat_rows: shape mismatch");
      ntot += t.dim(0);
      ng = ng || needs(x);
    }
    Tensor<T> out({ntot, f});
    int64_t row = 0;
    for (Var x : xs) {
      const Tensor<T> &t = nodes_[x].val;
      std::copy(t.v.begin(), t.v.end(), out.v.begin() + row * f);
      row += t.dim(0);
    }
    Var id = push(std::move(out), ng, nullptr);
    auto parts = std::make_shared<std::vector<Var>>(xs);
    nodes_[id].back = [this, id, parts, f]() {
      const Tensor<T> &g = nodes_[id].grad;
      int64_t row = 0;
      for (Var x : *parts) {
        int64_t cnt = static_cast<int64_t>(nodes_[x].val.dim(0)) * f;
        if (needs(x))
          for (int64_t i = 0; i < cnt; ++i) nodes_[x].grad[i] += g[row * f + i];
        row += nodes_[x].val.dim(0);
      }
    };
    return id;
  }

  // Concatenate 2-D tensors [N,Fi] along the feature axis.
  Var concat_features(const std::vector<Var> &xs) {
    if (xs.empty()) throw std::invalid_argument("concat_features: empty");
    int n = nodes_[xs[0]].val.dim(0);
    int ftot = 0;
    bool ng = false;
    for (Var x : xs) {
      const Tensor<T> &t = nodes_[x].val;
      if (t.ndim() != 2 || t.dim(0) != n) throw std::invalid_argument("concat_features: shape mismatch");
      ftot += t.dim(1);
      ng = ng || needs(x);
    }
    Tensor<T> out({n, ftot});
    int off = 0;
    for (Var x : xs) {
      const Tensor<T> &t = nodes_[x].val;
      int f = t.dim(1);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < f; ++j) out[static_cast<int64_t>(i) * ftot + off + j] = t[static_cast<int64_t>(i) * f + j];
      off += f;
    }
    Var id = push(std::move(out), ng, nullptr);
    auto parts = std::make_shared<std::vector<Var>>(xs);
    nodes_[id].back = [this, id, parts, n, ftot]() {
      const Tensor<T> &g = nodes_[id].grad;
      int off = 0;
      for (Var x : *parts) {
        int f = nodes_[x].val.dim(1);
        if (needs(x))
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < f; ++j)
              nodes_[x].grad[static_cast<int64_t>(i) * f + j] += g[static_cast<int64_t>(i) * ftot + off + j];
        off += f;
      }
    };
    return id;
  }

  // Concatenate 3-D tensors [N,ki,F] along the middle (edge) axis.
  Var concat_mid(Var a, Var b) {
    const Tensor<T> &ta = nodes_[a].val, &tb = nodes_[b].val;
    if (ta.ndim() != 3 || tb.ndim() != 3 || ta.dim(0) != tb.dim(0) || ta.dim(2) != tb.dim(2))
      throw std::invalid_argument("concat_mid: shape mismatch");
    int n = ta.dim(0), ka = ta.dim(1), kb = tb.dim(1), f = ta.dim(2);
    Tensor<T> out({n, ka + kb, f});
    for (int i = 0; i < n; ++i) {
      for (int e = 0; e < ka; ++e)
        for (int j = 0; j < f; ++j)
          out[(static_cast<int64_t>(i) * (ka + kb) + e) * f + j] = ta[(static_cast<int64_t>(i) * ka + e) * f + j];
      for (int e = 0; e < kb; ++e)
        for (int j = 0; j < f; ++j)
          out[(static_cast<int64_t>(i) * (ka + kb) + ka + e) * f + j] = tb[(static_cast<int64_t>(i) * kb + e) * f + j];
    }
    Var id = push(std::move(out), needs(a) || needs(b), nullptr);
    nodes_[id].back = [this, id, a, b, n, ka, kb, f]() {
      const Tensor<T> &g = nodes_[id].grad;
      if (needs(a))
        for (int i = 0; i < n; ++i)
          for (int e = 0; e < ka; ++e)
            for (int j = 0; j < f; ++j)
              nodes_[a].grad[(static_cast<int64_t>(i) * ka + e) * f + j] +=
                  g[(static_cast<int64_t>(i) * (ka + kb) + e) * f + j];
      if (needs(b))
        for (int i = 0; i < n; ++i)
          for (int e = 0; e < kb; ++e)
            for (int j = 0; j < f; ++j)
              nodes_[b].grad[(static_cast<int64_t>(i) * kb + e) * f + j] +=
                  g[(static_cast<int64_t>(i) * (ka + kb) + ka + e) * f + j];
    };
    return id;
  }

  // Edge features (x_i, x_j - x_i) over a neighbor graph: [N,F] -> [N,k,2F].
  Var edge_concat(Var x, const NeighborGraph &g) {
    const Tensor<T> &tx = nodes_[x].val;
    if (tx.ndim() != 2 || tx.dim(0) != g.n) throw std::invalid_argument("edge_concat: shape mismatch");
    int n = g.n, k = g.k, f = tx.dim(1);
    Tensor<T> out({n, k, 2 * f});
    for (int i = 0; i < n; ++i)
      for (int e = 0; e < k; ++e) {
        int j = g.at(i, e);
        int64_t base = (static_cast<int64_t>(i) * k + e) * 2 * f;
        for (int c = 0; c < f; ++c) {
          out[base + c] = tx[static_cast<int64_t>(i) * f + c];
          out[base + f + c] = tx[static_cast<int64_t>(j) * f + c] - tx[static_cast<int64_t>(i) * f + c];
        }
      }
    Var id = push(std::move(out), needs(x), nullptr);
    auto idx = std::make_shared<std::vector<int>>(g.indices);
    nodes_[id].back = [this, id, x, idx, n, k, f]() {
      if (!needs(x)) return;
      const Tensor<T> &gr = nodes_[id].grad;
      for (int i = 0; i < n; ++i)
        for (int e = 0; e < k; ++e) {
          int j = (*idx)[static_cast<size_t>(i) * k + e];
          int64_t base = (static_cast<int64_t>(i) * k + e) * 2 * f;
          for (int c = 0; c < f; ++c) {
            nodes_[x].grad[static_cast<int64_t>(i) * f + c] += gr[base + c] - gr[base + f + c];
            nodes_[x].grad[static_cast<int64_t>(j) * f + c] += gr[base + f + c];
          }
        }
    };
    return id;
  }

  // Edge features with the neighbor difference rotated into per-point local
  // frames, applied blockwise to consecutive 3-vectors: [N,3B] -> [N,k,6B]
  // with rows (x_i, R_i^T (x_j - x_i)).
  Var edge_concat_rotated(Var x, const NeighborGraph &g, const std::vector<Mat3> &frames) {
    const Tensor<T> &tx = nodes_[x].val;
    if (tx.ndim() != 2 || tx.dim(0) != g.n) throw std::invalid_argument("edge_concat_rotated: shape mismatch");
    int f = tx.dim(1);
    if (f % 3 != 0) throw std::invalid_argument("edge_concat_rotated: width must be a multiple of 3");
    if (static_cast<int>(frames.size()) != g.n)
      throw std::invalid_argument("edge_concat_rotated: frame count mismatch");
    int n = g.n, k = g.k, blocks = f / 3;
    Tensor<T> out({n, k, 2 * f});
    for (int i = 0; i < n; ++i) {
      const Mat3 &R = frames[i];
      for (int e = 0; e < k; ++e) {
        int j = g.at(i, e);
        int64_t base = (static_cast<int64_t>(i) * k + e) * 2 * f;
        for (int c = 0; c < f; ++c) out[base + c] = tx[static_cast<int64_t>(i) * f + c];
        for (int b = 0; b < blocks; ++b) {
          Vec3 d{double(tx[static_cast<int64_t>(j) * f + 3 * b] - tx[static_cast<int64_t>(i) * f + 3 * b]),
                 double(tx[static_cast<int64_t>(j) * f + 3 * b + 1] - tx[static_cast<int64_t>(i) * f + 3 * b + 1]),
                 double(tx[static_cast<int64_t>(j) * f + 3 * b + 2] - tx[static_cast<int64_t>(i) * f + 3 * b + 2])};
          Vec3 rd = R.tmul(d);
          out[base + f + 3 * b] = static_cast<T>(rd.x);
          out[base + f + 3 * b + 1] = static_cast<T>(rd.y);
          out[base + f + 3 * b + 2] = static_cast<T>(rd.z);
        }
      }
    }
    Var id = push(std::move(out), needs(x), nullptr);
    auto idx = std::make_shared<std::vector<int>>(g.indices);
    auto fr = std::make_shared<std::vector<Mat3>>(frames);
    nodes_[id].back = [this, id, x, idx, fr, n, k, f, blocks]() {
      if (!needs(x)) return;
      const Tensor<T> &gr = nodes_[id].grad;
      for (int i = 0; i < n; ++i) {
        const Mat3 &R = (*fr)[i];
        for (int e = 0; e < k; ++e) {
          int j = (*idx)[static_cast<size_t>(i) * k + e];
          int64_t base = (static_cast<int64_t>(i) * k + e) * 2 * f;
          for (int c = 0; c < f; ++c) nodes_[x].grad[static_cast<int64_t>(i) * f + c] += gr[base + c];
          for (int b = 0; b < blocks; ++b) {
            Vec3 grd{double(gr[base + f + 3 * b]), double(gr[base + f + 3 * b + 1]),
                     double(gr[base + f + 3 * b + 2])};
            Vec3 gd = R * grd;  // d(R^T d)/dd pulled back
            for (int c = 0; c < 3; ++c) {
              nodes_[x].grad[static_cast<int64_t>(j) * f + 3 * b + c] += static_cast<T>(gd[c]);
              nodes_[x].grad[static_cast<int64_t>(i) * f + 3 * b + c] -= static_cast<T>(gd[c]);
            }
          }
        }
      }
    };
    return id;
  }

  // Tile a [F2] global descriptor and concatenate onto [N,F1] -> [N,F1+F2].
  Var tile_concat(Var per_point, Var global) {
    const Tensor<T> &tp = nodes_[per_point].val, &tg = nodes_[global].val;
    if (tp.ndim() != 2 || tg.ndim() != 1) throw std::invalid_argument("tile_concat: bad shapes");
    int n = tp.dim(0), f1 = tp.dim(1), f2 = tg.dim(0);
    Tensor<T> out({n, f1 + f2});
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < f1; ++j) out[static_cast<int64_t>(i) * (f1 + f2) + j] = tp[static_cast<int64_t>(i) * f1 + j];
      for (int j = 0; j < f2; ++j) out[static_cast<int64_t>(i) * (f1 + f2) + f1 + j] = tg[j];
    }
    Var id = push(std::move(out), needs(per_point) || needs(global), nullptr);
    nodes_[id].back = [this, id, per_point, global, n, f1, f2]() {
      const Tensor<T> &g = nodes_[id].grad;
      if (needs(per_point))
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < f1; ++j)
            nodes_[per_point].grad[static_cast<int64_t>(i) * f1 + j] += g[static_cast<int64_t>(i) * (f1 + f2) + j];
      if (needs(global))
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < f2; ++j) nodes_[global].grad[j] += g[static_cast<int64_t>(i) * (f1 + f2) + f1 + j];
    };
    return id;
  }

  // [N,F] -> [C,F] max over each row segment [offsets[c], offsets[c+1]);
  // ties take the lowest index. Segments must cover all rows.
  Var segment_maxpool(Var x, const std::vector<int> &offsets) {
    const Tensor<T> &tx = nodes_[x].val;
    if (tx.ndim() != 2) throw std::invalid_argument("segment_maxpool: need a 2-D tensor");
    int f = tx.dim(1);
    int c = static_cast<int>(offsets.size()) - 1;
    if (c < 1 || offsets.front() != 0 || offsets.back() != tx.dim(0))
      throw std::invalid_argument("segment_maxpool: bad offsets");
    Tensor<T> out({c, f});
    auto arg = std::make_shared<std::vector<int>>(static_cast<size_t>(c) * f, 0);
    for (int s = 0; s < c; ++s) {
      if (offsets[s + 1] <= offsets[s]) throw std::invalid_argument("segment_maxpool: empty segment");
      for (int j = 0; j < f; ++j) {
        T best = tx[static_cast<int64_t>(offsets[s]) * f + j];
        int bi = offsets[s];
        for (int i = offsets[s] + 1; i < offsets[s + 1]; ++i) {
          T v = tx[static_cast<int64_t>(i) * f + j];
          if (v > best) {
            best = v;
            bi = i;
          }
        }
        out[static_cast<int64_t>(s) * f + j] = best;
        (*arg)[static_cast<size_t>(s) * f + j] = bi;
      }
    }
    Var id = push(std::move(out), needs(x), nullptr);
    nodes_[id].back = [this, id, x, c, f, arg]() {
      if (!needs(x)) return;
      const Tensor<T> &g = nodes_[id].grad;
      for (int s = 0; s < c; ++s)
        for (int j = 0; j < f; ++j)
          nodes_[x].grad[static_cast<int64_t>((*arg)[static_cast<size_t>(s) * f + j]) * f + j] +=
              g[static_cast<int64_t>(s) * f + j];
    };
    return id;
  }

  // Tile each segment's global row over its points: per_point [N,F1] with
  // segment offsets plus global [C,F2] -> [N,F1+F2].
  Var tile_concat_rows(Var per_point, Var global, const std::vector<int> &offsets) {
    const Tensor<T> &tp = nodes_[per_point].val, &tg = nodes_[global].val;
    if (tp.ndim() != 2 || tg.ndim() != 2) throw std::invalid_argument("tile_concat_rows: bad shapes");
    int n = tp.dim(0), f1 = tp.dim(1), f2 = tg.dim(1);
    int c = static_cast<int>(offsets.size()) - 1;
    if (c != tg.dim(0) || offsets.front() != 0 || offsets.back() != n)
      throw std::invalid_argument("tile_concat_rows: offsets mismatch");
    Tensor<T> out({n, f1 + f2});
    auto offs = std::make_shared<std::vector<int>>(offsets);
    for (int s = 0; s < c; ++s)
      for (int i = offsets[s]; i < offsets[s + 1]; ++i) {
        for (int j = 0; j < f1; ++j)
          out[static_cast<int64_t>(i) * (f1 + f2) + j] = tp[static_cast<int64_t>(i) * f1 + j];
        for (int j = 0; j < f2; ++j)
          out[static_cast<int64_t>(i) * (f1 + f2) + f1 + j] = tg[static_cast<int64_t>(s) * f2 + j];
      }
    Var id = push(std::move(out), needs(per_point) || needs(global), nullptr);
    nodes_[id].back = [this, id, per_point, global, c, f1, f2, offs]() {
      const Tensor<T> &g = nodes_[id].grad;
      if (needs(per_point))
        for (int i = 0; i < (*offs).back(); ++i)
          for (int j = 0; j < f1; ++j)
            nodes_[per_point].grad[static_cast<int64_t>(i) * f1 + j] +=
                g[static_cast<int64_t>(i) * (f1 + f2) + j];
      if (needs(global))
        for (int s = 0; s < c; ++s)
          for (int i = (*offs)[s]; i < (*offs)[s + 1]; ++i)
            for (int j = 0; j < f2; ++j)
              nodes_[global].grad[static_cast<int64_t>(s) * f2 + j] +=
                  g[static_cast<int64_t>(i) * (f1 + f2) + f1 + j];
    };
    return id;
  }

  // Apply a 3x3 matrix given as a [1,9] row (row-major A) to [N,3] points:
  // out[i,j] = sum_k x[i,k] * a[3k+j].
  Var apply_rowmat3(Var x, Var a) {
    const Tensor<T> &tx = nodes_[x].val, &ta = nodes_[a].val;
    if (tx.ndim() != 2 || tx.dim(1) != 3 || ta.numel() != 9)
      throw std::invalid_argument("apply_rowmat3: need [N,3] points and a 9-element matrix");
    int n = tx.dim(0);
    Tensor<T> out({n, 3});
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 3; ++j) {
        T s = 0;
        for (int k = 0; k < 3; ++k) s += tx[static_cast<int64_t>(i) * 3 + k] * ta[3 * k + j];
        out[static_cast<int64_t>(i) * 3 + j] = s;
      }
    Var id = push(std::move(out), needs(x) || needs(a), nullptr);
    nodes_[id].back = [this, id, x, a, n]() {
      const Tensor<T> &g = nodes_[id].grad;
      const Tensor<T> &tx = nodes_[x].val;
      const Tensor<T> &ta = nodes_[a].val;
      if (needs(x))
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < 3; ++k) {
            T s = 0;
            for (int j = 0; j < 3; ++j) s += g[static_cast<int64_t>(i) * 3 + j] * ta[3 * k + j];
            nodes_[x].grad[static_cast<int64_t>(i) * 3 + k] += s;
          }
      if (needs(a))
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j)
              nodes_[a].grad[3 * k + j] += tx[static_cast<int64_t>(i) * 3 + k] * g[static_cast<int64_t>(i) * 3 + j];
    };
    return id;
  }

  Var sum(Var x) {
    const Tensor<T> &tx = nodes_[x].val;
    T s = 0;
    for (const auto &e : tx.v) s += e;
    Tensor<T> out({1});
    out[0] = s;
    Var id = push(std::move(out), needs(x), nullptr);
    nodes_[id].back = [this, id, x]() {
      if (!needs(x)) return;
      T g = nodes_[id].grad[0];
      for (int64_t i = 0; i < nodes_[x].grad.numel(); ++i) nodes_[x].grad[i] += g;
    };
    return id;
  }

  // Weighted binary cross entropy (negated to a minimized loss):
  //   L = -sum_i [ w_b * t_i * log(b_i) + (1 - t_i) * log(1 - b_i) ]
  // Probabilities are clamped to [clamp, 1 - clamp] inside the loss.
  Var weighted_bce(Var probs, const std::vector<uint8_t> &targets, T wb, T clamp = T(1e-7)) {
    const Tensor<T> &tb = nodes_[probs].val;
    if (static_cast<size_t>(tb.numel()) != targets.size())
      throw std::invalid_argument("weighted_bce: size mismatch");
    T loss = 0;
    for (int64_t i = 0; i < tb.numel(); ++i) {
      T b = std::min(std::max(tb[i], clamp), T(1) - clamp);
      loss -= targets[i] ? wb * std::log(b) : std::log(T(1) - b);
    }
    Tensor<T> out({1});
    out[0] = loss;
    Var id = push(std::move(out), needs(probs), nullptr);
    auto tgt = std::make_shared<std::vector<uint8_t>>(targets);
    nodes_[id].back = [this, id, probs, tgt, wb, clamp]() {
      if (!needs(probs)) return;
      T g = nodes_[id].grad[0];
      const Tensor<T> &tb = nodes_[probs].val;
      for (int64_t i = 0; i < tb.numel(); ++i) {
        if (tb[i] <= clamp || tb[i] >= T(1) - clamp) continue;  // clamp subgradient
        T d = (*tgt)[i] ? -wb / tb[i] : T(1) / (T(1) - tb[i]);
        nodes_[probs].grad[i] += g * d;
      }
    };
    return id;
  }

  // Softmax cross entropy over logits [N,L] with integer targets; summed.
  Var softmax_nll(Var logits, const std::vector<int> &targets) {
    const Tensor<T> &tx = nodes_[logits].val;
    if (tx.ndim() != 2 || static_cast<size_t>(tx.dim(0)) != targets.size())
      throw std::invalid_argument("softmax_nll: shape mismatch");
    int n = tx.dim(0), l = tx.dim(1);
    T loss = 0;
    auto sm = std::make_shared<Tensor<T>>(std::vector<int>{n, l});
    for (int i = 0; i < n; ++i) {
      const T *row = tx.v.data() + static_cast<int64_t>(i) * l;
      T mx = row[0];
      for (int j = 1; j < l; ++j) mx = std::max(mx, row[j]);
      T s = 0;
      for (int j = 0; j < l; ++j) s += std::exp(row[j] - mx);
      T lse = mx + std::log(s);
      if (targets[i] < 0 || targets[i] >= l) throw std::invalid_argument("softmax_nll: label out of range");
      loss += lse - row[targets[i]];
      for (int j = 0; j < l; ++j) (*sm)[static_cast<int64_t>(i) * l + j] = std::exp(row[j] - lse);
    }
    Tensor<T> out({1});
    out[0] = loss;
    Var id = push(std::move(out), needs(logits), nullptr);
    auto tgt = std::make_shared<std::vector<int>>(targets);
    nodes_[id].back = [this, id, logits, sm, tgt, n, l]() {
      if (!needs(logits)) return;
      T g = nodes_[id].grad[0];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < l; ++j) {
          T d = (*sm)[static_cast<int64_t>(i) * l + j] - ((*tgt)[i] == j ? T(1) : T(0));
          nodes_[logits].grad[static_cast<int64_t>(i) * l + j] += g * d;
        }
    };
    return id;
  }

  // Reverse sweep from a scalar loss.
  void backward(Var loss) {
    if (loss < 0 || loss >= static_cast<int>(nodes_.size()))
      throw std::logic_error("backward: no recorded forward pass for this variable");
    if (nodes_[loss].val.numel() != 1) throw std::invalid_argument("backward: loss must be scalar");
    for (auto &n : nodes_)
      if (n.needs_grad && n.grad.numel() == 0) n.grad = Tensor<T>(n.val.shape);
    nodes_[loss].grad[0] = T(1);
    for (int i = loss; i >= 0; --i)
      if (nodes_[i].back && nodes_[i].needs_grad) nodes_[i].back();
  }

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor<T> val;
    Tensor<T> grad;
    bool needs_grad = false;
    std::function<void()> back;
  };

  bool needs(Var id) const { return nodes_[id].needs_grad; }

  Var push(Tensor<T> val, bool needs_grad, std::function<void()> back) {
    Node n;
    n.val = std::move(val);
    n.needs_grad = needs_grad;
    n.back = std::move(back);
    if (needs_grad) n.grad = Tensor<T>(n.val.shape);
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size() - 1);
  }

  static void gemm(const T *a, const T *b, T *c, int64_t m, int k, int n) {
    for (int64_t i = 0; i < m; ++i) {
      T *cr = c + i * n;
      const T *ar = a + i * k;
      for (int kk = 0; kk < k; ++kk) {
        T s = ar[kk];
        if (s == T(0)) continue;
        const T *br = b + static_cast<int64_t>(kk) * n;
        for (int j = 0; j < n; ++j) cr[j] += s * br[j];
      }
    }
  }

  std::vector<Node> nodes_;
};

// Per-batch boundary weight w_b = (#non-boundary) / (#boundary); empty when
// the batch has no boundary points (skip-batch signal).
inline std::optional<double> auto_boundary_weight(const std::vector<uint8_t> &targets) {
  int64_t pos = 0;
  for (uint8_t t : targets) pos += t;
  if (pos == 0) return std::nullopt;
  return static_cast<double>(static_cast<int64_t>(targets.size()) - pos) / static_cast<double>(pos);
}

// ---------------------------------------------------------------------------
// Shared MLP stacks (affine -> batch-norm -> leaky rectifier), weights shared
// across all leading axes.

template <typename T>
void init_linear(ParamSet<T> &ps, const std::string &name, int in_dim, int out_dim, Rng &rng) {
  Tensor<T> w({in_dim, out_dim});
  double limit = std::sqrt(6.0 / (in_dim + out_dim));
  for (auto &e : w.v) e = static_cast<T>((2 * uniform01(rng) - 1) * limit);
  ps.add(name + ".W", std::move(w));
  ps.add(name + ".b", Tensor<T>({out_dim}));
}

template <typename T>
void init_mlp(ParamSet<T> &ps, const std::string &prefix, int in_dim, const std::vector<int> &widths,
              bool bn, Rng &rng) {
  int d = in_dim;
  for (size_t l = 0; l < widths.size(); ++l) {
    std::string name = prefix + "." + std::to_string(l);
    init_linear(ps, name, d, widths[l], rng);
    if (bn) {
      Tensor<T> gamma({widths[l]});
      std::fill(gamma.v.begin(), gamma.v.end(), T(1));
      ps.add(name + ".gamma", std::move(gamma));
      ps.add(name + ".beta", Tensor<T>({widths[l]}));
      ps.add_stat(name + ".mean", Tensor<T>({widths[l]}));
      Tensor<T> var({widths[l]});
      std::fill(var.v.begin(), var.v.end(), T(1));
      ps.add_stat(name + ".var", std::move(var));
    }
    d = widths[l];
  }
}

// Forward through an MLP stack. When activate_last is false the final layer
// is a plain affine map (no batch-norm, no rectifier) -- used by the heads.
template <typename T>
typename Tape<T>::Var mlp_forward(Tape<T> &tape, typename Tape<T>::Var x, ParamSet<T> &ps,
                                  const std::string &prefix, const std::vector<int> &widths,
                                  bool bn, bool train, T slope = T(0.2), bool activate_last = true,
                                  T bn_momentum = T(0.5)) {
  if (widths.empty()) throw std::invalid_argument("mlp_forward: widths must be nonempty");
  typename Tape<T>::Var h = x;
  for (size_t l = 0; l < widths.size(); ++l) {
    std::string name = prefix + "." + std::to_string(l);
    h = tape.add_bias(tape.matmul(h, tape.param(ps.at(name + ".W"))), tape.param(ps.at(name + ".b")));
    bool last = (l + 1 == widths.size());
    if (last && !activate_last) break;
    if (bn)
      h = tape.batchnorm(h, tape.param(ps.at(name + ".gamma")), tape.param(ps.at(name + ".beta")),
                         ps.stat(name + ".mean"), ps.stat(name + ".var"), train, bn_momentum);
    h = tape.leaky_relu(h, slope);
  }
  return h;
}

// spec-facing alias: per-edge shared MLP on a [B,E,F] tensor.
template <typename T>
typename Tape<T>::Var shared_mlp_forward(Tape<T> &tape, typename Tape<T>::Var inputs, ParamSet<T> &ps,
                                         const std::string &prefix, const std::vector<int> &widths,
                                         bool bn, bool train) {
  return mlp_forward(tape, inputs, ps, prefix, widths, bn, train);
}

// ---------------------------------------------------------------------------
// CKPT1 checkpoints. Running batch-norm stats and Adam state are stored under
// reserved name prefixes.

template <typename T>
void write_ckpt1(std::ostream &out, const ParamSet<T> &ps) {
  auto emit = [&out](const std::string &name, const Tensor<T> &t) {
    out << name << '\n';
    for (size_t i = 0; i < t.shape.size(); ++i) out << (i ? " " : "") << t.shape[i];
    if (t.shape.empty()) out << 1;
    out << '\n';
    char buf[40];
    for (int64_t i = 0; i < t.numel(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(t[i]));
      out << (i ? " " : "") << buf;
    }
    out << '\n';
  };
  int64_t count = static_cast<int64_t>(ps.order.size()) * 3 + static_cast<int64_t>(ps.stat_order.size()) + 1;
  out << "CKPT1 " << count << '\n';
  Tensor<T> stepten({1});
  stepten[0] = static_cast<T>(ps.step);
  emit("__step__", stepten);
  for (const auto &name : ps.order) {
    const Param<T> &p = ps.at(name);
    emit(name, p.value);
    emit("__adam_m__" + name, p.adam_m);
    emit("__adam_v__" + name, p.adam_v);
  }
  for (const auto &name : ps.stat_order) emit("__stat__" + name, ps.stats.at(name));
}

template <typename T>
void read_ckpt1(std::istream &in, ParamSet<T> &ps, const std::string &file = "<ckpt1>") {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error(file + ": empty checkpoint");
  std::istringstream hs(header);
  std::string magic;
  int64_t count = 0;
  hs >> magic >> count;
  if (magic != "CKPT1") throw std::runtime_error(file + ": expected CKPT1 header");
  for (int64_t e = 0; e < count; ++e) {
    std::string name, shape_line, value_line;
    if (!std::getline(in, name) || !std::getline(in, shape_line) || !std::getline(in, value_line))
      throw std::runtime_error(file + ": truncated checkpoint");
    std::istringstream ss(shape_line);
    std::vector<int> shape;
    int d;
    while (ss >> d) shape.push_back(d);
    Tensor<T> t(shape);
    std::istringstream vs(value_line);
    for (int64_t i = 0; i < t.numel(); ++i) {
      double x;
      if (!(vs >> x)) throw std::runtime_error(file + ": short value line for " + name);
      if (!std::isfinite(x)) throw std::runtime_error(file + ": nonfinite value in " + name);
      t[i] = static_cast<T>(x);
    }
    auto assign = [&](Tensor<T> &dst) {
      if (dst.shape != t.shape && dst.numel() != t.numel())
        throw std::runtime_error(file + ": shape mismatch for " + name);
      dst = t;
    };
    if (name == "__step__") {
      ps.step = static_cast<int64_t>(t[0]);
    } else if (name.rfind("__adam_m__", 0) == 0) {
      assign(ps.at(name.substr(10)).adam_m);
    } else if (name.rfind("__adam_v__", 0) == 0) {
      assign(ps.at(name.substr(10)).adam_v);
    } else if (name.rfind("__stat__", 0) == 0) {
      assign(ps.stat(name.substr(8)));
    } else {
      assign(ps.at(name).value);
    }
  }
}

template <typename T>
void save_ckpt1(const std::string &path, const ParamSet<T> &ps) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_ckpt1(out, ps);
}

template <typename T>
void load_ckpt1(const std::string &path, ParamSet<T> &ps) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  read_ckpt1(in, ps, path);
}

}  // namespace bforge
