#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "iest/tensor.hpp"

namespace iest {

enum class Mode { train, eval };

// Reverse-mode tape. Ops append nodes in application order, which is a
// topological order by construction; backward() walks the tape once in
// reverse. Parameter leaves accumulate into the external tensor's grad so
// one optimizer step can follow several graphs.
template <class Real>
class Graph {
 public:
  using Var = std::int32_t;

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  const Tensor<Real>& value(Var v) const { return nodes_[v].val; }
  const std::vector<Real>& grad_of(Var v) const { return nodes_[v].grad; }

  Var leaf(Tensor<Real>* param) {
    Var v = push(Tensor<Real>(*param), grad_enabled_ && param->requires_grad);
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, param] {
        for (std::size_t i = 0; i < param->grad.size(); ++i) {
          param->grad[i] += nodes_[v].grad[i];
        }
      };
    }
    return v;
  }

  Var constant(Tensor<Real> value) { return push(std::move(value), false); }

  Var matmul(Var a, Var b) {
    const auto& A = nodes_[a].val;
    const auto& B = nodes_[b].val;
    if (A.cols() != B.rows()) {
      throw ShapeError("matmul: inner extents differ " + shape_str(A.shape) +
                       " vs " + shape_str(B.shape));
    }
    const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
    Tensor<Real> C(m, n);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const Real av = A.at(i, p);
        if (av == Real(0)) continue;
        for (std::size_t j = 0; j < n; ++j) C.at(i, j) += av * B.at(p, j);
      }
    }
    Var v = push(std::move(C), needs(a) || needs(b));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, a, b, m, k, n] {
        const auto& g = nodes_[v].grad;
        const auto& A2 = nodes_[a].val;
        const auto& B2 = nodes_[b].val;
        if (needs(a)) {
          auto& ga = nodes_[a].grad;  // dA = dC * B^T
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
              const Real gv = g[i * n + j];
              if (gv == Real(0)) continue;
              for (std::size_t p = 0; p < k; ++p)
                ga[i * k + p] += gv * B2.at(p, j);
            }
        }
        if (needs(b)) {
          auto& gb = nodes_[b].grad;  // dB = A^T * dC
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const Real av = A2.at(i, p);
              if (av == Real(0)) continue;
              for (std::size_t j = 0; j < n; ++j)
                gb[p * n + j] += av * g[i * n + j];
            }
        }
      };
    }
    return v;
  }

  // Same-shape add, or rowvec broadcast when b is [1 x n].
  Var add(Var a, Var b) {
    const auto& A = nodes_[a].val;
    const auto& B = nodes_[b].val;
    Tensor<Real> C = A;
    const bool rowvec = B.rows() == 1 && A.cols() == B.cols() && A.rows() != 1;
    if (!rowvec) check_same_shape(A, B, "add");
    for (std::size_t i = 0; i < A.rows(); ++i)
      for (std::size_t j = 0; j < A.cols(); ++j)
        C.at(i, j) += rowvec ? B.at(0, j) : B.at(i, j);
    Var v = push(std::move(C), needs(a) || needs(b));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, a, b, rowvec] {
        const auto& g = nodes_[v].grad;
        if (needs(a)) {
          auto& ga = nodes_[a].grad;
          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (needs(b)) {
          auto& gb = nodes_[b].grad;
          const std::size_t n = nodes_[b].val.cols();
          if (rowvec) {
            for (std::size_t i = 0; i < g.size(); ++i) gb[i % n] += g[i];
          } else {
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
          }
        }
      };
    }
    return v;
  }

  Var mul(Var a, Var b) {
    const auto& A = nodes_[a].val;
    const auto& B = nodes_[b].val;
    check_same_shape(A, B, "mul");
    Tensor<Real> C = A;
    for (std::size_t i = 0; i < C.data.size(); ++i) C.data[i] *= B.data[i];
    Var v = push(std::move(C), needs(a) || needs(b));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, a, b] {
        const auto& g = nodes_[v].grad;
        if (needs(a)) {
          auto& ga = nodes_[a].grad;
          const auto& B2 = nodes_[b].val.data;
          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B2[i];
        }
        if (needs(b)) {
          auto& gb = nodes_[b].grad;
          const auto& A2 = nodes_[a].val.data;
          for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A2[i];
        }
      };
    }
    return v;
  }

  Var scale(Var a, Real s) {
    Tensor<Real> C = nodes_[a].val;
    for (auto& v : C.data) v *= s;
    Var v = push(std::move(C), needs(a));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, a, s] {
        const auto& g = nodes_[v].grad;
        auto& ga = nodes_[a].grad;
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * s;
      };
    }
    return v;
  }

  Var sigmoid(Var a) {
    return unary(a, [](Real x) { return Real(1) / (Real(1) + std::exp(-x)); },
                 [](Real /*x*/, Real y) { return y * (Real(1) - y); });
  }
  Var tanh(Var a) {
    return unary(a, [](Real x) { return std::tanh(x); },
                 [](Real /*x*/, Real y) { return Real(1) - y * y; });
  }
  Var relu(Var a) {
    return unary(a, [](Real x) { return x > Real(0) ? x : Real(0); },
                 [](Real x, Real /*y*/) { return x > Real(0) ? Real(1) : Real(0); });
  }

  Var concat_cols(Var a, Var b) {
    const auto& A = nodes_[a].val;
    const auto& B = nodes_[b].val;
    if (A.rows() != B.rows()) {
      throw ShapeError("concat_cols: row mismatch " + shape_str(A.shape) +
                       " vs " + shape_str(B.shape));
    }
    Tensor<Real> C(A.rows(), A.cols() + B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
      for (std::size_t j = 0; j < A.cols(); ++j) C.at(i, j) = A.at(i, j);
      for (std::size_t j = 0; j < B.cols(); ++j) C.at(i, A.cols() + j) = B.at(i, j);
    }
    const std::size_t ac = A.cols(), bc = B.cols(), r = A.rows();
    Var v = push(std::move(C), needs(a) || needs(b));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, a, b, ac, bc, r] {
        const auto& g = nodes_[v].grad;
        const std::size_t w = ac + bc;
        if (needs(a)) {
          auto& ga = nodes_[a].grad;
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < ac; ++j) ga[i * ac + j] += g[i * w + j];
        }
        if (needs(b)) {
          auto& gb = nodes_[b].grad;
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < bc; ++j) gb[i * bc + j] += g[i * w + ac + j];
        }
      };
    }
    return v;
  }

  // Stacks [1 x d] rows into [n x d].
  Var stack_rows(const std::vector<Var>& rows) {
    if (rows.empty()) throw ShapeError("stack_rows: empty input");
    const std::size_t d = nodes_[rows[0]].val.cols();
    Tensor<Real> C(rows.size(), d);
    bool ng = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& R = nodes_[rows[i]].val;
      if (R.rows() != 1 || R.cols() != d) {
        throw ShapeError("stack_rows: row shape mismatch " + shape_str(R.shape));
      }
      for (std::size_t j = 0; j < d; ++j) C.at(i, j) = R.at(0, j);
      ng = ng || needs(rows[i]);
    }
    Var v = push(std::move(C), ng);
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, rows, d] {
        const auto& g = nodes_[v].grad;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (!needs(rows[i])) continue;
          auto& gr = nodes_[rows[i]].grad;
          for (std::size_t j = 0; j < d; ++j) gr[j] += g[i * d + j];
        }
      };
    }
    return v;
  }

  // Per-dimension max over the first valid_len rows. Ties route the gradient
  // to the lowest row index.
  Var masked_max_pool(Var h, std::size_t valid_len) {
    const auto& H = nodes_[h].val;
    if (valid_len == 0 || valid_len > H.rows()) {
      throw ShapeError("masked_max_pool: valid_len " + std::to_string(valid_len) +
                       " out of range for " + shape_str(H.shape));
    }
    const std::size_t d = H.cols();
    Tensor<Real> out(1, d);
    std::vector<std::size_t> argmax(d, 0);
    for (std::size_t j = 0; j < d; ++j) {
      Real best = H.at(0, j);
      for (std::size_t t = 1; t < valid_len; ++t) {
        if (H.at(t, j) > best) {
          best = H.at(t, j);
          argmax[j] = t;
        }
      }
      out.at(0, j) = best;
    }
    Var v = push(std::move(out), needs(h));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, h, argmax = std::move(argmax), d] {
        const auto& g = nodes_[v].grad;
        auto& gh = nodes_[h].grad;
        for (std::size_t j = 0; j < d; ++j) gh[argmax[j] * d + j] += g[j];
      };
    }
    return v;
  }

  Var masked_mean_pool(Var h, std::size_t valid_len) {
    const auto& H = nodes_[h].val;
    if (valid_len == 0 || valid_len > H.rows()) {
      throw ShapeError("masked_mean_pool: valid_len out of range");
    }
    const std::size_t d = H.cols();
    Tensor<Real> out(1, d);
    for (std::size_t t = 0; t < valid_len; ++t)
      for (std::size_t j = 0; j < d; ++j) out.at(0, j) += H.at(t, j);
    const Real inv = Real(1) / static_cast<Real>(valid_len);
    for (auto& x : out.data) x *= inv;
    Var v = push(std::move(out), needs(h));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, h, valid_len, d, inv] {
        const auto& g = nodes_[v].grad;
        auto& gh = nodes_[h].grad;
        for (std::size_t t = 0; t < valid_len; ++t)
          for (std::size_t j = 0; j < d; ++j) gh[t * d + j] += g[j] * inv;
      };
    }
    return v;
  }

  Var select_row(Var h, std::size_t index) {
    const auto& H = nodes_[h].val;
    if (index >= H.rows()) throw ShapeError("select_row: index out of range");
    const std::size_t d = H.cols();
    Tensor<Real> out(1, d);
    for (std::size_t j = 0; j < d; ++j) out.at(0, j) = H.at(index, j);
    Var v = push(std::move(out), needs(h));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, h, index, d] {
        const auto& g = nodes_[v].grad;
        auto& gh = nodes_[h].grad;
        for (std::size_t j = 0; j < d; ++j) gh[index * d + j] += g[j];
      };
    }
    return v;
  }

  // Inverted dropout: identity in eval mode, survivor scaling 1/(1-p) in train.
  Var dropout(Var a, double p, Mode mode, Rng& rng) {
    if (p < 0.0 || p >= 1.0) throw ShapeError("dropout: p must be in [0, 1)");
    if (mode == Mode::eval || p == 0.0) return a;
    const auto& A = nodes_[a].val;
    Tensor<Real> C = A;
    std::vector<Real> mask(A.data.size());
    const Real keep_scale = static_cast<Real>(1.0 / (1.0 - p));
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = rng.bernoulli(p) ? Real(0) : keep_scale;
      C.data[i] *= mask[i];
    }
    Var v = push(std::move(C), needs(a));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, a, mask = std::move(mask)] {
        const auto& g = nodes_[v].grad;
        auto& ga = nodes_[a].grad;
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * mask[i];
      };
    }
    return v;
  }

  // Gather rows of a [V x d] table leaf. ids outside [0, V) are an error.
  Var embedding(Var table, const std::vector<int>& ids) {
    const auto& T = nodes_[table].val;
    const std::size_t d = T.cols();
    Tensor<Real> out(ids.size(), d);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= T.rows()) {
        throw ShapeError("embedding: id out of range");
      }
      for (std::size_t j = 0; j < d; ++j) out.at(i, j) = T.at(ids[i], j);
    }
    Var v = push(std::move(out), needs(table));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, table, ids, d] {
        const auto& g = nodes_[v].grad;
        auto& gt = nodes_[table].grad;
        for (std::size_t i = 0; i < ids.size(); ++i)
          for (std::size_t j = 0; j < d; ++j)
            gt[ids[i] * d + j] += g[i * d + j];
      };
    }
    return v;
  }

  // 1-d convolution over character embeddings [L x ce] with a filter bank
  // [width*ce x count], max-pooled over time. Requires L >= width.
  Var conv_max_over_time(Var emb, Var filter, std::size_t width) {
    const auto& E = nodes_[emb].val;
    const auto& F = nodes_[filter].val;
    const std::size_t L = E.rows(), ce = E.cols(), count = F.cols();
    if (F.rows() != width * ce) {
      throw ShapeError("conv_max_over_time: filter rows " + shape_str(F.shape) +
                       " != width*ce");
    }
    if (L < width) throw ShapeError("conv_max_over_time: sequence shorter than filter");
    const std::size_t npos = L - width + 1;
    Tensor<Real> out(1, count);
    std::vector<std::size_t> argmax(count, 0);
    for (std::size_t f = 0; f < count; ++f) {
      Real best = -std::numeric_limits<Real>::infinity();
      for (std::size_t p = 0; p < npos; ++p) {
        Real acc = 0;
        for (std::size_t w = 0; w < width; ++w)
          for (std::size_t c = 0; c < ce; ++c)
            acc += E.at(p + w, c) * F.at(w * ce + c, f);
        if (acc > best) {
          best = acc;
          argmax[f] = p;
        }
      }
      out.at(0, f) = best;
    }
    Var v = push(std::move(out), needs(emb) || needs(filter));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, emb, filter, width, ce, count,
                               argmax = std::move(argmax)] {
        const auto& g = nodes_[v].grad;
        const auto& E2 = nodes_[emb].val;
        const auto& F2 = nodes_[filter].val;
        for (std::size_t f = 0; f < count; ++f) {
          const Real gv = g[f];
          if (gv == Real(0)) continue;
          const std::size_t p = argmax[f];
          for (std::size_t w = 0; w < width; ++w)
            for (std::size_t c = 0; c < ce; ++c) {
              if (needs(filter))
                nodes_[filter].grad[(w * ce + c) * count + f] += gv * E2.at(p + w, c);
              if (needs(emb))
                nodes_[emb].grad[(p + w) * ce + c] += gv * F2.at(w * ce + c, f);
            }
        }
      };
    }
    return v;
  }

  // Mean over the batch of -log softmax(logits)[target]; stabilized by
  // max-subtraction. Returns a [1 x 1] scalar.
  Var softmax_cross_entropy(Var logits, const std::vector<int>& targets) {
    const auto& L = nodes_[logits].val;
    const std::size_t m = L.rows(), C = L.cols();
    if (targets.size() != m) {
      throw ShapeError("softmax_cross_entropy: batch/target count mismatch");
    }
    std::vector<Real> probs(m * C);
    Real loss = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= C) {
        throw ShapeError("softmax_cross_entropy: target out of range");
      }
      Real mx = L.at(i, 0);
      for (std::size_t j = 1; j < C; ++j) mx = std::max(mx, L.at(i, j));
      Real z = 0;
      for (std::size_t j = 0; j < C; ++j) {
        probs[i * C + j] = std::exp(L.at(i, j) - mx);
        z += probs[i * C + j];
      }
      for (std::size_t j = 0; j < C; ++j) probs[i * C + j] /= z;
      // log-sum-exp form keeps the loss finite even when the target
      // probability underflows to zero
      loss += std::log(z) - (L.at(i, targets[i]) - mx);
    }
    Tensor<Real> out(1, 1);
    out.at(0, 0) = loss / static_cast<Real>(m);
    Var v = push(std::move(out), needs(logits));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, logits, targets, probs = std::move(probs),
                               m, C] {
        const Real g = nodes_[v].grad[0] / static_cast<Real>(m);
        auto& gl = nodes_[logits].grad;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < C; ++j) {
            Real p = probs[i * C + j];
            gl[i * C + j] += g * (p - (static_cast<std::size_t>(targets[i]) == j
                                           ? Real(1)
                                           : Real(0)));
          }
      };
    }
    return v;
  }

  // Arithmetic mean of scalars.
  Var mean_scalars(const std::vector<Var>& xs) {
    if (xs.empty()) throw ShapeError("mean_scalars: empty input");
    Tensor<Real> out(1, 1);
    bool ng = false;
    for (Var x : xs) {
      out.at(0, 0) += nodes_[x].val.at(0, 0);
      ng = ng || needs(x);
    }
    out.at(0, 0) /= static_cast<Real>(xs.size());
    Var v = push(std::move(out), ng);
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, xs] {
        const Real g = nodes_[v].grad[0] / static_cast<Real>(xs.size());
        for (Var x : xs) {
          if (needs(x)) nodes_[x].grad[0] += g;
        }
      };
    }
    return v;
  }

  void backward(Var loss) {
    if (!grad_enabled_) throw std::logic_error("backward on a no-grad graph");
    if (nodes_[loss].val.numel() != 1) {
      throw ShapeError("backward: loss must be scalar");
    }
    if (!nodes_[loss].needs_grad) return;
    nodes_[loss].grad[0] = Real(1);
    for (std::int32_t i = loss; i >= 0; --i) {
      if (nodes_[i].backward_fn) nodes_[i].backward_fn();
    }
  }

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<Real> val;
    std::vector<Real> grad;
    std::function<void()> backward_fn;
    bool needs_grad = false;
  };

  bool needs(Var v) const { return nodes_[v].needs_grad; }

  Var push(Tensor<Real> val, bool needs_grad) {
    Node n;
    n.val = std::move(val);
    n.needs_grad = grad_enabled_ && needs_grad;
    if (n.needs_grad) n.grad.assign(n.val.data.size(), Real(0));
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size() - 1);
  }

  template <class F, class DF>
  Var unary(Var a, F f, DF df) {
    Tensor<Real> C = nodes_[a].val;
    for (auto& x : C.data) x = f(x);
    Var v = push(std::move(C), needs(a));
    if (nodes_[v].needs_grad) {
      nodes_[v].backward_fn = [this, v, a, df] {
        const auto& g = nodes_[v].grad;
        const auto& x = nodes_[a].val.data;
        const auto& y = nodes_[v].val.data;
        auto& ga = nodes_[a].grad;
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(x[i], y[i]);
      };
    }
    return v;
  }

  std::vector<Node> nodes_;
  bool grad_enabled_;
};

// Row-wise softmax of plain values (no autograd), for predict_proba.
template <class Real>
Tensor<Real> softmax_rows(const Tensor<Real>& logits) {
  Tensor<Real> out = logits;
  const std::size_t m = logits.rows(), C = logits.cols();
  for (std::size_t i = 0; i < m; ++i) {
    Real mx = out.at(i, 0);
    for (std::size_t j = 1; j < C; ++j) mx = std::max(mx, out.at(i, j));
    Real z = 0;
    for (std::size_t j = 0; j < C; ++j) {
      out.at(i, j) = std::exp(out.at(i, j) - mx);
      z += out.at(i, j);
    }
    for (std::size_t j = 0; j < C; ++j) out.at(i, j) /= z;
  }
  return out;
}

}  // namespace iest
