#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "iest/rng.hpp"

namespace iest {

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream ss;
  ss << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) ss << 'x';
    ss << shape[i];
  }
  ss << ']';
  return ss.str();
}

// Dense row-major tensor. Rank 2 everywhere in the model; the checkpoint
// container accepts arbitrary rank.
template <class Real>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<Real> data;
  std::vector<Real> grad;  // same length as data when requires_grad
  bool requires_grad = false;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, Real fill = Real(0))
      : shape{r, c}, data(r * c, fill) {}

  static Tensor matrix(std::size_t r, std::size_t c,
                       std::initializer_list<Real> values) {
    Tensor t(r, c);
    if (values.size() != r * c) throw ShapeError("matrix literal size mismatch");
    std::copy(values.begin(), values.end(), t.data.begin());
    return t;
  }

  std::size_t numel() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
  }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  Real& at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
  Real at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

  void set_requires_grad(bool on) {
    requires_grad = on;
    grad.assign(on ? data.size() : 0, Real(0));
  }
  void zero_grad() { std::fill(grad.begin(), grad.end(), Real(0)); }

  bool all_finite() const {
    for (Real v : data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  // uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
  void init_uniform(Rng& rng, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : data) v = static_cast<Real>(rng.uniform(-bound, bound));
  }
};

template <class Real>
void check_same_shape(const Tensor<Real>& a, const Tensor<Real>& b,
                      const char* op) {
  if (a.shape != b.shape) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape) +
                     " vs " + shape_str(b.shape));
  }
}

}  // namespace iest
