#include "iest/pca.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace iest {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

Projection3D pca_project(const Tensor<double>& representations, std::size_t k) {
  const std::size_t n = representations.rows();
  const std::size_t d = representations.cols();
  if (n < k) throw std::runtime_error("pca_project: need at least k points");

  // center
  Tensor<double> X = representations;
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += X.at(i, j);
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) X.at(i, j) -= mean[j];

  double total_variance = 0.0;
  for (double v : X.data) total_variance += v * v;
  total_variance /= static_cast<double>(n);

  // covariance application: C v = X^T (X v) / n, deflated by found components
  Projection3D out;
  auto apply_cov = [&](const std::vector<double>& v) {
    std::vector<double> xv(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) xv[i] += X.at(i, j) * v[j];
    std::vector<double> r(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) r[j] += X.at(i, j) * xv[i];
    for (auto& x : r) x /= static_cast<double>(n);
    return r;
  };

  Rng rng(12345);
  std::vector<double> eigenvalues;
  for (std::size_t comp = 0; comp < k; ++comp) {
    std::vector<double> v(d);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    // orthogonalize against previous components throughout the iteration
    double lambda_prev = std::numeric_limits<double>::infinity();
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
      for (const auto& b : out.basis) {
        const double c = dot(v, b);
        for (std::size_t j = 0; j < d; ++j) v[j] -= c * b[j];
      }
      const double nv = norm(v);
      if (nv < 1e-14) break;  // rank exhausted
      for (auto& x : v) x /= nv;
      std::vector<double> cv = apply_cov(v);
      lambda = dot(v, cv);
      v = std::move(cv);
      if (std::isfinite(lambda_prev) &&
          std::abs(lambda - lambda_prev) <= 1e-9 * std::max(std::abs(lambda), 1e-30)) {
        break;
      }
      lambda_prev = lambda;
    }
    const double nv = norm(v);
    if (nv < 1e-12 || lambda <= 1e-12 * std::max(total_variance, 1e-30)) break;
    for (auto& x : v) x /= nv;
    for (const auto& b : out.basis) {
      const double c = dot(v, b);
      for (std::size_t j = 0; j < d; ++j) v[j] -= c * b[j];
    }
    const double nv2 = norm(v);
    if (nv2 < 1e-12) break;
    for (auto& x : v) x /= nv2;
    out.basis.push_back(v);
    eigenvalues.push_back(lambda);
  }

  out.components = out.basis.size();
  out.coords = Tensor<double>(n, out.components);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < out.components; ++c) {
      double s = 0;
      for (std::size_t j = 0; j < d; ++j) s += X.at(i, j) * out.basis[c][j];
      out.coords.at(i, c) = s;
    }
  for (double ev : eigenvalues) {
    out.explained_variance.push_back(total_variance > 0 ? ev / total_variance : 0.0);
  }
  return out;
}

KMeans2 kmeans2(const Tensor<double>& points, std::uint64_t seed, int restarts) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (n < 2) throw std::runtime_error("kmeans2: need at least 2 points");

  KMeans2 best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Rng rng = Rng::split(seed, "kmeans2-restart-" + std::to_string(r));
    std::size_t c0 = rng.next_below(n), c1 = rng.next_below(n);
    if (c1 == c0) c1 = (c0 + 1) % n;
    std::vector<std::vector<double>> centers(2, std::vector<double>(d));
    for (std::size_t j = 0; j < d; ++j) {
      centers[0][j] = points.at(c0, j);
      centers[1][j] = points.at(c1, j);
    }
    std::vector<int> assign(n, 0);
    double cost = 0;
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = false;
      cost = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double d0 = 0, d1 = 0;
        for (std::size_t j = 0; j < d; ++j) {
          const double a = points.at(i, j) - centers[0][j];
          const double b = points.at(i, j) - centers[1][j];
          d0 += a * a;
          d1 += b * b;
        }
        const int c = d1 < d0 ? 1 : 0;
        if (c != assign[i]) changed = true;
        assign[i] = c;
        cost += c ? d1 : d0;
      }
      std::vector<std::vector<double>> sums(2, std::vector<double>(d, 0.0));
      std::size_t counts[2] = {0, 0};
      for (std::size_t i = 0; i < n; ++i) {
        counts[assign[i]] += 1;
        for (std::size_t j = 0; j < d; ++j) sums[assign[i]][j] += points.at(i, j);
      }
      for (int c = 0; c < 2; ++c) {
        if (counts[c] == 0) continue;  // keep the old center
        for (std::size_t j = 0; j < d; ++j)
          centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
      if (!changed) break;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best.assignment = assign;
      best.centers = centers;
    }
  }
  return best;
}

}  // namespace iest
