#pragma once

#include <vector>

#include "iest/rng.hpp"
#include "iest/tensor.hpp"

namespace iest {

struct Projection3D {
  Tensor<double> coords;                     // [N x k]
  std::vector<std::vector<double>> basis;    // k orthonormal directions in R^D
  std::vector<double> explained_variance;    // shares, non-increasing
  std::size_t components = 0;                // may be < k when rank is short
};

// Top-k principal components via orthogonal iteration with deflation on the
// centered data. Stops when successive eigenvalue estimates change by less
// than 1e-9 relative. Returns fewer components when the rank runs out.
Projection3D pca_project(const Tensor<double>& representations, std::size_t k = 3);

struct KMeans2 {
  std::vector<int> assignment;  // 0 or 1 per point
  std::vector<std::vector<double>> centers;
};

// 2-means with seeded restarts on low-dimensional points; keeps the run
// with the lowest within-cluster sum of squares.
KMeans2 kmeans2(const Tensor<double>& points, std::uint64_t seed, int restarts = 10);

}  // namespace iest
