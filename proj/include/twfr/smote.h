#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace twfr {

struct SmoteOptions {
  int k_neighbors = 5;
  // Desired total count after oversampling (originals included).
  std::size_t target_count = 0;
  std::uint64_t seed = 0;
  // Test hook: use this interpolation fraction instead of drawing one.
  std::optional<double> fixed_gap;
};

// Returns the originals (verbatim, first) followed by target_count - n
// synthetic vectors x + u * (x_nn - x), x_nn one of the k nearest Euclidean
// neighbours of a randomly chosen original x. k_neighbors is clamped to n - 1.
// Throws ConfigError for fewer than 2 inputs or target_count < n.
std::vector<Eigen::VectorXd> smote_oversample(std::span<const Eigen::VectorXd> features,
                                              const SmoteOptions& opts);

// Indices of the k nearest neighbours of features[i] (excluding i), nearest
// first, ties broken by index.
std::vector<std::size_t> nearest_neighbors(std::span<const Eigen::VectorXd> features,
                                           std::size_t i, int k);

}  // namespace twfr
