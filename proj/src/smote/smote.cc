#include "twfr/smote.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "twfr/error.h"
#include "twfr/random.h"

namespace twfr {

std::vector<std::size_t> nearest_neighbors(std::span<const Eigen::VectorXd> features,
                                           std::size_t i, int k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    if (j != i) dist.emplace_back((features[j] - features[i]).squaredNorm(), j);
  }
  const std::size_t take = std::min(dist.size(), static_cast<std::size_t>(std::max(k, 0)));
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
  std::vector<std::size_t> out(take);
  for (std::size_t n = 0; n < take; ++n) out[n] = dist[n].second;
  return out;
}

std::vector<Eigen::VectorXd> smote_oversample(std::span<const Eigen::VectorXd> features,
                                              const SmoteOptions& opts) {
  const std::size_t n = features.size();
  if (n < 2) throw ConfigError("SMOTE needs at least 2 input vectors, got " + std::to_string(n));
  if (opts.k_neighbors < 1) throw ConfigError("SMOTE k_neighbors must be >= 1");
  if (opts.target_count < n) {
    throw ConfigError("SMOTE target_count (" + std::to_string(opts.target_count) +
                      ") is below the input count (" + std::to_string(n) + ")");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (features[i].size() != features[0].size()) throw ConfigError("SMOTE inputs differ in dimension");
  }

  std::vector<Eigen::VectorXd> out(features.begin(), features.end());
  if (opts.target_count == n) return out;

  const int k = static_cast<int>(std::min<std::size_t>(opts.k_neighbors, n - 1));
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) neighbors[i] = nearest_neighbors(features, i, k);

  Rng rng(opts.seed);
  out.reserve(opts.target_count);
  while (out.size() < opts.target_count) {
    const std::size_t base = rng.index(n);
    const std::size_t nn = neighbors[base][rng.index(neighbors[base].size())];
    const double gap = opts.fixed_gap ? *opts.fixed_gap : rng.uniform();
    out.push_back(features[base] + gap * (features[nn] - features[base]));
  }
  return out;
}

}  // namespace twfr
