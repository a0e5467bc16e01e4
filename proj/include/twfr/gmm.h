#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace twfr {

// Full-covariance Gaussian mixture. Immutable once built; the inverse
// Cholesky factor of every covariance is cached so scoring only needs a
// triangular matrix-vector product.
class GmmModel {
 public:
  // Throws ConfigError on inconsistent shapes or weights that are not a
  // positive simplex, NumericError when a covariance is not positive definite.
  GmmModel(Eigen::VectorXd weights, std::vector<Eigen::VectorXd> means,
           std::vector<Eigen::MatrixXd> covariances);

  int n_components() const { return static_cast<int>(weights_.size()); }
  int dim() const { return static_cast<int>(weights_.size() ? means_.front().size() : 0); }

  const Eigen::VectorXd& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& means() const { return means_; }
  const std::vector<Eigen::MatrixXd>& covariances() const { return covariances_; }
  // Lower-triangular W_k with Sigma_k^{-1} = W_k^T W_k.
  const std::vector<Eigen::MatrixXd>& precision_factors() const { return precision_factors_; }

  // log N(x | mu_k, Sigma_k), k zero-based.
  double component_log_density(int k, const Eigen::VectorXd& x) const;
  // (x - mu_k)^T Sigma_k^{-1} (x - mu_k).
  double squared_mahalanobis(int k, const Eigen::VectorXd& x) const;
  // log sum_k pi_k N(x | mu_k, Sigma_k).
  double log_likelihood(const Eigen::VectorXd& x) const;

 private:
  void check_index(int k) const;
  void check_dim(const Eigen::VectorXd& x) const;

  Eigen::VectorXd weights_;
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::MatrixXd> covariances_;
  std::vector<Eigen::MatrixXd> precision_factors_;
  std::vector<double> log_det_;  // log det Sigma_k
};

struct FitOptions {
  int k = 1;
  double reg_covar = 1e-6;
  double tol = 1e-3;
  int max_iter = 100;
  int n_init = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FitResult {
  GmmModel model;
  // Mean per-sample log-likelihood after every E-step of the winning run.
  std::vector<double> log_likelihood_history;
  bool converged = false;
  int n_iter = 0;
};

// EM with k-means++ seeded k-means initialisation; best of n_init restarts.
// Throws ConfigError for fewer samples than components or ragged input and
// NumericError when a covariance becomes singular.
FitResult fit_gmm_detailed(std::span<const Eigen::VectorXd> features, const FitOptions& opts);
GmmModel fit_gmm(std::span<const Eigen::VectorXd> features, const FitOptions& opts);

struct AnomalyScore {
  double value = 0.0;  // nats; higher is more anomalous
};

struct ScoreOptions {
  // Adds log pi_k inside the max. Off by default: the score is the best
  // single-component log density.
  bool include_component_weight = false;
};

// -max_k [log N(x | mu_k, Sigma_k) (+ log pi_k)].
AnomalyScore anomaly_score(const GmmModel& model, const Eigen::VectorXd& x,
                           const ScoreOptions& opts = {});

// min_k sqrt((y1 - y2)^T Sigma_k^{-1} (y1 - y2)).
double mahalanobis_metric(const GmmModel& model, const Eigen::VectorXd& y1,
                          const Eigen::VectorXd& y2);

// Pairwise mahalanobis_metric; symmetric with zero diagonal.
Eigen::MatrixXd distance_matrix(const GmmModel& model, std::span<const Eigen::VectorXd> features);

}  // namespace twfr
