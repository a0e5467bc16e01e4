#include "twfr/gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "twfr/error.h"
#include "twfr/random.h"

namespace twfr {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

}  // namespace

GmmModel::GmmModel(Eigen::VectorXd weights, std::vector<Eigen::VectorXd> means,
                   std::vector<Eigen::MatrixXd> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
  const auto k = static_cast<std::size_t>(weights_.size());
  if (k == 0) throw ConfigError("GMM needs at least one component");
  if (means_.size() != k || covariances_.size() != k) {
    throw ConfigError("GMM weights, means and covariances disagree on the component count");
  }
  const Eigen::Index m = means_.front().size();
  if (m == 0) throw ConfigError("GMM dimension must be positive");
  if (!weights_.allFinite() || (weights_.array() <= 0.0).any() ||
      std::abs(weights_.sum() - 1.0) > 1e-8) {
    throw ConfigError("GMM weights must be positive and sum to 1");
  }

  precision_factors_.reserve(k);
  log_det_.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    const Eigen::MatrixXd& cov = covariances_[c];
    if (means_[c].size() != m || cov.rows() != m || cov.cols() != m) {
      throw ConfigError("GMM component " + std::to_string(c) + " has inconsistent dimensions");
    }
    if (!means_[c].allFinite() || !cov.allFinite()) {
      throw ConfigError("GMM component " + std::to_string(c) + " has non-finite parameters");
    }
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw ConfigError("GMM covariance " + std::to_string(c) + " is not symmetric");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericError("singular covariance in component " + std::to_string(c) +
                         " (not positive definite); increase reg_covar");
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    const Eigen::VectorXd diag = lower.diagonal();
    if ((diag.array() <= 0.0).any() || !diag.allFinite()) {
      throw NumericError("singular covariance in component " + std::to_string(c));
    }
    precision_factors_.push_back(
        lower.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(m, m)));
    log_det_.push_back(2.0 * diag.array().log().sum());
  }
}

void GmmModel::check_index(int k) const {
  if (k < 0 || k >= n_components()) {
    throw ConfigError("component index " + std::to_string(k) + " out of range [0, " +
                      std::to_string(n_components()) + ")");
  }
}

void GmmModel::check_dim(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) {
    throw ConfigError("dimension mismatch: vector has " + std::to_string(x.size()) +
                      " entries, model expects " + std::to_string(dim()));
  }
}

double GmmModel::squared_mahalanobis(int k, const Eigen::VectorXd& x) const {
  check_index(k);
  check_dim(x);
  const Eigen::VectorXd diff = x - means_[k];
  return (precision_factors_[k].triangularView<Eigen::Lower>() * diff).squaredNorm();
}

double GmmModel::component_log_density(int k, const Eigen::VectorXd& x) const {
  const double maha = squared_mahalanobis(k, x);
  return -0.5 * (dim() * kLog2Pi + log_det_[k] + maha);
}

double GmmModel::log_likelihood(const Eigen::VectorXd& x) const {
  Eigen::VectorXd terms(n_components());
  for (int k = 0; k < n_components(); ++k) {
    terms[k] = std::log(weights_[k]) + component_log_density(k, x);
  }
  const double top = terms.maxCoeff();
  return top + std::log((terms.array() - top).exp().sum());
}

void FitOptions::validate() const {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (!(reg_covar >= 0.0) || !std::isfinite(reg_covar)) throw ConfigError("reg_covar must be >= 0");
  if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (n_init < 1) throw ConfigError("n_init must be >= 1");
}

namespace {

// Data are shifted by the first sample before any arithmetic. The shift is
// undone when the means are stored, so a cluster of identical points yields
// its exact value as mean and an exactly zero scatter matrix.
struct Centered {
  Eigen::MatrixXd x;  // n x M, rows minus pivot
  Eigen::VectorXd pivot;
};

Centered center_rows(std::span<const Eigen::VectorXd> features) {
  const Eigen::Index n = static_cast<Eigen::Index>(features.size());
  const Eigen::Index m = features.front().size();
  Centered c;
  c.pivot = features.front();
  c.x.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i) c.x.row(i) = (features[i] - c.pivot).transpose();
  return c;
}

// k-means++ seeding followed by Lloyd iterations; returns one-hot
// responsibilities.
Eigen::MatrixXd kmeans_responsibilities(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centers(k, x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
  Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
    }
    centers.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (x.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[i]) += x.row(i);
      ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) centers.row(c) = sums.row(c) / counts[c];  // empty clusters stay put
    }
  }

  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) resp(i, labels[i]) = 1.0;
  return resp;
}

GmmModel maximization(const Centered& data, const Eigen::MatrixXd& resp, double reg_covar) {
  const Eigen::Index n = data.x.rows();
  const int k = static_cast<int>(resp.cols());
  const Eigen::VectorXd nk =
      resp.colwise().sum().transpose().array() + 10.0 * std::numeric_limits<double>::epsilon();

  Eigen::VectorXd weights = nk / static_cast<double>(n);
  weights /= weights.sum();
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covs;
  for (int c = 0; c < k; ++c) {
    const Eigen::VectorXd shifted_mean = (data.x.transpose() * resp.col(c)) / nk[c];
    const Eigen::MatrixXd diff = data.x.rowwise() - shifted_mean.transpose();
    const Eigen::MatrixXd weighted = diff.array().colwise() * resp.col(c).array();
    Eigen::MatrixXd cov = (weighted.transpose() * diff) / nk[c];
    cov = 0.5 * (cov + cov.transpose());
    cov.diagonal().array() += reg_covar;
    means.push_back(shifted_mean + data.pivot);
    covs.push_back(std::move(cov));
  }
  return GmmModel(std::move(weights), std::move(means), std::move(covs));
}

// Returns the mean log-likelihood and writes the normalised responsibilities.
double expectation(const Centered& data, const GmmModel& model, Eigen::MatrixXd& resp) {
  const Eigen::Index n = data.x.rows();
  const Eigen::Index m = data.x.cols();
  const int k = model.n_components();
  Eigen::MatrixXd log_prob(n, k);
  for (int c = 0; c < k; ++c) {
    const Eigen::VectorXd mu = model.means()[c] - data.pivot;
    const Eigen::MatrixXd diff = (data.x.rowwise() - mu.transpose()).transpose();  // M x n
    const Eigen::MatrixXd y = model.precision_factors()[c].triangularView<Eigen::Lower>() * diff;
    const Eigen::VectorXd maha = y.colwise().squaredNorm().transpose();
    const double log_det =
        -2.0 * model.precision_factors()[c].diagonal().array().log().sum();
    log_prob.col(c) = (-0.5 * (static_cast<double>(m) * kLog2Pi + log_det + maha.array())) +
                      std::log(model.weights()[c]);
  }
  const Eigen::VectorXd top = log_prob.rowwise().maxCoeff();
  const Eigen::VectorXd norm =
      top.array() + (log_prob.colwise() - top).array().exp().rowwise().sum().log();
  resp = (log_prob.colwise() - norm).array().exp();
  return norm.mean();
}

}  // namespace

FitResult fit_gmm_detailed(std::span<const Eigen::VectorXd> features, const FitOptions& opts) {
  opts.validate();
  if (features.empty()) throw ConfigError("cannot fit a GMM to zero samples");
  if (features.size() < static_cast<std::size_t>(opts.k)) {
    throw ConfigError("fewer samples (" + std::to_string(features.size()) + ") than components (" +
                      std::to_string(opts.k) + ")");
  }
  const Eigen::Index m = features.front().size();
  if (m == 0) throw ConfigError("feature dimension must be positive");
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != m) {
      throw ConfigError("dimension mismatch at sample " + std::to_string(i) + ": " +
                        std::to_string(features[i].size()) + " vs " + std::to_string(m));
    }
    if (!features[i].allFinite()) throw ConfigError("non-finite value in sample " + std::to_string(i));
  }

  const Centered data = center_rows(features);
  Rng rng(opts.seed);
  std::optional<FitResult> best;
  double best_score = -std::numeric_limits<double>::infinity();

  for (int run = 0; run < opts.n_init; ++run) {
    Eigen::MatrixXd resp = kmeans_responsibilities(data.x, opts.k, rng);
    GmmModel model = maximization(data, resp, opts.reg_covar);
    std::vector<double> history;
    bool converged = false;
    int iter = 0;
    double lower = -std::numeric_limits<double>::infinity();
    for (iter = 1; iter <= opts.max_iter; ++iter) {
      const double prev = lower;
      lower = expectation(data, model, resp);
      history.push_back(lower);
      model = maximization(data, resp, opts.reg_covar);
      if (std::abs(lower - prev) < opts.tol) {
        converged = true;
        break;
      }
    }
    iter = std::min(iter, opts.max_iter);
    if (!best || lower > best_score) {
      best_score = lower;
      best.emplace(FitResult{std::move(model), std::move(history), converged, iter});
    }
  }
  return std::move(*best);
}

GmmModel fit_gmm(std::span<const Eigen::VectorXd> features, const FitOptions& opts) {
  return fit_gmm_detailed(features, opts).model;
}

AnomalyScore anomaly_score(const GmmModel& model, const Eigen::VectorXd& x,
                           const ScoreOptions& opts) {
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < model.n_components(); ++k) {
    double v = model.component_log_density(k, x);
    if (opts.include_component_weight) v += std::log(model.weights()[k]);
    best = std::max(best, v);
  }
  return AnomalyScore{-best};
}

double mahalanobis_metric(const GmmModel& model, const Eigen::VectorXd& y1,
                          const Eigen::VectorXd& y2) {
  if (y1.size() != model.dim() || y2.size() != model.dim()) {
    throw ConfigError("dimension mismatch: metric inputs have " + std::to_string(y1.size()) +
                      " and " + std::to_string(y2.size()) + " entries, model expects " +
                      std::to_string(model.dim()));
  }
  const Eigen::VectorXd diff = y1 - y2;
  double best = std::numeric_limits<double>::infinity();
  for (const Eigen::MatrixXd& w : model.precision_factors()) {
    best = std::min(best, (w.triangularView<Eigen::Lower>() * diff).squaredNorm());
  }
  return std::sqrt(best);
}

Eigen::MatrixXd distance_matrix(const GmmModel& model, std::span<const Eigen::VectorXd> features) {
  const Eigen::Index n = static_cast<Eigen::Index>(features.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (features[i].size() != model.dim()) {
      throw ConfigError("dimension mismatch at feature " + std::to_string(i));
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = mahalanobis_metric(model, features[i], features[j]);
    }
  }
  return d;
}

}  // namespace twfr
