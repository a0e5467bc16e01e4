#pragma once

#include <Eigen/Dense>
#include <vector>

#include "twfr/spectrogram.h"

namespace twfr {

using TwfrVector = Eigen::VectorXd;

// Each row sorted in nonincreasing order; the input is left untouched.
Eigen::MatrixXd row_descending_sort(const Eigen::MatrixXd& x);

// Global weighted ranking pooling weights: w[n] = r^n / z(r), with
// z(r) = sum_{n<N} r^n and 0^0 = 1. r = 0 picks the largest value (max
// pooling); r = 1 gives uniform weights (mean pooling).
class PoolingVector {
 public:
  // Throws ConfigError if r is outside [0, 1] or n_frames < 1.
  PoolingVector(double r, int n_frames);

  const Eigen::VectorXd& weights() const { return weights_; }
  double r() const { return r_; }
  double normalizer() const { return z_; }
  int size() const { return static_cast<int>(weights_.size()); }

 private:
  double r_;
  double z_;
  Eigen::VectorXd weights_;
};

// Time-weighted frequency representation of an already row-sorted matrix.
TwfrVector pool_sorted(const Eigen::MatrixXd& sorted, const PoolingVector& pooling);

// Sort each Mel band over time, then pool with weights P(r). Length M.
TwfrVector gwrp(const Eigen::MatrixXd& x, double r);
inline TwfrVector gwrp(const LogMelSpectrogram& spec, double r) { return gwrp(spec.values, r); }

}  // namespace twfr
