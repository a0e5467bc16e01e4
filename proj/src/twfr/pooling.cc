#include "twfr/pooling.h"

#include <algorithm>
#include <functional>
#include <string>

#include "twfr/error.h"

namespace twfr {

Eigen::MatrixXd row_descending_sort(const Eigen::MatrixXd& x) {
  // Row-major copy so each row is contiguous for std::sort.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = x;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double* begin = rows.row(i).data();
    std::sort(begin, begin + rows.cols(), std::greater<>());
  }
  return rows;
}

PoolingVector::PoolingVector(double r, int n_frames) : r_(r), z_(0.0) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw ConfigError("pooling weight r must lie in [0, 1], got " + std::to_string(r));
  }
  if (n_frames < 1) throw ConfigError("pooling needs at least one frame");
  // Powers by repeated multiplication: 0^0 = 1 and r = 1 stays exactly 1.
  // z is summed directly; the closed form (1 - r^N) / (1 - r) is 0/0 at r = 1.
  weights_.resize(n_frames);
  double power = 1.0;
  for (int n = 0; n < n_frames; ++n) {
    weights_[n] = power;
    z_ += power;
    power *= r;
  }
  weights_ /= z_;
}

TwfrVector pool_sorted(const Eigen::MatrixXd& sorted, const PoolingVector& pooling) {
  if (sorted.cols() != pooling.size()) {
    throw ConfigError("pooling vector length " + std::to_string(pooling.size()) +
                      " does not match " + std::to_string(sorted.cols()) + " frames");
  }
  return sorted * pooling.weights();
}

TwfrVector gwrp(const Eigen::MatrixXd& x, double r) {
  const PoolingVector pooling(r, static_cast<int>(x.cols()));
  return pool_sorted(row_descending_sort(x), pooling);
}

}  // namespace twfr
