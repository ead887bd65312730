#pragma once

#include "roshap/errors.hpp"
#include "roshap/stats.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace roshap {

/// Gaussian kernel density estimate with Silverman's rule-of-thumb bandwidth
/// 0.9 min(sd, IQR / 1.34) m^(-1/5), floored at 1e-9 (max - min).
class GaussianKde {
 public:
  explicit GaussianKde(Eigen::VectorXd samples) : samples_(std::move(samples)) {
    if (samples_.size() < 2) throw NumericError("KDE needs at least 2 samples");
    const double lo = samples_.minCoeff();
    const double hi = samples_.maxCoeff();
    if (!(hi > lo)) throw NumericError("KDE samples are identical (point mass)");
    const auto sorted = stats::sorted_copy(samples_);
    const double iqr = stats::quantile_sorted(sorted, 0.75) - stats::quantile_sorted(sorted, 0.25);
    const double spread = std::min(stats::sd(samples_), iqr / 1.34);
    bandwidth_ = std::max(0.9 * spread * std::pow(static_cast<double>(samples_.size()), -0.2),
                          1e-9 * (hi - lo));
  }

  double bandwidth() const { return bandwidth_; }
  const Eigen::VectorXd& samples() const { return samples_; }

  double operator()(double x) const {
    const double norm = 1.0 / (static_cast<double>(samples_.size()) * bandwidth_ *
                               std::sqrt(2.0 * std::numbers::pi));
    double total = 0.0;
    for (Eigen::Index i = 0; i < samples_.size(); ++i) {
      const double u = (x - samples_[i]) / bandwidth_;
      total += std::exp(-0.5 * u * u);
    }
    return total * norm;
  }

  template <typename Derived>
  Eigen::VectorXd density(const Eigen::DenseBase<Derived>& grid) const {
    Eigen::VectorXd out(grid.size());
    for (Eigen::Index k = 0; k < grid.size(); ++k) out[k] = (*this)(grid.derived().coeff(k));
    return out;
  }

 private:
  Eigen::VectorXd samples_;
  double bandwidth_ = 0.0;
};

template <typename Derived>
Eigen::VectorXd kde_density(const Eigen::VectorXd& nonzero_samples,
                            const Eigen::DenseBase<Derived>& grid) {
  return GaussianKde(nonzero_samples).density(grid);
}

}  // namespace roshap
