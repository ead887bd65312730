#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace roshap::stats {

template <typename Derived>
typename Derived::Scalar mean(const Eigen::DenseBase<Derived>& x) {
  return x.size() == 0 ? typename Derived::Scalar(0) : x.sum() / static_cast<typename Derived::Scalar>(x.size());
}

/// Sample standard deviation with the (n - 1) denominator; 0 for n < 2.
template <typename Derived>
typename Derived::Scalar sd(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() < 2) return Scalar(0);
  const Scalar m = mean(x);
  Scalar ss(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) ss += (x.derived().coeff(i) - m) * (x.derived().coeff(i) - m);
  return std::sqrt(ss / static_cast<Scalar>(x.size() - 1));
}

template <typename Scalar>
std::vector<Scalar> sorted_copy(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  std::vector<Scalar> v(x.data(), x.data() + x.size());
  std::sort(v.begin(), v.end());
  return v;
}

/// Linear-interpolation quantile of sorted data (R type 7).
template <typename Scalar>
Scalar quantile_sorted(const std::vector<Scalar>& sorted, Scalar q) {
  if (sorted.empty()) return std::numeric_limits<Scalar>::quiet_NaN();
  const Scalar h = (static_cast<Scalar>(sorted.size()) - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<Scalar>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Median; the average of the two middle values for even counts.
template <typename Scalar>
Scalar median_sorted(const std::vector<Scalar>& sorted) {
  if (sorted.empty()) return std::numeric_limits<Scalar>::quiet_NaN();
  const std::size_t n = sorted.size();
  return n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / Scalar(2);
}

struct Shape {
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Moment-ratio skewness g1 = m3 / m2^1.5 and excess kurtosis m4 / m2^2 - 3.
template <typename Derived>
Shape shape(const Eigen::DenseBase<Derived>& x) {
  const double m = mean(x);
  double m2 = 0, m3 = 0, m4 = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x.derived().coeff(i) - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const auto n = static_cast<double>(x.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) return {};
  return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z, double mu = 0.0, double sigma = 1.0) {
  const double u = (z - mu) / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// Kolmogorov distance between the empirical CDF of (x - mean) / sd and N(0, 1).
template <typename Derived>
double ks_distance_to_normal(const Eigen::DenseBase<Derived>& x) {
  const auto n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(x);
  const double s = sd(x);
  if (!(s > 0.0)) return 1.0;
  std::vector<double> z(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = (x.derived().coeff(i) - m) / s;
  std::sort(z.begin(), z.end());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = normal_cdf(z[i]);
    d = std::max({d, static_cast<double>(i + 1) / static_cast<double>(n) - f,
                  f - static_cast<double>(i) / static_cast<double>(n)});
  }
  return d;
}

}  // namespace roshap::stats
