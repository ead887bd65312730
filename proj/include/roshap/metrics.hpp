#pragma once

#include <Eigen/Dense>

#include <optional>

namespace roshap {

struct MetricReport {
  // classification
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
  std::optional<double> average_precision;
  std::optional<double> auc_roc;
  bool f1_zero_division = false;  // some per-class F1 was undefined and set to 0
  // regression
  std::optional<double> rmse;
  std::optional<double> mae;
  std::optional<double> mape;  // absent when every |y| <= kMapeFloor
  int mape_excluded = 0;
};

inline constexpr double kMapeFloor = 1e-8;

/// Labels in {0, 1}; predictions are score >= threshold. DataError when y
/// holds a single class.
MetricReport classification_metrics(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                                    const Eigen::Ref<const Eigen::VectorXd>& scores,
                                    double threshold = 0.5);

MetricReport regression_metrics(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                                const Eigen::Ref<const Eigen::VectorXd>& y_pred);

/// Mann-Whitney AUC, ties counted one half.
double auc_roc(const Eigen::Ref<const Eigen::VectorXd>& y_true,
               const Eigen::Ref<const Eigen::VectorXd>& scores);

/// Sum of (R_i - R_{i-1}) P_i over distinct score thresholds, descending.
double average_precision(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                         const Eigen::Ref<const Eigen::VectorXd>& scores);

}  // namespace roshap
