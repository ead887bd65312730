#include "../common/naive_metrics.hpp"
#include "roshap/errors.hpp"
#include "roshap/metrics.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace roshap;

TEST(ClassificationMetrics, PerfectSeparation) {
  const Eigen::Vector4d y(0, 1, 0, 1), s(0.1, 0.9, 0.2, 0.8);
  const auto r = classification_metrics(y, s);
  EXPECT_EQ(*r.accuracy, 1.0);
  EXPECT_EQ(*r.macro_f1, 1.0);
  EXPECT_EQ(*r.average_precision, 1.0);
  EXPECT_EQ(*r.auc_roc, 1.0);
  EXPECT_FALSE(r.rmse.has_value());
}

TEST(ClassificationMetrics, AllTiedScores) {
  const Eigen::Vector4d y(0, 1, 0, 1);
  EXPECT_EQ(auc_roc(y, Eigen::Vector4d::Constant(0.3)), 0.5);
  EXPECT_EQ(average_precision(y, Eigen::Vector4d::Constant(0.3)), 0.5);
}

TEST(ClassificationMetrics, PairCountingExample) {
  EXPECT_EQ(auc_roc(Eigen::Vector4d(1, 0, 1, 0), Eigen::Vector4d(0.3, 0.4, 0.8, 0.1)), 0.75);
}

TEST(ClassificationMetrics, ApStaircaseByHand) {
  // Descending: 0.9(1) 0.8(0) 0.7(1) 0.6(0) -> 1*0.5 + (2/3)*0.5
  EXPECT_DOUBLE_EQ(average_precision(Eigen::Vector4d(1, 0, 1, 0), Eigen::Vector4d(0.9, 0.8, 0.7, 0.6)),
                   0.5 + 0.5 * 2.0 / 3.0);
}

TEST(ClassificationMetrics, MacroF1WhenOneClassNeverPredicted) {
  const Eigen::Vector4d y(0, 1, 1, 1);
  const auto r = classification_metrics(y, Eigen::Vector4d::Constant(0.9));
  EXPECT_EQ(*r.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(*r.macro_f1, (0.0 + 6.0 / 7.0) / 2.0);
}

TEST(ClassificationMetrics, SingleClassRejected) {
  EXPECT_THROW(classification_metrics(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(0.1, 0.2, 0.3)), DataError);
  EXPECT_THROW(auc_roc(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0.1, 0.2, 0.3)), DataError);
  EXPECT_THROW(classification_metrics(Eigen::Vector2d(0, 1), Eigen::Vector3d(0.1, 0.2, 0.3)), UsageError);
}

TEST(ClassificationMetrics, AucInvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd y(50), s(50);
    for (int i = 0; i < 50; ++i) {
      y[i] = i % 3 == 0;
      s[i] = std::round(u(rng) * 4) / 4;  // ties
    }
    const double base = auc_roc(y, s);
    EXPECT_EQ(auc_roc(y, s.unaryExpr([](double v) { return std::exp(3 * v) + 1; })), base);
    EXPECT_EQ(auc_roc(y, s.unaryExpr([](double v) { return v * v * v - 7; })), base);
  }
}

TEST(ClassificationMetrics, MatchNaiveLoopsExactly) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 60)(rng);
    Eigen::VectorXd y(n), s(n);
    const bool coarse = trial % 2 == 0;
    for (int i = 0; i < n; ++i) {
      y[i] = std::bernoulli_distribution(0.4)(rng);
      s[i] = std::uniform_real_distribution<double>(0, 1)(rng);
      if (coarse) s[i] = std::round(s[i] * 5) / 5;
    }
    y[0] = 0;
    y[1] = 1;
    const auto r = classification_metrics(y, s);
    EXPECT_EQ(*r.auc_roc, naive::auc(y, s));
    EXPECT_EQ(*r.average_precision, naive::average_precision(y, s));
    EXPECT_EQ(*r.accuracy, naive::accuracy(y, s));
    EXPECT_EQ(*r.macro_f1, naive::macro_f1(y, s));
  }
}

TEST(RegressionMetrics, IdentityAndTwoPoint) {
  const Eigen::Vector3d y(1, -2, 3);
  const auto r = regression_metrics(y, y);
  EXPECT_EQ(*r.rmse, 0.0);
  EXPECT_EQ(*r.mae, 0.0);
  EXPECT_EQ(*r.mape, 0.0);
  const auto t = regression_metrics(Eigen::Vector2d(1, 2), Eigen::Vector2d(2, 2));
  EXPECT_DOUBLE_EQ(*t.rmse, std::sqrt(0.5));
  EXPECT_EQ(*t.mae, 0.5);
  EXPECT_EQ(*t.mape, 0.5);
}

TEST(RegressionMetrics, MapeExclusions) {
  const auto r = regression_metrics(Eigen::Vector3d(0, 2, 1e-9), Eigen::Vector3d(1, 1, 0));
  EXPECT_EQ(r.mape_excluded, 2);
  EXPECT_EQ(*r.mape, 0.5);
  const auto none = regression_metrics(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  EXPECT_FALSE(none.mape.has_value());
  EXPECT_EQ(none.mape_excluded, 2);
  EXPECT_THROW(regression_metrics(Eigen::VectorXd(), Eigen::VectorXd()), UsageError);
}

TEST(RegressionMetrics, MatchNaiveLoops) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd(0, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 80)(rng);
    Eigen::VectorXd y(n), p(n);
    for (int i = 0; i < n; ++i) {
      y[i] = nd(rng);
      p[i] = y[i] + nd(rng);
    }
    const auto r = regression_metrics(y, p);
    EXPECT_EQ(*r.rmse, naive::rmse(y, p));
    EXPECT_EQ(*r.mae, naive::mae(y, p));
    EXPECT_EQ(*r.mape, naive::mape(y, p));
  }
}
