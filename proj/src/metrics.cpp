#include "roshap/metrics.hpp"

#include "roshap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace roshap {

namespace {

void check_binary(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& s) {
  if (y.size() != s.size()) throw UsageError("labels and scores differ in length");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0) pos = true;
    else if (y[i] == 0.0) neg = true;
    else throw DataError("classification labels must be 0 or 1");
  }
  if (!pos || !neg) throw DataError("classification metrics need both classes in y_true");
}

std::vector<Eigen::Index> descending_order(const Eigen::Ref<const Eigen::VectorXd>& s) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(s.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return s[a] > s[b]; });
  return order;
}

}  // namespace

double auc_roc(const Eigen::Ref<const Eigen::VectorXd>& y_true, const Eigen::Ref<const Eigen::VectorXd>& scores) {
  check_binary(y_true, scores);
  // Walk tie groups in ascending score; count positives beating negatives
  // strictly below them, in half units so the sum stays an exact integer.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return scores[a] < scores[b]; });
  std::uint64_t neg_below = 0, half_units = 0, npos = 0, nneg = 0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t e = g;
    std::uint64_t p = 0, q = 0;
    while (e < order.size() && scores[order[e]] == scores[order[g]]) {
      (y_true[order[e]] == 1.0 ? p : q) += 1;
      ++e;
    }
    half_units += p * (2 * neg_below + q);
    neg_below += q;
    npos += p;
    nneg += q;
    g = e;
  }
  return static_cast<double>(half_units) / static_cast<double>(2 * npos * nneg);
}

double average_precision(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                         const Eigen::Ref<const Eigen::VectorXd>& scores) {
  check_binary(y_true, scores);
  const auto order = descending_order(scores);
  const double npos = y_true.sum();
  double tp = 0.0, fp = 0.0, recall_prev = 0.0, ap = 0.0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t e = g;
    while (e < order.size() && scores[order[e]] == scores[order[g]]) {
      (y_true[order[e]] == 1.0 ? tp : fp) += 1.0;
      ++e;
    }
    const double recall = tp / npos;
    const double precision = tp / (tp + fp);
    ap += (recall - recall_prev) * precision;
    recall_prev = recall;
    g = e;
  }
  return ap;
}

MetricReport classification_metrics(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                                    const Eigen::Ref<const Eigen::VectorXd>& scores, double threshold) {
  check_binary(y_true, scores);
  MetricReport r;
  const auto n = y_true.size();
  double correct = 0.0;
  double tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int truth = y_true[i] == 1.0 ? 1 : 0;
    const int pred = scores[i] >= threshold ? 1 : 0;
    if (pred == truth) {
      correct += 1.0;
      tp[truth] += 1.0;
    } else {
      fp[pred] += 1.0;
      fn[truth] += 1.0;
    }
  }
  r.accuracy = correct / static_cast<double>(n);
  double f1_sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    if (denom > 0.0) f1_sum += 2.0 * tp[c] / denom;
    else r.f1_zero_division = true;
  }
  r.macro_f1 = f1_sum / 2.0;
  r.average_precision = average_precision(y_true, scores);
  r.auc_roc = auc_roc(y_true, scores);
  return r;
}

MetricReport regression_metrics(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                                const Eigen::Ref<const Eigen::VectorXd>& y_pred) {
  if (y_true.size() != y_pred.size()) throw UsageError("targets and predictions differ in length");
  if (y_true.size() < 1) throw UsageError("regression metrics need at least one row");
  MetricReport r;
  const auto n = static_cast<double>(y_true.size());
  double se = 0.0, ae = 0.0, ape = 0.0;
  int used = 0;
  for (Eigen::Index i = 0; i < y_true.size(); ++i) {
    const double e = y_true[i] - y_pred[i];
    se += e * e;
    ae += std::abs(e);
    if (std::abs(y_true[i]) > kMapeFloor) {
      ape += std::abs(e / y_true[i]);
      ++used;
    } else {
      ++r.mape_excluded;
    }
  }
  r.rmse = std::sqrt(se / n);
  r.mae = ae / n;
  if (used > 0) r.mape = ape / static_cast<double>(used);
  return r;
}

}  // namespace roshap
