#include "roshap/baselines.hpp"

#include "roshap/errors.hpp"
#include "roshap/treeshap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace roshap {

std::string to_string(Method method) {
  switch (method) {
    case Method::roshap: return "roshap";
    case Method::single_shap: return "single_shap";
    case Method::gain: return "gain";
    case Method::info_gain: return "info_gain";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "roshap") return Method::roshap;
  if (name == "single_shap") return Method::single_shap;
  if (name == "gain") return Method::gain;
  if (name == "info_gain") return Method::info_gain;
  throw UsageError("unknown method '" + name + "' (expected roshap, single_shap, gain or info_gain)");
}

std::vector<int> equal_frequency_bins(const Eigen::Ref<const Eigen::VectorXd>& x, int num_bins) {
  if (num_bins < 1) throw UsageError("number of bins must be positive");
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  std::vector<double> cuts;
  for (int k = 1; k < num_bins; ++k) {
    const auto pos = static_cast<std::size_t>(k) * n / static_cast<std::size_t>(num_bins);
    if (pos > 0 && pos < n) cuts.push_back(sorted[pos]);
  }
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<int> bins(n);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    bins[static_cast<std::size_t>(i)] =
        static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), x[i]) - cuts.begin());
  return bins;
}

namespace {

double entropy(const std::map<int, double>& counts, double total) {
  double h = 0.0;
  for (const auto& [label, count] : counts)
    if (count > 0.0) h -= count / total * std::log(count / total);
  return h;
}

}  // namespace

double information_gain_from_bins(const std::vector<int>& bins, const std::vector<int>& labels) {
  if (bins.size() != labels.size()) throw UsageError("bins and labels differ in length");
  if (bins.empty()) return 0.0;
  const auto total = static_cast<double>(labels.size());
  std::map<int, double> label_counts;
  std::map<int, std::map<int, double>> joint;
  std::map<int, double> bin_counts;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    label_counts[labels[i]] += 1.0;
    joint[bins[i]][labels[i]] += 1.0;
    bin_counts[bins[i]] += 1.0;
  }
  double conditional = 0.0;
  for (const auto& [bin, counts] : joint)
    conditional += bin_counts[bin] / total * entropy(counts, bin_counts[bin]);
  const double gain = entropy(label_counts, total) - conditional;
  return gain < 0.0 ? 0.0 : gain;
}

ImportanceVector information_gain(const Dataset& ds, int num_bins) {
  std::vector<int> labels;
  if (ds.task() == TaskKind::binary_classification) {
    labels.reserve(static_cast<std::size_t>(ds.rows()));
    for (Eigen::Index i = 0; i < ds.rows(); ++i) labels.push_back(static_cast<int>(ds.target()[i]));
    if (std::all_of(labels.begin(), labels.end(), [&](int v) { return v == labels.front(); }))
      throw DataError("information gain needs both classes");
  } else {
    labels = equal_frequency_bins(ds.target(), num_bins);
  }
  ImportanceVector out{Method::info_gain, Eigen::VectorXd::Zero(ds.cols())};
  for (Eigen::Index j = 0; j < ds.cols(); ++j)
    out.scores[j] = information_gain_from_bins(equal_frequency_bins(ds.features().col(j), num_bins), labels);
  return out;
}

ImportanceVector single_run_shap(const Dataset& ds, const GbdtParams& params, std::uint64_t seed,
                                 double test_fraction) {
  const bool stratified = ds.task() == TaskKind::binary_classification;
  const auto split = train_test_split_indices(ds, test_fraction, seed, stratified);
  const auto ens = fit_gbdt_rows(ds, split.train, params, default_objective(ds.task()));
  ImportanceVector out{Method::single_shap, Eigen::VectorXd::Zero(ds.cols())};
  Eigen::VectorXd x(ds.cols()), phi(ds.cols());
  for (int i : split.test) {
    x = ds.features().row(i).transpose();
    phi.setZero();
    tree_shap_accumulate(ens, x.data(), phi.data());
    for (Eigen::Index j = 0; j < phi.size(); ++j)
      if (std::abs(phi[j]) > kZeroSnap) out.scores[j] += std::abs(phi[j]);
  }
  return out;
}

ImportanceVector gain_baseline(const Dataset& ds, const GbdtParams& params, std::uint64_t seed,
                               double test_fraction) {
  const bool stratified = ds.task() == TaskKind::binary_classification;
  const auto split = train_test_split_indices(ds, test_fraction, seed, stratified);
  const auto ens = fit_gbdt_rows(ds, split.train, params, default_objective(ds.task()));
  return {Method::gain, gain_importance(ens)};
}

RankingTable rank_importance(const ImportanceVector& importance) {
  RankingTable table;
  table.method = to_string(importance.method);
  std::vector<int> order(static_cast<std::size_t>(importance.scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return importance.scores[a] > importance.scores[b];
  });
  for (std::size_t r = 0; r < order.size(); ++r) {
    RankingRow row;
    row.rank = static_cast<int>(r) + 1;
    row.feature = order[r];
    row.score = importance.scores[order[r]];
    row.summary.feature = order[r];
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace roshap
