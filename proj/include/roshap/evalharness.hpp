#pragma once

#include "roshap/attribution.hpp"
#include "roshap/baselines.hpp"
#include "roshap/dataset.hpp"
#include "roshap/metrics.hpp"
#include "roshap/trees.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace roshap {

struct EvalConfig {
  std::vector<int> k_values;
  double test_fraction = kDefaultTestFraction;
  std::vector<Method> methods;
  GbdtParams params;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;

  void validate(Eigen::Index num_features) const;
};

/// The held-out split every cell of a sweep shares (stratified for
/// classification).
SplitIndices evaluation_split(const Dataset& ds, const EvalConfig& cfg);

/// FNV-1a over both index sets; equal hashes mean the same partition.
std::uint64_t split_hash(const SplitIndices& split);

/// Refit on the k top-ranked columns (kept in ascending column order) of the
/// training rows and score the test rows.
MetricReport evaluate_topk(const Dataset& ds, const std::vector<int>& ranked_features, int k,
                           const EvalConfig& cfg);
MetricReport evaluate_topk(const Dataset& ds, const RankingTable& ranking, int k, const EvalConfig& cfg);
MetricReport evaluate_topk(const Dataset& ds, const ImportanceVector& importance, int k,
                           const EvalConfig& cfg);

/// Metric names present in a report, in a fixed order.
std::vector<std::string> metric_names(TaskKind task);
double metric_value(const MetricReport& report, const std::string& metric);

struct EvalCell {
  Method method;
  int k = 0;
  MetricReport report;
  std::uint64_t split_hash = 0;
};

struct ComparisonRow {
  Method method;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;  // sample SD across k values; 0 for one k
  int k_count = 0;
};

struct SweepResult {
  std::vector<EvalCell> cells;  // method-major, then k in config order
  std::vector<ComparisonRow> rows;
};

/// Evaluates every (method, k) cell; `rankings` must hold a ranking for each
/// configured method.
SweepResult sweep(const Dataset& ds, const std::map<Method, RankingTable>& rankings, const EvalConfig& cfg);

/// Importance rankings computed on the training side of the evaluation split,
/// so selection never sees test rows. RoSHAP uses `roshap_runs` bootstrap runs.
std::map<Method, RankingTable> training_rankings(const Dataset& ds, const EvalConfig& cfg, int roshap_runs,
                                                 int info_gain_bins = 10);

void write_comparison_csv(const std::string& path, const SweepResult& result);

}  // namespace roshap
