#include "roshap/evalharness.hpp"

#include "roshap/csv.hpp"
#include "roshap/errors.hpp"
#include "roshap/parallel.hpp"
#include "roshap/stats.hpp"

#include <algorithm>
#include <fstream>

namespace roshap {

void EvalConfig::validate(Eigen::Index num_features) const {
  if (k_values.empty()) throw UsageError("k list is empty");
  for (int k : k_values)
    if (k < 1 || k > num_features)
      throw UsageError("k = " + std::to_string(k) + " outside 1.." + std::to_string(num_features));
  if (methods.empty()) throw UsageError("no methods selected");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw UsageError("test fraction must lie in (0, 1)");
  params.validate();
}

SplitIndices evaluation_split(const Dataset& ds, const EvalConfig& cfg) {
  return train_test_split_indices(ds, cfg.test_fraction, cfg.master_seed,
                                  ds.task() == TaskKind::binary_classification);
}

std::uint64_t split_hash(const SplitIndices& split) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (int i : split.train) mix(static_cast<std::uint64_t>(i));
  mix(~0ULL);
  for (int i : split.test) mix(static_cast<std::uint64_t>(i));
  return h;
}

namespace {

MetricReport evaluate_columns(const Dataset& ds, std::vector<int> columns, const SplitIndices& split,
                              const EvalConfig& cfg) {
  std::sort(columns.begin(), columns.end());
  const Dataset sub = ds.select_columns(columns);
  const auto ens = fit_gbdt_rows(sub, split.train, cfg.params, default_objective(ds.task()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(split.test.size()));
  Eigen::VectorXd pred(y.size());
  for (std::size_t t = 0; t < split.test.size(); ++t) {
    const int i = split.test[t];
    y[static_cast<Eigen::Index>(t)] = sub.target()[i];
    const double margin = predict_margin(ens, Eigen::VectorXd(sub.features().row(i).transpose()));
    pred[static_cast<Eigen::Index>(t)] =
        ens.objective == Objective::logistic ? sigmoid(margin) : margin;
  }
  return ds.task() == TaskKind::binary_classification ? classification_metrics(y, pred)
                                                      : regression_metrics(y, pred);
}

std::vector<int> head(const std::vector<int>& ranked, int k) {
  if (k < 1 || k > static_cast<int>(ranked.size()))
    throw UsageError("k = " + std::to_string(k) + " outside 1.." + std::to_string(ranked.size()));
  return {ranked.begin(), ranked.begin() + k};
}

std::vector<int> ranked_features(const RankingTable& ranking) { return ranking.top(ranking.rows.size()); }

}  // namespace

MetricReport evaluate_topk(const Dataset& ds, const std::vector<int>& ranked, int k, const EvalConfig& cfg) {
  return evaluate_columns(ds, head(ranked, k), evaluation_split(ds, cfg), cfg);
}

MetricReport evaluate_topk(const Dataset& ds, const RankingTable& ranking, int k, const EvalConfig& cfg) {
  return evaluate_topk(ds, ranked_features(ranking), k, cfg);
}

MetricReport evaluate_topk(const Dataset& ds, const ImportanceVector& importance, int k, const EvalConfig& cfg) {
  return evaluate_topk(ds, rank_importance(importance), k, cfg);
}

std::vector<std::string> metric_names(TaskKind task) {
  if (task == TaskKind::binary_classification) return {"accuracy", "macro_f1", "average_precision", "auc_roc"};
  return {"rmse", "mae", "mape"};
}

double metric_value(const MetricReport& r, const std::string& metric) {
  const std::optional<double>* v = nullptr;
  if (metric == "accuracy") v = &r.accuracy;
  else if (metric == "macro_f1") v = &r.macro_f1;
  else if (metric == "average_precision") v = &r.average_precision;
  else if (metric == "auc_roc") v = &r.auc_roc;
  else if (metric == "rmse") v = &r.rmse;
  else if (metric == "mae") v = &r.mae;
  else if (metric == "mape") v = &r.mape;
  else throw UsageError("unknown metric '" + metric + "'");
  return v->has_value() ? **v : std::numeric_limits<double>::quiet_NaN();
}

SweepResult sweep(const Dataset& ds, const std::map<Method, RankingTable>& rankings, const EvalConfig& cfg) {
  cfg.validate(ds.cols());
  const auto split = evaluation_split(ds, cfg);
  const auto hash = split_hash(split);
  SweepResult result;
  std::vector<std::vector<int>> ranked;
  for (Method m : cfg.methods) {
    const auto it = rankings.find(m);
    if (it == rankings.end()) throw UsageError("no ranking supplied for method " + to_string(m));
    ranked.push_back(ranked_features(it->second));
    for (int k : cfg.k_values) result.cells.push_back({m, k, {}, hash});
  }
  const std::size_t nk = cfg.k_values.size();
  parallel_for(result.cells.size(), cfg.workers, [&](std::size_t c) {
    auto& cell = result.cells[c];
    cell.report = evaluate_columns(ds, head(ranked[c / nk], cell.k), split, cfg);
  });
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    for (const auto& metric : metric_names(ds.task())) {
      Eigen::VectorXd values(static_cast<Eigen::Index>(nk));
      for (std::size_t ki = 0; ki < nk; ++ki)
        values[static_cast<Eigen::Index>(ki)] = metric_value(result.cells[mi * nk + ki].report, metric);
      result.rows.push_back({cfg.methods[mi], metric, stats::mean(values), stats::sd(values),
                             static_cast<int>(nk)});
    }
  }
  return result;
}

std::map<Method, RankingTable> training_rankings(const Dataset& ds, const EvalConfig& cfg, int roshap_runs,
                                                 int info_gain_bins) {
  const auto split = evaluation_split(ds, cfg);
  const Dataset train = ds.select_rows(split.train);
  std::map<Method, RankingTable> out;
  for (Method m : cfg.methods) {
    switch (m) {
      case Method::roshap: {
        BootstrapOptions opts;
        opts.workers = cfg.workers;
        const auto runs = run_bootstrap_attribution(train, cfg.params, roshap_runs, cfg.master_seed, opts);
        out[m] = rank_features(summarize_all(u_matrix(runs)));
        break;
      }
      case Method::single_shap:
        out[m] = rank_importance(single_run_shap(train, cfg.params, cfg.master_seed, cfg.test_fraction));
        break;
      case Method::gain:
        out[m] = rank_importance(gain_baseline(train, cfg.params, cfg.master_seed, cfg.test_fraction));
        break;
      case Method::info_gain:
        out[m] = rank_importance(information_gain(train, info_gain_bins));
        break;
    }
  }
  return out;
}

void write_comparison_csv(const std::string& path, const SweepResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  csv::write_record(out, {"method", "metric", "mean", "sd", "k_count"});
  for (const auto& r : result.rows)
    csv::write_record(out, {to_string(r.method), r.metric, csv::format_double(r.mean), csv::format_double(r.sd),
                            std::to_string(r.k_count)});
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace roshap
