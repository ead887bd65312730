#include "roshap/errors.hpp"
#include "roshap/evalharness.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace roshap;

namespace {

EvalConfig config(std::vector<int> ks, std::vector<Method> methods) {
  EvalConfig cfg;
  cfg.k_values = std::move(ks);
  cfg.methods = std::move(methods);
  cfg.params.num_rounds = 20;
  cfg.params.max_depth = 3;
  cfg.master_seed = 4;
  return cfg;
}

std::vector<int> identity(int p) {
  std::vector<int> v(static_cast<std::size_t>(p));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST(EvaluateTopk, FullFeatureSetEqualsDirectFit) {
  const auto ds = simulate_zig({.n = 200, .d = 12, .s = 3}, 6);
  const auto cfg = config({12}, {Method::gain});
  std::vector<int> ranked = identity(12);
  std::reverse(ranked.begin(), ranked.end());
  const auto report = evaluate_topk(ds, ranked, 12, cfg);

  const auto split = train_test_split_indices(ds, 0.3, cfg.master_seed, true);
  const auto ens = fit_gbdt_rows(ds, split.train, cfg.params, Objective::logistic);
  Eigen::VectorXd y(static_cast<Eigen::Index>(split.test.size())), p(y.size());
  for (std::size_t t = 0; t < split.test.size(); ++t) {
    y[static_cast<Eigen::Index>(t)] = ds.target()[split.test[t]];
    p[static_cast<Eigen::Index>(t)] =
        predict_proba(ens, Eigen::VectorXd(ds.features().row(split.test[t]).transpose()));
  }
  const auto direct = classification_metrics(y, p);
  EXPECT_EQ(*report.accuracy, *direct.accuracy);
  EXPECT_EQ(*report.auc_roc, *direct.auc_roc);
  EXPECT_EQ(*report.average_precision, *direct.average_precision);
  EXPECT_EQ(*report.macro_f1, *direct.macro_f1);
}

TEST(EvaluateTopk, PureNoiseFeatureIsNearChance) {
  const SimulationConfig sim;
  EvalConfig cfg = config({1}, {Method::gain});
  cfg.params = GbdtParams{};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto ds = simulate_zig(sim, seed);
    cfg.master_seed = seed;
    const int noise = 500 + static_cast<int>(seed);
    const auto r = evaluate_topk(ds, std::vector<int>{noise}, 1, cfg);
    EXPECT_GE(*r.auc_roc, 0.4) << "seed " << seed;
    EXPECT_LE(*r.auc_roc, 0.6) << "seed " << seed;
  }
}

TEST(EvaluateTopk, AcceptsRankingsAndImportances) {
  const auto ds = simulate_zig({.n = 150, .d = 8, .s = 2}, 1);
  const auto cfg = config({2}, {Method::info_gain});
  const auto imp = information_gain(ds);
  const auto a = evaluate_topk(ds, imp, 2, cfg);
  const auto b = evaluate_topk(ds, rank_importance(imp), 2, cfg);
  EXPECT_EQ(*a.accuracy, *b.accuracy);
  EXPECT_THROW(evaluate_topk(ds, imp, 9, cfg), UsageError);
}

TEST(EvaluateTopk, RegressionReport) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(120, 4);
  const Dataset ds(x, (3 * x.col(0).array() + 1.5).matrix(), {"a", "b", "c", "d"}, TaskKind::regression);
  const auto r = evaluate_topk(ds, identity(4), 1, config({1}, {Method::gain}));
  EXPECT_TRUE(r.rmse.has_value());
  EXPECT_GE(*r.rmse, 0.0);
  EXPECT_GE(*r.mae, 0.0);
  EXPECT_FALSE(r.accuracy.has_value());
}

TEST(Sweep, SameSplitForEveryCell) {
  const auto ds = simulate_zig({.n = 160, .d = 10, .s = 3}, 2);
  const auto cfg = config({1, 3, 5}, {Method::gain, Method::info_gain});
  std::map<Method, RankingTable> rankings{{Method::gain, rank_importance(gain_baseline(ds, cfg.params, 1))},
                                          {Method::info_gain, rank_importance(information_gain(ds))}};
  const auto result = sweep(ds, rankings, cfg);
  ASSERT_EQ(result.cells.size(), 6u);
  const auto expected = split_hash(evaluation_split(ds, cfg));
  for (const auto& c : result.cells) EXPECT_EQ(c.split_hash, expected);
  EXPECT_EQ(result.rows.size(), 8u);
  EXPECT_EQ(result.rows.front().k_count, 3);
  // Changing the seed changes the partition.
  EvalConfig other = cfg;
  other.master_seed = 5;
  EXPECT_NE(split_hash(evaluation_split(ds, other)), expected);
}

TEST(Sweep, SingleKHasZeroSd) {
  const auto ds = simulate_zig({.n = 160, .d = 10, .s = 3}, 2);
  const auto cfg = config({4}, {Method::info_gain});
  const auto result = sweep(ds, {{Method::info_gain, rank_importance(information_gain(ds))}}, cfg);
  for (const auto& r : result.rows) EXPECT_EQ(r.sd, 0.0);
}

TEST(Sweep, IdenticalRankingsGiveIdenticalRows) {
  const auto ds = simulate_zig({.n = 160, .d = 10, .s = 3}, 3);
  auto cfg = config({1, 2, 6}, {Method::gain, Method::info_gain});
  cfg.workers = 3;
  const auto table = rank_importance(information_gain(ds));
  auto gain_table = table;
  gain_table.method = "gain";
  const auto result = sweep(ds, {{Method::gain, gain_table}, {Method::info_gain, table}}, cfg);
  for (std::size_t m = 0; m < 4; ++m) {
    EXPECT_EQ(result.rows[m].metric, result.rows[m + 4].metric);
    EXPECT_EQ(result.rows[m].mean, result.rows[m + 4].mean);
    EXPECT_EQ(result.rows[m].sd, result.rows[m + 4].sd);
  }
}

TEST(Sweep, ConfigValidation) {
  const auto ds = simulate_zig({.n = 60, .d = 5, .s = 2}, 3);
  EXPECT_THROW(sweep(ds, {}, config({6}, {Method::gain})), UsageError);
  EXPECT_THROW(sweep(ds, {}, config({}, {Method::gain})), UsageError);
  EXPECT_THROW(sweep(ds, {}, config({1}, {})), UsageError);
  EXPECT_THROW(sweep(ds, {}, config({1}, {Method::gain})), UsageError);  // ranking missing
}

TEST(Sweep, ComparisonCsvSchema) {
  roshap::testing::TempDir dir;
  const auto ds = simulate_zig({.n = 100, .d = 6, .s = 2}, 1);
  const auto cfg = config({1, 2}, {Method::info_gain});
  const auto result = sweep(ds, {{Method::info_gain, rank_importance(information_gain(ds))}}, cfg);
  write_comparison_csv((dir / "c.csv").string(), result);
  const auto text = roshap::testing::slurp(dir / "c.csv");
  EXPECT_EQ(text.rfind("method,metric,mean,sd,k_count\ninfo_gain,accuracy,", 0), 0u);
}

TEST(TrainingRankings, UseOnlyTrainingRows) {
  const auto ds = simulate_zig({.n = 120, .d = 8, .s = 2}, 9);
  auto cfg = config({1}, {Method::roshap, Method::single_shap, Method::gain, Method::info_gain});
  const auto rankings = training_rankings(ds, cfg, 4);
  EXPECT_EQ(rankings.size(), 4u);
  const Dataset train = ds.select_rows(evaluation_split(ds, cfg).train);
  EXPECT_EQ(rankings.at(Method::info_gain).top(8), rank_importance(information_gain(train)).top(8));
  for (const auto& [m, t] : rankings) EXPECT_EQ(t.rows.size(), 8u);
}
