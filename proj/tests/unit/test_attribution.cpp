#include "roshap/attribution.hpp"
#include "roshap/errors.hpp"
#include "roshap/kde.hpp"
#include "roshap/stats.hpp"
#include "roshap/treeshap.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace roshap;

namespace {

GbdtParams small_params() {
  GbdtParams p;
  p.num_rounds = 20;
  p.max_depth = 3;
  return p;
}

FeatureDistributionSummary summary_of(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  std::copy(values.begin(), values.end(), v.data());
  return summarize_feature(v);
}

}  // namespace

TEST(Stats, BasicEstimators) {
  const Eigen::Vector4d x(4, 1, 3, 2);
  EXPECT_EQ(stats::mean(x), 2.5);
  EXPECT_NEAR(stats::sd(x), std::sqrt(5.0 / 3.0), 1e-15);
  const auto sorted = stats::sorted_copy(Eigen::VectorXd(x));
  EXPECT_EQ(stats::median_sorted(sorted), 2.5);
  EXPECT_EQ(stats::quantile_sorted(sorted, 0.25), 1.75);
  EXPECT_EQ(stats::quantile_sorted(sorted, 1.0), 4.0);
  EXPECT_EQ(stats::sd(Eigen::VectorXd::Constant(1, 3.0)), 0.0);
  const auto sh = stats::shape(Eigen::VectorXd::LinSpaced(101, -1, 1));
  EXPECT_NEAR(sh.skewness, 0.0, 1e-12);
  EXPECT_NEAR(sh.excess_kurtosis, -1.2, 0.01);  // uniform
}

TEST(Stats, KsDistanceOfNormalSampleIsSmall) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(10, 3);
  Eigen::VectorXd x(5000);
  for (auto& v : x) v = nd(rng);
  EXPECT_LT(stats::ks_distance_to_normal(x), 0.03);
  Eigen::VectorXd e(5000);
  std::exponential_distribution<double> ed(1.0);
  for (auto& v : e) v = ed(rng);
  EXPECT_GT(stats::ks_distance_to_normal(e), 0.07);
}

TEST(Summary, AllZeroFeature) {
  const auto s = summary_of({0, 0, 0, 0});
  EXPECT_EQ(s.p_zero, 1.0);
  EXPECT_EQ(s.median_nonzero, 0.0);
  EXPECT_EQ(s.sd_all, 0.0);
  EXPECT_FALSE(s.skewness.has_value());
  EXPECT_FALSE(s.kde.has_value());
  EXPECT_EQ(roshap_score(s), 0.0);
}

TEST(Summary, HandArithmetic) {
  const auto s = summary_of({0, 2, 4});
  EXPECT_DOUBLE_EQ(s.p_zero, 1.0 / 3.0);
  EXPECT_EQ(s.median_nonzero, 3.0);
  EXPECT_EQ(s.sd_all, 2.0);
  EXPECT_EQ(s.mean_all, 2.0);
  EXPECT_EQ(s.runs, 3);
}

TEST(Summary, EmptyInputRejected) { EXPECT_THROW(summarize_feature(Eigen::VectorXd()), DataError); }

TEST(Summary, MomentsNeedEightNonzeroValues) {
  EXPECT_FALSE(summary_of({0, 1, 2, 3, 4, 5, 6, 7}).skewness.has_value());
  const auto s = summary_of({0, 1, 2, 3, 4, 5, 6, 7, 8});
  ASSERT_TRUE(s.skewness.has_value());
  EXPECT_NEAR(*s.skewness, 0.0, 1e-12);
  EXPECT_TRUE(s.normality_stat.has_value());
  EXPECT_TRUE(s.excess_kurtosis.has_value());
}

TEST(Summary, MatchesNaiveRecomputation) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const int b = std::uniform_int_distribution<int>(2, 60)(rng);
    Eigen::VectorXd v(b);
    for (auto& x : v) x = u(rng) < 3 ? 0.0 : u(rng);
    const auto s = summarize_feature(v);
    int zeros = 0;
    std::vector<double> pos;
    double sum = 0;
    for (int k = 0; k < b; ++k) {
      sum += v[k];
      if (v[k] == 0) ++zeros;
      else pos.push_back(v[k]);
    }
    const double mean = sum / b;
    double ss = 0;
    for (int k = 0; k < b; ++k) ss += (v[k] - mean) * (v[k] - mean);
    std::sort(pos.begin(), pos.end());
    const double median = pos.empty() ? 0.0
                          : pos.size() % 2 ? pos[pos.size() / 2]
                                           : (pos[pos.size() / 2 - 1] + pos[pos.size() / 2]) / 2;
    EXPECT_EQ(s.p_zero, static_cast<double>(zeros) / b);
    EXPECT_EQ(s.median_nonzero, median);
    EXPECT_NEAR(s.sd_all, std::sqrt(ss / (b - 1)), 1e-12 * s.sd_all);
    EXPECT_EQ(s.median_nonzero == 0.0, s.p_zero == 1.0);
  }
}

TEST(RoshapScore, Examples) {
  FeatureDistributionSummary s;
  s.p_zero = 0.25;
  s.median_nonzero = 2;
  s.sd_all = 2;
  EXPECT_EQ(roshap_score(s), 1.5);
  s.p_zero = 1.0;
  EXPECT_EQ(roshap_score(s), 0.0);
  s.p_zero = 0.0;
  s.sd_all = 0.0;
  EXPECT_EQ(roshap_score(s), 4.0 / 2e-6);  // floor at 1e-6 m
}

TEST(RoshapScore, ScaleEquivariant) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.1, 5);
  Eigen::VectorXd v(40);
  for (auto& x : v) x = u(rng) < 1 ? 0.0 : u(rng);
  const double base = roshap_score(summarize_feature(v));
  for (double c : {0.25, 2.0, 8.0}) EXPECT_EQ(roshap_score(summarize_feature(v * c)), c * base);
  for (double c : {0.3, 7.1}) EXPECT_NEAR(roshap_score(summarize_feature(v * c)), c * base, 1e-12 * c * base);
}

TEST(Ranking, ExamplesAndTieBreaks) {
  std::vector<FeatureDistributionSummary> inactive(4);
  for (int j = 0; j < 4; ++j) {
    inactive[static_cast<std::size_t>(j)].feature = j;
    inactive[static_cast<std::size_t>(j)].p_zero = 1.0;
  }
  const auto t = rank_features(inactive);
  for (int r = 0; r < 4; ++r) {
    EXPECT_EQ(t.rows[static_cast<std::size_t>(r)].feature, r);
    EXPECT_EQ(t.rows[static_cast<std::size_t>(r)].score, 0.0);
  }

  std::vector<FeatureDistributionSummary> two(2);
  two[0] = {.feature = 0, .p_zero = 0, .median_nonzero = 5, .sd_all = 5};   // score 5
  two[1] = {.feature = 1, .p_zero = 0, .median_nonzero = 7, .sd_all = 7};   // score 7
  const auto t2 = rank_features(two);
  EXPECT_EQ(t2.rank_of(0), 2);
  EXPECT_EQ(t2.rank_of(1), 1);
  EXPECT_EQ(t2.top(1), std::vector<int>{1});

  // Equal scores: lower p_zero first, then higher median, then index.
  std::vector<FeatureDistributionSummary> ties(3);
  ties[0] = {.feature = 0, .p_zero = 0.5, .median_nonzero = 4, .sd_all = 4};  // 0.5*16/4 = 2
  ties[1] = {.feature = 1, .p_zero = 0.0, .median_nonzero = 2, .sd_all = 2};  // 2
  ties[2] = {.feature = 2, .p_zero = 0.0, .median_nonzero = 1, .sd_all = 0.5};  // 2
  const auto t3 = rank_features(ties);
  EXPECT_EQ(t3.top(3), (std::vector<int>{1, 2, 0}));
}

TEST(ZeroInflatedMoments, Examples) {
  const auto all_zero = zero_inflated_moments(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(2, 3, 4), Eigen::Vector3d(1, 1, 1));
  EXPECT_EQ(all_zero.mu, 0.0);
  EXPECT_EQ(all_zero.s2, 0.0);
  const auto one = zero_inflated_moments(Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 2),
                                         Eigen::VectorXd::Constant(1, 1));
  EXPECT_EQ(one.mu, 1.0);
  EXPECT_EQ(one.s2, 1.5);
  EXPECT_THROW(zero_inflated_moments(Eigen::Vector2d(0, 0), Eigen::Vector3d(0, 0, 0), Eigen::Vector2d(0, 0)), UsageError);
  EXPECT_THROW(zero_inflated_moments(Eigen::Vector2d(0, 1.5), Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0)), UsageError);
}

TEST(ZeroInflatedMoments, MonteCarloFoldedNormal) {
  const int terms = 50, reps = 1000000;
  const double w = 0.3, mu = 1, sigma = 1;
  const double eh = sigma * std::sqrt(2 / std::numbers::pi) * std::exp(-mu * mu / (2 * sigma * sigma)) +
                    mu * (1 - 2 * stats::normal_cdf(-mu / sigma));
  const double vh = mu * mu + sigma * sigma - eh * eh;
  const auto m = zero_inflated_moments(Eigen::VectorXd::Constant(terms, w), Eigen::VectorXd::Constant(terms, eh),
                                       Eigen::VectorXd::Constant(terms, vh));
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd(mu, sigma);
  std::bernoulli_distribution zero(w);
  double s1 = 0, s2 = 0, s4 = 0;
  std::vector<double> u(reps);
  for (int r = 0; r < reps; ++r) {
    double total = 0;
    for (int i = 0; i < terms; ++i) {
      const bool z = zero(rng);
      const double h = std::abs(nd(rng));
      if (!z) total += h;
    }
    u[static_cast<std::size_t>(r)] = total;
    s1 += total;
  }
  const double mean = s1 / reps;
  for (double v : u) {
    s2 += (v - mean) * (v - mean);
    s4 += std::pow(v - mean, 4);
  }
  const double var = s2 / (reps - 1);
  const double se_mean = std::sqrt(var / reps);
  const double se_var = std::sqrt((s4 / reps - var * var) / reps);
  EXPECT_NEAR(m.mu, mean, 3 * se_mean);
  EXPECT_NEAR(m.s2, var, 3 * se_var);
}

TEST(Lyapunov, RatioDecreasesWithObservations) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  double previous = INFINITY;
  for (int n : {10, 100, 1000}) {
    std::vector<std::vector<double>> per_obs(static_cast<std::size_t>(n));
    for (auto& xs : per_obs)
      for (int r = 0; r < 40; ++r) xs.push_back(u(rng));
    const auto d = lyapunov_diagnostic(per_obs);
    EXPECT_LT(d.ratio, previous);
    EXPECT_TRUE(d.gaussian_recommended);
    EXPECT_EQ(d.observations, n);
    previous = d.ratio;
  }
}

TEST(Lyapunov, DominantObservationFlagged) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(0, 1);
  std::vector<std::vector<double>> per_obs(20);
  for (std::size_t i = 0; i < per_obs.size(); ++i)
    for (int r = 0; r < 30; ++r) per_obs[i].push_back(std::abs(nd(rng)) * (i == 3 ? 1000.0 : 1.0));
  const auto d = lyapunov_diagnostic(per_obs);
  EXPECT_GT(d.max_var_share, 0.99);
  EXPECT_FALSE(d.gaussian_recommended);
}

TEST(Lyapunov, InsufficientRuns) {
  std::vector<std::vector<double>> per_obs(10, std::vector<double>(7, 1.0));
  EXPECT_THROW(lyapunov_diagnostic(per_obs), NumericError);
  per_obs[0].resize(8, 2.0);
  EXPECT_THROW(lyapunov_diagnostic(per_obs), NumericError);
  per_obs[1].resize(8, 2.0);
  EXPECT_NO_THROW(lyapunov_diagnostic(per_obs));
}

TEST(PerSample, GatheredFromRetainedRuns) {
  AttributionRun a, b;
  a.has_samples = b.has_samples = true;
  a.oob_indices = {0, 2};
  a.samples = {{0, 1, 5.0}, {2, 1, 3.0}, {2, 2, 9.0}};
  b.oob_indices = {1, 2};
  b.samples = {{1, 0, 1.0}, {2, 1, 1.0}};
  const auto per_obs = per_observation_samples({a, b}, 1, 3);
  EXPECT_EQ(per_obs[0], std::vector<double>{5.0});
  EXPECT_EQ(per_obs[1], std::vector<double>{0.0});
  EXPECT_EQ(per_obs[2], (std::vector<double>{3.0, 1.0}));
  const auto est = per_sample_estimates(per_obs);
  EXPECT_EQ(est.w, Eigen::Vector3d(0, 1, 0));
  EXPECT_EQ(est.eh, Eigen::Vector3d(5, 0, 2));
  EXPECT_EQ(est.vh, Eigen::Vector3d(0, 0, 1));
  AttributionRun bare;
  EXPECT_THROW(per_observation_samples({bare}, 0, 3), NumericError);
}

TEST(Kde, SymmetricAboutZero) {
  const GaussianKde kde(Eigen::Vector2d(-1, 1));
  for (double x = 0.05; x < 4; x += 0.1) EXPECT_NEAR(kde(x), kde(-x), 1e-12);
}

TEST(Kde, IntegratesToOne) {
  std::mt19937_64 rng(6);
  std::gamma_distribution<double> g(2.0, 1.5);
  Eigen::VectorXd x(300);
  for (auto& v : x) v = g(rng);
  const GaussianKde kde(x);
  const double h = kde.bandwidth();
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(10000, x.minCoeff() - 5 * h, x.maxCoeff() + 5 * h);
  const Eigen::VectorXd d = kde.density(grid);
  double integral = 0;
  for (Eigen::Index k = 1; k < grid.size(); ++k) integral += 0.5 * (d[k] + d[k - 1]) * (grid[k] - grid[k - 1]);
  EXPECT_GE(integral, 0.999);
  EXPECT_LE(integral, 1.001);
  EXPECT_TRUE((d.array() >= 0).all());
}

TEST(Kde, ConsistentWithNormalDensity) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> nd(0, 1);
  Eigen::VectorXd x(10000);
  for (auto& v : x) v = nd(rng);
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(161, -4, 4);
  const Eigen::VectorXd d = kde_density(x, grid);
  double worst = 0;
  for (Eigen::Index k = 0; k < grid.size(); ++k) worst = std::max(worst, std::abs(d[k] - stats::normal_pdf(grid[k])));
  EXPECT_LT(worst, 0.05);
}

TEST(Kde, SilvermanBandwidth) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(11, 0, 10);
  // sd = sqrt(11), IQR = 5; min(sd, 5 / 1.34) = 3.7313...
  const double expected = 0.9 * std::min(std::sqrt(11.0), 5.0 / 1.34) * std::pow(11.0, -0.2);
  EXPECT_NEAR(GaussianKde(x).bandwidth(), expected, 1e-14);
}

TEST(Kde, DegenerateSamplesRejected) {
  EXPECT_THROW(GaussianKde(Eigen::Vector3d(2, 2, 2)), NumericError);
  EXPECT_THROW(GaussianKde(Eigen::VectorXd::Constant(1, 1.0)), NumericError);
}

TEST(Bootstrap, ConstantTargetGivesZeroU) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(40, 5);
  const Dataset ds(x, Eigen::VectorXd::Constant(40, 3.0), {"a", "b", "c", "d", "e"}, TaskKind::regression);
  const auto runs = run_bootstrap_attribution(ds, small_params(), 1, 5);
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_TRUE(runs[0].U.isZero(0.0));
  EXPECT_TRUE(std::all_of(runs[0].zero_flag.begin(), runs[0].zero_flag.end(), [](bool z) { return z; }));
}

TEST(Bootstrap, IndependentOfWorkerCount) {
  const auto ds = simulate_zig({.n = 120, .d = 15, .s = 3}, 5);
  BootstrapOptions one, four;
  one.keep_samples = four.keep_samples = true;
  four.workers = 4;
  const auto a = run_bootstrap_attribution(ds, small_params(), 10, 99, one);
  const auto b = run_bootstrap_attribution(ds, small_params(), 10, 99, four);
  EXPECT_EQ(u_matrix(a), u_matrix(b));
  for (std::size_t r = 0; r < a.size(); ++r) {
    EXPECT_EQ(a[r].run_id, static_cast<int>(r) + 1);
    EXPECT_EQ(a[r].oob_indices, b[r].oob_indices);
    ASSERT_EQ(a[r].samples.size(), b[r].samples.size());
    for (std::size_t k = 0; k < a[r].samples.size(); ++k) EXPECT_EQ(a[r].samples[k].value, b[r].samples[k].value);
  }
  // Run b is reproducible on its own.
  const auto single = run_single_attribution(ds, small_params(), 7, 99, one);
  EXPECT_EQ(single.U, a[6].U);
}

TEST(Bootstrap, URecomputesFromOobShap) {
  const auto ds = simulate_zig({.n = 100, .d = 12, .s = 3}, 8);
  const auto params = small_params();
  const auto runs = run_bootstrap_attribution(ds, params, 3, 21);
  for (const auto& run : runs) {
    const auto split = bootstrap_resample(ds, derive_run_seed(21, run.run_id), run.run_id);
    const auto ens = fit_gbdt_rows(ds, split.train_indices, params, Objective::logistic);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(12);
    for (int i : split.oob_indices) {
      const auto a = tree_shap(ens, Eigen::VectorXd(ds.features().row(i).transpose()));
      for (int j = 0; j < 12; ++j)
        if (std::abs(a.phi[j]) > 1e-12) u[j] += std::abs(a.phi[j]);
    }
    u *= 100.0 / static_cast<double>(split.oob_indices.size());
    EXPECT_EQ(run.oob_size, static_cast<int>(split.oob_indices.size()));
    for (int j = 0; j < 12; ++j) {
      EXPECT_NEAR(run.U[j], u[j], 1e-9 * std::max(1.0, u[j]));
      EXPECT_GE(run.U[j], 0.0);
      EXPECT_EQ(run.zero_flag[static_cast<std::size_t>(j)], run.U[j] == 0.0);
    }
  }
}

TEST(Bootstrap, SampleRetentionSubset) {
  const auto ds = simulate_zig({.n = 80, .d = 10, .s = 2}, 3);
  BootstrapOptions opts;
  opts.keep_samples = true;
  opts.sample_features = {0, 4};
  const auto runs = run_bootstrap_attribution(ds, small_params(), 2, 1, opts);
  for (const auto& run : runs) {
    EXPECT_TRUE(run.has_samples);
    EXPECT_FALSE(run.oob_indices.empty());
    for (const auto& s : run.samples) EXPECT_TRUE(s.feature == 0 || s.feature == 4);
  }
  opts.sample_features = {10};
  EXPECT_THROW(run_bootstrap_attribution(ds, small_params(), 1, 1, opts), UsageError);
  EXPECT_THROW(run_bootstrap_attribution(ds, small_params(), 0, 1), UsageError);
}

TEST(Bootstrap, StrongestSignalActiveAndAboveNoise) {
  // Reduced-size version of the default design: the strongest signal is
  // active in every run and its mean U exceeds every noise feature's.
  SimulationConfig cfg;
  cfg.d = 40;
  int successes = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto ds = simulate_zig(cfg, seed);
    const auto u = u_matrix(run_bootstrap_attribution(ds, small_params(), 12, seed));
    const auto s = summarize_feature(u.col(0));
    const Eigen::RowVectorXd means = u.colwise().mean();
    successes += s.p_zero == 0.0 && means[0] > means.tail(30).maxCoeff();
  }
  EXPECT_GE(successes, 9);
}
