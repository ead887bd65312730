#include "roshap/attribution.hpp"

#include "roshap/errors.hpp"
#include "roshap/parallel.hpp"
#include "roshap/treeshap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace roshap {

namespace {

template <typename Error>
[[noreturn]] void rethrow_with_run(const Error& e, int b) {
  throw Error("bootstrap run " + std::to_string(b) + ": " + e.what());
}

}  // namespace

AttributionRun run_single_attribution(const Dataset& ds, const GbdtParams& params, int b,
                                      std::uint64_t master_seed, const BootstrapOptions& options) {
  try {
    const auto n = static_cast<int>(ds.rows());
    const auto p = static_cast<int>(ds.cols());
    const auto split = bootstrap_resample(ds, derive_run_seed(master_seed, b), b, options.stratified);
    const auto ens = fit_gbdt_rows(ds, split.train_indices, params, default_objective(ds.task()));

    std::vector<char> retained(static_cast<std::size_t>(p), options.keep_samples ? 1 : 0);
    if (options.keep_samples && !options.sample_features.empty()) {
      std::fill(retained.begin(), retained.end(), 0);
      for (int f : options.sample_features) {
        if (f < 0 || f >= p) throw UsageError("retained feature index out of range");
        retained[static_cast<std::size_t>(f)] = 1;
      }
    }

    AttributionRun run;
    run.run_id = b;
    run.oob_size = static_cast<int>(split.oob_indices.size());
    run.U = Eigen::VectorXd::Zero(p);
    run.has_samples = options.keep_samples;

    Eigen::VectorXd x(p);
    Eigen::VectorXd phi(p);
    for (int i : split.oob_indices) {
      x = ds.features().row(i).transpose();
      phi.setZero();
      tree_shap_accumulate(ens, x.data(), phi.data());
      for (int j = 0; j < p; ++j) {
        const double magnitude = std::abs(phi[j]);
        if (magnitude <= kZeroSnap) continue;
        run.U[j] += magnitude;
        if (retained[static_cast<std::size_t>(j)]) run.samples.push_back({i, j, magnitude});
      }
    }
    run.U *= static_cast<double>(n) / static_cast<double>(run.oob_size);
    run.zero_flag.resize(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) run.zero_flag[static_cast<std::size_t>(j)] = run.U[j] == 0.0;
    if (options.keep_samples) {
      run.oob_indices = split.oob_indices;
      std::sort(run.samples.begin(), run.samples.end(), [](const SampleEntry& a, const SampleEntry& c) {
        return a.feature != c.feature ? a.feature < c.feature : a.row < c.row;
      });
    }
    return run;
  } catch (const DataError& e) {
    rethrow_with_run(e, b);
  } catch (const NumericError& e) {
    rethrow_with_run(e, b);
  }
}

std::vector<AttributionRun> run_bootstrap_attribution(const Dataset& ds, const GbdtParams& params,
                                                      int runs, std::uint64_t master_seed,
                                                      const BootstrapOptions& options) {
  if (runs < 1) throw UsageError("number of bootstrap runs must be at least 1");
  params.validate();
  std::vector<AttributionRun> out(static_cast<std::size_t>(runs));
  parallel_for(out.size(), options.workers, [&](std::size_t k) {
    out[k] = run_single_attribution(ds, params, static_cast<int>(k) + 1, master_seed, options);
  });
  return out;
}

Eigen::MatrixXd u_matrix(const std::vector<AttributionRun>& runs) {
  if (runs.empty()) return {};
  Eigen::MatrixXd u(static_cast<Eigen::Index>(runs.size()), runs.front().U.size());
  for (std::size_t b = 0; b < runs.size(); ++b) u.row(static_cast<Eigen::Index>(b)) = runs[b].U.transpose();
  return u;
}

FeatureDistributionSummary summarize_feature(const Eigen::Ref<const Eigen::VectorXd>& values,
                                             int feature) {
  if (values.size() == 0) throw DataError("cannot summarize an empty sample");
  FeatureDistributionSummary s;
  s.feature = feature;
  s.runs = static_cast<int>(values.size());

  std::vector<double> nonzero;
  for (Eigen::Index b = 0; b < values.size(); ++b)
    if (values[b] != 0.0) nonzero.push_back(values[b]);
  const auto zeros = static_cast<double>(values.size()) - static_cast<double>(nonzero.size());
  s.p_zero = zeros / static_cast<double>(values.size());
  s.mean_all = stats::mean(values);
  s.sd_all = stats::sd(values);

  std::vector<double> positive;
  std::copy_if(nonzero.begin(), nonzero.end(), std::back_inserter(positive),
               [](double v) { return v > 0.0; });
  std::sort(positive.begin(), positive.end());
  s.median_nonzero = positive.empty() ? 0.0 : stats::median_sorted(positive);

  if (static_cast<int>(nonzero.size()) >= kMinNonzeroForMoments) {
    const Eigen::Map<const Eigen::VectorXd> nz(nonzero.data(), static_cast<Eigen::Index>(nonzero.size()));
    const auto shape = stats::shape(nz);
    s.skewness = shape.skewness;
    s.excess_kurtosis = shape.excess_kurtosis;
    s.normality_stat = stats::ks_distance_to_normal(nz);
  }
  if (nonzero.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(nonzero.begin(), nonzero.end());
    if (*hi > *lo)
      s.kde.emplace(Eigen::Map<const Eigen::VectorXd>(nonzero.data(), static_cast<Eigen::Index>(nonzero.size())));
  }
  return s;
}

double roshap_score(const FeatureDistributionSummary& s) {
  if (s.p_zero >= 1.0 || !(s.median_nonzero > 0.0)) return 0.0;
  const double m = s.median_nonzero;
  return (1.0 - s.p_zero) * m * m / std::max(s.sd_all, 1e-6 * m);
}

ZeroInflatedMoments zero_inflated_moments(const Eigen::Ref<const Eigen::VectorXd>& w,
                                          const Eigen::Ref<const Eigen::VectorXd>& eh,
                                          const Eigen::Ref<const Eigen::VectorXd>& vh) {
  if (w.size() != eh.size() || w.size() != vh.size())
    throw UsageError("zero-inflated moments: w, E(H) and Var(H) lengths differ");
  if ((w.array() < 0.0).any() || (w.array() > 1.0).any())
    throw UsageError("zero-inflated moments: zero probabilities must lie in [0, 1]");
  if ((vh.array() < 0.0).any()) throw UsageError("zero-inflated moments: negative variance");
  const Eigen::ArrayXd active = 1.0 - w.array();
  ZeroInflatedMoments out;
  out.mu = (active * eh.array()).sum();
  out.s2 = (active * vh.array()).sum() + (w.array() * active * eh.array().square()).sum();
  return out;
}

std::vector<std::vector<double>> per_observation_samples(const std::vector<AttributionRun>& runs,
                                                         int feature, int n) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n));
  for (const auto& run : runs) {
    if (!run.has_samples) throw NumericError("per-sample attributions were not retained");
    auto first = std::lower_bound(run.samples.begin(), run.samples.end(), feature,
                                  [](const SampleEntry& e, int f) { return e.feature < f; });
    // oob_indices and the feature's entries are both sorted by row.
    for (int row : run.oob_indices) {
      double value = 0.0;
      if (first != run.samples.end() && first->feature == feature && first->row == row) {
        value = first->value;
        ++first;
      }
      out[static_cast<std::size_t>(row)].push_back(value);
    }
  }
  return out;
}

PerSampleEstimates per_sample_estimates(const std::vector<std::vector<double>>& per_observation) {
  std::vector<double> w, eh, vh;
  PerSampleEstimates out;
  for (std::size_t i = 0; i < per_observation.size(); ++i) {
    const auto& xs = per_observation[i];
    if (xs.empty()) continue;
    double count = 0.0, sum = 0.0;
    for (double v : xs)
      if (v != 0.0) {
        count += 1.0;
        sum += v;
      }
    const double mean = count > 0.0 ? sum / count : 0.0;
    double ss = 0.0;
    for (double v : xs)
      if (v != 0.0) ss += (v - mean) * (v - mean);
    w.push_back(1.0 - count / static_cast<double>(xs.size()));
    eh.push_back(mean);
    vh.push_back(count > 0.0 ? ss / count : 0.0);
    out.observations.push_back(static_cast<int>(i));
  }
  out.w = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  out.eh = Eigen::Map<Eigen::VectorXd>(eh.data(), static_cast<Eigen::Index>(eh.size()));
  out.vh = Eigen::Map<Eigen::VectorXd>(vh.data(), static_cast<Eigen::Index>(vh.size()));
  return out;
}

LyapunovDiagnostic lyapunov_diagnostic(const std::vector<std::vector<double>>& per_observation,
                                       double var_share_threshold) {
  double third = 0.0, variance = 0.0, largest = 0.0;
  int used = 0;
  for (const auto& xs : per_observation) {
    if (static_cast<int>(xs.size()) < kMinRunsPerObservation) continue;
    const auto k = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
    double m2 = 0.0, m3 = 0.0;
    for (double v : xs) {
      const double d = std::abs(v - mean);
      m2 += d * d;
      m3 += d * d * d;
    }
    m2 /= k;
    m3 /= k;
    third += m3;
    variance += m2;
    largest = std::max(largest, m2);
    ++used;
  }
  if (used < 2)
    throw NumericError("Lyapunov diagnostic needs at least " + std::to_string(kMinRunsPerObservation) +
                       " retained runs for two or more observations");
  LyapunovDiagnostic out;
  out.observations = used;
  if (variance > 0.0) {
    out.ratio = third / std::pow(variance, 1.5);
    out.max_var_share = largest / variance;
  }
  out.gaussian_recommended = out.max_var_share <= var_share_threshold;
  return out;
}

void attach_lyapunov(FeatureDistributionSummary& summary, const std::vector<AttributionRun>& runs,
                     int n, double var_share_threshold) {
  const auto diag = lyapunov_diagnostic(per_observation_samples(runs, summary.feature, n),
                                        var_share_threshold);
  summary.lyapunov_ratio = diag.ratio;
  summary.max_var_share = diag.max_var_share;
}

std::vector<int> RankingTable::top(std::size_t k) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < std::min(k, rows.size()); ++i) out.push_back(rows[i].feature);
  return out;
}

int RankingTable::rank_of(int feature) const {
  for (const auto& row : rows)
    if (row.feature == feature) return row.rank;
  return -1;
}

RankingTable rank_features(const std::vector<FeatureDistributionSummary>& summaries) {
  RankingTable table;
  table.rows.reserve(summaries.size());
  for (std::size_t j = 0; j < summaries.size(); ++j) {
    RankingRow row;
    row.feature = summaries[j].feature >= 0 ? summaries[j].feature : static_cast<int>(j);
    row.score = roshap_score(summaries[j]);
    row.summary = summaries[j];
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const RankingRow& a, const RankingRow& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.summary.p_zero != b.summary.p_zero) return a.summary.p_zero < b.summary.p_zero;
    if (a.summary.median_nonzero != b.summary.median_nonzero)
      return a.summary.median_nonzero > b.summary.median_nonzero;
    return a.feature < b.feature;
  });
  for (std::size_t r = 0; r < table.rows.size(); ++r) table.rows[r].rank = static_cast<int>(r) + 1;
  return table;
}

std::vector<FeatureDistributionSummary> summarize_all(const Eigen::MatrixXd& u) {
  std::vector<FeatureDistributionSummary> out;
  out.reserve(static_cast<std::size_t>(u.cols()));
  for (Eigen::Index j = 0; j < u.cols(); ++j) out.push_back(summarize_feature(u.col(j), static_cast<int>(j)));
  return out;
}

}  // namespace roshap
