#pragma once

#include "roshap/dataset.hpp"
#include "roshap/kde.hpp"
#include "roshap/trees.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace roshap {

/// |T_ij| for one (out-of-bag row, feature) pair of one run.
struct SampleEntry {
  int row;
  int feature;
  double value;
};

/// One bootstrap run. U[j] = (n / |OOB|) * sum over OOB rows of |T_ij|, with
/// |T_ij| <= kZeroSnap treated as an exact zero.
struct AttributionRun {
  int run_id = 0;
  int oob_size = 0;
  Eigen::VectorXd U;
  std::vector<bool> zero_flag;
  // Present only when samples were retained.
  std::vector<int> oob_indices;
  std::vector<SampleEntry> samples;  // nonzero entries, sorted by (feature, row)
  bool has_samples = false;
};

inline constexpr double kZeroSnap = 1e-12;

struct BootstrapOptions {
  std::size_t workers = 1;
  bool keep_samples = false;
  std::vector<int> sample_features;  // retained features; empty keeps all
  bool stratified = false;
};

/// Bootstrap resample, refit, and attribute out-of-bag rows, B times. Run b
/// uses derive_run_seed(master_seed, b), so the result does not depend on
/// the number of workers or the order in which runs finish.
std::vector<AttributionRun> run_bootstrap_attribution(const Dataset& ds, const GbdtParams& params,
                                                      int runs, std::uint64_t master_seed,
                                                      const BootstrapOptions& options = {});

/// A single run b (1-based), as computed inside run_bootstrap_attribution.
AttributionRun run_single_attribution(const Dataset& ds, const GbdtParams& params, int b,
                                      std::uint64_t master_seed, const BootstrapOptions& options = {});

/// B x p matrix of U values, rows in run order.
Eigen::MatrixXd u_matrix(const std::vector<AttributionRun>& runs);

struct FeatureDistributionSummary {
  int feature = -1;
  int runs = 0;
  double p_zero = 0.0;
  double median_nonzero = 0.0;
  double sd_all = 0.0;
  double mean_all = 0.0;
  // Shape diagnostics on the nonzero subsample; absent with fewer than
  // kMinNonzeroForMoments nonzero values.
  std::optional<double> skewness;
  std::optional<double> excess_kurtosis;
  std::optional<double> normality_stat;  // Kolmogorov distance of standardized values to N(0, 1)
  std::optional<double> lyapunov_ratio;
  std::optional<double> max_var_share;
  std::optional<GaussianKde> kde;  // fit to the nonzero component
};

inline constexpr int kMinNonzeroForMoments = 8;

FeatureDistributionSummary summarize_feature(const Eigen::Ref<const Eigen::VectorXd>& values,
                                             int feature = -1);

/// (1 - P0) m^2 / max(s, 1e-6 m); 0 for an always-inactive feature.
double roshap_score(const FeatureDistributionSummary& s);

struct ZeroInflatedMoments {
  double mu = 0.0;
  double s2 = 0.0;
};

/// mu = sum (1 - w_i) E H_i,  s2 = sum (1 - w_i) Var H_i + sum w_i (1 - w_i) (E H_i)^2.
ZeroInflatedMoments zero_inflated_moments(const Eigen::Ref<const Eigen::VectorXd>& w,
                                          const Eigen::Ref<const Eigen::VectorXd>& eh,
                                          const Eigen::Ref<const Eigen::VectorXd>& vh);

/// Per-observation magnitudes |T_ij| of one feature, gathered over the runs in
/// which observation i was out of bag (zeros included).
std::vector<std::vector<double>> per_observation_samples(const std::vector<AttributionRun>& runs,
                                                         int feature, int n);

struct PerSampleEstimates {
  Eigen::VectorXd w;   // fraction of zero |T_ij|
  Eigen::VectorXd eh;  // mean of nonzero |T_ij|
  Eigen::VectorXd vh;  // population variance of nonzero |T_ij|
  std::vector<int> observations;
};

/// Plug-in w, E H, Var H per observation (observations never out of bag are
/// skipped).
PerSampleEstimates per_sample_estimates(const std::vector<std::vector<double>>& per_observation);

struct LyapunovDiagnostic {
  double ratio = 0.0;          // sum_i E|Z_i|^3 / s^3
  double max_var_share = 0.0;  // max_i Var_i / s^2
  int observations = 0;
  bool gaussian_recommended = true;
};

inline constexpr int kMinRunsPerObservation = 8;
inline constexpr double kDefaultVarShareThreshold = 0.5;

/// Lyapunov ratio (delta = 1) and largest variance share from per-observation
/// samples. Observations with fewer than kMinRunsPerObservation samples are
/// ignored; NumericError when fewer than two remain.
LyapunovDiagnostic lyapunov_diagnostic(const std::vector<std::vector<double>>& per_observation,
                                       double var_share_threshold = kDefaultVarShareThreshold);

/// Fills lyapunov_ratio / max_var_share of `summary` from retained samples.
void attach_lyapunov(FeatureDistributionSummary& summary, const std::vector<AttributionRun>& runs,
                     int n, double var_share_threshold = kDefaultVarShareThreshold);

struct RankingRow {
  int rank = 0;
  int feature = -1;
  double score = 0.0;
  FeatureDistributionSummary summary;
};

struct RankingTable {
  std::string method = "roshap";
  std::vector<RankingRow> rows;  // rank order

  std::vector<int> top(std::size_t k) const;
  int rank_of(int feature) const;
};

/// Descending RoSHAP; ties by lower p_zero, then higher median, then index.
RankingTable rank_features(const std::vector<FeatureDistributionSummary>& summaries);

std::vector<FeatureDistributionSummary> summarize_all(const Eigen::MatrixXd& u);

}  // namespace roshap
