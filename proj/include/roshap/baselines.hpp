#pragma once

#include "roshap/attribution.hpp"
#include "roshap/dataset.hpp"
#include "roshap/trees.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace roshap {

enum class Method { roshap, single_shap, gain, info_gain };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct ImportanceVector {
  Method method = Method::single_shap;
  Eigen::VectorXd scores;  // finite, non-negative
};

/// Equal-frequency bin index (0-based) of every entry of x: cut points are
/// the sorted values at positions floor(k n / num_bins), duplicates merged,
/// and x falls in the bin counting the cuts <= x. Ties always share a bin.
std::vector<int> equal_frequency_bins(const Eigen::Ref<const Eigen::VectorXd>& x, int num_bins);

/// H(Y) - H(Y | bin) in nats, clamped at 0, for integer-coded bins and labels.
double information_gain_from_bins(const std::vector<int>& bins, const std::vector<int>& labels);

/// Per-feature information gain of the (binned) target. Regression targets
/// are binned with the same equal-frequency rule.
ImportanceVector information_gain(const Dataset& ds, int num_bins = 10);

inline constexpr double kDefaultTestFraction = 0.3;

/// One stratified (for classification) train/test split, one fit, and
/// scores[j] = sum over test rows of |T_ij| after zero snapping.
ImportanceVector single_run_shap(const Dataset& ds, const GbdtParams& params, std::uint64_t seed,
                                 double test_fraction = kDefaultTestFraction);

/// Gain importance of a model fit on the training side of the same split.
ImportanceVector gain_baseline(const Dataset& ds, const GbdtParams& params, std::uint64_t seed,
                               double test_fraction = kDefaultTestFraction);

/// Descending score; ties by lower feature index.
RankingTable rank_importance(const ImportanceVector& importance);

}  // namespace roshap
