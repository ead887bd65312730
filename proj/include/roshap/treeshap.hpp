#pragma once

#include "roshap/trees.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

namespace roshap {

/// Additive attribution of one instance's margin: base + phi.sum() equals
/// predict_margin(x) up to rounding.
struct Attribution {
  Eigen::VectorXd phi;
  double base = 0.0;
  int instance_id = -1;
};

/// Cover-weighted mean of the ensemble's leaf values plus base_score.
double expected_value(const TreeEnsemble& ens);

/// Path-dependent TreeSHAP (cover-weighted EXTEND/UNWIND recursion over the
/// unique-feature decision path). Features that never appear on a path of
/// any tree receive exactly 0.
Attribution tree_shap(const TreeEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x,
                      int instance_id = -1);

/// Accumulates tree_shap(x) into `phi` (length p) without allocating; returns
/// nothing for the base, which is expected_value(ens).
void tree_shap_accumulate(const TreeEnsemble& ens, const double* x, double* phi);

inline constexpr int kBruteForceMaxFeatures = 20;

/// Exact Shapley values of the path-dependent game by enumerating all 2^p
/// coalitions with exact rational weights. Test oracle; p <= 20.
Attribution brute_force_shapley(const TreeEnsemble& ens,
                                const Eigen::Ref<const Eigen::VectorXd>& x,
                                int instance_id = -1);

/// Value of coalition `mask` (bit j set = feature j known) for instance x.
double coalition_value(const TreeEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x,
                       std::uint32_t mask);

/// Writes rows (instance_id, feature, phi) plus (instance_id, "__base__", base).
void write_attribution_csv(const std::filesystem::path& path,
                           const std::vector<Attribution>& attributions,
                           const std::vector<std::string>& feature_names);

}  // namespace roshap
