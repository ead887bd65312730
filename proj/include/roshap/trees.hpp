#pragma once

#include "roshap/dataset.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace roshap {

enum class Objective { logistic, squared_error };

std::string to_string(Objective objective);
Objective parse_objective(const std::string& name);

/// One node of a binary tree. `feature < 0` marks a leaf. Rows with
/// x[feature] < threshold go left. `cover` is the hessian sum of the training
/// rows routed through the node; `gain` is the split gain (0 for leaves).
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  double cover = 0.0;
  double gain = 0.0;

  bool is_leaf() const { return feature < 0; }
};

/// Nodes are stored in creation order; node 0 is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  int depth() const;
  int leaf_count() const;
};

/// Leaf values are stored after shrinkage, so the margin is
/// base_score + sum of the leaf reached in each tree.
struct TreeEnsemble {
  std::vector<Tree> trees;
  double base_score = 0.0;
  double learning_rate = 1.0;
  Objective objective = Objective::squared_error;
  int num_features = 0;
};

struct GbdtParams {
  int num_rounds = 100;
  int max_depth = 6;
  double learning_rate = 0.1;
  double lambda_l2 = 1.0;
  double min_child_weight = 1.0;
  double min_gain = 0.0;

  void validate() const;
};

struct FitTrace {
  std::vector<double> training_loss;  // before round 1, then after each round
  double total_gain = 0.0;
};

/// Second-order boosting with exact greedy splits. The objective defaults to
/// logistic for classification and squared error for regression.
TreeEnsemble fit_gbdt(const Dataset& ds, const GbdtParams& params, std::uint64_t seed = 0);
TreeEnsemble fit_gbdt(const Dataset& ds, const GbdtParams& params, std::uint64_t seed,
                      Objective objective, FitTrace* trace = nullptr);

/// Fits on the multiset `rows` of ds (repeats allowed). Repeated rows are
/// folded into integer weights, which is equivalent to fitting on the
/// materialized resample.
TreeEnsemble fit_gbdt_rows(const Dataset& ds, std::span<const int> rows, const GbdtParams& params,
                           Objective objective, FitTrace* trace = nullptr);

Objective default_objective(TaskKind task);

double predict_margin(const TreeEnsemble& ens, std::span<const double> x);
double predict_margin(const TreeEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x);
double predict_proba(const TreeEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x);

// Row-wise predictions over a feature matrix.
Eigen::VectorXd predict_margins(const TreeEnsemble& ens, const Eigen::MatrixXd& x);
Eigen::VectorXd predict_probas(const TreeEnsemble& ens, const Eigen::MatrixXd& x);

inline double sigmoid(double margin) { return 1.0 / (1.0 + std::exp(-margin)); }

/// Per-feature sum of split gains over all internal nodes of all trees.
Eigen::VectorXd gain_importance(const TreeEnsemble& ens);

std::string to_json(const TreeEnsemble& ens);
TreeEnsemble ensemble_from_json(const std::string& text);

}  // namespace roshap
