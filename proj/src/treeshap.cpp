#include "roshap/treeshap.hpp"

#include "roshap/csv.hpp"
#include "roshap/errors.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace roshap {

namespace {

double subtree_expectation(const Tree& tree, std::size_t id) {
  const auto& node = tree.nodes[id];
  if (node.is_leaf()) return node.value;
  if (!(node.cover > 0.0)) throw NumericError("tree node with zero cover");
  const auto& left = tree.nodes[static_cast<std::size_t>(node.left)];
  const auto& right = tree.nodes[static_cast<std::size_t>(node.right)];
  return (left.cover * subtree_expectation(tree, static_cast<std::size_t>(node.left)) +
          right.cover * subtree_expectation(tree, static_cast<std::size_t>(node.right))) /
         node.cover;
}

struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction,
                 int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one_fraction * path[i].weight * (i + 1) / static_cast<double>(depth + 1);
    path[i].weight = zero_fraction * path[i].weight * (depth - i) / static_cast<double>(depth + 1);
  }
}

void unwind_path(PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one_portion = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next_one_portion * (depth + 1) / ((i + 1) * one_fraction);
      next_one_portion = tmp - path[i].weight * zero_fraction * (depth - i) /
                                   static_cast<double>(depth + 1);
    } else {
      path[i].weight = path[i].weight * (depth + 1) / (zero_fraction * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

// Total weight of the path with element `index` removed, without mutating it.
double unwound_path_sum(const PathElement* path, int depth, int index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one_portion = path[depth].weight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = next_one_portion * (depth + 1) / ((i + 1) * one_fraction);
      total += tmp;
      next_one_portion = path[i].weight - tmp * zero_fraction * ((depth - i) / static_cast<double>(depth + 1));
    } else {
      total += (path[i].weight / zero_fraction) / ((depth - i) / static_cast<double>(depth + 1));
    }
  }
  return total;
}

class PathRecursion {
 public:
  PathRecursion(const Tree& tree, const double* x, double* phi)
      : tree_(tree), x_(x), phi_(phi) {
    const auto max_depth = static_cast<std::size_t>(tree.depth()) + 2;
    // Each recursion level copies the parent's path into its own segment.
    storage_.resize(max_depth * (max_depth + 1) / 2 + max_depth);
  }

  void run() { recurse(0, storage_.data(), 0, 1.0, 1.0, -1); }

 private:
  void recurse(std::size_t id, PathElement* parent_path, int depth, double zero_fraction,
               double one_fraction, int feature) {
    PathElement* path = parent_path + depth;
    if (depth > 0) std::copy(parent_path, parent_path + depth, path);
    extend_path(path, depth, zero_fraction, one_fraction, feature);

    const auto& node = tree_.nodes[id];
    if (node.is_leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const double w = unwound_path_sum(path, depth, i);
        const auto& el = path[i];
        phi_[el.feature] += w * (el.one_fraction - el.zero_fraction) * node.value;
      }
      return;
    }

    const bool goes_left = x_[node.feature] < node.threshold;
    const auto hot = static_cast<std::size_t>(goes_left ? node.left : node.right);
    const auto cold = static_cast<std::size_t>(goes_left ? node.right : node.left);
    const double hot_zero = tree_.nodes[hot].cover / node.cover;
    const double cold_zero = tree_.nodes[cold].cover / node.cover;

    double incoming_zero = 1.0;
    double incoming_one = 1.0;
    int index = 0;
    while (index <= depth && path[index].feature != node.feature) ++index;
    if (index != depth + 1) {
      incoming_zero = path[index].zero_fraction;
      incoming_one = path[index].one_fraction;
      unwind_path(path, depth, index);
      --depth;
    }
    recurse(hot, path, depth + 1, hot_zero * incoming_zero, incoming_one, node.feature);
    recurse(cold, path, depth + 1, cold_zero * incoming_zero, 0.0, node.feature);
  }

  const Tree& tree_;
  const double* x_;
  double* phi_;
  std::vector<PathElement> storage_;
};

void check_dimension(const TreeEnsemble& ens, Eigen::Index size) {
  if (size != ens.num_features)
    throw UsageError("instance has " + std::to_string(size) + " features, model expects " +
                     std::to_string(ens.num_features));
}

}  // namespace

double expected_value(const TreeEnsemble& ens) {
  double total = ens.base_score;
  for (const auto& tree : ens.trees) {
    if (tree.nodes.empty()) continue;
    if (!(tree.nodes[0].cover > 0.0)) throw NumericError("tree root has zero cover");
    total += subtree_expectation(tree, 0);
  }
  return total;
}

void tree_shap_accumulate(const TreeEnsemble& ens, const double* x, double* phi) {
  for (const auto& tree : ens.trees) {
    if (tree.nodes.size() < 2) continue;
    PathRecursion(tree, x, phi).run();
  }
}

Attribution tree_shap(const TreeEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x,
                      int instance_id) {
  check_dimension(ens, x.size());
  Attribution out;
  out.instance_id = instance_id;
  out.base = expected_value(ens);
  out.phi = Eigen::VectorXd::Zero(ens.num_features);
  const Eigen::VectorXd dense = x;
  tree_shap_accumulate(ens, dense.data(), out.phi.data());
  return out;
}

namespace {

double tree_coalition_value(const Tree& tree, std::size_t id, const double* x, std::uint32_t mask) {
  const auto& node = tree.nodes[id];
  if (node.is_leaf()) return node.value;
  const auto left = static_cast<std::size_t>(node.left);
  const auto right = static_cast<std::size_t>(node.right);
  if (mask & (1u << node.feature))
    return tree_coalition_value(tree, x[node.feature] < node.threshold ? left : right, x, mask);
  return (tree.nodes[left].cover * tree_coalition_value(tree, left, x, mask) +
          tree.nodes[right].cover * tree_coalition_value(tree, right, x, mask)) /
         node.cover;
}

}  // namespace

double coalition_value(const TreeEnsemble& ens, const Eigen::Ref<const Eigen::VectorXd>& x,
                       std::uint32_t mask) {
  check_dimension(ens, x.size());
  const Eigen::VectorXd dense = x;
  double total = ens.base_score;
  for (const auto& tree : ens.trees)
    if (!tree.nodes.empty()) total += tree_coalition_value(tree, 0, dense.data(), mask);
  return total;
}

Attribution brute_force_shapley(const TreeEnsemble& ens,
                                const Eigen::Ref<const Eigen::VectorXd>& x, int instance_id) {
  check_dimension(ens, x.size());
  const int p = ens.num_features;
  if (p > kBruteForceMaxFeatures)
    throw UsageError("brute-force Shapley supports at most " +
                     std::to_string(kBruteForceMaxFeatures) + " features");

  const std::uint32_t full = p == 0 ? 0u : (1u << p);
  std::vector<double> value(std::max<std::uint32_t>(full, 1u));
  for (std::uint32_t mask = 0; mask < value.size(); ++mask) value[mask] = coalition_value(ens, x, mask);

  // weight(s) = s! (p-s-1)! / p!, held as an exact integer ratio until the
  // final conversion. 20! < 2^63, so every factorial fits.
  std::vector<std::uint64_t> factorial(static_cast<std::size_t>(p) + 1, 1);
  for (int k = 1; k <= p; ++k) factorial[static_cast<std::size_t>(k)] = factorial[static_cast<std::size_t>(k) - 1] * static_cast<std::uint64_t>(k);

  Attribution out;
  out.instance_id = instance_id;
  out.base = value[0];
  out.phi = Eigen::VectorXd::Zero(p);
  for (int j = 0; j < p; ++j) {
    // Marginal contributions grouped by coalition size, then weighted once.
    std::vector<long double> by_size(static_cast<std::size_t>(p), 0.0L);
    const std::uint32_t bit = 1u << j;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
      if (mask & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      by_size[size] += static_cast<long double>(value[mask | bit]) - value[mask];
    }
    long double phi = 0.0L;
    for (std::size_t s = 0; s < by_size.size(); ++s) {
      const long double weight = static_cast<long double>(factorial[s]) *
                                 static_cast<long double>(factorial[static_cast<std::size_t>(p) - s - 1]) /
                                 static_cast<long double>(factorial[static_cast<std::size_t>(p)]);
      phi += weight * by_size[s];
    }
    out.phi[j] = static_cast<double>(phi);
  }
  return out;
}

void write_attribution_csv(const std::filesystem::path& path,
                           const std::vector<Attribution>& attributions,
                           const std::vector<std::string>& feature_names) {
  std::ostringstream out;
  csv::write_record(out, {"instance_id", "feature", "phi"});
  for (const auto& a : attributions) {
    const auto id = std::to_string(a.instance_id);
    for (Eigen::Index j = 0; j < a.phi.size(); ++j) {
      const auto& name = j < static_cast<Eigen::Index>(feature_names.size())
                             ? feature_names[static_cast<std::size_t>(j)]
                             : std::to_string(j);
      csv::write_record(out, {id, name, csv::format_double(a.phi[j])});
    }
    csv::write_record(out, {id, "__base__", csv::format_double(a.base)});
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write " + path.string());
  file << out.str();
}

}  // namespace roshap
