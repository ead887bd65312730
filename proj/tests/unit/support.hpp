#pragma once

#include "roshap/dataset.hpp"
#include "roshap/trees.hpp"

#include <Eigen/Dense>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

namespace roshap::testing {

// Random tree with consistent covers (internal cover = sum of children).
inline int grow_random(Tree& tree, std::mt19937_64& rng, int depth, int max_depth, int p) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (depth == max_depth || (depth > 0 && unit(rng) < 0.25)) {
    tree.nodes[id].value = std::normal_distribution<double>(0.0, 1.0)(rng);
    tree.nodes[id].cover = 0.5 + 4.5 * unit(rng);
    return id;
  }
  tree.nodes[id].feature = std::uniform_int_distribution<int>(0, p - 1)(rng);
  tree.nodes[id].threshold = -1.0 + 2.0 * unit(rng);
  tree.nodes[id].gain = unit(rng);
  const int l = grow_random(tree, rng, depth + 1, max_depth, p);
  const int r = grow_random(tree, rng, depth + 1, max_depth, p);
  tree.nodes[id].left = l;
  tree.nodes[id].right = r;
  tree.nodes[id].cover = tree.nodes[l].cover + tree.nodes[r].cover;
  return id;
}

inline TreeEnsemble random_ensemble(std::mt19937_64& rng, int p, int max_trees, int max_depth) {
  TreeEnsemble ens;
  ens.num_features = p;
  ens.base_score = std::normal_distribution<double>(0.0, 1.0)(rng);
  const int trees = std::uniform_int_distribution<int>(1, max_trees)(rng);
  for (int t = 0; t < trees; ++t) {
    Tree tree;
    grow_random(tree, rng, 0, std::uniform_int_distribution<int>(1, max_depth)(rng), p);
    ens.trees.push_back(std::move(tree));
  }
  return ens;
}

inline Eigen::VectorXd random_instance(std::mt19937_64& rng, int p) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  Eigen::VectorXd x(p);
  for (int j = 0; j < p; ++j) x[j] = u(rng);
  return x;
}

// 2-feature XOR: label 1 when the coordinates have the same sign.
inline Dataset xor_dataset(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = u(rng);
    x(i, 1) = u(rng);
    y[i] = (x(i, 0) > 0) == (x(i, 1) > 0) ? 1.0 : 0.0;
  }
  return Dataset(x, y, {"a", "b"}, TaskKind::binary_classification);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("roshap_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace roshap::testing
