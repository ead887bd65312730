#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace roshap {

enum class TaskKind { binary_classification, regression };

TaskKind parse_task(const std::string& name);
std::string to_string(TaskKind task);

/// Numeric feature matrix plus response. Immutable once constructed: the
/// constructor validates every invariant (finite entries, n >= 2, p >= 1,
/// binary targets with both classes present) and throws DataError otherwise.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd features, Eigen::VectorXd target,
          std::vector<std::string> feature_names, TaskKind task);

  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::VectorXd& target() const { return target_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  TaskKind task() const { return task_; }

  Eigen::Index rows() const { return features_.rows(); }
  Eigen::Index cols() const { return features_.cols(); }

  // Subset of rows (in the given order, repeats allowed).
  Dataset select_rows(const std::vector<int>& rows) const;
  // Subset of feature columns (in the given order).
  Dataset select_columns(const std::vector<int>& columns) const;

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd target_;
  std::vector<std::string> names_;
  TaskKind task_;
};

struct CsvLoadOptions {
  // Raw feature values replaced before parsing, e.g. {"100", "-110"}.
  std::map<std::string, std::string> recode;
};

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 TaskKind task, const CsvLoadOptions& options = {});

void write_csv(const std::filesystem::path& path, const Dataset& ds,
               const std::string& target_column = "y");

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

SplitIndices train_test_split_indices(const Dataset& ds, double test_fraction,
                                      std::uint64_t seed, bool stratified);

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed, bool stratified);

struct BootstrapSplit {
  std::vector<int> train_indices;  // n draws with replacement
  std::vector<int> oob_indices;    // sorted complement of the drawn set
  int run_id = 0;
};

inline constexpr int kMaxBootstrapRetries = 16;

/// Draws n rows uniformly with replacement. When every row was drawn the
/// resample is redrawn from seed + attempt, up to kMaxBootstrapRetries times,
/// after which NumericError is thrown. `stratified` resamples within class.
BootstrapSplit bootstrap_resample(const Dataset& ds, std::uint64_t seed, int run_id = 1,
                                  bool stratified = false);

/// SplitMix64 applied to master_seed + b * 0x9E3779B97F4A7C15. For a fixed
/// master seed the map b -> seed is a bijection, so run seeds never collide.
std::uint64_t derive_run_seed(std::uint64_t master_seed, int b);

struct SimulationConfig {
  int n = 600;
  int d = 1000;
  int s = 10;
  double sigma_signal = 3.0;
  double sigma_noise = 1.0;
  double pi_signal = 0.3;
  double pi_noise = 0.2;
  double mu_max = 1.5;
  double mu_min = 0.4;

  void validate() const;
  // Class-1 mean of signal feature j (0-based); the class-0 mean is its negation.
  double signal_mean(int j) const;
};

/// Zero-inflated Gaussian design with Y ~ Bernoulli(0.5). Signal features
/// 0..s-1 have class means +/-signal_mean(j); the rest are centred noise.
Dataset simulate_zig(const SimulationConfig& cfg, std::uint64_t seed);

}  // namespace roshap
