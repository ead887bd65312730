#include "roshap/dataset.hpp"

#include "roshap/csv.hpp"
#include "roshap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace roshap {

TaskKind parse_task(const std::string& name) {
  if (name == "binary-classification" || name == "classification" || name == "binary")
    return TaskKind::binary_classification;
  if (name == "regression") return TaskKind::regression;
  throw UsageError("unknown task kind '" + name + "' (expected binary-classification or regression)");
}

std::string to_string(TaskKind task) {
  return task == TaskKind::binary_classification ? "binary-classification" : "regression";
}

Dataset::Dataset(Eigen::MatrixXd features, Eigen::VectorXd target,
                 std::vector<std::string> feature_names, TaskKind task)
    : features_(std::move(features)),
      target_(std::move(target)),
      names_(std::move(feature_names)),
      task_(task) {
  if (features_.rows() < 2) throw DataError("dataset needs at least 2 rows");
  if (features_.cols() < 1) throw DataError("dataset needs at least 1 feature");
  if (target_.size() != features_.rows())
    throw DataError("target length " + std::to_string(target_.size()) + " does not match " +
                    std::to_string(features_.rows()) + " rows");
  if (static_cast<Eigen::Index>(names_.size()) != features_.cols())
    throw DataError("feature name count does not match column count");
  if (!features_.allFinite()) {
    for (Eigen::Index j = 0; j < features_.cols(); ++j)
      for (Eigen::Index i = 0; i < features_.rows(); ++i)
        if (!std::isfinite(features_(i, j)))
          throw DataError("non-finite feature value at row " + std::to_string(i + 1) +
                          ", column '" + names_[j] + "'");
  }
  if (!target_.allFinite()) throw DataError("non-finite target value");
  if (task_ == TaskKind::binary_classification) {
    bool has0 = false, has1 = false;
    for (Eigen::Index i = 0; i < target_.size(); ++i) {
      if (target_[i] == 0.0) {
        has0 = true;
      } else if (target_[i] == 1.0) {
        has1 = true;
      } else {
        throw DataError("binary target must be 0 or 1 (row " + std::to_string(i + 1) + ")");
      }
    }
    if (!has0 || !has1) throw DataError("binary target has a single class");
  }
}

Dataset Dataset::select_rows(const std::vector<int>& rows) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), features_.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    x.row(static_cast<Eigen::Index>(k)) = features_.row(rows[k]);
    y[static_cast<Eigen::Index>(k)] = target_[rows[k]];
  }
  return Dataset(std::move(x), std::move(y), names_, task_);
}

Dataset Dataset::select_columns(const std::vector<int>& columns) const {
  Eigen::MatrixXd x(features_.rows(), static_cast<Eigen::Index>(columns.size()));
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (std::size_t k = 0; k < columns.size(); ++k) {
    x.col(static_cast<Eigen::Index>(k)) = features_.col(columns[k]);
    names.push_back(names_[columns[k]]);
  }
  return Dataset(std::move(x), target_, std::move(names), task_);
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 TaskKind task, const CsvLoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  auto rows = csv::read_all(in);
  if (rows.empty()) throw DataError(path.string() + ": empty file (header row required)");
  auto header = rows.front();
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  auto target_it = std::find(header.begin(), header.end(), target_column);
  if (target_it == header.end())
    throw DataError(path.string() + ": target column not found: '" + target_column + "'");
  const auto target_pos = static_cast<std::size_t>(target_it - header.begin());

  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  const auto p = static_cast<Eigen::Index>(header.size() - 1);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target_pos) names.push_back(header[c]);

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i) + 1];
    const auto line = std::to_string(i + 2);
    if (row.size() != header.size())
      throw DataError(path.string() + ": line " + line + " has " + std::to_string(row.size()) +
                      " fields, header has " + std::to_string(header.size()));
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::string cell = row[c];
      if (c != target_pos) {
        if (auto it = options.recode.find(cell); it != options.recode.end()) cell = it->second;
      }
      auto value = csv::parse_double(cell);
      const auto where = "line " + line + ", column '" + header[c] + "'";
      if (!value) throw DataError(path.string() + ": non-numeric cell '" + cell + "' at " + where);
      if (!std::isfinite(*value))
        throw DataError(path.string() + ": NaN/Inf cell '" + cell + "' at " + where);
      if (c == target_pos) {
        y[i] = *value;
      } else {
        x(i, j++) = *value;
      }
    }
  }
  if (task == TaskKind::binary_classification) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (y[i] != 0.0 && y[i] != 1.0)
        throw DataError(path.string() + ": binary target must be 0 or 1 at line " +
                        std::to_string(i + 2) + ", column '" + target_column + "'");
    if (n > 0 && (y.array() == y[0]).all())
      throw DataError(path.string() + ": single-class target in column '" + target_column + "'");
  }
  return Dataset(std::move(x), std::move(y), std::move(names), task);
}

void write_csv(const std::filesystem::path& path, const Dataset& ds,
               const std::string& target_column) {
  std::ostringstream out;
  csv::Row row = ds.feature_names();
  row.push_back(target_column);
  csv::write_record(out, row);
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    row.clear();
    for (Eigen::Index j = 0; j < ds.cols(); ++j)
      row.push_back(csv::format_double(ds.features()(i, j)));
    row.push_back(csv::format_double(ds.target()[i]));
    csv::write_record(out, row);
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write " + path.string());
  file << out.str();
}

namespace {

int rounded_count(double fraction, std::size_t total) {
  return static_cast<int>(std::lround(fraction * static_cast<double>(total)));
}

}  // namespace

SplitIndices train_test_split_indices(const Dataset& ds, double test_fraction,
                                      std::uint64_t seed, bool stratified) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw UsageError("test fraction must lie in (0, 1)");
  if (stratified && ds.task() != TaskKind::binary_classification)
    throw UsageError("stratified split requires a classification task");

  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> groups;
  if (stratified) {
    groups.resize(2);
    for (Eigen::Index i = 0; i < ds.rows(); ++i)
      groups[ds.target()[i] == 1.0 ? 1 : 0].push_back(static_cast<int>(i));
  } else {
    groups.emplace_back(static_cast<std::size_t>(ds.rows()));
    std::iota(groups[0].begin(), groups[0].end(), 0);
  }

  SplitIndices split;
  for (auto& group : groups) {
    std::shuffle(group.begin(), group.end(), rng);
    const int test_count = rounded_count(test_fraction, group.size());
    if (test_count < 1 || test_count >= static_cast<int>(group.size()))
      throw DataError("split of " + std::to_string(group.size()) + " rows at fraction " +
                      csv::format_double(test_fraction) + " leaves one side empty");
    split.test.insert(split.test.end(), group.begin(), group.begin() + test_count);
    split.train.insert(split.train.end(), group.begin() + test_count, group.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed, bool stratified) {
  auto split = train_test_split_indices(ds, test_fraction, seed, stratified);
  return {ds.select_rows(split.train), ds.select_rows(split.test)};
}

std::uint64_t derive_run_seed(std::uint64_t master_seed, int b) {
  std::uint64_t z = master_seed + static_cast<std::uint64_t>(b) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

BootstrapSplit bootstrap_resample(const Dataset& ds, std::uint64_t seed, int run_id,
                                  bool stratified) {
  const auto n = static_cast<int>(ds.rows());
  std::vector<std::vector<int>> strata;
  if (stratified && ds.task() == TaskKind::binary_classification) {
    strata.resize(2);
    for (int i = 0; i < n; ++i) strata[ds.target()[i] == 1.0 ? 1 : 0].push_back(i);
  } else {
    strata.emplace_back(static_cast<std::size_t>(n));
    std::iota(strata[0].begin(), strata[0].end(), 0);
  }

  BootstrapSplit split;
  split.run_id = run_id;
  std::vector<char> drawn(static_cast<std::size_t>(n));
  for (int attempt = 0; attempt <= kMaxBootstrapRetries; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
    split.train_indices.clear();
    std::fill(drawn.begin(), drawn.end(), 0);
    for (const auto& stratum : strata) {
      std::uniform_int_distribution<std::size_t> pick(0, stratum.size() - 1);
      for (std::size_t k = 0; k < stratum.size(); ++k) {
        const int row = stratum[pick(rng)];
        split.train_indices.push_back(row);
        drawn[static_cast<std::size_t>(row)] = 1;
      }
    }
    split.oob_indices.clear();
    for (int i = 0; i < n; ++i)
      if (!drawn[static_cast<std::size_t>(i)]) split.oob_indices.push_back(i);
    if (!split.oob_indices.empty()) return split;
  }
  throw NumericError("bootstrap run " + std::to_string(run_id) + ": out-of-bag set empty after " +
                     std::to_string(kMaxBootstrapRetries) + " retries");
}

void SimulationConfig::validate() const {
  if (n < 2 || d < 1 || s < 1 || s > d)
    throw UsageError("simulation requires n >= 2 and 1 <= s <= d");
  if (!(sigma_signal > 0.0) || !(sigma_noise > 0.0))
    throw UsageError("simulation standard deviations must be positive");
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!prob(pi_signal) || !prob(pi_noise))
    throw UsageError("simulation zero probabilities must lie in [0, 1]");
  if (!std::isfinite(mu_max) || !std::isfinite(mu_min))
    throw UsageError("simulation means must be finite");
}

double SimulationConfig::signal_mean(int j) const {
  if (s == 1) return mu_max;
  return mu_max - (mu_max - mu_min) * static_cast<double>(j) / static_cast<double>(s - 1);
}

Dataset simulate_zig(const SimulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution label(0.5);
  std::bernoulli_distribution zero_signal(cfg.pi_signal);
  std::bernoulli_distribution zero_noise(cfg.pi_noise);
  std::normal_distribution<double> standard(0.0, 1.0);

  std::vector<double> means(static_cast<std::size_t>(cfg.s));
  for (int j = 0; j < cfg.s; ++j) means[static_cast<std::size_t>(j)] = cfg.signal_mean(j);

  Eigen::MatrixXd x(cfg.n, cfg.d);
  Eigen::VectorXd y(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    const bool positive = label(rng);
    y[i] = positive ? 1.0 : 0.0;
    for (int j = 0; j < cfg.d; ++j) {
      if (j < cfg.s) {
        const double mu = positive ? means[static_cast<std::size_t>(j)]
                                   : -means[static_cast<std::size_t>(j)];
        x(i, j) = zero_signal(rng) ? 0.0 : mu + cfg.sigma_signal * standard(rng);
      } else {
        x(i, j) = zero_noise(rng) ? 0.0 : cfg.sigma_noise * standard(rng);
      }
    }
  }
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(cfg.d));
  for (int j = 0; j < cfg.d; ++j) names.push_back("x" + std::to_string(j + 1));
  return Dataset(std::move(x), std::move(y), std::move(names), TaskKind::binary_classification);
}

}  // namespace roshap
