#pragma once

#include "roshap/attribution.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace roshap::io {

namespace fs = std::filesystem;

struct UDump {
  std::vector<int> run_ids;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd u;  // runs x features
};

/// CSV: run_id, then one column per feature.
void write_u_dump(const fs::path& path, const std::vector<AttributionRun>& runs,
                  const std::vector<std::string>& feature_names);
UDump read_u_dump(const fs::path& path);

/// Retained per-instance magnitudes, written as three files in `dir`:
/// samples.csv (run_id, instance_id, feature, abs_phi) holding nonzero
/// entries, oob.csv (run_id, instance_id) and sample_features.csv (feature).
void write_samples(const fs::path& dir, const std::vector<AttributionRun>& runs,
                   const std::vector<std::string>& feature_names, const std::vector<int>& retained);

struct SampleDump {
  std::vector<AttributionRun> runs;  // U left empty
  std::vector<int> retained;         // feature indices
};

/// DataError when the files are missing or malformed.
SampleDump read_samples(const fs::path& dir, const std::vector<std::string>& feature_names);
bool has_samples(const fs::path& dir);

/// Columns rank, feature, roshap, p0_percent, median_nonzero, sd, mean,
/// skewness, normality_stat, lyapunov_ratio, max_var_share, method, score.
/// Summary columns are blank for methods that have none.
void write_ranking_csv(const fs::path& path, const RankingTable& table,
                       const std::vector<std::string>& feature_names);

/// run_id, U for one feature.
void write_distribution_csv(const fs::path& path, const std::vector<int>& run_ids,
                            const Eigen::Ref<const Eigen::VectorXd>& values);

/// Writes to a temporary sibling and renames it into place.
void write_text_atomic(const fs::path& path, const std::string& text);
void write_json_atomic(const fs::path& path, const nlohmann::ordered_json& doc);

}  // namespace roshap::io
