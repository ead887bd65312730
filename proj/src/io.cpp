#include "roshap/io.hpp"

#include "roshap/csv.hpp"
#include "roshap/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <unordered_map>

namespace roshap::io {

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::vector<csv::Row> read_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  auto rows = csv::read_all(in);
  if (rows.empty()) throw DataError(path.string() + " is empty");
  return rows;
}

double number(const std::string& text, const fs::path& path, std::size_t line) {
  const auto v = csv::parse_double(text);
  if (!v) throw DataError(path.string() + " line " + std::to_string(line) + ": '" + text + "' is not numeric");
  return *v;
}

int integer(const std::string& text, const fs::path& path, std::size_t line) {
  const double v = number(text, path, line);
  if (v != static_cast<double>(static_cast<int>(v)))
    throw DataError(path.string() + " line " + std::to_string(line) + ": '" + text + "' is not an integer");
  return static_cast<int>(v);
}

std::string optional_field(const std::optional<double>& v) { return v ? csv::format_double(*v) : ""; }

}  // namespace

void write_u_dump(const fs::path& path, const std::vector<AttributionRun>& runs,
                  const std::vector<std::string>& feature_names) {
  auto out = open_out(path);
  csv::Row header{"run_id"};
  header.insert(header.end(), feature_names.begin(), feature_names.end());
  csv::write_record(out, header);
  for (const auto& run : runs) {
    if (run.U.size() != static_cast<Eigen::Index>(feature_names.size()))
      throw UsageError("U vector length does not match the feature names");
    csv::Row row{std::to_string(run.run_id)};
    for (Eigen::Index j = 0; j < run.U.size(); ++j) row.push_back(csv::format_double(run.U[j]));
    csv::write_record(out, row);
  }
  if (!out) throw DataError("failed writing " + path.string());
}

UDump read_u_dump(const fs::path& path) {
  const auto rows = read_table(path);
  const auto& header = rows.front();
  if (header.size() < 2 || header.front() != "run_id")
    throw DataError(path.string() + ": expected header 'run_id,<features...>'");
  UDump dump;
  dump.feature_names.assign(header.begin() + 1, header.end());
  const auto p = static_cast<Eigen::Index>(dump.feature_names.size());
  dump.u.resize(static_cast<Eigen::Index>(rows.size() - 1), p);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw DataError(path.string() + " line " + std::to_string(r + 1) + ": expected " +
                      std::to_string(header.size()) + " fields");
    dump.run_ids.push_back(integer(rows[r][0], path, r + 1));
    for (Eigen::Index j = 0; j < p; ++j)
      dump.u(static_cast<Eigen::Index>(r - 1), j) = number(rows[r][static_cast<std::size_t>(j) + 1], path, r + 1);
  }
  if (dump.u.rows() == 0) throw DataError(path.string() + " holds no runs");
  return dump;
}

void write_samples(const fs::path& dir, const std::vector<AttributionRun>& runs,
                   const std::vector<std::string>& feature_names, const std::vector<int>& retained) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "sample_features.csv");
    csv::write_record(out, {"feature"});
    for (int j : retained) csv::write_record(out, {feature_names.at(static_cast<std::size_t>(j))});
  }
  auto samples = open_out(dir / "samples.csv");
  auto oob = open_out(dir / "oob.csv");
  csv::write_record(samples, {"run_id", "instance_id", "feature", "abs_phi"});
  csv::write_record(oob, {"run_id", "instance_id"});
  std::vector<bool> keep(feature_names.size(), false);
  for (int j : retained) keep.at(static_cast<std::size_t>(j)) = true;
  for (const auto& run : runs) {
    if (!run.has_samples) throw UsageError("run " + std::to_string(run.run_id) + " kept no samples");
    const auto id = std::to_string(run.run_id);
    for (int i : run.oob_indices) csv::write_record(oob, {id, std::to_string(i)});
    for (const auto& s : run.samples)
      if (keep.at(static_cast<std::size_t>(s.feature)))
        csv::write_record(samples, {id, std::to_string(s.row), feature_names.at(static_cast<std::size_t>(s.feature)),
                                  csv::format_double(s.value)});
  }
  if (!samples || !oob) throw DataError("failed writing samples to " + dir.string());
}

bool has_samples(const fs::path& dir) {
  return fs::exists(dir / "samples.csv") && fs::exists(dir / "oob.csv") && fs::exists(dir / "sample_features.csv");
}

SampleDump read_samples(const fs::path& dir, const std::vector<std::string>& feature_names) {
  if (!has_samples(dir)) throw DataError("no per-sample dump in " + dir.string());
  std::unordered_map<std::string, int> index;
  for (std::size_t j = 0; j < feature_names.size(); ++j) index.emplace(feature_names[j], static_cast<int>(j));
  auto feature_of = [&](const std::string& name, const fs::path& path) {
    const auto it = index.find(name);
    if (it == index.end()) throw DataError(path.string() + ": unknown feature '" + name + "'");
    return it->second;
  };

  SampleDump dump;
  const auto feature_path = dir / "sample_features.csv";
  const auto feature_rows = read_table(feature_path);
  for (std::size_t r = 1; r < feature_rows.size(); ++r)
    dump.retained.push_back(feature_of(feature_rows[r].at(0), feature_path));

  std::map<int, AttributionRun> by_id;
  const auto oob_path = dir / "oob.csv";
  const auto oob_rows = read_table(oob_path);
  for (std::size_t r = 1; r < oob_rows.size(); ++r) {
    if (oob_rows[r].size() != 2) throw DataError(oob_path.string() + " line " + std::to_string(r + 1) + ": expected 2 fields");
    const int id = integer(oob_rows[r][0], oob_path, r + 1);
    auto& run = by_id[id];
    run.run_id = id;
    run.has_samples = true;
    run.oob_indices.push_back(integer(oob_rows[r][1], oob_path, r + 1));
  }
  const auto sample_path = dir / "samples.csv";
  const auto sample_rows = read_table(sample_path);
  for (std::size_t r = 1; r < sample_rows.size(); ++r) {
    const auto& row = sample_rows[r];
    if (row.size() != 4) throw DataError(sample_path.string() + " line " + std::to_string(r + 1) + ": expected 4 fields");
    const int id = integer(row[0], sample_path, r + 1);
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError(sample_path.string() + ": run " + row[0] + " has no OOB rows");
    it->second.samples.push_back({integer(row[1], sample_path, r + 1), feature_of(row[2], sample_path),
                                  number(row[3], sample_path, r + 1)});
  }
  for (auto& [id, run] : by_id) {
    std::sort(run.oob_indices.begin(), run.oob_indices.end());
    run.oob_size = static_cast<int>(run.oob_indices.size());
    std::sort(run.samples.begin(), run.samples.end(), [](const SampleEntry& a, const SampleEntry& b) {
      return a.feature != b.feature ? a.feature < b.feature : a.row < b.row;
    });
    dump.runs.push_back(std::move(run));
  }
  return dump;
}

void write_ranking_csv(const fs::path& path, const RankingTable& table,
                       const std::vector<std::string>& feature_names) {
  auto out = open_out(path);
  csv::write_record(out, {"rank", "feature", "roshap", "p0_percent", "median_nonzero", "sd", "mean", "skewness",
                          "normality_stat", "lyapunov_ratio", "max_var_share", "method", "score"});
  const bool summarized = table.method == "roshap";
  for (const auto& row : table.rows) {
    const auto& s = row.summary;
    csv::Row rec{std::to_string(row.rank), feature_names.at(static_cast<std::size_t>(row.feature))};
    if (summarized) {
      char p0[32];
      std::snprintf(p0, sizeof p0, "%.2f", 100.0 * s.p_zero);
      rec.insert(rec.end(), {csv::format_double(row.score), p0, csv::format_double(s.median_nonzero),
                             csv::format_double(s.sd_all), csv::format_double(s.mean_all), optional_field(s.skewness),
                             optional_field(s.normality_stat), optional_field(s.lyapunov_ratio),
                             optional_field(s.max_var_share)});
    } else {
      rec.insert(rec.end(), 9, "");
    }
    rec.push_back(table.method);
    rec.push_back(csv::format_double(row.score));
    csv::write_record(out, rec);
  }
  if (!out) throw DataError("failed writing " + path.string());
}

void write_distribution_csv(const fs::path& path, const std::vector<int>& run_ids,
                            const Eigen::Ref<const Eigen::VectorXd>& values) {
  auto out = open_out(path);
  csv::write_record(out, {"run_id", "U"});
  for (Eigen::Index b = 0; b < values.size(); ++b)
    csv::write_record(out, {std::to_string(run_ids.at(static_cast<std::size_t>(b))), csv::format_double(values[b])});
  if (!out) throw DataError("failed writing " + path.string());
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    auto out = open_out(tmp);
    out << text;
    out.flush();
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " into place: " + ec.message());
}

void write_json_atomic(const fs::path& path, const nlohmann::ordered_json& doc) {
  write_text_atomic(path, doc.dump(2) + "\n");
}

}  // namespace roshap::io
