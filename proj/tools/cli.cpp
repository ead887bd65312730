#include "roshap/cli.hpp"

#include "roshap/attribution.hpp"
#include "roshap/baselines.hpp"
#include "roshap/csv.hpp"
#include "roshap/dataset.hpp"
#include "roshap/errors.hpp"
#include "roshap/evalharness.hpp"
#include "roshap/io.hpp"
#include "roshap/parallel.hpp"
#include "roshap/svg.hpp"
#include "roshap/treeshap.hpp"
#include "roshap/trees.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#ifndef ROSHAP_VERSION
#define ROSHAP_VERSION "0.0.0"
#endif

namespace roshap::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class Stopwatch {
 public:
  void lap(const std::string& phase) {
    const auto now = std::chrono::steady_clock::now();
    timings_[phase] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }
  json to_json() const { return timings_; }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  json timings_ = json::object();
};

json option_echo(const CLI::App& app) {
  json config = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
    const auto& results = opt->results();
    const auto& key = opt->get_lnames().front();
    if (opt->get_expected_max() == 0) config[key] = opt->count() > 0;
    else if (opt->get_expected_max() > 1) config[key] = results;
    else if (!results.empty()) config[key] = results.front();
    else config[key] = opt->get_default_str();
  }
  return config;
}

void write_manifest(const fs::path& path, const std::string& command, const CLI::App& app,
                    const std::vector<std::string>& argv, std::optional<std::uint64_t> seed, std::optional<int> runs,
                    const Stopwatch& watch, const std::vector<fs::path>& outputs, const json& extra = {}) {
  json doc;
  doc["command"] = command;
  doc["version"] = ROSHAP_VERSION;
  doc["argv"] = argv;
  doc["config"] = option_echo(app);
  doc["master_seed"] = seed ? json(*seed) : json(nullptr);
  doc["runs"] = runs ? json(*runs) : json(nullptr);
  doc["timings_seconds"] = watch.to_json();
  json files = json::array();
  for (const auto& p : outputs) files.push_back(p.generic_string());
  doc["outputs"] = files;
  if (extra.is_object()) doc.update(extra);
  io::write_json_atomic(path, doc);
}

void add_param_options(CLI::App* app, GbdtParams& params) {
  app->add_option("--rounds,--num_rounds", params.num_rounds, "Boosting rounds")->capture_default_str();
  app->add_option("--max-depth,--max_depth", params.max_depth, "Maximum tree depth")->capture_default_str();
  app->add_option("--learning-rate,--learning_rate", params.learning_rate, "Shrinkage")->capture_default_str();
  app->add_option("--lambda,--lambda_l2", params.lambda_l2, "L2 penalty on leaf values")->capture_default_str();
  app->add_option("--min-child-weight,--min_child_weight", params.min_child_weight, "Minimum hessian per child")
      ->capture_default_str();
  app->add_option("--min-gain,--min_gain", params.min_gain, "Minimum split gain")->capture_default_str();
}

struct DataFlags {
  std::string path;
  std::string target = "y";
  std::string task = "binary-classification";
  std::vector<std::string> recode;

  void add(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--data", path, "Input CSV with a header row");
    if (required) opt->required();
    app->add_option("--target", target, "Target column name")->capture_default_str();
    app->add_option("--task", task, "binary-classification or regression")->capture_default_str();
    app->add_option("--recode", recode, "Replace a raw cell value before parsing, OLD=NEW (repeatable)");
  }

  Dataset load() const {
    CsvLoadOptions options;
    for (const auto& r : recode) {
      const auto eq = r.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--recode expects OLD=NEW, got '" + r + "'");
      options.recode[r.substr(0, eq)] = r.substr(eq + 1);
    }
    return load_csv(path, target, parse_task(task), options);
  }
};

int resolve_feature(const std::vector<std::string>& names, const std::string& token) {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == token) return static_cast<int>(j);
  if (const auto v = csv::parse_double(token); v && *v == std::floor(*v) && *v >= 1 &&
                                               *v <= static_cast<double>(names.size()))
    return static_cast<int>(*v) - 1;
  throw UsageError("unknown feature '" + token + "'");
}

std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  auto to_int = [&](const std::string& s) {
    const auto v = csv::parse_double(s);
    if (!v || *v != std::floor(*v)) throw UsageError("bad k value '" + s + "'");
    return static_cast<int>(*v);
  };
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(to_int(item));
    } else {
      const int lo = to_int(item.substr(0, dash)), hi = to_int(item.substr(dash + 1));
      if (lo > hi) throw UsageError("empty k range '" + item + "'");
      for (int k = lo; k <= hi; ++k) out.push_back(k);
    }
  }
  if (out.empty()) throw UsageError("empty k list");
  return out;
}

std::string safe_name(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return out;
}

// Fills options missing from the command line with values from a TOML file,
// so explicit flags take precedence.
void apply_config(CLI::App* app, const std::string& file) {
  if (file.empty()) return;
  if (!fs::exists(file)) throw UsageError("config file not found: " + file);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(file);
  } catch (const CLI::ParseError& e) {
    throw UsageError("cannot parse " + file + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents.front() != app->get_name()) continue;
    CLI::Option* opt = app->get_option_no_throw("--" + item.name);
    if (opt == nullptr) throw UsageError(file + ": unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;
    for (const auto& v : item.inputs) opt->add_result(v);
    opt->run_callback();
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateCmd {
  SimulationConfig cfg;
  std::uint64_t seed = 0;
  std::string out;
  CLI::App* app = nullptr;
  std::string config_file;

  void setup(CLI::App& root) {
    app = root.add_subcommand("simulate", "Write a zero-inflated Gaussian simulation dataset");
    app->add_option("--config", config_file, "TOML file with SimulationConfig keys (flags win)");
    app->add_option("--n", cfg.n, "Rows")->capture_default_str();
    app->add_option("--d", cfg.d, "Features")->capture_default_str();
    app->add_option("--s", cfg.s, "Signal features (the first s columns)")->capture_default_str();
    app->add_option("--sigma-signal,--sigma_signal", cfg.sigma_signal)->capture_default_str();
    app->add_option("--sigma-noise,--sigma_noise", cfg.sigma_noise)->capture_default_str();
    app->add_option("--pi-signal,--pi_signal", cfg.pi_signal, "Zero probability of signal features")
        ->capture_default_str();
    app->add_option("--pi-noise,--pi_noise", cfg.pi_noise, "Zero probability of noise features")
        ->capture_default_str();
    app->add_option("--mu-max,--mu_max", cfg.mu_max)->capture_default_str();
    app->add_option("--mu-min,--mu_min", cfg.mu_min)->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->required();
    app->add_option("--out", out, "Output CSV")->required();
  }

  int run(const std::vector<std::string>& argv) {
    Stopwatch watch;
    const auto ds = simulate_zig(cfg, seed);
    watch.lap("simulate");
    write_csv(out, ds, "y");
    watch.lap("write");
    write_manifest(out + ".manifest.json", "simulate", *app, argv, seed, std::nullopt, watch, {out});
    std::cout << "wrote " << ds.rows() << " x " << ds.cols() << " features to " << out << "\n";
    return kOk;
  }
};

// ---------------------------------------------------------------- attribute

struct AttributeCmd {
  DataFlags data;
  GbdtParams params;
  int runs = 100;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out_dir;
  std::vector<std::string> keep_samples;
  std::vector<int> dump_shap;
  bool stratified = false;
  CLI::App* app = nullptr;
  std::string config_file;
  CLI::Option* keep_opt = nullptr;

  void setup(CLI::App& root) {
    app = root.add_subcommand("attribute", "Bootstrap out-of-bag SHAP magnitudes (one U vector per run)");
    app->add_option("--params-file", config_file, "TOML file with model parameters and flags (flags win)");
    data.add(app);
    add_param_options(app, params);
    app->add_option("--runs,-B", runs, "Bootstrap runs")->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->required();
    app->add_option("--workers", workers, "Parallel workers")->capture_default_str();
    app->add_option("--out-dir", out_dir, "Output directory")->required();
    keep_opt = app->add_option("--keep-samples", keep_samples,
                               "Retain per-instance |SHAP| for these features (all when no names follow)")
                   ->expected(0, CLI::detail::expected_max_vector_size);
    app->add_option("--dump-shap", dump_shap, "Write signed per-instance attributions for these run ids");
    app->add_flag("--stratified-bootstrap", stratified, "Resample within each class");
  }

  int run(const std::vector<std::string>& argv) {
    Stopwatch watch;
    const auto ds = data.load();
    watch.lap("load");
    BootstrapOptions opts;
    opts.workers = workers;
    opts.stratified = stratified;
    opts.keep_samples = keep_opt->count() > 0;
    for (const auto& name : keep_samples) opts.sample_features.push_back(resolve_feature(ds.feature_names(), name));
    std::sort(opts.sample_features.begin(), opts.sample_features.end());
    opts.sample_features.erase(std::unique(opts.sample_features.begin(), opts.sample_features.end()),
                               opts.sample_features.end());
    for (int b : dump_shap)
      if (b < 1 || b > runs) throw UsageError("--dump-shap run id " + std::to_string(b) + " outside 1.." + std::to_string(runs));

    const auto results = run_bootstrap_attribution(ds, params, runs, seed, opts);
    watch.lap("bootstrap");

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    std::vector<fs::path> outputs{dir / "u_dump.csv"};
    io::write_u_dump(dir / "u_dump.csv", results, ds.feature_names());
    if (opts.keep_samples) {
      std::vector<int> retained = opts.sample_features;
      if (retained.empty()) {
        retained.resize(static_cast<std::size_t>(ds.cols()));
        std::iota(retained.begin(), retained.end(), 0);
      }
      io::write_samples(dir / "samples", results, ds.feature_names(), retained);
      for (const char* f : {"samples.csv", "oob.csv", "sample_features.csv"}) outputs.push_back(dir / "samples" / f);
    }
    for (int b : dump_shap) {
      const auto split = bootstrap_resample(ds, derive_run_seed(seed, b), b, stratified);
      const auto ens = fit_gbdt_rows(ds, split.train_indices, params, default_objective(ds.task()));
      std::vector<Attribution> attributions;
      for (int i : split.oob_indices)
        attributions.push_back(tree_shap(ens, Eigen::VectorXd(ds.features().row(i).transpose()), i));
      const auto path = dir / ("shap_run_" + std::to_string(b) + ".csv");
      write_attribution_csv(path, attributions, ds.feature_names());
      outputs.push_back(path);
    }
    watch.lap("write");
    const json scale{{"attribution_scale",
                      ds.task() == TaskKind::binary_classification ? "margin (log-odds)" : "margin"}};
    write_manifest(dir / "manifest.json", "attribute", *app, argv, seed, runs, watch, outputs, scale);
    std::cout << "wrote " << runs << " x " << ds.cols() << " U matrix to " << (dir / "u_dump.csv").string() << "\n";
    return kOk;
  }
};

// ---------------------------------------------------------------- rank

struct RankCmd {
  std::string udump;
  std::string method = "roshap";
  std::string samples_dir;
  std::string out;
  std::vector<std::string> svg_features;
  std::vector<std::string> dist_features;
  std::string svg_dir;
  DataFlags data;
  GbdtParams params;
  std::uint64_t seed = 0;
  double test_fraction = kDefaultTestFraction;
  int bins = 10;
  CLI::App* app = nullptr;
  std::string config_file;
  CLI::Option* seed_opt = nullptr;

  void setup(CLI::App& root) {
    app = root.add_subcommand("rank", "Rank features by RoSHAP or a baseline importance");
    app->add_option("--config", config_file, "TOML file with flags (flags win)");
    app->add_option("--udump", udump, "U dump from attribute (required for roshap)");
    app->add_option("--method", method, "roshap, single_shap, gain or info_gain")->capture_default_str();
    app->add_option("--samples-dir", samples_dir, "Per-sample dump (default: samples/ next to the U dump)");
    app->add_option("--out", out, "Ranking CSV")->required();
    app->add_option("--svg", svg_features, "Features to plot as histogram + KDE + Gaussian SVGs");
    app->add_option("--dist-dump", dist_features, "Features whose B U values are written as CSV");
    app->add_option("--svg-dir", svg_dir, "Directory for SVGs and distribution dumps (default: next to --out)");
    data.add(app, false);
    add_param_options(app, params);
    seed_opt = app->add_option("--seed", seed, "Seed for single_shap / gain");
    app->add_option("--test-fraction", test_fraction, "Held-out fraction for single_shap / gain")->capture_default_str();
    app->add_option("--bins", bins, "Equal-frequency bins for info_gain")->capture_default_str();
  }

  int run(const std::vector<std::string>& argv) {
    Stopwatch watch;
    const Method m = parse_method(method);
    RankingTable table;
    std::vector<std::string> names;
    std::vector<fs::path> outputs{out};
    const fs::path out_dir = svg_dir.empty() ? fs::path(out).parent_path() : fs::path(svg_dir);
    if (m == Method::roshap) {
      if (udump.empty()) throw UsageError("--udump is required for --method roshap");
      const auto dump = io::read_u_dump(udump);
      names = dump.feature_names;
      auto summaries = summarize_all(dump.u);
      const fs::path sdir = samples_dir.empty() ? fs::path(udump).parent_path() / "samples" : fs::path(samples_dir);
      if (io::has_samples(sdir)) {
        const auto samples = io::read_samples(sdir, names);
        const int n = max_row(samples.runs) + 1;
        for (int j : samples.retained) {
          try {
            attach_lyapunov(summaries[static_cast<std::size_t>(j)], samples.runs, n);
          } catch (const NumericError&) {
            // too few observations with enough runs; columns stay blank
          }
        }
      }
      watch.lap("summarize");
      table = rank_features(summaries);
      if (!out_dir.empty()) fs::create_directories(out_dir);
      for (const auto& f : dist_features) {
        const int j = resolve_feature(names, f);
        const auto path = out_dir / ("distribution_" + safe_name(names[static_cast<std::size_t>(j)]) + ".csv");
        io::write_distribution_csv(path, dump.run_ids, dump.u.col(j));
        outputs.push_back(path);
      }
      for (const auto& f : svg_features) {
        const int j = resolve_feature(names, f);
        const auto& name = names[static_cast<std::size_t>(j)];
        const auto path = out_dir / ("distribution_" + safe_name(name) + ".svg");
        svg::write_file(path, svg::histogram_with_overlays(dump.u.col(j), "U distribution of " + name));
        outputs.push_back(path);
      }
    } else {
      if (data.path.empty()) throw UsageError("--data is required for --method " + method);
      if ((m == Method::single_shap || m == Method::gain) && seed_opt->count() == 0)
        throw UsageError("--seed is required for --method " + method);
      if (!svg_features.empty() || !dist_features.empty())
        throw UsageError("--svg and --dist-dump need the U distribution of --method roshap");
      const auto ds = data.load();
      names = ds.feature_names();
      watch.lap("load");
      ImportanceVector importance;
      if (m == Method::single_shap) importance = single_run_shap(ds, params, seed, test_fraction);
      else if (m == Method::gain) importance = gain_baseline(ds, params, seed, test_fraction);
      else importance = information_gain(ds, bins);
      table = rank_importance(importance);
      watch.lap("importance");
    }
    io::write_ranking_csv(out, table, names);
    watch.lap("write");
    write_manifest(out + ".manifest.json", "rank", *app, argv,
                   seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt, std::nullopt, watch, outputs);
    std::cout << "top features (" << table.method << "):";
    for (std::size_t r = 0; r < std::min<std::size_t>(10, table.rows.size()); ++r)
      std::cout << " " << names[static_cast<std::size_t>(table.rows[r].feature)];
    std::cout << "\n";
    return kOk;
  }

  static int max_row(const std::vector<AttributionRun>& runs) {
    int m = -1;
    for (const auto& r : runs)
      if (!r.oob_indices.empty()) m = std::max(m, r.oob_indices.back());
    return m;
  }
};

// ---------------------------------------------------------------- diagnose

struct DiagnoseCmd {
  std::string udump;
  std::string samples_dir;
  std::string feature;
  std::string out_dir;
  double threshold = kDefaultVarShareThreshold;
  int n = 0;
  CLI::App* app = nullptr;
  std::string config_file;

  void setup(CLI::App& root) {
    app = root.add_subcommand("diagnose", "Normality and Lyapunov diagnostics for one feature");
    app->add_option("--udump", udump, "U dump from attribute")->required();
    app->add_option("--samples-dir", samples_dir, "Per-sample dump (default: samples/ next to the U dump)");
    app->add_option("--feature", feature, "Feature name or 1-based column index")->required();
    app->add_option("--out-dir", out_dir, "Directory for the report and SVG")->required();
    app->add_option("--var-share-threshold", threshold, "Largest variance share tolerated before flagging")
        ->capture_default_str();
    app->add_option("--n", n, "Dataset rows (default: inferred from the OOB dump)");
  }

  int run(const std::vector<std::string>& argv) {
    Stopwatch watch;
    const auto dump = io::read_u_dump(udump);
    const int j = resolve_feature(dump.feature_names, feature);
    const auto& name = dump.feature_names[static_cast<std::size_t>(j)];
    const fs::path sdir = samples_dir.empty() ? fs::path(udump).parent_path() / "samples" : fs::path(samples_dir);
    if (!io::has_samples(sdir))
      throw DataError("diagnostics unavailable: no per-sample dump in " + sdir.string() +
                      " (re-run attribute with --keep-samples)");
    const auto samples = io::read_samples(sdir, dump.feature_names);
    if (std::find(samples.retained.begin(), samples.retained.end(), j) == samples.retained.end())
      throw DataError("diagnostics unavailable: samples for " + name + " were not retained");
    watch.lap("load");

    auto summary = summarize_feature(dump.u.col(j), j);
    const int rows = n > 0 ? n : RankCmd::max_row(samples.runs) + 1;
    const auto per_obs = per_observation_samples(samples.runs, j, rows);
    const auto lyap = lyapunov_diagnostic(per_obs, threshold);
    const auto est = per_sample_estimates(per_obs);
    const auto moments = zero_inflated_moments(est.w, est.eh, est.vh);
    watch.lap("diagnose");

    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json report;
    report["feature"] = name;
    report["runs"] = summary.runs;
    report["p_zero"] = summary.p_zero;
    report["median_nonzero"] = summary.median_nonzero;
    report["mean"] = summary.mean_all;
    report["sd"] = summary.sd_all;
    report["roshap"] = roshap_score(summary);
    report["skewness"] = opt(summary.skewness);
    report["excess_kurtosis"] = opt(summary.excess_kurtosis);
    report["normality_stat"] = opt(summary.normality_stat);
    report["kde_bandwidth"] = summary.kde ? json(summary.kde->bandwidth()) : json(nullptr);
    report["lyapunov_ratio"] = lyap.ratio;
    report["max_var_share"] = lyap.max_var_share;
    report["lyapunov_observations"] = lyap.observations;
    report["gaussian_recommended"] = lyap.gaussian_recommended;
    report["mixture_mean"] = moments.mu;
    report["mixture_sd"] = std::sqrt(moments.s2);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    const auto report_path = dir / ("diagnose_" + safe_name(name) + ".json");
    const auto svg_path = dir / ("diagnose_" + safe_name(name) + ".svg");
    io::write_json_atomic(report_path, report);
    svg::write_file(svg_path, svg::histogram_with_overlays(dump.u.col(j), "U distribution of " + name));
    watch.lap("write");
    write_manifest(dir / ("diagnose_" + safe_name(name) + ".manifest.json"), "diagnose", *app, argv, std::nullopt,
                   summary.runs, watch, {report_path, svg_path});

    std::cout << name << ": runs " << summary.runs << ", P0 " << 100.0 * summary.p_zero << "%, skewness "
              << (summary.skewness ? csv::format_double(*summary.skewness) : "n/a") << ", normality "
              << (summary.normality_stat ? csv::format_double(*summary.normality_stat) : "n/a") << "\n"
              << "Lyapunov ratio " << lyap.ratio << ", max variance share " << lyap.max_var_share << " -> "
              << (lyap.gaussian_recommended ? "Gaussian summary licensed" : "non-Gaussian: prefer the KDE summary")
              << "\n";
    return kOk;
  }
};

// ---------------------------------------------------------------- select-eval

struct SelectEvalCmd {
  DataFlags data;
  GbdtParams params;
  std::string k_list = "1-15";
  std::vector<std::string> methods{"roshap", "single_shap", "gain", "info_gain"};
  std::uint64_t seed = 0;
  int runs = 100;
  double test_fraction = kDefaultTestFraction;
  int bins = 10;
  std::size_t workers = 1;
  std::string out_dir;
  CLI::App* app = nullptr;
  std::string config_file;

  void setup(CLI::App& root) {
    app = root.add_subcommand("select-eval", "Top-k selection, refit and held-out scoring per method");
    app->add_option("--config", config_file, "TOML file with flags (flags win)");
    data.add(app);
    add_param_options(app, params);
    app->add_option("--k-list", k_list, "k values, e.g. 1-15 or 1,5,10")->capture_default_str();
    app->add_option("--methods", methods, "Subset of roshap single_shap gain info_gain")->capture_default_str();
    app->add_option("--seed", seed, "Master seed (split and rankings)")->required();
    app->add_option("--runs,-B", runs, "Bootstrap runs for roshap")->capture_default_str();
    app->add_option("--test-fraction", test_fraction)->capture_default_str();
    app->add_option("--bins", bins, "Equal-frequency bins for info_gain")->capture_default_str();
    app->add_option("--workers", workers)->capture_default_str();
    app->add_option("--out-dir", out_dir, "Output directory")->required();
  }

  int run(const std::vector<std::string>& argv) {
    Stopwatch watch;
    const auto ds = data.load();
    watch.lap("load");
    EvalConfig cfg;
    cfg.k_values = parse_k_list(k_list);
    for (const auto& m : methods) cfg.methods.push_back(parse_method(m));
    cfg.params = params;
    cfg.master_seed = seed;
    cfg.test_fraction = test_fraction;
    cfg.workers = workers;
    cfg.validate(ds.cols());
    const auto rankings = training_rankings(ds, cfg, runs, bins);
    watch.lap("rank");
    const auto result = sweep(ds, rankings, cfg);
    watch.lap("evaluate");

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    std::vector<fs::path> outputs{dir / "comparison.csv", dir / "cells.csv"};
    write_comparison_csv(dir / "comparison.csv", result);
    const auto metrics = metric_names(ds.task());
    {
      std::ofstream cells(dir / "cells.csv", std::ios::binary);
      csv::Row header{"method", "k"};
      header.insert(header.end(), metrics.begin(), metrics.end());
      header.push_back("split_hash");
      csv::write_record(cells, header);
      for (const auto& c : result.cells) {
        csv::Row row{to_string(c.method), std::to_string(c.k)};
        for (const auto& metric : metrics) row.push_back(csv::format_double(metric_value(c.report, metric)));
        char hash[24];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.split_hash));
        row.push_back(hash);
        csv::write_record(cells, row);
      }
      if (!cells) throw DataError("failed writing cells.csv");
    }
    std::vector<std::string> series;
    for (Method m : cfg.methods) series.push_back(to_string(m));
    for (const auto& metric : metrics) {
      svg::BarGroup group{metric, {}, {}};
      for (const auto& r : result.rows)
        if (r.metric == metric) {
          group.mean.push_back(r.mean);
          group.sd.push_back(r.sd);
        }
      const auto path = dir / (metric + ".svg");
      svg::write_file(path, svg::grouped_bars({group}, series, metric + " over k = " + k_list, metric));
      outputs.push_back(path);
    }
    watch.lap("write");
    write_manifest(dir / "manifest.json", "select-eval", *app, argv, seed, runs, watch, outputs);
    for (const auto& r : result.rows)
      std::cout << to_string(r.method) << " " << r.metric << " mean " << csv::format_double(r.mean) << " sd "
                << csv::format_double(r.sd) << "\n";
    return kOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App root("Bootstrap SHAP distributions and RoSHAP feature ranking", "roshap");
  root.set_version_flag("--version", ROSHAP_VERSION);
  root.require_subcommand(1);
  SimulateCmd simulate;
  AttributeCmd attribute;
  RankCmd rank;
  DiagnoseCmd diagnose;
  SelectEvalCmd select_eval;
  simulate.setup(root);
  attribute.setup(root);
  rank.setup(root);
  diagnose.setup(root);
  select_eval.setup(root);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    root.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return root.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return root.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return root.exit(e);
  } catch (const CLI::ParseError& e) {
    root.exit(e);
    return kUsage;
  }

  try {
    if (simulate.app->parsed()) {
      apply_config(simulate.app, simulate.config_file);
      return simulate.run(args);
    }
    if (attribute.app->parsed()) {
      apply_config(attribute.app, attribute.config_file);
      return attribute.run(args);
    }
    if (rank.app->parsed()) {
      apply_config(rank.app, rank.config_file);
      return rank.run(args);
    }
    if (diagnose.app->parsed()) return diagnose.run(args);
    if (select_eval.app->parsed()) {
      apply_config(select_eval.app, select_eval.config_file);
      return select_eval.run(args);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace roshap::cli
