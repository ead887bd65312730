#include "roshap/cli.hpp"
#include "roshap/dataset.hpp"
#include "roshap/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

using namespace roshap;
using roshap::testing::slurp;
using roshap::testing::spit;
using roshap::testing::TempDir;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "roshap");
  return cli::run(args);
}

std::string p(const TempDir& d, const std::string& name) { return (d / name).string(); }

}  // namespace

TEST(Cli, SimulateDefaultShape) {
  TempDir dir;
  ASSERT_EQ(run({"simulate", "--seed", "3", "--out", p(dir, "sim.csv")}), 0);
  const auto ds = load_csv(dir / "sim.csv", "y", TaskKind::binary_classification);
  EXPECT_EQ(ds.rows(), 600);
  EXPECT_EQ(ds.cols(), 1000);
  EXPECT_EQ(ds.feature_names().front(), "x1");
  const auto manifest = nlohmann::json::parse(slurp(dir / "sim.csv.manifest.json"));
  EXPECT_EQ(manifest["command"], "simulate");
  EXPECT_EQ(manifest["master_seed"], 3);
  EXPECT_TRUE(manifest.contains("timings_seconds"));
}

TEST(Cli, SimulateIsReproducible) {
  TempDir dir;
  const std::vector<std::string> common{"simulate", "--seed", "9", "--n", "40", "--d", "12", "--s", "3"};
  auto a = common, b = common;
  a.insert(a.end(), {"--out", p(dir, "a.csv")});
  b.insert(b.end(), {"--out", p(dir, "b.csv")});
  ASSERT_EQ(run(a), 0);
  ASSERT_EQ(run(b), 0);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
}

TEST(Cli, AllZeroSignalColumns) {
  TempDir dir;
  ASSERT_EQ(run({"simulate", "--seed", "1", "--n", "50", "--d", "8", "--s", "3", "--pi-signal", "1",
                 "--out", p(dir, "z.csv")}),
            0);
  const auto ds = load_csv(dir / "z.csv", "y", TaskKind::binary_classification);
  EXPECT_TRUE(ds.features().leftCols(3).isZero(0.0));
  EXPECT_FALSE(ds.features().rightCols(5).isZero(0.0));
}

TEST(Cli, ConfigFileWithFlagPrecedence) {
  TempDir dir;
  spit(dir / "sim.toml", "n = 30\nd = 9\ns = 2\n");
  ASSERT_EQ(run({"simulate", "--config", p(dir, "sim.toml"), "--d", "5", "--seed", "2", "--out",
                 p(dir, "c.csv")}),
            0);
  const auto ds = load_csv(dir / "c.csv", "y", TaskKind::binary_classification);
  EXPECT_EQ(ds.rows(), 30);
  EXPECT_EQ(ds.cols(), 5);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(run({"simulate", "--out", p(dir, "x.csv")}), cli::kUsage);  // no seed
  EXPECT_EQ(run({"simulate", "--seed", "1", "--s", "9", "--d", "4", "--out", p(dir, "x.csv")}), cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}), cli::kUsage);
  EXPECT_EQ(run({"attribute", "--data", p(dir, "missing.csv"), "--seed", "1", "--out-dir", p(dir, "o")}),
            cli::kData);
  spit(dir / "bad.csv", "a,y\n1,0\nfoo,1\n");
  EXPECT_EQ(run({"rank", "--method", "info_gain", "--data", p(dir, "bad.csv"), "--out", p(dir, "r.csv")}),
            cli::kData);
}

TEST(Cli, AttributeConstantTargetGivesZeroDump) {
  TempDir dir;
  spit(dir / "flat.csv", "a,b,y\n1,2,5\n2,1,5\n3,0,5\n4,4,5\n5,2,5\n");
  ASSERT_EQ(run({"attribute", "--data", p(dir, "flat.csv"), "--task", "regression", "-B", "1", "--seed", "7",
                 "--rounds", "5", "--out-dir", p(dir, "out")}),
            0);
  const auto dump = io::read_u_dump(dir / "out/u_dump.csv");
  EXPECT_EQ(dump.u.rows(), 1);
  EXPECT_TRUE(dump.u.isZero(0.0));
}

TEST(Cli, AttributeRankDiagnosePipeline) {
  TempDir dir;
  ASSERT_EQ(run({"simulate", "--seed", "4", "--n", "80", "--d", "6", "--s", "2", "--out", p(dir, "d.csv")}), 0);
  const std::vector<std::string> attr{"attribute", "--data", p(dir, "d.csv"), "-B", "12", "--seed", "5",
                                      "--rounds", "15", "--keep-samples", "x1", "--dump-shap", "2"};
  auto a = attr, b = attr;
  a.insert(a.end(), {"--out-dir", p(dir, "a")});
  b.insert(b.end(), {"--out-dir", p(dir, "b"), "--workers", "3"});
  ASSERT_EQ(run(a), 0);
  ASSERT_EQ(run(b), 0);
  EXPECT_EQ(slurp(dir / "a/u_dump.csv"), slurp(dir / "b/u_dump.csv"));
  EXPECT_EQ(slurp(dir / "a/samples/samples.csv"), slurp(dir / "b/samples/samples.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "a/shap_run_2.csv"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "a/manifest.json"));
  EXPECT_EQ(manifest["runs"], 12);
  EXPECT_EQ(manifest["master_seed"], 5);
  EXPECT_EQ(manifest["attribution_scale"], "margin (log-odds)");

  ASSERT_EQ(run({"rank", "--udump", p(dir, "a/u_dump.csv"), "--out", p(dir, "rank.csv"), "--svg", "x1",
                 "--dist-dump", "x2"}),
            0);
  const auto ranking = slurp(dir / "rank.csv");
  EXPECT_EQ(std::count(ranking.begin(), ranking.end(), '\n'), 7);
  EXPECT_EQ(slurp(dir / "distribution_x1.svg").rfind("<svg", 0), 0u);
  EXPECT_TRUE(std::filesystem::exists(dir / "distribution_x2.csv"));

  ASSERT_EQ(run({"diagnose", "--udump", p(dir, "a/u_dump.csv"), "--feature", "x1", "--out-dir", p(dir, "diag")}),
            0);
  const auto report = nlohmann::json::parse(slurp(dir / "diag/diagnose_x1.json"));
  EXPECT_EQ(report["runs"], 12);
  EXPECT_TRUE(report["max_var_share"].is_number());
  EXPECT_EQ(run({"diagnose", "--udump", p(dir, "a/u_dump.csv"), "--feature", "x3", "--out-dir", p(dir, "diag")}),
            cli::kData);
  EXPECT_EQ(run({"diagnose", "--udump", p(dir, "a/u_dump.csv"), "--samples-dir", p(dir, "none"), "--feature", "1",
                 "--out-dir", p(dir, "diag")}),
            cli::kData);
}

TEST(Cli, SelectEvalWritesComparison) {
  TempDir dir;
  ASSERT_EQ(run({"simulate", "--seed", "4", "--n", "90", "--d", "8", "--s", "2", "--out", p(dir, "d.csv")}), 0);
  ASSERT_EQ(run({"select-eval", "--data", p(dir, "d.csv"), "--k-list", "1-3", "--methods", "gain", "info_gain",
                 "--seed", "2", "--rounds", "10", "--out-dir", p(dir, "ev")}),
            0);
  const auto text = slurp(dir / "ev/comparison.csv");
  EXPECT_EQ(text.rfind("method,metric,mean,sd,k_count\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);
  EXPECT_TRUE(std::filesystem::exists(dir / "ev/auc_roc.svg"));
  EXPECT_EQ(run({"select-eval", "--data", p(dir, "d.csv"), "--k-list", "1-30", "--methods", "gain", "--seed", "2",
                 "--out-dir", p(dir, "ev2")}),
            cli::kUsage);
}
