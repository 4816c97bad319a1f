#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace dcons;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = DCONS_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("dcons_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

io::json minimal() {
  return io::json::parse(R"({
    "scenario": {"base": {"n": 3, "edges": [[0, 1], [1, 2]], "undirected": true},
                 "kind": "receive", "faulty": [0, 1]},
    "probs": [0.2, 0.2, 0.2, 0.4], "h": 0.1, "k_bar": 1, "x0": [1, 0, 0],
    "horizon": 20, "n_runs": 10, "seed": 3})");
}

}  // namespace

TEST(Config, StandinParsesWithResolvedGraph) {
  const ExperimentConfig cfg = load_config(kConfigs / "standin_scenario1.json");
  EXPECT_EQ(cfg.graphs.size(), 4u);
  EXPECT_EQ(cfg.base_index, 3u);
  ASSERT_TRUE(cfg.scenario.has_value());
  EXPECT_EQ(cfg.scenario->kind, FaultKind::receive);
  EXPECT_EQ(cfg.sampling.k_bar, 10u);
  EXPECT_EQ(cfg.seed, 20261016u);
  EXPECT_EQ(cfg.analyses.size(), 3u);
  EXPECT_TRUE(cfg.resolved.at("scenario").at("base").is_object());
  EXPECT_EQ(cfg.digest.size(), 16u);
  EXPECT_EQ(cfg.digest, load_config(kConfigs / "standin_scenario1.json").digest);
  EXPECT_NE(cfg.digest, load_config(kConfigs / "standin_scenario2.json").digest);
}

TEST(Config, DigestIgnoresThreadsOnly) {
  io::json a = minimal();
  io::json b = minimal();
  b["threads"] = 3;
  EXPECT_EQ(parse_config(a, ".").digest, parse_config(b, ".").digest);
  b["seed"] = 4;
  EXPECT_NE(parse_config(a, ".").digest, parse_config(b, ".").digest);
}

TEST(Config, Rejections) {
  const auto broken = [](auto edit) {
    io::json j = minimal();
    edit(j);
    return j;
  };
  EXPECT_THROW(parse_config(broken([](io::json& j) { j.erase("probs"); }), "."), ConfigError);
  EXPECT_THROW(parse_config(broken([](io::json& j) { j["ensemble"] = io::json::array(); }), "."), ConfigError);
  EXPECT_THROW(parse_config(broken([](io::json& j) { j["scenario"]["kind"] = "both"; }), "."), ConfigError);
  EXPECT_THROW(parse_config(broken([](io::json& j) { j["x0"] = {1, 2}; }), "."), ConfigError);
  EXPECT_THROW(parse_config(broken([](io::json& j) { j["n_runs"] = 0; }), "."), ConfigError);
  EXPECT_THROW(parse_config(broken([](io::json& j) { j["epsilons"] = {-1.0}; }), "."), ConfigError);
  EXPECT_THROW(parse_config(broken([](io::json& j) { j["analyses"] = "plots"; }), "."), ConfigError);
  EXPECT_THROW(parse_config(broken([](io::json& j) { j["scenario"]["base"] = "missing.json"; }), "."), ConfigError);
  EXPECT_THROW(parse_config(broken([](io::json& j) { j["delta"] = 0.2; }), "."), ConfigError);
  EXPECT_THROW(parse_config(broken([](io::json& j) { j["delta"] = 0.25; }), "."), SamplingPeriodError);
  EXPECT_THROW(parse_config(broken([](io::json& j) { j["probs"] = {0.5, 0.5, 0.0, 0.0}; }), "."), Error);
}

TEST(Experiment, BoundaryStepRejectedBeforeComputing) {
  const ExperimentConfig cfg = load_config(kConfigs / "boundary_h.json");
  const fs::path out = scratch("boundary");
  try {
    run_experiment(cfg, out);
    FAIL() << "expected rejection";
  } catch (const SamplingPeriodError& e) {
    EXPECT_NE(std::string(e.what()).find("h < 1/d_max"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(out));
}

TEST(Experiment, IdenticalGraphsGiveZeroBoundAndAverage) {
  const ExperimentConfig cfg = load_config(kConfigs / "identical_graphs.json");
  const fs::path out = scratch("identical");
  const ExperimentOutcome r = run_experiment(cfg, out);
  EXPECT_EQ(r.exit_code, 0) << r.summary;
  const io::json bounds = io::read_json_file(out / "bounds.json");
  for (const auto& rep : bounds.at("reports")) EXPECT_EQ(rep.at("bound_e").get<double>(), 0.0);
  std::ifstream csv(out / "trajectory.csv");
  std::string line, last;
  while (std::getline(csv, line)) last = line;
  std::stringstream ss(last);
  std::string cell;
  std::getline(ss, cell, ',');
  for (int i = 0; i < 5; ++i) {
    std::getline(ss, cell, ',');
    EXPECT_NEAR(std::stod(cell), -0.32, 1e-12);
  }
}

TEST(Experiment, StandinReportMatchesLibrary) {
  const ExperimentConfig cfg = load_config(kConfigs / "standin_scenario1.json");
  const fs::path out = scratch("standin");
  const ExperimentOutcome r = run_experiment(cfg, out);
  EXPECT_EQ(r.exit_code, 0) << r.summary;
  for (const char* f : {"trajectory.csv", "bounds.json", "montecarlo.json", "gap_quantiles.csv", "summary.txt"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const io::json bounds = io::read_json_file(out / "bounds.json");
  EXPECT_EQ(bounds.at("config_digest"), cfg.digest);
  EXPECT_EQ(bounds.at("seed"), cfg.seed);
  ASSERT_EQ(bounds.at("reports").size(), 2u);
  EXPECT_EQ(bounds.at("reports")[0].at("theorem"), "T4-sampled");
  EXPECT_NEAR(bounds.at("reports")[0].at("bound_e").get<double>(), 0.07163745464333551, 1e-12);
  EXPECT_NEAR(bounds.at("reports")[0].at("bound_state").get<double>(), 2.0918136755853967, 1e-10);
  EXPECT_EQ(bounds.at("reports")[1].at("theorem"), "T4-continuous");

  const io::json mc = io::read_json_file(out / "montecarlo.json");
  EXPECT_EQ(mc.at("config_digest"), cfg.digest);
  EXPECT_TRUE(mc.at("stats").at("all_monotone").get<bool>());
  EXPECT_LT(mc.at("stats").at("max_z").get<double>(), 4.0);
  EXPECT_NE(slurp(out / "summary.txt").find("T4-sampled"), std::string::npos);
}

TEST(Experiment, ClosedFormReportOnlyWhenDeltaEqualsH) {
  const ExperimentConfig cfg = load_config(kConfigs / "path3_theorem5.json");
  const fs::path out = scratch("p3");
  const ExperimentOutcome r = run_experiment(cfg, out, std::set<Analysis>{Analysis::bounds});
  EXPECT_EQ(r.exit_code, 0);
  const io::json bounds = io::read_json_file(out / "bounds.json");
  ASSERT_EQ(bounds.at("reports").size(), 3u);
  EXPECT_EQ(bounds.at("reports")[2].at("theorem"), "T5");
  EXPECT_NEAR(bounds.at("reports")[2].at("bound_e").get<double>(), 0.1010526315789472, 1e-14);
  EXPECT_FALSE(fs::exists(out / "montecarlo.json"));
  EXPECT_FALSE(fs::exists(out / "trajectory.csv"));
}

TEST(Experiment, ViolatedBoundSetsExitCode) {
  io::json j = minimal();
  j["scenario"]["base"] = io::json::parse(R"({"n": 5, "edges": [[0,1],[1,2],[2,3],[3,4],[4,0]], "undirected": true})");
  j["probs"] = {0.7, 0.1, 0.1, 0.1};
  j["h"] = 0.01;
  j["x0"] = {0.2, 0.8, 0.4, -1, -2};
  j["analyses"] = "bounds";
  const ExperimentOutcome r = run_experiment(parse_config(j, "."), scratch("violated"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.summary.find("VIOLATED"), std::string::npos);
}

TEST(Experiment, RepeatRunsAreByteIdentical) {
  for (const char* name : {"standin_scenario2.json", "standin_continuous.json"}) {
    const ExperimentConfig cfg = load_config(kConfigs / name);
    const fs::path a = scratch(std::string("rep_a_") + name), b = scratch(std::string("rep_b_") + name);
    run_experiment(cfg, a);
    run_experiment(cfg, b);
    for (const char* f : {"bounds.json", "montecarlo.json", "trajectory.csv", "gap_quantiles.csv"}) {
      EXPECT_EQ(slurp(a / f), slurp(b / f)) << name << " " << f;
    }
  }
}
