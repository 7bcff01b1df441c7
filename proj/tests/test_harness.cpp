#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "dualvote/errors.hpp"
#include "dualvote/harness.hpp"

using namespace dualvote;
using nlohmann::json;

namespace {

std::string temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("dualvote-test-" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string config_error_message(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "config accepted";
  return {};
}

}  // namespace

TEST(Harness, ExperimentNames) {
  EXPECT_EQ(experiment_from_string("CheckG"), Experiment::CheckG);
  EXPECT_EQ(experiment_from_string("pde-circle"), Experiment::PdeCircle);
  EXPECT_EQ(all_experiments().size(), 12u);
  for (auto e : all_experiments()) EXPECT_EQ(experiment_from_string(to_string(e)), e);
  try {
    experiment_from_string("Teleport");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
}

TEST(Harness, CheckGAllPass) {
  ExperimentConfig c;
  c.experiment = Experiment::CheckG;
  c.output_dir = temp_dir("checkg");
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.pass());
  int condition_lines = 0;
  for (const auto& l : r.summary) condition_lines += l.check.find("conditions") != std::string::npos;
  EXPECT_EQ(condition_lines, 4);
  EXPECT_TRUE(std::filesystem::exists(c.output_dir + "/conditions.csv"));
  EXPECT_TRUE(std::filesystem::exists(c.output_dir + "/summary.csv"));
  EXPECT_EQ(slurp(c.output_dir + "/summary.csv").substr(0, 30), "id,check,status,measured,bound");
}

TEST(Harness, UnknownKeysNamePath) {
  EXPECT_NE(config_error_message({{"experiment", "CheckG"}, {"sede", 1}}).find("sede"), std::string::npos);
  EXPECT_NE(config_error_message({{"experiment", "CheckG"}, {"model", {{"family", "Majority"}, {"bta", 1}}}})
                .find("model.bta"),
            std::string::npos);
  EXPECT_NE(config_error_message({{"experiment", "CheckG"}, {"trials", -3}}).find("trials"), std::string::npos);
  EXPECT_NE(config_error_message({{"experiment", "Nope"}}).find("experiment"), std::string::npos);
}

TEST(Harness, StochasticNeedsSeed) {
  ExperimentConfig c;
  c.experiment = Experiment::McfCheck;
  c.output_dir = temp_dir("noseed");
  try {
    run_experiment(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    EXPECT_NE(std::string(e.what()).find("seed"), std::string::npos);
  }
}

TEST(Harness, ConfigRoundTrip) {
  const json j = {{"experiment", "DualityCheck"},
                  {"model", {{"family", "SexualReproduction"}, {"beta", 4.5}}},
                  {"scaling", {{"eps", 0.5}, {"eta", 0.05}, {"torus_side", 16}}},
                  {"trials", 100},
                  {"seed", 7},
                  {"tolerances", {{"z_bound", 4.0}}},
                  {"params", {{"horizon", 0.2}}}};
  const auto c = parse_config(j);
  ASSERT_TRUE(c.scaling.has_value());
  EXPECT_EQ(c.scaling->torus_side, 16);
  EXPECT_EQ(*c.seed, 7u);
  const auto back = parse_config(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Harness, DeterministicOutputs) {
  const json j = {{"experiment", "McfCheck"}, {"seed", 3}, {"trials", 50}};
  auto a = parse_config(j), b = parse_config(j);
  a.output_dir = temp_dir("det-a");
  b.output_dir = temp_dir("det-b");
  run_experiment(a);
  run_experiment(b);
  for (const char* f : {"mcf.csv", "summary.csv"}) EXPECT_EQ(slurp(a.output_dir + "/" + f), slurp(b.output_dir + "/" + f));
  EXPECT_TRUE(std::filesystem::exists(a.output_dir + "/metadata.json"));
}

TEST(Harness, DualityCheckReference) {
  ExperimentConfig c;
  c.experiment = Experiment::DualityCheck;
  c.seed = 11;
  c.trials = 2000;
  c.output_dir = temp_dir("duality");
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.pass());
  const auto table = slurp(c.output_dir + "/duality.csv");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
}

TEST(Harness, ModuleErrorsCarryExperimentName) {
  ExperimentConfig c;
  c.experiment = Experiment::Forward;
  c.seed = 1;
  c.model = ModelSpec::majority();
  c.output_dir = temp_dir("forward-err");
  try {
    run_experiment(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("Forward"), std::string::npos);
  }
}
