// Runs the ten acceptance criteria through the experiment harness and prints
// one PASS/FAIL line per criterion. Exit status 1 if any criterion fails.
#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dualvote/errors.hpp"
#include "dualvote/harness.hpp"

using namespace dualvote;

namespace {

struct Job {
  Experiment experiment;
  std::uint64_t seed;
  std::uint64_t trials;
  std::set<std::string> criteria;
};

const std::vector<Job> kJobs{
    {Experiment::CheckG, 0, 0, {"1", "2"}},
    {Experiment::Iterate, 1003, 20000, {"3", "4"}},
    {Experiment::BbmInterface, 1005, 20000, {"5"}},
    {Experiment::DualityCheck, 1006, 10000, {"6"}},
    {Experiment::Collisions, 1007, 2000, {"7"}},
    {Experiment::Coupling, 1107, 10000, {"7"}},
    {Experiment::PdeFront, 0, 0, {"8"}},
    {Experiment::PdeCircle, 0, 0, {"9"}},
    {Experiment::McfCheck, 1010, 1000, {"10"}},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out = "acceptance-out";
  std::vector<std::string> only;
  app.add_option("--out", out, "Output directory");
  app.add_option("--only", only, "Criterion ids to run");
  CLI11_PARSE(app, argc, argv);
  std::setvbuf(stdout, nullptr, _IONBF, 0);

  std::map<int, std::vector<SummaryLine>> lines;
  std::map<int, std::string> errors;
  std::map<int, double> seconds;
  for (const auto& job : kJobs) {
    bool wanted = only.empty();
    for (const auto& id : only) wanted = wanted || job.criteria.count(id);
    if (!wanted) continue;
    ExperimentConfig cfg;
    cfg.experiment = job.experiment;
    if (is_stochastic(job.experiment)) cfg.seed = job.seed;
    cfg.trials = job.trials;
    cfg.output_dir = out + "/" + std::string(to_string(job.experiment));
    const auto start = std::chrono::steady_clock::now();
    std::printf("running %s ...\n", std::string(to_string(job.experiment)).c_str());
    try {
      const auto r = run_experiment(cfg);
      for (const auto& l : r.summary) {
        std::printf("  [%s] %-55s %s measured=%.6g bound=%.6g\n", l.id.c_str(), l.check.c_str(),
                    l.pass ? "ok  " : "FAIL", l.measured, l.bound);
        lines[std::stoi(l.id)].push_back(l);
      }
    } catch (const Error& e) {
      for (const auto& id : job.criteria) errors[std::stoi(id)] += std::string(e.what()) + "; ";
      std::printf("  error: %s\n", e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& id : job.criteria) seconds[std::stoi(id)] += s;
  }

  std::printf("\n");
  bool all = true;
  for (int id = 1; id <= 10; ++id) {
    if (!only.empty() && std::find(only.begin(), only.end(), std::to_string(id)) == only.end()) continue;
    const auto& ls = lines[id];
    bool pass = !ls.empty() && errors[id].empty();
    std::size_t failed = 0;
    for (const auto& l : ls) failed += !l.pass;
    pass = pass && failed == 0;
    all = all && pass;
    std::printf("Criterion %2d: %s  (%zu checks, %zu failed, %.1f s)%s%s\n", id, pass ? "PASS" : "FAIL", ls.size(),
                failed, seconds[id], errors[id].empty() ? "" : " error: ", errors[id].c_str());
  }
  return all ? 0 : 1;
}
