#ifndef OLAC_EXPERIMENT_HPP
#define OLAC_EXPERIMENT_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "olac/controllers.hpp"
#include "olac/model.hpp"
#include "olac/sim.hpp"

namespace olac {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InstanceSource {
  /// "two_queue" or empty when `file` is used.
  std::string builtin;
  std::array<double, 4> channel_dist = kUniformChannelDist;
  std::filesystem::path file;
};

struct Scenario {
  std::string name = "scenario";
  InstanceSource instance;
  std::vector<ControllerConfig> controllers;
  /// Row labels, one per controller (defaults to the controller kind).
  std::vector<std::string> labels;
  std::vector<double> V_values;
  std::vector<std::uint64_t> seeds;
  std::int64_t horizon = 1;
  /// Absent: D_p per V.
  std::optional<double> zeta;
  std::filesystem::path output = "olacsim-out";
  bool trace = false;
  std::int64_t trace_period = 100;
  bool assumption_check = false;
  int perturbation_count = 100;
  double epsilon_s = 0.05;
  int workers = 1;
};

/// Parses the JSON scenario format. Relative instance paths resolve against
/// `base_dir`. Throws ScenarioError on schema problems or empty lists.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario load_scenario_file(const std::filesystem::path& path);

NetworkInstance<double> load_scenario_instance(const InstanceSource& source);

struct RunFailure {
  std::string controller;
  double V = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct ScenarioOutcome {
  int exit_status = 0;
  std::vector<std::string> files;
  std::vector<RunFailure> failures;
  std::vector<OracleReport> oracles;
};

struct AssumptionCheck {
  double epsilon_s = 0;
  int perturbations = 0;
  double nominal_slack = 0;
  double min_slack = 0;
};

/// max_slack at `count` random distributions within L2 distance epsilon_s of pi.
AssumptionCheck check_slack_ball(const NetworkInstance<double>& instance, double epsilon_s, int count,
                                 std::uint64_t seed);

/// Executes every (controller, V, seed) run and writes summary.csv, oracle.csv,
/// manifest.json, optional traces and the assumption check into the output
/// directory. Never throws for a failed run; the failure is reported in the
/// outcome and the manifest.
ScenarioOutcome run_scenario(const Scenario& scenario);

/// Column names of summary.csv for an r-queue instance.
std::vector<std::string> summary_header(int queue_count);

/// Aggregates summary.csv into per-figure tables (mean and standard error over
/// seeds) in `out_dir`; returns the written paths. Throws CsvError on a
/// malformed or empty summary.
std::vector<std::string> emit_plotdata(const std::filesystem::path& summary_csv,
                                       const std::filesystem::path& out_dir);

/// Least-squares slope of log(y) on log(x) over the points with x, y > 0.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace olac

#endif  // OLAC_EXPERIMENT_HPP
