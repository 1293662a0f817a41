// olacsim: scenario runner, oracle report and plot-data aggregation.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "olac/csv.hpp"
#include "olac/experiment.hpp"
#include "olac/instance_io.hpp"
#include "olac/sim.hpp"

namespace fs = std::filesystem;
using namespace olac;

namespace {

NetworkInstance<double> resolve_instance(const std::string& spec) {
  if (spec == "two_queue" || spec == "two_queue:uniform") return build_two_queue_example(kUniformChannelDist);
  if (spec == "two_queue:unbalanced") return build_two_queue_example(kUnbalancedChannelDist);
  return load_instance_file(spec);
}

fs::path default_out(const std::string& flag, const fs::path& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("OLACSIM_OUT"); env && *env) return env;
  return fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic network control simulator: Backpressure, OLAC and OLAC2"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  int workers = 0;
  bool trace = false;
  auto* run_cmd = app.add_subcommand("run", "Run every (controller, V, seed) of a scenario file");
  run_cmd->add_option("scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--workers", workers, "Concurrent runs (default: hardware threads)")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_dir, "Output directory (default: scenario value, then $OLACSIM_OUT)");
  run_cmd->add_flag("--trace", trace, "Write per-run trace CSVs");

  std::string instance_spec;
  double V = 1;
  auto* oracle_cmd = app.add_subcommand("oracle", "Print gamma*, f*_av, eta_0, rho_hat and D_p for an instance");
  oracle_cmd->add_option("instance", instance_spec,
                         "Instance JSON file, or two_queue:uniform / two_queue:unbalanced")
      ->required();
  oracle_cmd->add_option("--V", V, "Tradeoff parameter")->required()->check(CLI::Range(1.0, 1e12));

  std::string summary_path;
  std::string plot_out;
  auto* plot_cmd = app.add_subcommand("plotdata", "Aggregate summary.csv into per-figure CSVs");
  plot_cmd->add_option("summary", summary_path, "summary.csv")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", plot_out, "Output directory (default: next to summary.csv)");

  std::string dump_spec;
  auto* dump_cmd = app.add_subcommand("dump-instance", "Write an instance as JSON to stdout");
  dump_cmd->add_option("instance", dump_spec, "two_queue:uniform, two_queue:unbalanced or a file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      Scenario sc = load_scenario_file(scenario_path);
      if (!out_dir.empty()) {
        sc.output = out_dir;
      } else if (const char* env = std::getenv("OLACSIM_OUT"); env && *env && sc.output == Scenario{}.output) {
        sc.output = env;
      }
      sc.workers = workers > 0 ? workers : std::max(1u, std::thread::hardware_concurrency());
      if (trace) sc.trace = true;
      const auto outcome = run_scenario(sc);
      for (const auto& f : outcome.failures) {
        std::cerr << "run failed: " << f.controller << " V=" << f.V << " seed=" << f.seed << ": " << f.message << '\n';
      }
      std::cout << "wrote " << outcome.files.size() << " files to " << sc.output.string() << '\n';
      return outcome.exit_status;
    }
    if (*oracle_cmd) {
      const auto instance = resolve_instance(instance_spec);
      const auto report = compute_oracle(instance, V);
      CsvWriter csv(std::cout);
      std::vector<std::string> header{"V", "f_av_star", "g_star", "g_star_over_V"};
      std::vector<std::string> row{format_number(V), format_number(report.f_av_star), format_number(report.g_star),
                                   format_number(report.g_star / V)};
      for (int j = 0; j < instance.queue_count(); ++j) {
        header.push_back("gamma_star_" + std::to_string(j + 1));
        row.push_back(format_number(report.gamma_star(j)));
      }
      for (const auto& [name, value] : {std::pair{"eta_0", report.eta0},
                                        std::pair{"rho_hat", report.constants.rho_hat},
                                        std::pair{"B", report.constants.B},
                                        std::pair{"D_p", report.constants.D_p}}) {
        header.emplace_back(name);
        row.push_back(format_number(value));
      }
      csv.row(header);
      csv.row(row);
      return 0;
    }
    if (*plot_cmd) {
      const fs::path summary(summary_path);
      const fs::path target = default_out(plot_out, summary.parent_path());
      for (const auto& f : emit_plotdata(summary, target)) std::cout << f << '\n';
      return 0;
    }
    if (*dump_cmd) {
      std::cout << serialize_instance(resolve_instance(dump_spec));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "olacsim: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
