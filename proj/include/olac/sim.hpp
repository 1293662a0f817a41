#ifndef OLAC_SIM_HPP
#define OLAC_SIM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "olac/controllers.hpp"
#include "olac/dual.hpp"
#include "olac/model.hpp"
#include "olac/queueing.hpp"

namespace olac {

/// Harness-side knowledge of an (instance, V) pair: the true optimum and the
/// analysis constants derived from it. Never shown to a controller.
struct OracleReport {
  double V = 1;
  Multiplierd gamma_star;
  double g_star = 0;
  bool dual_converged = false;
  double f_av_star = 0;
  bool primal_feasible = false;
  double eta0 = 0;
  AnalysisConstants<double> constants;
};

struct OracleOptions {
  int rho_samples = 2000;
  /// Non-positive: half of ||gamma*|| (at least 1e-3 V delta_max).
  double rho_radius = 0;
  std::uint64_t rho_seed = 0x5eed;
  DualSolverConfig<double> solver;
};

OracleReport compute_oracle(const NetworkInstance<double>& instance, double V, const OracleOptions& options = {});

struct SimConfig {
  std::int64_t horizon = 1;
  std::uint64_t seed = 1;
  ControllerConfig controller;
  /// Convergence radius; defaults to D_p computed from the instance.
  std::optional<double> zeta;
  /// Stride of the sampled trace (when `trace` is set).
  std::int64_t metric_sample_period = 1;
  bool trace = false;
  /// Keep ||gamma(t) - gamma*|| for every slot in RunResult::distance_series.
  bool keep_distance_series = false;
  /// Consecutive slots within zeta required by the sustained convergence time.
  std::int64_t sustain_window = 100;
  /// Test hook for q(0); zero when absent.
  std::optional<Eigen::VectorXd> initial_backlog;
  /// Slots at which the empirical dual is solved from scratch and compared
  /// with gamma* (dual learning accuracy).
  std::vector<std::int64_t> checkpoints;
  OracleOptions oracle;
};

struct TraceRow {
  std::int64_t slot = 0;
  Eigen::VectorXd q;
  double gamma_distance = 0;
  /// NaN for Backpressure.
  double beta_distance = 0;
  double cost = 0;
};

struct CheckpointRecord {
  std::int64_t slot = 0;
  /// ||beta(t) - gamma*|| with beta(t) solved on the empirical distribution of slots 0..t-1.
  double beta_error = 0;
  /// The controller's own beta at this slot (OLAC; NaN otherwise).
  double controller_beta_error = 0;
  /// max_i |pi_i - pi_i(t)|.
  double max_distribution_error = 0;
  bool solver_converged = true;
};

struct RunResult {
  double avg_cost = 0;
  /// (1/T) sum_{t<T} sum_j q_j(t).
  double avg_backlog = 0;
  DelayStats delay;
  double zeta = 0;
  std::optional<std::int64_t> T_zeta;
  std::optional<std::int64_t> T_zeta_sustained;
  std::vector<TraceRow> trace;
  std::vector<double> distance_series;
  Eigen::VectorXd dropped;
  Eigen::VectorXd dropped_null;
  std::optional<std::int64_t> T_l;
  std::vector<CheckpointRecord> checkpoints;
  std::int64_t dual_solves = 0;
  std::int64_t unconverged_solves = 0;
  Eigen::VectorXd final_backlog;
  std::vector<std::pair<std::string, std::string>> metadata;
};

/// Runs `horizon` slots: sample S(t), learn/adjust, decide, update queues,
/// accumulate metrics. Deterministic in (instance, cfg).
RunResult run(const NetworkInstance<double>& instance, const SimConfig& cfg, const Multiplierd& gamma_star);

/// First index whose Euclidean distance to gamma* is <= zeta.
std::optional<std::int64_t> convergence_time(const std::vector<Eigen::VectorXd>& trace,
                                             const Eigen::VectorXd& gamma_star, double zeta);

/// First index starting `window` consecutive distances <= zeta.
std::optional<std::int64_t> sustained_convergence_time(const std::vector<double>& distances, double zeta,
                                                       std::int64_t window);

/// Inverse-CDF sampler over declaration order.
class StateSampler {
 public:
  explicit StateSampler(const Eigen::VectorXd& probabilities);
  int operator()(std::mt19937_64& engine) const;

 private:
  std::vector<double> cdf_;
};

}  // namespace olac

#endif  // OLAC_SIM_HPP
