#include "olac/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "olac/rng.hpp"

namespace olac {
namespace {

std::string format_vector(const Eigen::VectorXd& v) {
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index j = 0; j < v.size(); ++j) out << (j ? " " : "") << v(j);
  return out.str();
}

std::string format_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

OracleReport compute_oracle(const NetworkInstance<double>& instance, double V, const OracleOptions& options) {
  OracleReport report;
  report.V = V;
  const Eigen::VectorXd& pi = instance.probabilities();
  const auto dual = maximize_dual(instance, pi, V, options.solver);
  report.gamma_star = dual.gamma;
  report.g_star = dual.value;
  report.dual_converged = dual.converged;
  const auto primal = primal_oracle(instance, pi);
  report.primal_feasible = primal.status == PrimalStatus::kOptimal;
  report.f_av_star = primal.f_av;
  report.eta0 = max_slack(instance, pi);
  double radius = options.rho_radius;
  if (radius <= 0) radius = std::max(0.5 * dual.gamma.norm(), 1e-3 * V * instance.delta_max());
  const double rho = estimate_polyhedral_rho(instance, pi, V, dual.gamma, options.rho_samples, radius,
                                             options.rho_seed);
  report.constants = analysis_constants(instance, rho);
  return report;
}

StateSampler::StateSampler(const Eigen::VectorXd& probabilities) {
  double acc = 0;
  cdf_.reserve(static_cast<std::size_t>(probabilities.size()));
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    acc += probabilities(i);
    cdf_.push_back(acc);
  }
  if (cdf_.empty() || !(acc > 0)) throw std::invalid_argument("state distribution has no mass");
}

int StateSampler::operator()(std::mt19937_64& engine) const {
  const double u = uniform01(engine) * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto index = std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1);
  return static_cast<int>(index);
}

std::optional<std::int64_t> convergence_time(const std::vector<Eigen::VectorXd>& trace,
                                             const Eigen::VectorXd& gamma_star, double zeta) {
  if (!(zeta > 0)) throw std::invalid_argument("zeta must be > 0");
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if ((trace[t] - gamma_star).norm() <= zeta) return static_cast<std::int64_t>(t);
  }
  return std::nullopt;
}

std::optional<std::int64_t> sustained_convergence_time(const std::vector<double>& distances, double zeta,
                                                       std::int64_t window) {
  std::int64_t run_start = -1;
  for (std::size_t t = 0; t < distances.size(); ++t) {
    if (distances[t] <= zeta) {
      if (run_start < 0) run_start = static_cast<std::int64_t>(t);
      if (static_cast<std::int64_t>(t) - run_start + 1 >= window) return run_start;
    } else {
      run_start = -1;
    }
  }
  return std::nullopt;
}

RunResult run(const NetworkInstance<double>& instance, const SimConfig& cfg, const Multiplierd& gamma_star) {
  const int r = instance.queue_count();
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (cfg.metric_sample_period < 1) throw std::invalid_argument("metric_sample_period must be >= 1");
  if (gamma_star.size() != r) throw std::invalid_argument("gamma* has the wrong number of components");
  if (cfg.initial_backlog && (cfg.initial_backlog->size() != r || (cfg.initial_backlog->array() < 0).any())) {
    throw std::invalid_argument("initial backlog must be a non-negative r-vector");
  }
  validate(cfg.controller, r);

  RunResult result;
  if (cfg.zeta) {
    if (!(*cfg.zeta > 0)) throw std::invalid_argument("zeta must be > 0");
    result.zeta = *cfg.zeta;
  } else {
    const Eigen::VectorXd& pi = instance.probabilities();
    double radius = cfg.oracle.rho_radius;
    if (radius <= 0) radius = std::max(0.5 * gamma_star.norm(), 1e-3 * cfg.controller.V * instance.delta_max());
    const double rho = estimate_polyhedral_rho(instance, pi, cfg.controller.V, gamma_star,
                                               cfg.oracle.rho_samples, radius, cfg.oracle.rho_seed);
    result.zeta = analysis_constants(instance, rho).D_p;
  }

  Controller controller(instance, cfg.controller);
  QueueLedger ledger(r);
  if (cfg.initial_backlog) {
    for (int j = 0; j < r; ++j) {
      if ((*cfg.initial_backlog)(j) > 0) ledger.push(j, {0, (*cfg.initial_backlog)(j), false});
    }
  }

  auto engine = make_stream(cfg.seed, 0);
  const StateSampler sampler(instance.probabilities());
  DelayAccumulator delays(r);
  result.dropped = Eigen::VectorXd::Zero(r);
  result.dropped_null = Eigen::VectorXd::Zero(r);
  result.T_l = controller.learning_slot();

  std::vector<std::int64_t> checkpoints = cfg.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  std::size_t next_checkpoint = 0;
  std::optional<EmpiricalDistribution> full_history;
  if (!checkpoints.empty()) full_history.emplace(instance.state_count());

  const bool learns = cfg.controller.kind != ControllerKind::kBackpressure;
  double cost_sum = 0;
  double backlog_sum = 0;
  std::int64_t run_start = -1;
  if (cfg.keep_distance_series) result.distance_series.reserve(static_cast<std::size_t>(cfg.horizon));

  for (std::int64_t t = 0; t < cfg.horizon; ++t) {
    if (auto adjustment = controller.begin_slot(t, ledger)) {
      result.dropped += adjustment->dropped;
      result.dropped_null += adjustment->dropped_null;
    }
    const Eigen::VectorXd& q = ledger.totals();
    const Eigen::VectorXd estimate = controller.multiplier_estimate(q);
    const double distance = (estimate - gamma_star).norm();
    if (!result.T_zeta && distance <= result.zeta) result.T_zeta = t;
    if (distance <= result.zeta) {
      if (run_start < 0) run_start = t;
      if (!result.T_zeta_sustained && t - run_start + 1 >= cfg.sustain_window) result.T_zeta_sustained = run_start;
    } else {
      run_start = -1;
    }
    if (cfg.keep_distance_series) result.distance_series.push_back(distance);
    backlog_sum += q.sum();

    while (next_checkpoint < checkpoints.size() && checkpoints[next_checkpoint] <= t) {
      if (checkpoints[next_checkpoint] == t && full_history->estimate()) {
        CheckpointRecord rec;
        rec.slot = t;
        const auto solved = maximize_dual(instance, *full_history->estimate(), cfg.controller.V,
                                          cfg.controller.solver);
        rec.beta_error = (solved.gamma - gamma_star).norm();
        rec.solver_converged = solved.converged;
        rec.max_distribution_error = *full_history->max_abs_error(instance.probabilities());
        rec.controller_beta_error = cfg.controller.kind == ControllerKind::kOlac
                                        ? (controller.beta() - gamma_star).norm()
                                        : std::numeric_limits<double>::quiet_NaN();
        result.checkpoints.push_back(rec);
      }
      ++next_checkpoint;
    }

    const int state = sampler(engine);
    const int action = controller.decide(state, q);
    const int col = instance.action_offset(state) + action;
    const double cost = instance.costs()(col);
    cost_sum += cost;

    if (cfg.trace && t % cfg.metric_sample_period == 0) {
      TraceRow row;
      row.slot = t;
      row.q = q;
      row.gamma_distance = distance;
      row.beta_distance =
          learns ? (controller.beta() - gamma_star).norm() : std::numeric_limits<double>::quiet_NaN();
      row.cost = cost;
      result.trace.push_back(std::move(row));
    }

    const auto departures = ledger.apply_slot(instance.arrivals().col(col), instance.services().col(col), t,
                                              controller.discipline());
    delays.add_all(departures);
    controller.end_slot(state);
    if (full_history) full_history->observe(state);
  }

  const double horizon = static_cast<double>(cfg.horizon);
  result.avg_cost = cost_sum / horizon;
  result.avg_backlog = backlog_sum / horizon;
  result.final_backlog = ledger.totals();
  result.delay = delays.finish(cfg.horizon, ledger.real_backlog());
  result.dual_solves = controller.learn_state().solves;
  result.unconverged_solves = controller.learn_state().unconverged_solves;

  const auto& cc = cfg.controller;
  auto& meta = result.metadata;
  meta.emplace_back("controller", to_string(cc.kind));
  meta.emplace_back("V", format_double(cc.V));
  meta.emplace_back("horizon", std::to_string(cfg.horizon));
  meta.emplace_back("burn_in", "0");
  meta.emplace_back("seed", std::to_string(cfg.seed));
  meta.emplace_back("rng", kRngDescription);
  meta.emplace_back("discipline", to_string(controller.discipline()));
  meta.emplace_back("zeta", format_double(result.zeta));
  meta.emplace_back("zeta_source", cfg.zeta ? "absolute" : "auto_Dp");
  if (cc.kind == ControllerKind::kOlac) {
    meta.emplace_back("theta", format_vector(controller.theta()));
    meta.emplace_back("theta_log_base", format_double(cc.theta_log_base));
    meta.emplace_back("relearn_period", std::to_string(cc.relearn_period));
  }
  if (cc.kind == ControllerKind::kOlac2) {
    meta.emplace_back("c", format_double(cc.c));
    meta.emplace_back("T_l", std::to_string(*result.T_l));
  }
  if (learns) {
    meta.emplace_back("solver", "projected supergradient ascent (a/(b+k)) + box-step cutting-plane polish");
  }
  return result;
}

}  // namespace olac
