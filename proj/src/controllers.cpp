#include "olac/controllers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace olac {

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kBackpressure: return "backpressure";
    case ControllerKind::kOlac: return "olac";
    case ControllerKind::kOlac2: return "olac2";
  }
  return "?";
}

ControllerKind parse_controller_kind(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "backpressure" || lower == "bp") return ControllerKind::kBackpressure;
  if (lower == "olac") return ControllerKind::kOlac;
  if (lower == "olac2") return ControllerKind::kOlac2;
  throw std::invalid_argument("unknown controller kind '" + name + "'");
}

Eigen::VectorXd default_theta(double V, int queue_count, double log_base) {
  const double l = std::log(V) / std::log(log_base);
  return Eigen::VectorXd::Constant(queue_count, l * l);
}

Eigen::VectorXd resolved_theta(const ControllerConfig& cfg, int queue_count) {
  return cfg.theta ? *cfg.theta : default_theta(cfg.V, queue_count, cfg.theta_log_base);
}

std::int64_t learning_time(double V, double c) {
  return std::max<std::int64_t>(1, std::llround(std::pow(V, c)));
}

Discipline resolved_discipline(const ControllerConfig& cfg) {
  if (cfg.discipline) return *cfg.discipline;
  return cfg.kind == ControllerKind::kOlac2 ? Discipline::kLifo : Discipline::kFifo;
}

void validate(const ControllerConfig& cfg, int queue_count) {
  if (!(cfg.V >= 1)) throw std::invalid_argument("V must be >= 1");
  if (cfg.relearn_period < 1) throw std::invalid_argument("relearn_period must be >= 1");
  if (cfg.kind == ControllerKind::kOlac) {
    if (!(cfg.theta_log_base > 1)) throw std::invalid_argument("theta log base must be > 1");
    const Eigen::VectorXd theta = resolved_theta(cfg, queue_count);
    if (theta.size() != queue_count) {
      throw std::invalid_argument("theta has " + std::to_string(theta.size()) + " entries, expected " +
                                  std::to_string(queue_count));
    }
    if (!(theta.array() > 0).all()) throw std::invalid_argument("theta must be componentwise > 0");
  }
  if (cfg.kind == ControllerKind::kOlac2 && !(cfg.c >= 0 && cfg.c < 1)) {
    throw std::invalid_argument("c must lie in [0, 1)");
  }
}

int max_weight_decide(const NetworkInstance<double>& instance, int state_id,
                      const Eigen::Ref<const Eigen::VectorXd>& weights, double V) {
  instance.check_state(state_id);
  if (weights.size() != instance.queue_count()) throw std::invalid_argument("weight vector has the wrong size");
  const int offset = instance.action_offset(state_id);
  const int count = instance.action_count(state_id);
  if (count == 0) throw std::invalid_argument("state " + std::to_string(state_id) + " has no actions");
  int best = 0;
  double best_score = 0;
  for (int k = 0; k < count; ++k) {
    const int col = offset + k;
    const double score = -V * instance.costs()(col) + weights.dot(instance.services().col(col)) -
                         weights.dot(instance.arrivals().col(col));
    if (k == 0 || score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

int bp_decide(const NetworkInstance<double>& instance, int state_id,
              const Eigen::Ref<const Eigen::VectorXd>& q, double V) {
  return max_weight_decide(instance, state_id, q, V);
}

int olac_decide(const NetworkInstance<double>& instance, int state_id,
                const Eigen::Ref<const Eigen::VectorXd>& q, const Eigen::Ref<const Eigen::VectorXd>& beta,
                const Eigen::Ref<const Eigen::VectorXd>& theta, double V) {
  const Eigen::VectorXd effective = q + beta - theta;
  return max_weight_decide(instance, state_id, effective, V);
}

Olac2Step olac2_step(const NetworkInstance<double>& instance, int state_id, std::int64_t slot,
                     const Eigen::Ref<const Eigen::VectorXd>& q, const EmpiricalDistribution& ed,
                     const ControllerConfig& cfg) {
  if (slot < 0) throw std::invalid_argument("slot must be >= 0");
  Olac2Step step;
  step.action = bp_decide(instance, state_id, q, cfg.V);
  if (slot == learning_time(cfg.V, cfg.c)) {
    const auto estimate = ed.estimate();
    if (estimate) {
      const auto solution = maximize_dual(instance, *estimate, cfg.V, cfg.solver);
      step.adjustment = solution.gamma;
      step.solver_converged = solution.converged;
    }
  }
  return step;
}

Controller::Controller(const NetworkInstance<double>& instance, ControllerConfig cfg)
    : instance_(&instance),
      cfg_(std::move(cfg)),
      discipline_(resolved_discipline(cfg_)),
      theta_(Eigen::VectorXd::Zero(instance.queue_count())),
      empirical_(instance.state_count()),
      learn_(instance.queue_count(), cfg_.solver, cfg_.relearn_period) {
  validate(cfg_, instance.queue_count());
  if (cfg_.kind == ControllerKind::kOlac) theta_ = resolved_theta(cfg_, instance.queue_count());
  t_learn_ = learning_time(cfg_.V, cfg_.c);
}

std::optional<std::int64_t> Controller::learning_slot() const {
  if (cfg_.kind != ControllerKind::kOlac2) return std::nullopt;
  return t_learn_;
}

std::optional<AdjustmentRecord> Controller::begin_slot(std::int64_t slot, QueueLedger& ledger) {
  switch (cfg_.kind) {
    case ControllerKind::kBackpressure:
      return std::nullopt;
    case ControllerKind::kOlac:
      dual_learn(*instance_, empirical_, cfg_.V, learn_, slot);
      return std::nullopt;
    case ControllerKind::kOlac2: {
      if (slot != t_learn_) return std::nullopt;
      const auto estimate = empirical_.estimate();
      if (!estimate) return std::nullopt;
      const auto solution = maximize_dual(*instance_, *estimate, cfg_.V, cfg_.solver);
      learn_.beta = solution.gamma;
      learn_.last_solved_at = slot;
      learn_.last_converged = solution.converged;
      learn_.last_hit_cap = solution.hit_cap;
      ++learn_.solves;
      if (!solution.converged) ++learn_.unconverged_solves;
      return ledger.adjust_to(solution.gamma, slot);
    }
  }
  return std::nullopt;
}

int Controller::decide(int state_id, const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (cfg_.kind == ControllerKind::kOlac) {
    return olac_decide(*instance_, state_id, q, learn_.beta, theta_, cfg_.V);
  }
  return bp_decide(*instance_, state_id, q, cfg_.V);
}

void Controller::end_slot(int state_id) {
  if (cfg_.kind == ControllerKind::kBackpressure) return;
  if (cfg_.kind == ControllerKind::kOlac2 && empirical_.observations() >= t_learn_) return;
  empirical_.observe(state_id);
}

Eigen::VectorXd Controller::multiplier_estimate(const Eigen::Ref<const Eigen::VectorXd>& q) const {
  if (cfg_.kind == ControllerKind::kOlac) return q + learn_.beta - theta_;
  return q;
}

}  // namespace olac
