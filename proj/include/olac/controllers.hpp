#ifndef OLAC_CONTROLLERS_HPP
#define OLAC_CONTROLLERS_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "olac/dual.hpp"
#include "olac/learning.hpp"
#include "olac/model.hpp"
#include "olac/queueing.hpp"

namespace olac {

enum class ControllerKind { kBackpressure, kOlac, kOlac2 };

const char* to_string(ControllerKind kind);
/// Accepts "backpressure"/"bp", "olac", "olac2" (case-insensitive).
ControllerKind parse_controller_kind(const std::string& name);

struct ControllerConfig {
  ControllerKind kind = ControllerKind::kBackpressure;
  double V = 1;
  /// OLAC offset; defaults to (log_b V)^2 per queue with b = theta_log_base.
  std::optional<Eigen::VectorXd> theta;
  double theta_log_base = 2.718281828459045;
  /// OLAC2 learning time exponent: T_l = max(1, round(V^c)).
  double c = 2.0 / 3.0;
  /// OLAC re-solve cadence in slots.
  int relearn_period = 1;
  DualSolverConfig<double> solver;
  /// Defaults: FIFO for Backpressure and OLAC, LIFO for OLAC2.
  std::optional<Discipline> discipline;
};

/// Throws std::invalid_argument on V < 1, c outside [0, 1), a non-positive
/// theta, theta of the wrong size, or relearn_period < 1.
void validate(const ControllerConfig& cfg, int queue_count);

Eigen::VectorXd default_theta(double V, int queue_count, double log_base = 2.718281828459045);
Eigen::VectorXd resolved_theta(const ControllerConfig& cfg, int queue_count);
std::int64_t learning_time(double V, double c);
Discipline resolved_discipline(const ControllerConfig& cfg);

/// argmax_x  -V f(s, x) + sum_j weights_j (mu_j - A_j)(s, x), ties to the
/// smallest action id. `weights` may be negative.
int max_weight_decide(const NetworkInstance<double>& instance, int state_id,
                      const Eigen::Ref<const Eigen::VectorXd>& weights, double V);

/// Backpressure: max-weight with the backlog itself as weights.
int bp_decide(const NetworkInstance<double>& instance, int state_id,
              const Eigen::Ref<const Eigen::VectorXd>& q, double V);

/// OLAC: max-weight with the effective backlog Q = q + beta - theta (unclamped).
int olac_decide(const NetworkInstance<double>& instance, int state_id,
                const Eigen::Ref<const Eigen::VectorXd>& q, const Eigen::Ref<const Eigen::VectorXd>& beta,
                const Eigen::Ref<const Eigen::VectorXd>& theta, double V);

struct Olac2Step {
  int action = 0;
  /// Present only at slot T_l: the learned multiplier the backlog is set to.
  std::optional<Multiplierd> adjustment;
  bool solver_converged = true;
};

/// One OLAC2 slot. At slot == T_l the empirical dual over `ed` (observations
/// 0..T_l-1) is solved and returned as the adjustment target; the action is
/// always Backpressure's on `q`. Callers that adjust must decide on the
/// adjusted backlog; Controller does this.
Olac2Step olac2_step(const NetworkInstance<double>& instance, int state_id, std::int64_t slot,
                     const Eigen::Ref<const Eigen::VectorXd>& q, const EmpiricalDistribution& ed,
                     const ControllerConfig& cfg);

/// Per-run controller state machine shared by the three rules.
///
/// Per slot t the engine calls begin_slot(t, ledger) (learning and, for
/// OLAC2 at T_l, the backlog adjustment), then decide(state, q), then
/// end_slot(state) to record the observation.
class Controller {
 public:
  Controller(const NetworkInstance<double>& instance, ControllerConfig cfg);

  std::optional<AdjustmentRecord> begin_slot(std::int64_t slot, QueueLedger& ledger);
  int decide(int state_id, const Eigen::Ref<const Eigen::VectorXd>& q) const;
  void end_slot(int state_id);

  /// The multiplier estimate gamma(t): q for Backpressure and OLAC2,
  /// q + beta - theta for OLAC.
  Eigen::VectorXd multiplier_estimate(const Eigen::Ref<const Eigen::VectorXd>& q) const;

  const ControllerConfig& config() const { return cfg_; }
  Discipline discipline() const { return discipline_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  const Multiplierd& beta() const { return learn_.beta; }
  const DualLearnState& learn_state() const { return learn_; }
  const EmpiricalDistribution& empirical() const { return empirical_; }
  /// OLAC2 only.
  std::optional<std::int64_t> learning_slot() const;

 private:
  const NetworkInstance<double>* instance_;
  ControllerConfig cfg_;
  Discipline discipline_;
  Eigen::VectorXd theta_;
  EmpiricalDistribution empirical_;
  DualLearnState learn_;
  std::int64_t t_learn_ = 0;
};

}  // namespace olac

#endif  // OLAC_CONTROLLERS_HPP
