#ifndef OLAC_LEARNING_HPP
#define OLAC_LEARNING_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "olac/dual.hpp"
#include "olac/model.hpp"

namespace olac {

/// Running state counts N_i(t) and the estimate
/// (N_i + prior_i) / (t + sum prior).
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(int state_count);
  EmpiricalDistribution(int state_count, Eigen::VectorXd prior);

  void observe(int state_id);

  int state_count() const { return static_cast<int>(counts_.size()); }
  std::int64_t observations() const { return total_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  const std::optional<Eigen::VectorXd>& prior() const { return prior_; }

  /// Undefined (nullopt) with no observations and no prior.
  std::optional<Eigen::VectorXd> estimate() const;

  /// max_i |pi_i - estimate_i|; nullopt when the estimate is undefined.
  std::optional<double> max_abs_error(const Eigen::VectorXd& truth) const;

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
  std::optional<Eigen::VectorXd> prior_;
};

/// beta(t) and the bookkeeping around when it was last solved.
struct DualLearnState {
  Multiplierd beta;
  std::optional<std::int64_t> last_solved_at;
  DualSolverConfig<double> solver;
  int relearn_period = 1;
  bool last_converged = true;
  bool last_hit_cap = false;
  std::int64_t solves = 0;
  std::int64_t unconverged_solves = 0;

  DualLearnState(int queue_count, DualSolverConfig<double> solver_cfg = {}, int period = 1);
};

/// Re-solves the empirical dual when `relearn_period` slots have passed since
/// the last solve, warm-started at the current beta. Leaves beta unchanged
/// while the estimate is undefined. Returns true if a solve happened.
bool dual_learn(const NetworkInstance<double>& instance, const EmpiricalDistribution& ed, double V,
                DualLearnState& state, std::int64_t slot);

}  // namespace olac

#endif  // OLAC_LEARNING_HPP
