#include "olac/learning.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace olac {

EmpiricalDistribution::EmpiricalDistribution(int state_count)
    : counts_(static_cast<std::size_t>(state_count), 0) {
  if (state_count < 1) throw std::invalid_argument("state count must be >= 1");
}

EmpiricalDistribution::EmpiricalDistribution(int state_count, Eigen::VectorXd prior)
    : EmpiricalDistribution(state_count) {
  if (prior.size() != state_count) throw std::invalid_argument("prior size does not match state count");
  if ((prior.array() < 0).any()) throw std::invalid_argument("prior pseudo-counts must be >= 0");
  if (prior.sum() > 0) prior_ = std::move(prior);
}

void EmpiricalDistribution::observe(int state_id) {
  if (state_id < 0 || state_id >= state_count()) {
    throw std::out_of_range("unknown state id " + std::to_string(state_id));
  }
  ++counts_[static_cast<std::size_t>(state_id)];
  ++total_;
}

std::optional<Eigen::VectorXd> EmpiricalDistribution::estimate() const {
  if (total_ == 0 && !prior_) return std::nullopt;
  Eigen::VectorXd out(state_count());
  for (int i = 0; i < state_count(); ++i) out(i) = static_cast<double>(counts_[static_cast<std::size_t>(i)]);
  double denominator = static_cast<double>(total_);
  if (prior_) {
    out += *prior_;
    denominator += prior_->sum();
  }
  return out / denominator;
}

std::optional<double> EmpiricalDistribution::max_abs_error(const Eigen::VectorXd& truth) const {
  const auto est = estimate();
  if (!est) return std::nullopt;
  if (truth.size() != est->size()) throw std::invalid_argument("distribution size mismatch");
  return (truth - *est).cwiseAbs().maxCoeff();
}

DualLearnState::DualLearnState(int queue_count, DualSolverConfig<double> solver_cfg, int period)
    : beta(Multiplierd::Zero(queue_count)), solver(std::move(solver_cfg)), relearn_period(period) {
  if (relearn_period < 1) throw std::invalid_argument("relearn period must be >= 1");
}

bool dual_learn(const NetworkInstance<double>& instance, const EmpiricalDistribution& ed, double V,
                DualLearnState& state, std::int64_t slot) {
  if (state.last_solved_at && slot - *state.last_solved_at < state.relearn_period) return false;
  const auto estimate = ed.estimate();
  if (!estimate) return false;
  auto cfg = state.solver;
  cfg.warm_start = state.beta;
  if (state.last_solved_at && state.last_converged) {
    // One more observation moves the maximizer only slightly: start the
    // cutting-plane stage at beta inside a small box.
    cfg.max_iterations = 1;
    if (cfg.trust_radius <= 0) cfg.trust_radius = 1e-2 * std::max(1.0, V * instance.delta_max());
  }
  const auto solution = maximize_dual(instance, *estimate, V, cfg);
  state.beta = solution.gamma;
  state.last_solved_at = slot;
  state.last_converged = solution.converged;
  state.last_hit_cap = solution.hit_cap;
  ++state.solves;
  if (!solution.converged) ++state.unconverged_solves;
  return true;
}

}  // namespace olac
