#ifndef OLAC_DUAL_HPP
#define OLAC_DUAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "olac/model.hpp"
#include "olac/rng.hpp"
#include "olac/simplex.hpp"
#include "olac/types.hpp"

namespace olac {

// Dual of the deterministic problem
//
//   min  V sum_i pi_i f(s_i, x_i)   s.t.  sum_i pi_i (A(s_i, x_i) - mu(s_i, x_i)) <= 0
//
// over (randomized) per-state actions. For a multiplier gamma >= 0 the dual
// function separates over states:
//
//   g(gamma) = sum_i pi_i g_i(gamma),   g_i(gamma) = min_x V f(s_i, x) + gamma'(A - mu)(s_i, x)
//
// With finitely many actions g is concave and piecewise linear. Every
// function here takes the distribution explicitly, so the same code serves
// the true distribution and the empirical one used in dual learning.

template <typename Scalar>
struct PerStateDual {
  Scalar value;
  int action;
};

template <typename Scalar>
struct DualEvaluation {
  Scalar value = 0;
  Vector<Scalar> supergradient;
  /// Minimizing action per state (smallest id among ties).
  std::vector<int> argmin;
};

namespace detail {

template <typename Scalar, typename Derived>
void check_multiplier(const NetworkInstance<Scalar>& instance, const Eigen::MatrixBase<Derived>& gamma) {
  if (gamma.size() != instance.queue_count()) {
    throw std::invalid_argument("multiplier has " + std::to_string(gamma.size()) +
                                " components, expected " + std::to_string(instance.queue_count()));
  }
}

template <typename Scalar, typename Derived>
void check_distribution(const NetworkInstance<Scalar>& instance, const Eigen::MatrixBase<Derived>& dist) {
  if (dist.size() != instance.state_count()) {
    throw std::invalid_argument("distribution has " + std::to_string(dist.size()) +
                                " entries, expected " + std::to_string(instance.state_count()));
  }
}

// Smallest index attaining the minimum of scores.segment(offset, count).
template <typename Scalar>
int segment_argmin(const Vector<Scalar>& scores, int offset, int count) {
  int best = 0;
  Scalar best_value = scores(offset);
  for (int k = 1; k < count; ++k) {
    if (scores(offset + k) < best_value) {
      best_value = scores(offset + k);
      best = k;
    }
  }
  return best;
}

}  // namespace detail

/// g_{s}(gamma) and its minimizing action (ties to the smallest id).
template <typename Scalar, typename Derived>
PerStateDual<Scalar> per_state_dual(const NetworkInstance<Scalar>& instance, int state_id,
                                    const Eigen::MatrixBase<Derived>& gamma,
                                    std::type_identity_t<Scalar> V) {
  instance.check_state(state_id);
  detail::check_multiplier(instance, gamma);
  const int offset = instance.action_offset(state_id);
  const int count = instance.action_count(state_id);
  if (count == 0) throw std::invalid_argument("state " + std::to_string(state_id) + " has no actions");
  const Vector<Scalar> scores =
      V * instance.costs().segment(offset, count) +
      instance.net_rates().middleCols(offset, count).transpose() * gamma.template cast<Scalar>();
  const int best = detail::segment_argmin<Scalar>(scores, 0, count);
  return {scores(best), best};
}

/// Value, supergradient and per-state minimizers in one pass over the
/// stacked tables. States with zero weight still report an argmin.
template <typename Scalar, typename DistDerived, typename GammaDerived>
DualEvaluation<Scalar> evaluate_dual(const NetworkInstance<Scalar>& instance,
                                     const Eigen::MatrixBase<DistDerived>& dist,
                                     const Eigen::MatrixBase<GammaDerived>& gamma,
                                     std::type_identity_t<Scalar> V) {
  detail::check_distribution(instance, dist);
  detail::check_multiplier(instance, gamma);
  const Vector<Scalar> scores =
      V * instance.costs() + instance.net_rates().transpose() * gamma.template cast<Scalar>();
  DualEvaluation<Scalar> out;
  out.supergradient = Vector<Scalar>::Zero(instance.queue_count());
  out.argmin.resize(static_cast<std::size_t>(instance.state_count()));
  for (int i = 0; i < instance.state_count(); ++i) {
    const int offset = instance.action_offset(i);
    const int count = instance.action_count(i);
    if (count == 0) throw std::invalid_argument("state " + std::to_string(i) + " has no actions");
    const int best = detail::segment_argmin<Scalar>(scores, offset, count);
    out.argmin[static_cast<std::size_t>(i)] = best;
    const Scalar weight = static_cast<Scalar>(dist(i));
    if (weight != 0) {
      out.value += weight * scores(offset + best);
      out.supergradient += weight * instance.net_rates().col(offset + best);
    }
  }
  return out;
}

/// g(gamma) = sum_i dist_i g_i(gamma).
template <typename Scalar, typename DistDerived, typename GammaDerived>
Scalar dual_value(const NetworkInstance<Scalar>& instance, const Eigen::MatrixBase<DistDerived>& dist,
                  const Eigen::MatrixBase<GammaDerived>& gamma, std::type_identity_t<Scalar> V) {
  return evaluate_dual(instance, dist, gamma, V).value;
}

/// sum_i dist_i (A - mu)(s_i, x_i*) at the per-state minimizers.
template <typename Scalar, typename DistDerived, typename GammaDerived>
Vector<Scalar> supergradient(const NetworkInstance<Scalar>& instance,
                             const Eigen::MatrixBase<DistDerived>& dist,
                             const Eigen::MatrixBase<GammaDerived>& gamma,
                             std::type_identity_t<Scalar> V) {
  return evaluate_dual(instance, dist, gamma, V).supergradient;
}

enum class StepRule { kDiminishing, kFixed };

template <typename Scalar>
struct DualSolverConfig {
  /// Supergradient ascent iterations (the first phase).
  int max_iterations = 400;
  /// kDiminishing: a / (b + k). kFixed: a.
  StepRule step_rule = StepRule::kDiminishing;
  /// Non-positive `step_a` means V * delta_max.
  Scalar step_a = 0;
  Scalar step_b = 10;
  /// Relative: stop when the best value improves by less than
  /// tolerance * max(1, |best|) over `window` ascent iterations, and accept
  /// the cutting-plane gap below the same threshold.
  Scalar tolerance = Scalar(1e-10);
  int window = 50;
  std::optional<Multiplier<Scalar>> warm_start;

  /// Second phase: box-step cutting planes on the exact affine pieces found
  /// by evaluating g. Terminates at an exact maximizer for piecewise-linear g.
  bool polish = true;
  int polish_max_iterations = 300;
  int max_cuts = 64;
  /// Initial half-width of the trust box; non-positive means automatic.
  Scalar trust_radius = 0;
  /// Upper bound on every multiplier component; non-positive means
  /// 1000 * V * delta_max. Hitting it marks the dual as unbounded.
  Scalar multiplier_cap = 0;
};

template <typename Scalar>
struct DualSolution {
  Multiplier<Scalar> gamma;
  Scalar value = 0;
  /// False when the solver stopped on an iteration limit or at the cap.
  bool converged = false;
  /// A component reached `multiplier_cap` (the dual appears unbounded,
  /// i.e. the distribution admits no stabilizing policy).
  bool hit_cap = false;
  int ascent_iterations = 0;
  int polish_iterations = 0;
};

namespace detail {

template <typename Scalar>
struct Cut {
  Vector<Scalar> point;
  Vector<Scalar> slope;
  Scalar value;
};

// max w  s.t.  LB + w <= g_m + s_m'(gamma - gamma_m),  lo <= gamma <= hi
// with gamma = lo + y. Returns the maximizing gamma and the model value.
template <typename Scalar>
std::optional<std::pair<Vector<Scalar>, Scalar>> solve_cut_master(const std::deque<Cut<Scalar>>& cuts,
                                                                  const Vector<Scalar>& lo,
                                                                  const Vector<Scalar>& hi,
                                                                  Scalar reference) {
  const Eigen::Index r = lo.size();
  const Eigen::Index m = static_cast<Eigen::Index>(cuts.size());
  LinearProgram<Scalar> lp;
  lp.objective = Vector<Scalar>::Zero(r + 1);
  lp.objective(r) = -1;
  lp.A_ub = Matrix<Scalar>::Zero(m + r, r + 1);
  lp.b_ub.resize(m + r);
  for (Eigen::Index c = 0; c < m; ++c) {
    const auto& cut = cuts[static_cast<std::size_t>(c)];
    lp.A_ub.row(c).head(r) = -cut.slope.transpose();
    lp.A_ub(c, r) = 1;
    lp.b_ub(c) = cut.value - reference + cut.slope.dot(lo - cut.point);
  }
  for (Eigen::Index j = 0; j < r; ++j) {
    lp.A_ub(m + j, j) = 1;
    lp.b_ub(m + j) = hi(j) - lo(j);
  }
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) return std::nullopt;
  return std::make_pair(Vector<Scalar>(lo + sol.x.head(r)), reference + sol.x(r));
}

}  // namespace detail

/// Maximizes g(., dist) over gamma >= 0.
///
/// Phase one is projected supergradient ascent gamma <- max(gamma + step s, 0),
/// keeping the best iterate by value. Phase two (when `polish` is set) is a
/// box-step cutting-plane method seeded with the ascent's evaluations; each
/// evaluation yields an exact affine piece of g, so the model gap closes in
/// finitely many steps. The returned value is always g evaluated at the
/// returned multiplier and is never below g(warm_start).
template <typename Scalar, typename DistDerived>
DualSolution<Scalar> maximize_dual(const NetworkInstance<Scalar>& instance,
                                   const Eigen::MatrixBase<DistDerived>& dist,
                                   std::type_identity_t<Scalar> V,
                                   const DualSolverConfig<Scalar>& cfg = {}) {
  detail::check_distribution(instance, dist);
  if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(cfg.tolerance > 0)) throw std::invalid_argument("tolerance must be > 0");
  const Eigen::Index r = instance.queue_count();
  const Vector<Scalar> weights = dist.template cast<Scalar>();
  const Scalar scale = std::max(Scalar(1), V * instance.delta_max());
  const Scalar cap = cfg.multiplier_cap > 0 ? cfg.multiplier_cap : Scalar(1000) * scale;
  const Scalar step_a = cfg.step_a > 0 ? cfg.step_a : scale;

  DualSolution<Scalar> out;
  Vector<Scalar> gamma = Vector<Scalar>::Zero(r);
  if (cfg.warm_start) {
    detail::check_multiplier(instance, *cfg.warm_start);
    gamma = cfg.warm_start->cwiseMax(Scalar(0)).cwiseMin(cap);
  }

  std::deque<detail::Cut<Scalar>> cuts;
  auto remember = [&](const Vector<Scalar>& point, const DualEvaluation<Scalar>& eval) {
    cuts.push_back({point, eval.supergradient, eval.value});
    if (static_cast<int>(cuts.size()) > std::max(cfg.max_cuts, 2)) cuts.pop_front();
  };

  auto eval = evaluate_dual(instance, weights, gamma, V);
  remember(gamma, eval);
  Vector<Scalar> best = gamma;
  Scalar best_value = eval.value;
  Scalar window_start_value = best_value;
  bool stationary = false;
  Scalar last_step = step_a;

  auto projected_zero = [&](const Vector<Scalar>& point, const Vector<Scalar>& slope) {
    for (Eigen::Index j = 0; j < r; ++j) {
      if (slope(j) > 0 || (slope(j) < 0 && point(j) > 0)) return false;
    }
    return true;
  };

  for (int k = 0; k < cfg.max_iterations; ++k) {
    if (projected_zero(gamma, eval.supergradient)) {
      stationary = true;
      break;
    }
    last_step = cfg.step_rule == StepRule::kDiminishing ? step_a / (cfg.step_b + Scalar(k)) : step_a;
    gamma = (gamma + last_step * eval.supergradient).cwiseMax(Scalar(0)).cwiseMin(cap);
    eval = evaluate_dual(instance, weights, gamma, V);
    remember(gamma, eval);
    ++out.ascent_iterations;
    if (eval.value > best_value) {
      best_value = eval.value;
      best = gamma;
    }
    if ((k + 1) % std::max(cfg.window, 1) == 0) {
      if (best_value - window_start_value <= cfg.tolerance * std::max(Scalar(1), std::abs(best_value))) {
        break;
      }
      window_start_value = best_value;
    }
  }

  if (stationary) {
    out.gamma = gamma;
    out.value = eval.value;
    out.converged = true;
    out.hit_cap = (gamma.array() >= cap).any();
    return out;
  }

  if (!cfg.polish) {
    out.gamma = best;
    out.value = best_value;
    out.converged = out.ascent_iterations < cfg.max_iterations;
    out.hit_cap = (best.array() >= cap).any();
    return out;
  }

  Scalar radius = cfg.trust_radius > 0 ? cfg.trust_radius
                                       : std::max(Scalar(4) * last_step, Scalar(1e-3) * scale);
  Vector<Scalar> center = best;
  Scalar center_value = best_value;
  for (int it = 0; it < cfg.polish_max_iterations; ++it) {
    ++out.polish_iterations;
    const Vector<Scalar> lo = (center.array() - radius).cwiseMax(Scalar(0)).matrix();
    const Vector<Scalar> hi = (center.array() + radius).cwiseMin(cap).matrix();
    const auto master = detail::solve_cut_master(cuts, lo, hi, center_value);
    if (!master) break;
    const auto& [candidate, model_value] = *master;
    const Scalar threshold = cfg.tolerance * std::max(Scalar(1), std::abs(center_value));
    if (model_value - center_value <= threshold) {
      // center is optimal inside a box that extends past it in every free
      // direction, hence globally by concavity, unless it sits on the cap.
      out.converged = true;
      break;
    }
    const auto trial = evaluate_dual(instance, weights, candidate, V);
    remember(candidate, trial);
    if (trial.value > center_value + threshold * Scalar(1e-3)) {
      bool on_box = false;
      for (Eigen::Index j = 0; j < r; ++j) {
        const Scalar slack = Scalar(1e-9) * radius;
        if ((lo(j) > 0 && candidate(j) <= lo(j) + slack) || (hi(j) < cap && candidate(j) >= hi(j) - slack)) {
          on_box = true;
        }
      }
      center = candidate;
      center_value = trial.value;
      if (on_box) radius *= 2;
    }
  }
  out.gamma = center;
  out.value = center_value;
  out.hit_cap = (center.array() >= cap * (1 - Scalar(1e-12))).any();
  if (out.hit_cap) out.converged = false;
  return out;
}

/// Per-state mixing weights over that state's actions.
template <typename Scalar>
struct RandomizedPolicy {
  std::vector<Vector<Scalar>> weights;
};

enum class PrimalStatus { kOptimal, kInfeasible, kSolverFailure };

template <typename Scalar>
struct PrimalSolution {
  PrimalStatus status = PrimalStatus::kSolverFailure;
  /// Optimal average cost without the V factor.
  Scalar f_av = std::numeric_limits<Scalar>::quiet_NaN();
  RandomizedPolicy<Scalar> policy;
};

namespace detail {

// Columns: one mixing weight per stacked (state, action), then `extra`
// trailing columns; rows: r rate constraints then M simplex equalities.
template <typename Scalar, typename DistDerived>
LinearProgram<Scalar> policy_program(const NetworkInstance<Scalar>& instance,
                                     const Eigen::MatrixBase<DistDerived>& dist, Eigen::Index extra) {
  const Eigen::Index K = instance.total_actions();
  const Eigen::Index r = instance.queue_count();
  const Eigen::Index M = instance.state_count();
  LinearProgram<Scalar> lp;
  lp.objective = Vector<Scalar>::Zero(K + extra);
  lp.A_ub = Matrix<Scalar>::Zero(r, K + extra);
  lp.b_ub = Vector<Scalar>::Zero(r);
  lp.A_eq = Matrix<Scalar>::Zero(M, K + extra);
  lp.b_eq = Vector<Scalar>::Ones(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    const int offset = instance.action_offset(static_cast<int>(i));
    const int count = instance.action_count(static_cast<int>(i));
    const Scalar weight = static_cast<Scalar>(dist(i));
    lp.A_ub.middleCols(offset, count) = weight * instance.net_rates().middleCols(offset, count);
    lp.A_eq.row(i).segment(offset, count).setOnes();
  }
  return lp;
}

template <typename Scalar>
RandomizedPolicy<Scalar> extract_policy(const NetworkInstance<Scalar>& instance, const Vector<Scalar>& x) {
  RandomizedPolicy<Scalar> policy;
  for (int i = 0; i < instance.state_count(); ++i) {
    Vector<Scalar> w = x.segment(instance.action_offset(i), instance.action_count(i));
    const Scalar total = w.sum();
    if (total > 0) w /= total;
    policy.weights.push_back(std::move(w));
  }
  return policy;
}

}  // namespace detail

/// Exact LP solution of the deterministic problem over randomized policies.
template <typename Scalar, typename DistDerived>
PrimalSolution<Scalar> primal_oracle(const NetworkInstance<Scalar>& instance,
                                     const Eigen::MatrixBase<DistDerived>& dist) {
  detail::check_distribution(instance, dist);
  auto lp = detail::policy_program(instance, dist, 0);
  for (int i = 0; i < instance.state_count(); ++i) {
    const int offset = instance.action_offset(i);
    lp.objective.segment(offset, instance.action_count(i)) =
        static_cast<Scalar>(dist(i)) * instance.costs().segment(offset, instance.action_count(i));
  }
  const auto sol = solve_lp(lp);
  PrimalSolution<Scalar> out;
  if (sol.status == LpStatus::kInfeasible) {
    out.status = PrimalStatus::kInfeasible;
    return out;
  }
  if (sol.status != LpStatus::kOptimal) return out;
  out.status = PrimalStatus::kOptimal;
  out.f_av = sol.objective;
  out.policy = detail::extract_policy(instance, sol.x);
  return out;
}

/// Largest eta such that some randomized policy keeps every queue's average
/// net rate at or below -eta. A non-positive result means no slack.
template <typename Scalar, typename DistDerived>
Scalar max_slack(const NetworkInstance<Scalar>& instance, const Eigen::MatrixBase<DistDerived>& dist) {
  detail::check_distribution(instance, dist);
  const Eigen::Index K = instance.total_actions();
  // eta = eta_plus - eta_minus
  auto lp = detail::policy_program(instance, dist, 2);
  lp.objective(K) = -1;
  lp.objective(K + 1) = 1;
  lp.A_ub.col(K).setOnes();
  lp.A_ub.col(K + 1).setConstant(-1);
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw std::runtime_error(std::string("slack program: ") + to_string(sol.status));
  }
  return sol.x(K) - sol.x(K + 1);
}

/// Numerical probe of the polyhedral constant: min over sampled gamma of
/// (g(gamma*) - g(gamma)) / ||gamma* - gamma||, with gamma drawn at uniform
/// radius in (0, radius] along uniform directions and projected onto
/// gamma >= 0. Samples closer than 1e-6 after projection are skipped. A
/// non-positive result means the condition is not numerically confirmed.
template <typename Scalar, typename DistDerived, typename GammaDerived>
Scalar estimate_polyhedral_rho(const NetworkInstance<Scalar>& instance,
                               const Eigen::MatrixBase<DistDerived>& dist,
                               std::type_identity_t<Scalar> V,
                               const Eigen::MatrixBase<GammaDerived>& gamma_star, int sample_count,
                               std::type_identity_t<Scalar> radius, std::uint64_t seed = 0x5eed) {
  detail::check_multiplier(instance, gamma_star);
  const Vector<Scalar> center = gamma_star.template cast<Scalar>();
  const Vector<Scalar> weights = dist.template cast<Scalar>();
  const Scalar peak = dual_value(instance, weights, center, V);
  auto engine = make_stream(seed, 0);
  Scalar rho = std::numeric_limits<Scalar>::infinity();
  const Eigen::Index r = center.size();
  for (int n = 0; n < sample_count; ++n) {
    Vector<Scalar> direction(r);
    for (Eigen::Index j = 0; j < r; ++j) direction(j) = static_cast<Scalar>(standard_normal(engine));
    const Scalar norm = direction.norm();
    if (norm == 0) continue;
    const Scalar distance = radius * static_cast<Scalar>(1.0 - uniform01(engine));
    const Vector<Scalar> point = (center + (distance / norm) * direction).cwiseMax(Scalar(0));
    const Scalar gap = (center - point).norm();
    if (gap < Scalar(1e-6)) continue;
    rho = std::min(rho, (peak - dual_value(instance, weights, point, V)) / gap);
  }
  return std::isfinite(rho) ? rho : Scalar(0);
}

template <typename Scalar>
struct AnalysisConstants {
  Scalar B = 0;
  Scalar eta = 0;
  Scalar rho_hat = 0;
  Scalar D_p = 0;
  Scalar f_max = 0;
  /// eta in (0, rho_hat), which makes D_p positive.
  bool valid() const { return eta > 0 && eta < rho_hat; }
};

/// D_p = (B - eta^2) / (2 (rho - eta)) with eta = rho_hat / 2 unless given.
template <typename Scalar>
AnalysisConstants<Scalar> analysis_constants(const NetworkInstance<Scalar>& instance, Scalar rho_hat,
                                             std::optional<Scalar> eta = std::nullopt) {
  AnalysisConstants<Scalar> out;
  out.B = instance.drift_bound();
  out.f_max = instance.f_max();
  out.rho_hat = rho_hat;
  out.eta = eta.value_or(rho_hat / 2);
  out.D_p = out.rho_hat > out.eta ? (out.B - out.eta * out.eta) / (2 * (out.rho_hat - out.eta))
                                  : std::numeric_limits<Scalar>::infinity();
  return out;
}

/// xi = V f_max / eta_0, the bound on sum_j gamma_j once the slack holds.
template <typename Scalar>
Scalar multiplier_bound(const NetworkInstance<Scalar>& instance, Scalar V, Scalar eta0) {
  return V * instance.f_max() / eta0;
}

}  // namespace olac

#endif  // OLAC_DUAL_HPP
