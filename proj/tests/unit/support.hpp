#ifndef OLAC_TESTS_SUPPORT_HPP
#define OLAC_TESTS_SUPPORT_HPP

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "olac/dual.hpp"
#include "olac/model.hpp"

namespace testing {

using olac::ActionSpec;
using olac::NetworkInstance;
using olac::StateSpec;

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline ActionSpec<double> action(double cost, Eigen::VectorXd arrivals, Eigen::VectorXd services) {
  return {0, cost, std::move(arrivals), std::move(services)};
}

/// One-queue action with net rate A - mu = `net` (split so both tables stay non-negative).
inline ActionSpec<double> net_action(double cost, double net) {
  return net >= 0 ? action(cost, vec({net}), vec({0.0})) : action(cost, vec({0.0}), vec({-net}));
}

inline NetworkInstance<double> single_state(int r, std::vector<ActionSpec<double>> actions) {
  return NetworkInstance<double>(r, {StateSpec<double>{0, 1.0, std::move(actions)}});
}

/// Random instance with M states, r queues, 1..max_actions actions per state;
/// one action per state has zero cost and services, so costs are bounded,
/// and one serves every queue at rate 3, which gives slack when arrivals are
/// small.
inline NetworkInstance<double> random_instance(std::mt19937_64& rng, int M, int r, int max_actions) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> count(2, max_actions);
  std::vector<StateSpec<double>> states;
  Eigen::VectorXd p(M);
  for (int i = 0; i < M; ++i) p(i) = 0.05 + u(rng);
  p /= p.sum();
  for (int i = 0; i < M; ++i) {
    StateSpec<double> s;
    s.probability = p(i);
    Eigen::VectorXd arrivals(r);
    for (int j = 0; j < r; ++j) arrivals(j) = u(rng) < 0.5 ? 0.0 : 1.0 + u(rng);
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd services(r);
      double cost = 0;
      if (k == 0) {
        services.setZero();
      } else if (k == 1) {
        services.setConstant(3.0);
        cost = 2.0 + u(rng);
      } else {
        for (int j = 0; j < r; ++j) services(j) = 3.0 * u(rng);
        cost = 3.0 * u(rng);
      }
      s.actions.push_back(action(cost, arrivals, services));
    }
    states.push_back(std::move(s));
  }
  return NetworkInstance<double>(r, std::move(states));
}

/// Exact maximum of a one-queue dual by evaluating g at 0 and every
/// pairwise crossing of affine pieces within a state.
inline std::pair<double, double> brute_force_dual_1d(const NetworkInstance<double>& inst, const Eigen::VectorXd& dist,
                                                     double V) {
  std::vector<double> candidates{0.0};
  for (int i = 0; i < inst.state_count(); ++i) {
    const int off = inst.action_offset(i);
    for (int a = 0; a < inst.action_count(i); ++a) {
      for (int b = a + 1; b < inst.action_count(i); ++b) {
        const double da = inst.net_rates()(0, off + a);
        const double db = inst.net_rates()(0, off + b);
        if (da == db) continue;
        const double x = V * (inst.costs()(off + b) - inst.costs()(off + a)) / (da - db);
        if (x > 0) candidates.push_back(x);
      }
    }
  }
  double best_x = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (double x : candidates) {
    const double g = olac::dual_value(inst, dist, vec({x}), V);
    if (g > best + 1e-12) {
      best = g;
      best_x = x;
    }
  }
  return {best_x, best};
}

}  // namespace testing

#endif  // OLAC_TESTS_SUPPORT_HPP
