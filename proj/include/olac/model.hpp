#ifndef OLAC_MODEL_HPP
#define OLAC_MODEL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "olac/types.hpp"

namespace olac {

/// One control option in a network state: cost f(s, x), arrivals A(s, x),
/// and services mu(s, x), each with one entry per queue.
template <typename Scalar>
struct ActionSpec {
  int id = 0;
  Scalar cost = 0;
  Vector<Scalar> arrivals;
  Vector<Scalar> services;
};

template <typename Scalar>
struct StateSpec {
  int id = 0;
  Scalar probability = 0;
  std::vector<ActionSpec<Scalar>> actions;
};

/// A finite stochastic network: M i.i.d. states, each with a finite action
/// list. Immutable once built. States and actions are renumbered to their
/// declaration order, which is also the tie-break order everywhere else.
///
/// Besides the per-state lists, the tables are stacked column-wise (one
/// column per (state, action) pair) so the dual function and the max-weight
/// rules evaluate as a single matrix-vector product.
template <typename Scalar>
class NetworkInstance {
 public:
  using VectorType = Vector<Scalar>;
  using MatrixType = Matrix<Scalar>;

  NetworkInstance(int queue_count, std::vector<StateSpec<Scalar>> states)
      : queue_count_(queue_count), states_(std::move(states)) {
    if (queue_count_ < 1) throw std::invalid_argument("queue count must be >= 1");
    int total = 0;
    offsets_.reserve(states_.size() + 1);
    for (std::size_t i = 0; i < states_.size(); ++i) {
      states_[i].id = static_cast<int>(i);
      offsets_.push_back(total);
      for (std::size_t k = 0; k < states_[i].actions.size(); ++k) {
        auto& action = states_[i].actions[k];
        action.id = static_cast<int>(k);
        if (action.arrivals.size() != queue_count_ || action.services.size() != queue_count_) {
          std::ostringstream msg;
          msg << "state " << i << " action " << k << ": arrivals/services must have " << queue_count_
              << " entries";
          throw std::invalid_argument(msg.str());
        }
      }
      total += static_cast<int>(states_[i].actions.size());
    }
    offsets_.push_back(total);

    costs_.resize(total);
    arrivals_.resize(queue_count_, total);
    services_.resize(queue_count_, total);
    probabilities_.resize(static_cast<Eigen::Index>(states_.size()));
    Scalar delta = 0;
    Scalar f_max = 0;
    bool any_action = false;
    for (std::size_t i = 0; i < states_.size(); ++i) {
      probabilities_(static_cast<Eigen::Index>(i)) = states_[i].probability;
      for (const auto& action : states_[i].actions) {
        const int col = offsets_[i] + action.id;
        costs_(col) = action.cost;
        arrivals_.col(col) = action.arrivals;
        services_.col(col) = action.services;
        delta = std::max({delta, std::abs(action.cost), action.arrivals.cwiseAbs().maxCoeff(),
                          action.services.cwiseAbs().maxCoeff()});
        f_max = any_action ? std::max(f_max, action.cost) : action.cost;
        any_action = true;
      }
    }
    net_rates_ = arrivals_ - services_;
    delta_max_ = delta;
    f_max_ = f_max;
    drift_bound_ = static_cast<Scalar>(queue_count_) / Scalar(2) * delta_max_ * delta_max_;
  }

  /// r, the number of queues.
  int queue_count() const { return queue_count_; }
  /// M, the number of network states.
  int state_count() const { return static_cast<int>(states_.size()); }
  int total_actions() const { return offsets_.back(); }

  const std::vector<StateSpec<Scalar>>& states() const { return states_; }
  const StateSpec<Scalar>& state(int i) const {
    check_state(i);
    return states_[static_cast<std::size_t>(i)];
  }
  int action_count(int i) const {
    check_state(i);
    return offsets_[i + 1] - offsets_[i];
  }
  /// Column of (state i, action 0) in the stacked tables.
  int action_offset(int i) const {
    check_state(i);
    return offsets_[i];
  }

  const VectorType& probabilities() const { return probabilities_; }
  const VectorType& costs() const { return costs_; }
  const MatrixType& arrivals() const { return arrivals_; }
  const MatrixType& services() const { return services_; }
  /// A - mu per stacked column.
  const MatrixType& net_rates() const { return net_rates_; }

  Scalar delta_max() const { return delta_max_; }
  Scalar f_max() const { return f_max_; }
  /// B = (r/2) delta_max^2.
  Scalar drift_bound() const { return drift_bound_; }

  void check_state(int i) const {
    if (i < 0 || i >= state_count()) {
      throw std::out_of_range("unknown state id " + std::to_string(i));
    }
  }

 private:
  int queue_count_;
  std::vector<StateSpec<Scalar>> states_;
  std::vector<int> offsets_;
  VectorType probabilities_;
  VectorType costs_;
  MatrixType arrivals_;
  MatrixType services_;
  MatrixType net_rates_;
  Scalar delta_max_ = 0;
  Scalar f_max_ = 0;
  Scalar drift_bound_ = 0;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v;
    }
    return out;
  }
};

/// Lists every violated invariant; an empty report means the instance is valid.
template <typename Scalar>
ValidationReport validate(const NetworkInstance<Scalar>& instance,
                          Scalar probability_tolerance = Scalar(1e-9)) {
  ValidationReport report;
  auto describe = [](auto&&... parts) {
    std::ostringstream msg;
    msg.precision(12);
    (msg << ... << parts);
    return msg.str();
  };
  if (instance.state_count() == 0) report.violations.push_back("no states");
  Scalar sum = 0;
  for (const auto& state : instance.states()) {
    sum += state.probability;
    if (!(state.probability >= 0 && state.probability <= 1)) {
      report.violations.push_back(
          describe("state ", state.id, ": probability ", state.probability, " outside [0,1]"));
    }
    if (state.actions.empty()) {
      report.violations.push_back(describe("state ", state.id, ": empty action set"));
    }
    for (const auto& action : state.actions) {
      const bool finite = std::isfinite(action.cost) && action.arrivals.allFinite() &&
                          action.services.allFinite();
      if (!finite) {
        report.violations.push_back(
            describe("state ", state.id, " action ", action.id, ": non-finite entry"));
        continue;
      }
      if (action.cost < 0) {
        report.violations.push_back(
            describe("state ", state.id, " action ", action.id, ": negative cost ", action.cost));
      }
      if ((action.arrivals.array() < 0).any()) {
        report.violations.push_back(
            describe("state ", state.id, " action ", action.id, ": negative arrival entry"));
      }
      if ((action.services.array() < 0).any()) {
        report.violations.push_back(
            describe("state ", state.id, " action ", action.id, ": negative service entry"));
      }
    }
  }
  if (instance.state_count() > 0 && std::abs(sum - Scalar(1)) > probability_tolerance) {
    report.violations.push_back(describe("probability sum ", sum));
  }
  return report;
}

// The two-queue downlink: each queue receives 2 packets with probability
// p_j (p = 0.3, 0.4) and 0 otherwise, each channel C_j takes a value in
// {0, 2, 4, 6}, and the server powers one queue per slot with
// P in {0, 0.75, 1.5, 2.25, 3} at rate ln(1 + C_j P).

inline constexpr std::array<double, 4> kTwoQueueChannels{0.0, 2.0, 4.0, 6.0};
inline constexpr std::array<double, 5> kTwoQueuePowers{0.0, 0.75, 1.5, 2.25, 3.0};
inline constexpr std::array<double, 2> kTwoQueueArrivalProbability{0.3, 0.4};
inline constexpr double kTwoQueueArrivalSize = 2.0;
inline constexpr std::array<double, 4> kUniformChannelDist{0.25, 0.25, 0.25, 0.25};
inline constexpr std::array<double, 4> kUnbalancedChannelDist{0.1, 0.4, 0.4, 0.1};

/// State index of (a1, a2, C1, C2) given as value indices: a in {0,1}
/// meaning {0, 2} packets, c in {0..3} indexing kTwoQueueChannels.
constexpr int two_queue_state_index(int a1, int a2, int c1, int c2) {
  return ((a1 * 2 + a2) * 4 + c1) * 4 + c2;
}

/// Action index of "serve queue `queue` (0 or 1) at kTwoQueuePowers[power]".
constexpr int two_queue_action_index(int queue, int power) { return queue * 5 + power; }

template <typename Scalar>
NetworkInstance<Scalar> build_two_queue_example(const std::array<Scalar, 4>& channel_dist) {
  Scalar sum = 0;
  for (Scalar p : channel_dist) {
    if (!(p >= 0)) throw std::invalid_argument("channel distribution has a negative entry");
    sum += p;
  }
  if (std::abs(sum - Scalar(1)) > Scalar(1e-9)) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "channel distribution sums to " << sum << ", expected 1";
    throw std::invalid_argument(msg.str());
  }

  std::vector<StateSpec<Scalar>> states;
  states.reserve(64);
  for (int a1 = 0; a1 < 2; ++a1) {
    for (int a2 = 0; a2 < 2; ++a2) {
      for (int c1 = 0; c1 < 4; ++c1) {
        for (int c2 = 0; c2 < 4; ++c2) {
          const Scalar p1 = Scalar(kTwoQueueArrivalProbability[0]);
          const Scalar p2 = Scalar(kTwoQueueArrivalProbability[1]);
          StateSpec<Scalar> state;
          state.probability = (a1 ? p1 : 1 - p1) * (a2 ? p2 : 1 - p2) * channel_dist[c1] *
                              channel_dist[c2];
          Vector<Scalar> arrivals(2);
          arrivals << (a1 ? Scalar(kTwoQueueArrivalSize) : Scalar(0)),
              (a2 ? Scalar(kTwoQueueArrivalSize) : Scalar(0));
          const std::array<Scalar, 2> channel{Scalar(kTwoQueueChannels[c1]),
                                              Scalar(kTwoQueueChannels[c2])};
          for (int queue = 0; queue < 2; ++queue) {
            for (double power : kTwoQueuePowers) {
              ActionSpec<Scalar> action;
              action.cost = Scalar(power);
              action.arrivals = arrivals;
              action.services = Vector<Scalar>::Zero(2);
              action.services(queue) = std::log1p(channel[queue] * Scalar(power));
              state.actions.push_back(std::move(action));
            }
          }
          states.push_back(std::move(state));
        }
      }
    }
  }
  return NetworkInstance<Scalar>(2, std::move(states));
}

}  // namespace olac

#endif  // OLAC_MODEL_HPP
