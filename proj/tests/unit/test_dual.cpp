#include <doctest.h>

#include <cmath>
#include <random>

#include "olac/dual.hpp"
#include "olac/model.hpp"
#include "support.hpp"

using namespace olac;
using testing::action;
using testing::net_action;
using testing::single_state;
using testing::vec;

namespace {

// Reference values from an independent LP solve of the two-queue instance.
constexpr double kUniformFStar = 0.764786300873644;
constexpr double kUnbalancedFStar = 0.842690241441424;
constexpr double kUniformEta0 = 0.527298440269959;
constexpr double kUnbalancedEta0 = 0.53141674099668;

// Both queues tie P = 0.75 against P = 1.5 on the best channel.
const double kGammaZeroStar = 0.75 / std::log(10.0 / 5.5);

const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);

}  // namespace

TEST_SUITE("dual") {

TEST_CASE("per-state dual examples") {
  const auto a = single_state(1, {net_action(0, -1)});
  const auto r1 = per_state_dual(a, 0, vec({5}), 1);
  CHECK(r1.value == -5);
  CHECK(r1.action == 0);

  const auto b = single_state(1, {net_action(1, 0), net_action(0, 1)});
  const auto r2 = per_state_dual(b, 0, vec({2}), 1);
  CHECK(r2.value == 1);
  CHECK(r2.action == 0);

  const auto inst = build_two_queue_example(kUniformChannelDist);
  const auto r3 = per_state_dual(inst, two_queue_state_index(0, 0, 3, 3), vec({0, 0}), 100);
  CHECK(r3.value == 0);
  CHECK(r3.action == two_queue_action_index(0, 0));
  CHECK_THROWS_AS(per_state_dual(inst, 64, vec({0, 0}), 100), std::out_of_range);
  CHECK_THROWS_AS(per_state_dual(inst, 0, vec({0}), 100), std::invalid_argument);
}

TEST_CASE("dual value examples") {
  const auto b = single_state(1, {net_action(1, 0), net_action(0, 1)});
  CHECK(dual_value(b, one, vec({0.3}), 2) == per_state_dual(b, 0, vec({0.3}), 2).value);

  const auto inst = build_two_queue_example(kUniformChannelDist);
  for (double V : {1.0, 10.0, 100.0, 1000.0}) CHECK(dual_value(inst, inst.probabilities(), vec({0, 0}), V) == 0);

  Eigen::VectorXd point = Eigen::VectorXd::Zero(64);
  point(17) = 1;
  const Eigen::VectorXd g = vec({40, 70});
  CHECK(dual_value(inst, point, g, 50) == doctest::Approx(per_state_dual(inst, 17, g, 50).value));
  CHECK_THROWS_AS(dual_value(inst, one, g, 50), std::invalid_argument);
}

TEST_CASE("supergradient examples") {
  const auto s = single_state(2, {action(0, vec({0, 2}), vec({1, 0}))});
  const Eigen::VectorXd sg = supergradient(s, one, vec({3, 4}), 1);
  CHECK(sg(0) == -1);
  CHECK(sg(1) == 2);

  const auto inst = build_two_queue_example(kUniformChannelDist);
  const Eigen::VectorXd at_zero = supergradient(inst, inst.probabilities(), vec({0, 0}), 100);
  CHECK(at_zero(0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(at_zero(1) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("maximize_dual on a single crossing") {
  const auto inst = single_state(1, {net_action(0, 1), net_action(1, -1)});
  const auto sol = maximize_dual(inst, one, 1);
  CHECK(sol.converged);
  CHECK(sol.gamma(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol.value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("free non-positive action in every state gives gamma* = 0") {
  std::mt19937_64 rng(3);
  auto inst = testing::random_instance(rng, 5, 2, 4);
  const auto sol = maximize_dual(inst, inst.probabilities(), 10);
  // random_instance's action 0 is free but adds arrivals; build one that is not
  std::vector<StateSpec<double>> states;
  for (const auto& s : inst.states()) {
    auto copy = s;
    copy.actions.push_back(action(0, vec({0, 0}), vec({1, 1})));
    states.push_back(copy);
  }
  NetworkInstance<double> free_inst(2, states);
  const auto free_sol = maximize_dual(free_inst, free_inst.probabilities(), 10);
  CHECK(free_sol.gamma.norm() == 0);
  CHECK(free_sol.value == 0);
  CHECK(sol.value >= 0);
}

TEST_CASE("two-queue optimum matches reference values") {
  struct Case {
    std::array<double, 4> dist;
    double f_star;
    double eta0;
  };
  for (const auto& c : {Case{kUniformChannelDist, kUniformFStar, kUniformEta0},
                        Case{kUnbalancedChannelDist, kUnbalancedFStar, kUnbalancedEta0}}) {
    const auto inst = build_two_queue_example(c.dist);
    const auto primal = primal_oracle(inst, inst.probabilities());
    REQUIRE(primal.status == PrimalStatus::kOptimal);
    CHECK(primal.f_av == doctest::Approx(c.f_star).epsilon(1e-12));
    CHECK(max_slack(inst, inst.probabilities()) == doctest::Approx(c.eta0).epsilon(1e-12));
    for (double V : {1.0, 100.0, 800.0}) {
      const auto sol = maximize_dual(inst, inst.probabilities(), V);
      CHECK(sol.converged);
      CHECK(std::abs(sol.value - V * c.f_star) <= 1e-3);
      CHECK(std::abs(sol.value / V - c.f_star) <= 1e-9);
      CHECK(sol.gamma(0) == doctest::Approx(V * kGammaZeroStar).epsilon(1e-9));
      CHECK(sol.gamma(1) == doctest::Approx(V * kGammaZeroStar).epsilon(1e-9));
    }
  }
}

TEST_CASE("policy returned by the primal oracle is a distribution per state") {
  const auto inst = build_two_queue_example(kUniformChannelDist);
  const auto primal = primal_oracle(inst, inst.probabilities());
  REQUIRE(primal.policy.weights.size() == 64);
  Eigen::VectorXd rates = Eigen::VectorXd::Zero(2);
  double cost = 0;
  for (int i = 0; i < 64; ++i) {
    const auto& w = primal.policy.weights[static_cast<std::size_t>(i)];
    CHECK((w.array() >= 0).all());
    CHECK(std::abs(w.sum() - 1) <= 1e-9);
    const int off = inst.action_offset(i);
    cost += inst.probabilities()(i) * w.dot(inst.costs().segment(off, 10));
    rates += inst.probabilities()(i) * inst.net_rates().middleCols(off, 10) * w;
  }
  CHECK(cost == doctest::Approx(primal.f_av).epsilon(1e-12));
  CHECK((rates.array() <= 1e-9).all());
}

TEST_CASE("primal oracle examples") {
  const auto fixed = single_state(1, {net_action(0.7, -1)});
  const auto p1 = primal_oracle(fixed, one);
  REQUIRE(p1.status == PrimalStatus::kOptimal);
  CHECK(p1.f_av == doctest::Approx(0.7));
  CHECK(p1.policy.weights[0](0) == doctest::Approx(1));

  const auto mix = single_state(1, {net_action(0, 1), net_action(1, -1)});
  const auto p2 = primal_oracle(mix, one);
  REQUIRE(p2.status == PrimalStatus::kOptimal);
  CHECK(p2.f_av == doctest::Approx(0.5));
  CHECK(p2.policy.weights[0](0) == doctest::Approx(0.5));

  const auto hopeless = single_state(1, {net_action(0, 1), net_action(1, 0.5)});
  CHECK(primal_oracle(hopeless, one).status == PrimalStatus::kInfeasible);
}

TEST_CASE("max slack examples") {
  CHECK(max_slack(single_state(2, {action(0, vec({0, 0}), vec({2, 3}))}), one) == doctest::Approx(2));
  CHECK(max_slack(single_state(1, {net_action(0, 1), net_action(1, 0.5)}), one) <= 0);
  const auto inst = build_two_queue_example(kUniformChannelDist);
  CHECK(max_slack(inst, inst.probabilities()) > 0);
}

TEST_CASE("unbounded dual stops at the cap and says so") {
  const auto hopeless = single_state(1, {net_action(0, 1), net_action(1, 0.5)});
  const auto sol = maximize_dual(hopeless, one, 1);
  CHECK(sol.hit_cap);
  CHECK_FALSE(sol.converged);
}

TEST_CASE("one-dimensional duals match kink enumeration") {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 100; ++n) {
    const auto inst = testing::random_instance(rng, 1 + n % 6, 1, 5);
    if (max_slack(inst, inst.probabilities()) <= 1e-6) continue;
    const double V = 1 + 99.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto [x, g] = testing::brute_force_dual_1d(inst, inst.probabilities(), V);
    const auto sol = maximize_dual(inst, inst.probabilities(), V);
    CHECK(sol.converged);
    CHECK(sol.value == doctest::Approx(g).epsilon(1e-9));
    CHECK(sol.value <= g + 1e-9 * std::max(1.0, std::abs(g)));
  }
}

TEST_CASE("concavity and supergradient inequality") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  const auto inst = build_two_queue_example(kUniformChannelDist);
  const Eigen::VectorXd& pi = inst.probabilities();
  for (int n = 0; n < 2000; ++n) {
    const double V = 1 + 500 * u(rng);
    const Eigen::VectorXd x = vec({3 * V * u(rng), 3 * V * u(rng)});
    const Eigen::VectorXd y = vec({3 * V * u(rng), 3 * V * u(rng)});
    const double lambda = u(rng);
    const auto ex = evaluate_dual(inst, pi, x, V);
    const double gy = dual_value(inst, pi, y, V);
    const double mid = dual_value(inst, pi, Eigen::VectorXd(lambda * x + (1 - lambda) * y), V);
    const double scale = std::max(1.0, std::abs(ex.value) + std::abs(gy));
    CHECK(mid >= lambda * ex.value + (1 - lambda) * gy - 1e-9 * scale);
    CHECK(gy <= ex.value + ex.supergradient.dot(y - x) + 1e-9 * scale);
  }
}

TEST_CASE("V-scaling of the dual and its maximizer") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  for (int n = 0; n < 20; ++n) {
    const auto inst = testing::random_instance(rng, 2 + n % 7, 1 + n % 2, 5);
    const Eigen::VectorXd& pi = inst.probabilities();
    for (int k = 0; k < 20; ++k) {
      const double V = 1 + 1000 * u(rng);
      Eigen::VectorXd g(inst.queue_count());
      for (Eigen::Index j = 0; j < g.size(); ++j) g(j) = 5 * V * u(rng);
      const double lhs = dual_value(inst, pi, g, V);
      const double rhs = V * dual_value(inst, pi, Eigen::VectorXd(g / V), 1.0);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9).scale(1));
    }
    if (max_slack(inst, pi) <= 1e-6) continue;
    const auto base = maximize_dual(inst, pi, 1.0);
    const auto scaled = maximize_dual(inst, pi, 50.0);
    CHECK(scaled.value == doctest::Approx(50 * base.value).epsilon(1e-9));
  }
  const auto inst = build_two_queue_example(kUniformChannelDist);
  const auto base = maximize_dual(inst, inst.probabilities(), 1.0);
  for (double V : {7.0, 300.0}) {
    const auto scaled = maximize_dual(inst, inst.probabilities(), V);
    CHECK((scaled.gamma / V - base.gamma).norm() <= 1e-8);
  }
}

TEST_CASE("weak duality and the multiplier bound") {
  std::mt19937_64 rng(21);
  int checked = 0;
  for (int n = 0; n < 40; ++n) {
    const auto inst = testing::random_instance(rng, 1 + n % 8, 1 + n % 2, 5);
    const Eigen::VectorXd& pi = inst.probabilities();
    const double eta0 = max_slack(inst, pi);
    if (eta0 <= 1e-6) continue;
    const double V = 20;
    const auto sol = maximize_dual(inst, pi, V);
    const auto primal = primal_oracle(inst, pi);
    REQUIRE(primal.status == PrimalStatus::kOptimal);
    CHECK(sol.value <= V * primal.f_av + 1e-9 * V);
    CHECK(std::abs(sol.value - V * primal.f_av) <= 1e-6 * V);
    CHECK(sol.gamma.sum() <= multiplier_bound(inst, V, eta0) + 1e-9);
    CHECK((sol.gamma.array() >= 0).all());
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("warm start never lowers the value") {
  const auto inst = build_two_queue_example(kUnbalancedChannelDist);
  DualSolverConfig<double> cfg;
  cfg.warm_start = vec({50, 20});
  const double start = dual_value(inst, inst.probabilities(), *cfg.warm_start, 100);
  const auto sol = maximize_dual(inst, inst.probabilities(), 100, cfg);
  CHECK(sol.value >= start);
  cfg.warm_start = vec({-40, 0});
  const auto projected = maximize_dual(inst, inst.probabilities(), 100, cfg);
  CHECK((projected.gamma.array() >= 0).all());
  CHECK(projected.value >= dual_value(inst, inst.probabilities(), vec({0, 0}), 100));
  cfg.warm_start = vec({1, 2, 3});
  CHECK_THROWS_AS(maximize_dual(inst, inst.probabilities(), 100, cfg), std::invalid_argument);
}

TEST_CASE("solver configuration is validated") {
  const auto inst = single_state(1, {net_action(0, 1), net_action(1, -1)});
  DualSolverConfig<double> cfg;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(maximize_dual(inst, one, 1, cfg), std::invalid_argument);
  cfg.max_iterations = 10;
  cfg.tolerance = 0;
  CHECK_THROWS_AS(maximize_dual(inst, one, 1, cfg), std::invalid_argument);
}

TEST_CASE("ascent alone without the cutting-plane stage") {
  const auto inst = build_two_queue_example(kUniformChannelDist);
  DualSolverConfig<double> cfg;
  cfg.polish = false;
  cfg.max_iterations = 50000;
  const auto sol = maximize_dual(inst, inst.probabilities(), 100, cfg);
  CHECK(sol.value <= 100 * kUniformFStar + 1e-9);
  CHECK(sol.value >= 100 * kUniformFStar * (1 - 1e-6));
  CHECK(sol.polish_iterations == 0);
}

TEST_CASE("polyhedral constant probe") {
  // g(gamma) = min(gamma, 10 - gamma): unit slope on both sides of 5
  const auto tent = single_state(1, {net_action(0, 1), net_action(10, -1)});
  CHECK(estimate_polyhedral_rho(tent, one, 1.0, vec({5}), 500, 3.0) == doctest::Approx(1).epsilon(1e-9));

  const auto flat = single_state(1, {net_action(0, 0)});
  CHECK(estimate_polyhedral_rho(flat, one, 1.0, vec({0}), 200, 3.0) == 0);

  const auto inst = build_two_queue_example(kUniformChannelDist);
  const auto sol = maximize_dual(inst, inst.probabilities(), 100);
  const double rho = estimate_polyhedral_rho(inst, inst.probabilities(), 100.0, sol.gamma, 2000,
                                             0.5 * sol.gamma.norm());
  CHECK(rho > 0);
  // rho is a property of g_0, so it does not change with V
  const auto sol800 = maximize_dual(inst, inst.probabilities(), 800);
  const double rho800 = estimate_polyhedral_rho(inst, inst.probabilities(), 800.0, sol800.gamma, 2000,
                                                0.5 * sol800.gamma.norm());
  CHECK(rho800 == doctest::Approx(rho).epsilon(1e-6));
}

TEST_CASE("analysis constants") {
  const auto inst = build_two_queue_example(kUniformChannelDist);
  const auto c = analysis_constants(inst, 0.04);
  CHECK(c.B == 9);
  CHECK(c.eta == doctest::Approx(0.02));
  CHECK(c.D_p == doctest::Approx((9 - 0.0004) / (2 * 0.02)));
  CHECK(c.valid());
  CHECK_FALSE(analysis_constants(inst, 0.0).valid());
  CHECK(multiplier_bound(inst, 100.0, 0.5) == doctest::Approx(600));
}

TEST_CASE("single precision solve") {
  const auto inst = build_two_queue_example<float>({0.25f, 0.25f, 0.25f, 0.25f});
  const Eigen::VectorXf pi = inst.probabilities();
  const auto sol = maximize_dual(inst, pi, 100.0f);
  CHECK(sol.value / 100.0f == doctest::Approx(kUniformFStar).epsilon(1e-4));
}

}  // TEST_SUITE
