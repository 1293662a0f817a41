#include <doctest.h>

#include "olac/learning.hpp"
#include "olac/rng.hpp"
#include "olac/sim.hpp"
#include "support.hpp"

using namespace olac;
using testing::net_action;
using testing::single_state;
using testing::vec;

TEST_SUITE("learning") {

TEST_CASE("empirical frequencies") {
  EmpiricalDistribution ed(2);
  CHECK_FALSE(ed.estimate().has_value());
  for (int s : {0, 0, 1, 1}) ed.observe(s);
  const auto est = ed.estimate();
  REQUIRE(est);
  CHECK((*est)(0) == 0.5);
  CHECK((*est)(1) == 0.5);
  CHECK(ed.observations() == 4);
  CHECK(ed.counts()[1] == 2);
  CHECK_THROWS_AS(ed.observe(2), std::out_of_range);
  CHECK_THROWS_AS(ed.observe(-1), std::out_of_range);
}

TEST_CASE("pseudo-count prior") {
  EmpiricalDistribution ed(2, vec({1, 1}));
  auto est = ed.estimate();
  REQUIRE(est);
  CHECK((*est)(0) == 0.5);
  ed.observe(0);
  est = ed.estimate();
  CHECK((*est)(0) == doctest::Approx(2.0 / 3));
  CHECK(est->sum() == doctest::Approx(1));
}

TEST_CASE("law of large numbers on the two-queue states") {
  const auto inst = build_two_queue_example(kUniformChannelDist);
  const StateSampler sampler(inst.probabilities());
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto engine = make_stream(seed, 0);
    EmpiricalDistribution ed(64);
    for (int t = 0; t < 100000; ++t) ed.observe(sampler(engine));
    CHECK(*ed.max_abs_error(inst.probabilities()) < 0.02);
  }
}

TEST_CASE("dual_learn leaves beta alone without data") {
  const auto inst = single_state(1, {net_action(0, 1), net_action(1, -1)});
  EmpiricalDistribution ed(1);
  DualLearnState state(1);
  CHECK_FALSE(dual_learn(inst, ed, 1.0, state, 0));
  CHECK(state.beta(0) == 0);
  CHECK_FALSE(state.last_solved_at);
}

TEST_CASE("dual_learn on the true distribution recovers gamma*") {
  const auto inst = single_state(1, {net_action(0, 1), net_action(1, -1)});
  EmpiricalDistribution ed(1);
  ed.observe(0);
  DualLearnState state(1);
  CHECK(dual_learn(inst, ed, 10.0, state, 0));
  CHECK(state.beta(0) == doctest::Approx(5).epsilon(1e-9));
  CHECK(state.last_converged);
}

TEST_CASE("relearn period throttles solves") {
  const auto inst = build_two_queue_example(kUniformChannelDist);
  const StateSampler sampler(inst.probabilities());
  auto engine = make_stream(4, 0);
  EmpiricalDistribution ed(64);
  DualLearnState state(2, {}, 5);
  int solves = 0;
  for (int t = 0; t < 50; ++t) {
    ed.observe(sampler(engine));
    solves += dual_learn(inst, ed, 100.0, state, t) ? 1 : 0;
  }
  CHECK(solves == 10);
  CHECK(state.solves == 10);
}

TEST_CASE("warm-started relearning tracks a cold solve") {
  const auto inst = build_two_queue_example(kUnbalancedChannelDist);
  const StateSampler sampler(inst.probabilities());
  auto engine = make_stream(8, 0);
  EmpiricalDistribution ed(64);
  DualLearnState state(2);
  for (int t = 0; t < 3000; ++t) {
    ed.observe(sampler(engine));
    dual_learn(inst, ed, 200.0, state, t);
    CHECK((state.beta.array() >= 0).all());
    if (t % 500 == 499) {
      const auto cold = maximize_dual(inst, *ed.estimate(), 200.0);
      const double warm = dual_value(inst, *ed.estimate(), state.beta, 200.0);
      CHECK(warm == doctest::Approx(cold.value).epsilon(1e-9));
    }
  }
}

TEST_CASE("beta reaches gamma* as data accumulates") {
  const auto inst = build_two_queue_example(kUniformChannelDist);
  const auto truth = maximize_dual(inst, inst.probabilities(), 500.0).gamma;
  const StateSampler sampler(inst.probabilities());
  int exact = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto engine = make_stream(seed, 0);
    EmpiricalDistribution ed(64);
    double early = 0;
    for (int t = 1; t <= 100000; ++t) {
      ed.observe(sampler(engine));
      if (t == 1000) early = (maximize_dual(inst, *ed.estimate(), 500.0).gamma - truth).norm();
    }
    const double late = (maximize_dual(inst, *ed.estimate(), 500.0).gamma - truth).norm();
    CHECK(late <= early + 1e-9 * truth.norm());
    exact += late <= 1e-9 * truth.norm() ? 1 : 0;
  }
  // gamma* sits on a kink of the piecewise-linear dual, so the estimate locks on exactly
  CHECK(exact >= 9);
}

TEST_CASE("eighty samples already give a usable estimate") {
  const auto inst = build_two_queue_example(kUniformChannelDist);
  const auto truth = maximize_dual(inst, inst.probabilities(), 500.0).gamma;
  const StateSampler sampler(inst.probabilities());
  auto engine = make_stream(1, 0);
  EmpiricalDistribution ed(64);
  for (int t = 0; t < 80; ++t) ed.observe(sampler(engine));
  const auto learned = maximize_dual(inst, *ed.estimate(), 500.0);
  MESSAGE("||beta(80) - gamma*|| / ||gamma*|| = " << (learned.gamma - truth).norm() / truth.norm());
  CHECK((learned.gamma - truth).norm() < 0.5 * truth.norm());
}

}  // TEST_SUITE
