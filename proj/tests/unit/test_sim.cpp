#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "olac/sim.hpp"
#include "support.hpp"

using namespace olac;
using testing::vec;

namespace {

const NetworkInstance<double>& uniform_instance() {
  static const auto inst = build_two_queue_example(kUniformChannelDist);
  return inst;
}

Eigen::VectorXd gamma_star(double V) {
  return maximize_dual(uniform_instance(), uniform_instance().probabilities(), V).gamma;
}

SimConfig config(ControllerKind kind, double V, std::int64_t horizon, std::uint64_t seed = 1) {
  SimConfig cfg;
  cfg.controller.kind = kind;
  cfg.controller.V = V;
  cfg.horizon = horizon;
  cfg.seed = seed;
  return cfg;
}

bool same(const RunResult& a, const RunResult& b) {
  if (a.avg_cost != b.avg_cost || a.avg_backlog != b.avg_backlog || a.zeta != b.zeta) return false;
  if (a.T_zeta != b.T_zeta || a.T_zeta_sustained != b.T_zeta_sustained) return false;
  if (a.delay.mean_delay != b.delay.mean_delay || a.delay.delivered_rate != b.delay.delivered_rate) return false;
  if (a.dropped != b.dropped || a.final_backlog != b.final_backlog || a.distance_series != b.distance_series) return false;
  if (a.trace.size() != b.trace.size()) return false;
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    if (a.trace[i].q != b.trace[i].q || a.trace[i].cost != b.trace[i].cost) return false;
    if (a.trace[i].gamma_distance != b.trace[i].gamma_distance) return false;
  }
  return a.metadata == b.metadata;
}

}  // namespace

TEST_SUITE("sim") {

TEST_CASE("convergence time examples") {
  const Eigen::VectorXd g = vec({3, 4});
  CHECK(convergence_time({g}, g, 1.0) == 0);
  const std::vector<Eigen::VectorXd> trace{vec({8}), vec({6}), vec({4}), vec({5})};
  CHECK(convergence_time(trace, vec({3}), 2.0) == 2);
  CHECK_FALSE(convergence_time(trace, vec({3}), 0.5));
  CHECK_THROWS_AS(convergence_time(trace, vec({3}), 0.0), std::invalid_argument);
}

TEST_CASE("sustained convergence needs a full window") {
  const std::vector<double> d{5, 1, 1, 3, 1, 1, 1, 1};
  CHECK(sustained_convergence_time(d, 2, 3) == 4);
  CHECK(sustained_convergence_time(d, 2, 1) == 1);
  CHECK_FALSE(sustained_convergence_time(d, 2, 5));
}

TEST_CASE("one-slot run") {
  const auto g = gamma_star(50);
  for (auto kind : {ControllerKind::kBackpressure, ControllerKind::kOlac, ControllerKind::kOlac2}) {
    auto cfg = config(kind, 50, 1);
    cfg.trace = true;
    const auto r = run(uniform_instance(), cfg, g);
    CHECK(r.avg_backlog == 0);
    REQUIRE(r.trace.size() == 1);
    CHECK(r.avg_cost == r.trace[0].cost);
    CHECK(r.zeta > 0);
  }
}

TEST_CASE("starting at gamma* converges immediately") {
  const auto g = gamma_star(200);
  for (auto kind : {ControllerKind::kBackpressure, ControllerKind::kOlac2}) {
    auto cfg = config(kind, 200, 10);
    cfg.initial_backlog = g;
    cfg.zeta = 1e-9;
    CHECK(run(uniform_instance(), cfg, g).T_zeta == 0);
  }
}

TEST_CASE("configuration errors") {
  const auto g = gamma_star(50);
  auto cfg = config(ControllerKind::kOlac, 50, 10);
  cfg.controller.theta = vec({1, 2, 3});
  CHECK_THROWS_AS(run(uniform_instance(), cfg, g), std::invalid_argument);
  cfg = config(ControllerKind::kBackpressure, 50, 0);
  CHECK_THROWS_AS(run(uniform_instance(), cfg, g), std::invalid_argument);
  cfg = config(ControllerKind::kBackpressure, 50, 10);
  CHECK_THROWS_AS(run(uniform_instance(), cfg, vec({1})), std::invalid_argument);
  cfg.zeta = -1;
  CHECK_THROWS_AS(run(uniform_instance(), cfg, g), std::invalid_argument);
}

TEST_CASE("runs are bit-identical when repeated") {
  const auto g = gamma_star(100);
  for (auto kind : {ControllerKind::kBackpressure, ControllerKind::kOlac, ControllerKind::kOlac2}) {
    auto cfg = config(kind, 100, 3000, 42);
    cfg.trace = true;
    cfg.keep_distance_series = true;
    CHECK(same(run(uniform_instance(), cfg, g), run(uniform_instance(), cfg, g)));
    auto other = cfg;
    other.seed = 43;
    CHECK_FALSE(same(run(uniform_instance(), cfg, g), run(uniform_instance(), other, g)));
  }
}

TEST_CASE("result invariants") {
  const auto g = gamma_star(100);
  for (auto kind : {ControllerKind::kBackpressure, ControllerKind::kOlac, ControllerKind::kOlac2}) {
    const auto r = run(uniform_instance(), config(kind, 100, 5000, 7), g);
    CHECK(r.avg_cost >= 0);
    CHECK(r.avg_cost <= uniform_instance().f_max());
    CHECK(r.avg_backlog >= 0);
    if (r.T_zeta) CHECK(*r.T_zeta <= 5000);
    CHECK((r.dropped.array() >= 0).all());
    const auto has = [&](const char* key) {
      return std::any_of(r.metadata.begin(), r.metadata.end(), [&](const auto& kv) { return kv.first == key; });
    };
    CHECK(has("rng"));
    CHECK(has("horizon"));
    CHECK(has("zeta"));
  }
}

TEST_CASE("Backpressure cost gap shrinks as V doubles") {
  const double f_star = primal_oracle(uniform_instance(), uniform_instance().probabilities()).f_av;
  double previous = INFINITY;
  for (double V : {50.0, 100.0, 200.0, 400.0}) {
    const auto g = gamma_star(V);
    std::vector<double> gaps;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto cfg = config(ControllerKind::kBackpressure, V, 200000, seed);
      cfg.zeta = 1.0;
      gaps.push_back(run(uniform_instance(), cfg, g).avg_cost - f_star);
    }
    std::sort(gaps.begin(), gaps.end());
    const double median = 0.5 * (gaps[4] + gaps[5]);
    MESSAGE("V=" << V << " median cost gap " << median);
    CHECK(median < previous);
    previous = median;
  }
}

TEST_CASE("OLAC multiplier estimate stays near gamma* in the second half") {
  const double V = 100;
  const auto g = gamma_star(V);
  auto cfg = config(ControllerKind::kOlac, V, 100000, 1);
  cfg.keep_distance_series = true;
  const auto r = run(uniform_instance(), cfg, g);
  const double radius = r.zeta + std::pow(std::log(V), 2);
  const auto& d = r.distance_series;
  const auto half = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  const double inside = static_cast<double>(std::count_if(half, d.end(), [&](double x) { return x <= radius; })) /
                        static_cast<double>(d.end() - half);
  MESSAGE("fraction within D_p + (ln V)^2: " << inside);
  CHECK(inside > 0.95);
}

TEST_CASE("checkpoints solve the empirical dual") {
  const auto g = gamma_star(500);
  auto cfg = config(ControllerKind::kOlac, 500, 2001, 2);
  cfg.checkpoints = {2000, 1000, 5000};
  cfg.zeta = 1.0;
  const auto r = run(uniform_instance(), cfg, g);
  REQUIRE(r.checkpoints.size() == 2);
  CHECK(r.checkpoints[0].slot == 1000);
  CHECK(r.checkpoints[1].slot == 2000);
  for (const auto& c : r.checkpoints) {
    CHECK(c.solver_converged);
    CHECK(c.max_distribution_error > 0);
    CHECK(c.beta_error == doctest::Approx(c.controller_beta_error).epsilon(1e-6));
  }
}

TEST_CASE("state sampler frequencies") {
  const StateSampler sampler(vec({0.2, 0.0, 0.8}));
  auto engine = make_stream(1, 0);
  int counts[3] = {0, 0, 0};
  for (int n = 0; n < 100000; ++n) ++counts[sampler(engine)];
  CHECK(counts[1] == 0);
  CHECK(std::abs(counts[0] / 1e5 - 0.2) < 0.01);
  CHECK_THROWS_AS(StateSampler(vec({0, 0})), std::invalid_argument);
}

TEST_CASE("oracle report for the two-queue instance") {
  const auto report = compute_oracle(uniform_instance(), 100);
  CHECK(report.dual_converged);
  CHECK(report.primal_feasible);
  CHECK(std::abs(report.g_star / 100 - report.f_av_star) <= 1e-9);
  CHECK(report.constants.valid());
  CHECK(report.constants.D_p > 0);
}

}  // TEST_SUITE
