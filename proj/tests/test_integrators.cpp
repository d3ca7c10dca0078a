#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ipal/errors.hpp"
#include "ipal/integrators.hpp"
#include "test_support.hpp"

using namespace ipal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// min 10x over x ≥ 0 with no equality constraints: the flow starts at
// dx = −10 from x = 1.
ConvexProgram scalar_linear() {
  return ConvexProgram(linear_objective(Vector{{10.0}}),
                       ConstraintMatrix(Eigen::MatrixXd(0, 1)), Vector(0), 1);
}

OdeSystem decay_system(double rate) {
  OdeSystem system;
  system.rhs = [rate](const Vector& w) { return Vector(-rate * w); };
  return system;
}

}  // namespace

TEST_CASE("explicit Euler examples") {
  const auto p = builtin_problem("quartic_p12");
  const TrajectoryState start{0.0, Vector::Ones(3), Vector{{0.0, 1.0}}};
  const auto next = step_explicit_euler(p.program, start, 0.01);
  CHECK_THAT(next.t, WithinAbs(0.01, 1e-15));
  CHECK((next.x - Vector{{0.94, 0.93, 0.90}}).norm() < 1e-14);
  CHECK((next.y - Vector{{0.01, 1.01}}).norm() < 1e-14);

  const TrajectoryState scalar{0.0, Vector{{1.0}}, Vector(0)};
  const auto clamped = step_explicit_euler(scalar_linear(), scalar, 1.0, 0.99);
  CHECK_THAT(clamped.t, WithinRel(0.099, 1e-14));
  CHECK_THAT(clamped.x[0], WithinRel(0.01, 1e-12));

  const auto qp = builtin_problem("simple_qp");
  const TrajectoryState eq{2.0, qp.optimum->x, qp.optimum->y};
  const auto still = step_explicit_euler(qp.program, eq, 0.5);
  CHECK(still.t == 2.5);
  CHECK((still.x - eq.x).norm() < 1e-15);
  CHECK((still.y - eq.y).norm() < 1e-15);
}

TEST_CASE("config validation") {
  IntegratorConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = c;
  bad.h_min = 1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = c;
  bad.fraction_to_boundary = 1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = c;
  bad.max_steps = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("embedded pair on exponential decay") {
  for (double tol : {1e-4, 1e-6, 1e-8}) {
    IntegratorConfig c;
    c.rel_tol = tol;
    c.abs_tol = tol * 1e-3;
    c.sample_times = {0.5, 1.0, 2.0};
    const auto sol = integrate_embedded_rk23(decay_system(1.0), c,
                                             Vector::Ones(1), 0.0, 3.0);
    REQUIRE(sol.status == IntegrationStatus::kReachedEnd);
    REQUIRE(sol.times == std::vector<double>{0.0, 0.5, 1.0, 2.0, 3.0});
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
      CHECK_THAT(sol.states[k][0], WithinAbs(std::exp(-sol.times[k]), 50 * tol));
    }
  }
}

TEST_CASE("global error shrinks with the tolerance") {
  auto error = [](double tol) {
    IntegratorConfig c;
    c.rel_tol = tol;
    c.abs_tol = tol;
    const auto sol = integrate_embedded_rk23(decay_system(2.0), c,
                                             Vector::Ones(1), 0.0, 1.0);
    return std::abs(sol.states.back()[0] - std::exp(-2.0));
  };
  CHECK(error(1e-9) < error(1e-6));
  CHECK(error(1e-6) < error(1e-3));
}

TEST_CASE("start equal to end gives one sample") {
  const auto sol = integrate_embedded_rk23(decay_system(1.0), {},
                                           Vector::Ones(2), 4.0, 4.0);
  CHECK(sol.times.size() == 1);
  CHECK(sol.status == IntegrationStatus::kReachedEnd);
  CHECK_THROWS_AS(integrate_embedded_rk23(decay_system(1.0), {},
                                          Vector::Ones(2), 4.0, 3.0),
                  DomainError);

  const auto p = builtin_problem("quartic_p12");
  const auto log =
      integrate_adaptive(p.program, {}, p.x0, p.y0, 0.0, &*p.optimum);
  REQUIRE(log.samples.size() == 1);
  CHECK(log.samples[0].x == p.x0);
}

TEST_CASE("inadmissible trial states are rejected") {
  // dw/dt = −50: the first trial step from w = 1 crosses zero.
  OdeSystem system;
  system.rhs = [](const Vector& w) { return Vector::Constant(w.size(), -50.0); };
  system.admissible = [](const Vector&, const Vector& trial) {
    return trial[0] > 0.0;
  };
  IntegratorConfig c;
  c.h_init = 1.0;
  const auto sol = integrate_embedded_rk23(system, c, Vector::Ones(1), 0.0, 1.0);
  CHECK(sol.stats.rejected_interiority > 0);
  CHECK(sol.status == IntegrationStatus::kStepUnderflow);
  for (const auto& w : sol.states) {
    CHECK(w[0] > 0.0);
  }
}

TEST_CASE("stride sampling and step budget") {
  IntegratorConfig c;
  c.sample_stride = 5;
  c.h_max = 0.01;
  const auto sol = integrate_embedded_rk23(decay_system(1.0), c,
                                           Vector::Ones(1), 0.0, 1.0);
  CHECK(sol.times.size() > 10);
  for (std::size_t k = 1; k < sol.times.size(); ++k) {
    CHECK(sol.times[k] > sol.times[k - 1]);
  }

  c.sample_stride = 0;
  c.max_steps = 3;
  const auto cut = integrate_embedded_rk23(decay_system(1.0), c,
                                           Vector::Ones(1), 0.0, 1.0);
  CHECK(cut.status == IntegrationStatus::kMaxSteps);
  CHECK(cut.stats.accepted == 3);
  CHECK(cut.times.back() < 1.0);
}

TEST_CASE("failing right-hand side ends the run") {
  OdeSystem system;
  int calls = 0;
  system.rhs = [&calls](const Vector& w) {
    if (++calls > 10) {
      throw SolverError("boom", 1.0, 0);
    }
    return Vector(-w);
  };
  const auto sol = integrate_embedded_rk23(system, {}, Vector::Ones(1), 0.0, 10.0);
  CHECK(sol.status == IntegrationStatus::kFailed);
  CHECK(sol.failure == "boom");
  CHECK(to_string(sol.status) == "failed");
}

TEST_CASE("quartic flow at T = 100") {
  const auto p = builtin_problem("quartic_p12");
  const auto log = integrate_adaptive(p.program, {}, p.x0, p.y0, 100.0);
  REQUIRE(log.status == IntegrationStatus::kReachedEnd);
  const auto& last = log.samples.back();
  CHECK(last.t == 100.0);
  const double err = (last.x - p.optimum->x).lpNorm<Eigen::Infinity>();
  CHECK(err <= 5.2e-4 * 30.0);
  CHECK(err >= 5.2e-4 / 30.0);
  CHECK(std::isnan(last.monitors.V1));
}

TEST_CASE("simple QP flow converges to its optimum") {
  const auto p = builtin_problem("simple_qp");
  const auto log = integrate_adaptive(p.program, {}, Vector{{0.9, 0.1}},
                                      Vector::Zero(1), 1e3);
  REQUIRE(log.status == IntegrationStatus::kReachedEnd);
  CHECK((log.samples.back().x - Vector{{0.5, 0.5}}).lpNorm<Eigen::Infinity>() <=
        1e-4);
}

TEST_CASE("trajectory invariants on the builtins") {
  for (const auto& name : builtin_names()) {
    const auto p = builtin_problem(name);
    IntegratorConfig c;
    c.sample_stride = 1;
    const auto log = integrate_adaptive(p.program, c, p.x0, p.y0, 200.0,
                                        &*p.optimum);
    INFO(name);
    REQUIRE(log.status == IntegrationStatus::kReachedEnd);
    const double V0 = log.samples.front().monitors.V1;
    for (std::size_t k = 0; k < log.samples.size(); ++k) {
      const auto& sample = log.samples[k];
      CHECK(is_interior(sample.x, p.program.s()));
      CHECK(sample.monitors.V1 <= V0 * (1.0 + 1e-6));
      if (k > 0) {
        const double prev = log.samples[k - 1].monitors.V1;
        CHECK(sample.monitors.V1 <= prev + 1e-6 * (1.0 + std::abs(prev)));
      }
    }
  }
}

TEST_CASE("halving the tolerance barely moves x(T)") {
  const auto p = builtin_problem("quartic_p12");
  for (double tol : {1e-6, 1e-8}) {
    IntegratorConfig c;
    c.rel_tol = tol;
    IntegratorConfig half = c;
    half.rel_tol = tol / 2.0;
    const Vector a = integrate_adaptive(p.program, c, p.x0, p.y0, 100.0)
                         .samples.back().x;
    const Vector b = integrate_adaptive(p.program, half, p.x0, p.y0, 100.0)
                         .samples.back().x;
    INFO("rel_tol " << tol);
    CHECK((a - b).norm() < 10.0 * tol * a.norm());
  }
}

TEST_CASE("flow from a random interior start stays interior") {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 10; ++k) {
    auto qp = testing::random_qp(rng, 4, 2, 4);
    const Vector x0 = testing::random_vector(rng, 4, 0.01, 2.0);
    const auto log = integrate_adaptive(qp.program, {}, x0, Vector::Zero(2), 50.0);
    for (const auto& s : log.samples) {
      CHECK((s.x.array() > 0.0).all());
    }
  }
}
