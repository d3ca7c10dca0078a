// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/core.h>

#include "ipal/affine_scaling.hpp"
#include "ipal/dynamics.hpp"
#include "ipal/integrators.hpp"
#include "ipal/monitors.hpp"
#include "ipal/problem.hpp"
#include "ipal/steppers.hpp"
#include "test_support.hpp"

using namespace ipal;

namespace {

// Table reference values.
const std::vector<double> kSpHorizons{1e1, 1e2, 1e3, 1e4};
const std::vector<double> kSpError{2.7e-2, 5.2e-4, 5.6e-6, 5.6e-8};
const std::vector<double> kSpResidual{1.6e-3, 3.5e-5, 4.4e-7, 5.6e-9};
const std::vector<double> kApHorizons{1e1, 1e2, 1e3};
const std::vector<double> kApError{9.7e-2, 1.3e-2, 1.3e-3};
const std::vector<double> kApKappa{1.2e3, 7.9e4, 7.2e6};

constexpr double kTableDecades = 1.5;
constexpr double kKappaDecades = 1.0;
constexpr double kTableSeconds = 60.0;
constexpr double kApFeasibility = 1e-8;

constexpr double kDualCombinationTarget = -1.0;
constexpr double kDualCombinationTol = 1e-2;
constexpr double kDualCombinationT = 1e3;
constexpr double kMembershipTol = 1e-4;

constexpr double kMonotoneSlack = 1e-6;
constexpr double kDerivativeBound = 1e-9;
constexpr double kFdRelative = 0.05;
constexpr double kFdAbsolute = 1e-8;
// simple_qp converges to an interior optimum, so V1 tends to zero. Past about
// t = 55 the state sits inside the integrator's error band and V1 only
// fluctuates at the level (rel_tol·|x|)², so its sweep stops at t = 50.
constexpr double kQuarticLyapunovT = 1e3;
constexpr double kSimpleQpLyapunovT = 50.0;

constexpr double kWeakT = 1e4;
constexpr double kWeakTol = 1e-6;

constexpr int kOracleInstances = 100;
constexpr double kRatioTarget = 2.0;
constexpr double kRatioRelTol = 0.2;

constexpr double kSolverKkt = 1e-6;
constexpr int kSolverIterations = 50'000;
constexpr double kSolverXTol = 1e-4;

constexpr int kFdPoints = 50;
constexpr double kFdGradientTol = 1e-5;
constexpr double kFdHessianTol = 1e-4;

struct Criterion {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
};

int failures = 0;

void report(int number, const std::string& title, const Criterion& c,
            const std::string& summary) {
  std::printf("%s [%d] %s: %s\n", c.pass ? "PASS" : "FAIL", number,
              title.c_str(), summary.c_str());
  for (const auto& note : c.notes) {
    std::printf("       %s\n", note.c_str());
  }
  std::fflush(stdout);
  if (!c.pass) {
    ++failures;
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

double decades(double got, double want) {
  return std::abs(std::log10(got / want));
}

bool within_decades(double got, double want, double limit) {
  return got > 0.0 && std::isfinite(got) && decades(got, want) <= limit;
}

// Interiority bookkeeping shared by every suite below.
std::int64_t interior_checks = 0;
std::int64_t interior_violations = 0;

void count_interior(const Vector& x, Index s) {
  ++interior_checks;
  if (!is_interior(x, s)) {
    ++interior_violations;
  }
}

void count_interior(const TrajectoryLog& log, Index s) {
  for (const auto& sample : log.samples) {
    count_interior(sample.x, s);
  }
}

const TrajectorySample* sample_at(const TrajectoryLog& log, double t) {
  for (const auto& s : log.samples) {
    if (s.t == t) {
      return &s;
    }
  }
  return nullptr;
}

IntegratorConfig accurate_config() {
  IntegratorConfig c;
  c.rel_tol = 1e-12;
  c.abs_tol = 1e-15;
  return c;
}

// Shared by criteria 1, 3 and 5.
TrajectoryLog quartic_run;
double quartic_seconds = 0.0;

void criterion_table_sp() {
  const auto p = builtin_problem("quartic_p12");
  auto c = accurate_config();
  c.sample_times = kSpHorizons;
  c.sample_times.push_back(kDualCombinationT);
  const auto start = std::chrono::steady_clock::now();
  quartic_run = integrate_adaptive(p.program, c, p.x0, p.y0, kWeakT, &*p.optimum);
  quartic_seconds = seconds_since(start);
  count_interior(quartic_run, p.program.s());

  Criterion crit;
  crit.check(quartic_run.status == IntegrationStatus::kReachedEnd,
             fmt::format("run ended with {}", to_string(quartic_run.status)));
  std::string summary;
  for (std::size_t k = 0; k < kSpHorizons.size(); ++k) {
    const auto* s = sample_at(quartic_run, kSpHorizons[k]);
    if (!s) {
      crit.check(false, fmt::format("no sample at T = {:.0e}", kSpHorizons[k]));
      continue;
    }
    const double err = (s->x - p.optimum->x).lpNorm<Eigen::Infinity>();
    const double res = s->monitors.norm_Ax_b;
    crit.check(within_decades(err, kSpError[k], kTableDecades),
               fmt::format("T = {:.0e}: error {:.2e} vs {:.1e}", kSpHorizons[k],
                           err, kSpError[k]));
    crit.check(within_decades(res, kSpResidual[k], kTableDecades),
               fmt::format("T = {:.0e}: residual {:.2e} vs {:.1e}",
                           kSpHorizons[k], res, kSpResidual[k]));
    summary += fmt::format("T={:.0e} err {:.1e} res {:.1e}; ", kSpHorizons[k],
                           err, res);
  }
  crit.check(quartic_seconds <= kTableSeconds,
             fmt::format("took {:.1f} s", quartic_seconds));
  report(1, "flow reproduces the sp columns", crit,
         summary + fmt::format("{:.2f} s", quartic_seconds));
}

void criterion_table_ap() {
  const auto p = builtin_problem("quartic_p12");
  IntegratorConfig c;
  c.sample_times = kApHorizons;
  c.sample_stride = 1;
  const auto start = std::chrono::steady_clock::now();
  const auto log = integrate_affine(p.program, c, p.feasible_x0, kApHorizons.back());
  const double seconds = seconds_since(start);

  Criterion crit;
  crit.check(log.status == IntegrationStatus::kReachedEnd,
             fmt::format("run ended with {}", to_string(log.status)));
  double worst_feasibility = 0.0;
  for (const auto& s : log.samples) {
    count_interior(s.x, p.program.s());
    worst_feasibility = std::max(worst_feasibility, s.norm_Ax_b);
  }
  crit.check(worst_feasibility <= kApFeasibility,
             fmt::format("feasibility reached {:.2e}", worst_feasibility));
  std::string summary;
  for (std::size_t k = 0; k < kApHorizons.size(); ++k) {
    const AffineScalingSample* s = nullptr;
    for (const auto& candidate : log.samples) {
      if (candidate.t == kApHorizons[k]) {
        s = &candidate;
      }
    }
    if (!s) {
      crit.check(false, fmt::format("no sample at T = {:.0e}", kApHorizons[k]));
      continue;
    }
    const double err = (s->x - p.optimum->x).lpNorm<Eigen::Infinity>();
    crit.check(within_decades(err, kApError[k], kTableDecades),
               fmt::format("T = {:.0e}: error {:.2e} vs {:.1e}", kApHorizons[k],
                           err, kApError[k]));
    crit.check(within_decades(s->kappa, kApKappa[k], kKappaDecades),
               fmt::format("T = {:.0e}: kappa {:.2e} vs {:.1e}", kApHorizons[k],
                           s->kappa, kApKappa[k]));
    summary += fmt::format("T={:.0e} err {:.1e} kappa {:.1e}; ", kApHorizons[k],
                           err, s->kappa);
  }
  crit.check(seconds <= kTableSeconds, fmt::format("took {:.1f} s", seconds));
  report(2, "affine baseline reproduces the ap columns", crit,
         summary + fmt::format("max |Ax-b| {:.1e}; {:.2f} s", worst_feasibility,
                               seconds));
}

void criterion_dual_convergence() {
  const auto p = builtin_problem("quartic_p12");
  Criterion crit;
  const auto* mid = sample_at(quartic_run, kDualCombinationT);
  const auto* last = sample_at(quartic_run, kWeakT);
  if (!mid || !last) {
    crit.check(false, "flow run is missing samples");
    report(3, "dual trajectory converges into H", crit, "no data");
    return;
  }
  const double combination = (mid->y[0] + 2.0 * mid->y[1]) / 3.0;
  crit.check(std::abs(combination - kDualCombinationTarget) <= kDualCombinationTol,
             fmt::format("(y1 + 2 y2)/3 = {:.6f} at T = {:.0e}", combination,
                         kDualCombinationT));

  const Vector z = evaluate_gradient(p.program, last->x) +
                   p.program.A().apply_transpose(last->y);
  const Vector& y = last->y;
  crit.check(z[0] >= -kMembershipTol, fmt::format("z1 = {:.3e}", z[0]));
  crit.check(z[1] >= -kMembershipTol, fmt::format("z2 = {:.3e}", z[1]));
  crit.check(std::abs(z[2]) <= kMembershipTol, fmt::format("z3 = {:.3e}", z[2]));
  crit.check(std::abs(z[0] - (2.0 + y[0])) <= kMembershipTol,
             fmt::format("z1 - (2 + y1) = {:.3e}", z[0] - 2.0 - y[0]));
  crit.check(std::abs(z[1] - (2.0 + y[1])) <= kMembershipTol,
             fmt::format("z2 - (2 + y2) = {:.3e}", z[1] - 2.0 - y[1]));
  report(3, "dual trajectory converges into H", crit,
         fmt::format("combination {:.6f} at T=1e3; y(1e4) = ({:.6f}, {:.6f}), "
                     "z = ({:.2e}, {:.2e}, {:.2e})",
                     combination, y[0], y[1], z[0], z[1], z[2]));
}

void criterion_lyapunov() {
  Criterion crit;
  std::string summary;
  for (const char* name : {"quartic_p12", "simple_qp"}) {
    const auto p = builtin_problem(name);
    auto c = accurate_config();
    c.sample_stride = 1;
    const double horizon = std::string(name) == "quartic_p12" ? kQuarticLyapunovT
                                                              : kSimpleQpLyapunovT;
    const auto log = integrate_adaptive(p.program, c, p.x0, p.y0, horizon, &*p.optimum);
    count_interior(log, p.program.s());
    crit.check(log.status == IntegrationStatus::kReachedEnd,
               fmt::format("{}: run ended with {}", name, to_string(log.status)));

    int increases = 0;
    double worst_derivative = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < log.samples.size(); ++k) {
      const auto& s = log.samples[k];
      if (k > 0) {
        const double prev = log.samples[k - 1].monitors.V1;
        if (s.monitors.V1 > prev + kMonotoneSlack * std::abs(prev)) {
          ++increases;
        }
      }
      worst_derivative = std::max(
          worst_derivative, lyapunov_derivative(p.program, s.x, s.y, *p.optimum));
    }
    crit.check(increases == 0, fmt::format("{}: V1 increased {} times", name, increases));
    crit.check(worst_derivative <= kDerivativeBound,
               fmt::format("{}: largest dV1/dt {:.3e}", name, worst_derivative));

    // Centered differences of V1 against the closed-form derivative.
    auto fd = accurate_config();
    for (double tau : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
      const double delta = 1e-2 * tau;
      fd.sample_times.push_back(tau - delta);
      fd.sample_times.push_back(tau);
      fd.sample_times.push_back(tau + delta);
    }
    const auto fd_log = integrate_adaptive(p.program, fd, p.x0, p.y0, 1010.0,
                                           &*p.optimum);
    count_interior(fd_log, p.program.s());
    double worst_fd = 0.0;
    for (std::size_t k = 1; k + 1 < fd_log.samples.size(); k += 3) {
      const auto& lo = fd_log.samples[k];
      const auto& mid = fd_log.samples[k + 1];
      const auto& hi = fd_log.samples[k + 2];
      const double numeric =
          (hi.monitors.V1 - lo.monitors.V1) / (hi.t - lo.t);
      const double exact = lyapunov_derivative(p.program, mid.x, mid.y, *p.optimum);
      const double gap = std::abs(numeric - exact);
      worst_fd = std::max(worst_fd, gap / (kFdRelative * std::abs(exact) + kFdAbsolute));
      crit.check(gap <= kFdRelative * std::abs(exact) + kFdAbsolute,
                 fmt::format("{}: t = {}: difference quotient {:.6e} vs {:.6e}",
                             name, mid.t, numeric, exact));
    }
    summary += fmt::format(
        "{}: {} samples to T={:g}, V1 {:.1e} -> {:.1e}, max dV1/dt {:.1e}, "
        "fd gap/bound {:.2f}; ",
        name, log.samples.size(), horizon, log.samples.front().monitors.V1,
        log.samples.back().monitors.V1, worst_derivative, worst_fd);
  }
  report(4, "Lyapunov function decreases along the flow", crit, summary);
}

void criterion_weak_convergence() {
  Criterion crit;
  std::string summary;
  for (const char* name : {"quartic_p12", "simple_qp"}) {
    const auto p = builtin_problem(name);
    TrajectoryLog own;
    const TrajectoryLog* log = &quartic_run;
    if (std::string(name) != "quartic_p12") {
      own = integrate_adaptive(p.program, accurate_config(), p.x0, p.y0, kWeakT,
                               &*p.optimum);
      count_interior(own, p.program.s());
      log = &own;
    }
    const auto& last = log->samples.back();
    crit.check(last.t == kWeakT, fmt::format("{}: run stopped at t = {}", name, last.t));
    crit.check(last.monitors.norm_U2z <= kWeakTol,
               fmt::format("{}: |U^2 z| = {:.3e}", name, last.monitors.norm_U2z));
    crit.check(last.monitors.norm_Ax_b <= kWeakTol,
               fmt::format("{}: |Ax - b| = {:.3e}", name, last.monitors.norm_Ax_b));
    summary += fmt::format("{}: |U^2 z| {:.1e}, |Ax-b| {:.1e}; ", name,
                           last.monitors.norm_U2z, last.monitors.norm_Ax_b);
  }
  report(5, "stationarity and feasibility vanish at T = 1e4", crit, summary);
}

void criterion_discrete_oracles() {
  Criterion crit;
  std::mt19937_64 rng(6);
  StepperConfig c;
  c.cg_tol = 1e-13;
  int compared = 0;
  for (int k = 0; k < kOracleInstances; ++k) {
    auto inst = testing::random_instance(rng);
    const auto& prog = inst.qp.program;
    const Index n = prog.n();
    const double h = std::pow(10.0, -2.0 + static_cast<double>(rng() % 5));
    const Eigen::MatrixXd full =
        inst.qp.Q + prog.sigma1() * inst.qp.A.transpose() * inst.qp.A;

    auto compare = [&](const Vector& got, const Vector& want, const char* what) {
      ++compared;
      const double gap = (got - want).lpNorm<Eigen::Infinity>();
      crit.check(gap <= testing::dense_tolerance(want),
                 fmt::format("instance {} {}: gap {:.3e}", k, what, gap));
    };
    compare(direction_semi_implicit_hessian(prog, inst.x, inst.y, h, c).dx,
            testing::dense_block_direction(inst.qp.Q, inst.u, inst.z,
                                           testing::all_of(n), h),
            "hessian");
    compare(direction_semi_implicit_full(prog, inst.x, inst.y, h, c).dx,
            testing::dense_block_direction(full, inst.u, inst.z,
                                           testing::all_of(n), h),
            "full");
    const auto partition =
        BlockPartition::contiguous(n, 1 + static_cast<Index>(rng() % n));
    for (const auto& block : partition.blocks()) {
      compare(direction_block(prog, inst.x, inst.y, block, h, c).dx,
              testing::dense_block_direction(full, inst.u, inst.z, block, h),
              "block");
    }

    const double gs_h = std::pow(10.0, -3.0 + static_cast<double>(rng() % 4));
    const Vector gs = gauss_seidel_sweep(prog, inst.x, inst.y,
                                         BlockPartition::whole(n),
                                         WeightVector::ones(n), gs_h);
    const auto euler = step_explicit_euler(prog, {0.0, inst.x, inst.y}, gs_h, 0.99);
    count_interior(gs, prog.s());
    crit.check(gs == euler.x, fmt::format("instance {}: one-block sweep differs "
                                          "from the Euler step", k));
  }

  const auto p = builtin_problem("quartic_p12");
  const Vector x{{0.4, 0.7, 1.2}};
  const Vector y{{0.0, 1.0}};
  const Vector explicit_dx = direction_explicit(p.program, x, y).dx;
  double worst_ratio = kRatioTarget;
  for (bool use_full : {false, true}) {
    auto error = [&](double h) {
      const Vector d =
          use_full ? direction_semi_implicit_full(p.program, x, y, h, c).dx
                   : direction_semi_implicit_hessian(p.program, x, y, h, c).dx;
      return (d - explicit_dx).norm();
    };
    for (double h : {1e-2, 1e-3, 1e-4}) {
      const double ratio = error(h) / error(h / 2.0);
      if (std::abs(ratio - kRatioTarget) > std::abs(worst_ratio - kRatioTarget)) {
        worst_ratio = ratio;
      }
      crit.check(std::abs(ratio - kRatioTarget) <= kRatioRelTol * kRatioTarget,
                 fmt::format("{} h = {}: ratio {:.4f}", use_full ? "full" : "hessian",
                             h, ratio));
    }
  }
  report(6, "discrete directions match dense solves", crit,
         fmt::format("{} direction comparisons on {} instances, worst halving "
                     "ratio {:.4f}",
                     compared, kOracleInstances, worst_ratio));
}

void criterion_solvers() {
  const auto p = builtin_problem("quartic_p12");
  Criterion crit;
  std::string summary;
  for (auto v : {StepperVariant::kExplicit, StepperVariant::kSemiImplicitHessian,
                 StepperVariant::kSemiImplicitFull, StepperVariant::kGaussSeidel,
                 StepperVariant::kPartialUpdate}) {
    StepperConfig c;
    c.variant = v;
    c.kkt_tol = kSolverKkt;
    c.max_iters = kSolverIterations;
    const auto r = solve(p.program, p.x0, p.y0, c);
    count_interior(r.x, p.program.s());
    const double err = (r.x - p.optimum->x).lpNorm<Eigen::Infinity>();
    const auto name = std::string(to_string(v));
    crit.check(r.status == SolveStatus::kConverged,
               fmt::format("{}: {}", name, to_string(r.status)));
    crit.check(r.kkt.max() <= kSolverKkt,
               fmt::format("{}: kkt {:.3e}", name, r.kkt.max()));
    crit.check(r.iterations <= kSolverIterations,
               fmt::format("{}: {} iterations", name, r.iterations));
    crit.check(err <= kSolverXTol, fmt::format("{}: |x - x*| = {:.3e}", name, err));
    summary += fmt::format("{} {} it; ", name, r.iterations);
  }
  report(7, "every stepper variant solves the quartic problem", crit, summary);
}

void criterion_hygiene() {
  Criterion crit;
  // One more dense sweep of interiority: every builtin, every accepted step.
  for (const auto& name : builtin_names()) {
    const auto p = builtin_problem(name);
    IntegratorConfig c;
    c.sample_stride = 1;
    count_interior(integrate_adaptive(p.program, c, p.x0, p.y0, 200.0),
                   p.program.s());
  }
  crit.check(interior_violations == 0,
             fmt::format("{} of {} states left the interior", interior_violations,
                         interior_checks));

  std::mt19937_64 rng(8);
  int fd_checks = 0;
  for (const auto& name : builtin_names()) {
    const auto b = builtin_problem(name);
    for (int k = 0; k < kFdPoints; ++k) {
      const Vector x = testing::random_vector(rng, b.program.n(), 0.05, 2.0);
      const Vector v = testing::random_vector(rng, b.program.n(), -1.0, 1.0);
      const double g = testing::relative_error(evaluate_gradient(b.program, x),
                                               testing::fd_gradient(b.program, x));
      const double hv = testing::relative_error(
          hessian_vector_product(b.program, x, v),
          testing::fd_hessian_vector(b.program, x, v));
      crit.check(g <= kFdGradientTol,
                 fmt::format("{} point {}: gradient error {:.2e}", name, k, g));
      crit.check(hv <= kFdHessianTol,
                 fmt::format("{} point {}: Hessian-vector error {:.2e}", name, k, hv));
      fd_checks += 2;
    }
  }
  report(8, "positivity and derivative oracles", crit,
         fmt::format("{} interior checks, {} violations; {} finite-difference "
                     "checks",
                     interior_checks, interior_violations, fd_checks));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{
      criterion_table_sp,        criterion_table_ap,  criterion_dual_convergence,
      criterion_lyapunov,        criterion_weak_convergence,
      criterion_discrete_oracles, criterion_solvers,  criterion_hygiene};
  for (const auto& run : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      std::printf("FAIL exception: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
