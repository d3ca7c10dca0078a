#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string_view>
#include <vector>

#include "ipal/monitors.hpp"
#include "ipal/problem.hpp"

namespace ipal {

struct IntegratorConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  double h_init = 1e-3;
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  /// Trial points must keep x_i ≥ (1 − θ)·x_i for the bounded coordinates.
  double fraction_to_boundary = 0.99;
  std::int64_t max_steps = 100'000'000;
  /// Times at which the solution is recorded; the start and the final time
  /// are always recorded.
  std::vector<double> sample_times;
  /// Also record every k-th accepted step (0 disables).
  std::int64_t sample_stride = 0;

  /// Throws DomainError if the invariants
  /// 0 < h_min ≤ h_init ≤ h_max, 0 < θ < 1 and positive tolerances fail.
  void validate() const;
};

enum class IntegrationStatus {
  kReachedEnd,
  kStalled,
  kStepUnderflow,
  kMaxSteps,
  /// The right-hand side raised an error (e.g. a singular solve).
  kFailed,
};

std::string_view to_string(IntegrationStatus status);

struct IntegrationStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t rejected_interiority = 0;
  std::int64_t rhs_evaluations = 0;
};

/// Autonomous system dw/dt = rhs(w) on a packed state vector.
struct OdeSystem {
  std::function<Vector(const Vector& state)> rhs;
  /// Whether a trial state reached from `from` is acceptable.
  std::function<bool(const Vector& from, const Vector& trial)> admissible;
  /// Optional repair applied after each accepted step; returns true when the
  /// state was modified.
  std::function<bool(Vector& state)> post_step;
};

struct OdeSolution {
  std::vector<double> times;
  std::vector<Vector> states;
  IntegrationStatus status = IntegrationStatus::kReachedEnd;
  IntegrationStats stats;
  /// Message of the error that ended a kFailed run.
  std::string failure;
};

/// Bogacki–Shampine 2(3) embedded pair with per-component error weights
/// abs_tol + rel_tol·|w_i| and RMS error norm. Trial steps that fail
/// system.admissible are rejected and h halved. Steps are shortened to land
/// exactly on sample times.
OdeSolution integrate_embedded_rk23(const OdeSystem& system,
                                    const IntegratorConfig& config,
                                    const Vector& initial, double t0,
                                    double T);

struct TrajectorySample {
  double t = 0.0;
  Vector x;
  Vector y;
  MonitorValues monitors;
};

struct TrajectoryLog {
  std::vector<TrajectorySample> samples;
  IntegrationStatus status = IntegrationStatus::kReachedEnd;
  IntegrationStats stats;
  std::string failure;
};

/// One explicit Euler step of length h′ = min(h, fraction_to_boundary_step).
TrajectoryState step_explicit_euler(const ConvexProgram& program,
                                    const TrajectoryState& state, double h,
                                    double theta = 0.99);

/// Integrates the flow from (x0, y0) at time t0 to T. When `optimum` is given
/// the V1 monitor is filled in, otherwise it is NaN.
TrajectoryLog integrate_adaptive(const ConvexProgram& program,
                                 const IntegratorConfig& config,
                                 const Vector& x0, const Vector& y0, double T,
                                 const PrimalDualPair* optimum = nullptr,
                                 double t0 = 0.0);

}  // namespace ipal
