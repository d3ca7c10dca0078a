#pragma once

#include <string>
#include <vector>

#include "ipal/integrators.hpp"
#include "ipal/problem.hpp"

namespace ipal {

/// Primal first-order affine-scaling baseline dx/dt = −X P_{AX} X ∇f(x) with
/// P_{AX} = I − XAᵀ(AX²Aᵀ)⁻¹AX. Unlike the flow, every evaluation forms and
/// factorizes the m×m matrix AX²Aᵀ; that cost and its conditioning are what
/// the baseline exists to expose. It assumes s = n.

/// Returns the affine-scaling velocity at x.
///
/// Throws SingularSystemError when AX²Aᵀ cannot be factorized reliably or the
/// result leaves the null space of A, PreconditionError when s ≠ n and
/// DomainError when some x_i ≤ 0.
Vector affine_scaling_rhs(const ConvexProgram& program, const Vector& x);

/// 2-norm condition number of AX²Aᵀ; +∞ when numerically singular. Exact
/// (symmetric eigendecomposition) for m ≤ 200, power and inverse iteration
/// above that.
double condition_number(const ConvexProgram& program, const Vector& x);

struct AffineScalingSample {
  double t = 0.0;
  Vector x;
  /// NaN when the factorization failed at this point.
  double kappa = 0.0;
  double norm_Ax_b = 0.0;
  /// "ok", or the failure that ended the run.
  std::string status = "ok";
};

struct AffineScalingLog {
  std::vector<AffineScalingSample> samples;
  IntegrationStatus status = IntegrationStatus::kReachedEnd;
  IntegrationStats stats;
  std::string failure;
  /// Number of least-norm re-projections onto {Ax = b}.
  int reprojections = 0;
};

/// Feasibility drift above which the state is re-projected onto {Ax = b}.
inline constexpr double kAffineDriftTolerance = 1e-8;

/// Integrates the baseline from a strictly feasible x0 with the same embedded
/// pair as the flow. A failed solve ends the log with a NaN sample.
/// Throws PreconditionError when x0 is not strictly feasible.
AffineScalingLog integrate_affine(const ConvexProgram& program,
                                  const IntegratorConfig& config,
                                  const Vector& x0, double T, double t0 = 0.0);

}  // namespace ipal
