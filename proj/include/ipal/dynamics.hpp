#pragma once

#include "ipal/problem.hpp"

namespace ipal {

/// Diagonal of the scaling matrix U: u_i = x_i^γ for i < s, u_i = 1 otherwise.
/// U is never formed as a matrix; every use is a Hadamard product.
struct ScalingVector {
  Vector u;

  /// Returns u ⊙ u ⊙ v.
  Vector squared_times(const Vector& v) const;
};

/// Smallest x_i (i < s) accepted by scaling_vector().
inline constexpr double kMinScalableCoordinate = 1e-300;

/// Builds the scaling vector. Throws DomainError naming the first coordinate
/// i < s with x_i below kMinScalableCoordinate.
ScalingVector scaling_vector(const Vector& x, double gamma, Index s);

/// z(x, y) = ∇f(x) + Aᵀy + σ₁Aᵀ(Ax − b), using one product with A and one
/// with Aᵀ.
Vector dual_residual(const ConvexProgram& program, const Vector& x,
                     const Vector& y);

/// Right-hand side of the interior-point augmented Lagrangian flow.
struct FlowDerivative {
  /// dx/dt = −U²z(x, y)
  Vector dx;
  /// dy/dt = σ₂(Ax − b)
  Vector dy;
};

/// Evaluates the flow at (x, y). Throws DomainError off the interior.
FlowDerivative flow_rhs(const ConvexProgram& program, const Vector& x,
                        const Vector& y);

inline FlowDerivative flow_rhs(const ConvexProgram& program,
                               const TrajectoryState& state) {
  return flow_rhs(program, state.x, state.y);
}

/// Largest α with x_i + α·dx_i ≥ (1 − θ)·x_i for every i < s, i.e.
/// min over dx_i < 0 of θ·x_i / (−dx_i). Returns +∞ when no coordinate
/// i < s decreases.
double fraction_to_boundary_step(const Vector& x, const Vector& dx, Index s,
                                 double theta);

}  // namespace ipal
