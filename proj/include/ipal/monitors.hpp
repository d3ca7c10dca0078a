#pragma once

#include <vector>

#include "ipal/problem.hpp"

namespace ipal {

/// Numerical support of x: B = {i < s : x_i > tol}, N = {i < s} \ B.
struct SupportPattern {
  std::vector<Index> support;
  std::vector<Index> null;
  double tol_support = 1e-12;
};

inline constexpr double kDefaultSupportTolerance = 1e-12;

SupportPattern support_pattern(const Vector& x, Index s,
                               double tol_support = kDefaultSupportTolerance);

/// KKT residuals at (x, y), with the bound multipliers reconstructed as
/// z = ∇f(x) + Aᵀy. The stationarity, primal and dual feasibility and
/// complementarity residuals are all nonnegative; (x, y) is ε-optimal when
/// max() ≤ ε. The Lagrangian dual value L(y, z) has no closed form for a
/// general f and is not reported.
struct KktReport {
  /// ‖Ax − b‖
  double primal_feasibility = 0.0;
  /// max(0, −min_{i<s} x_i)
  double nonneg_violation = 0.0;
  /// max(0, −min_{i<s} z_i)
  double dual_feasibility = 0.0;
  /// Σ_{i<s} |x_i z_i|
  double complementarity = 0.0;
  /// max_{i≥s} |z_i|
  double stationarity = 0.0;

  double max() const;
};

KktReport kkt_report(const ConvexProgram& program, const Vector& x,
                     const Vector& y);

/// Bregman-type distance I(x, x′) between x and the reference point x′.
///
/// Returns +∞ when the support of x′ is not contained in the support of x.
/// γ = ½ and ½ < γ < 1 use separate formulas, selected exactly at 0.5.
/// Throws DomainError for γ outside [½, 1).
double potential_I(const Vector& x, const Vector& xprime, double gamma,
                   Index s, double tol_support = kDefaultSupportTolerance);

/// V(x, x′, y, y′) = I(x, x′) + ‖y − y′‖² / (2σ₂).
double potential_V(const Vector& x, const Vector& xprime, const Vector& y,
                   const Vector& yprime, double gamma, Index s, double sigma2,
                   double tol_support = kDefaultSupportTolerance);

/// V₁(x, y) = V(x, x*, y, y*) for the program's parameters.
double lyapunov_value(const ConvexProgram& program, const Vector& x,
                      const Vector& y, const PrimalDualPair& optimum);

/// Augmented Lagrangian f + yᵀ(Ax − b) + (σ₁/2)‖Ax − b‖², or +∞ when some
/// x_i < 0 with i < s.
double augmented_lagrangian(const ConvexProgram& program, const Vector& x,
                            const Vector& y);

/// Time derivative of the augmented Lagrangian along the flow:
/// −‖Uz‖² + σ₂‖Ax − b‖².
double lagrangian_derivative(const ConvexProgram& program, const Vector& x,
                             const Vector& y);

/// Time derivative of V₁ along the flow:
/// (x* − x)ᵀ∇f(x) − σ₁‖Ax − b‖² − (y*)ᵀ(Ax − b).
double lyapunov_derivative(const ConvexProgram& program, const Vector& x,
                           const Vector& y, const PrimalDualPair& optimum);

struct StationarityNorms {
  /// ‖U²z‖
  double scaled = 0.0;
  /// ‖z‖
  double raw = 0.0;
};

StationarityNorms stationarity_norm(const ConvexProgram& program,
                                    const Vector& x, const Vector& y);

/// Monitor values attached to each trajectory sample.
struct MonitorValues {
  /// NaN when no optimum is known.
  double V1 = 0.0;
  double Ltilde = 0.0;
  double dLtilde = 0.0;
  double norm_Ax_b = 0.0;
  double norm_U2z = 0.0;
  double kkt_max = 0.0;
};

MonitorValues evaluate_monitors(const ConvexProgram& program, const Vector& x,
                                const Vector& y,
                                const PrimalDualPair* optimum = nullptr);

}  // namespace ipal
