#include "ipal/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ipal/errors.hpp"

namespace ipal {

Vector ScalingVector::squared_times(const Vector& v) const {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    out[i] = (u[i] * u[i]) * v[i];
  }
  return out;
}

ScalingVector scaling_vector(const Vector& x, double gamma, Index s) {
  if (s < 0 || s > x.size()) {
    throw DimensionError(fmt::format("s = {} outside [0, {}]", s, x.size()));
  }
  ScalingVector scaling{Vector::Ones(x.size())};
  for (Index i = 0; i < s; ++i) {
    if (!(x[i] >= kMinScalableCoordinate)) {
      throw DomainError(
          fmt::format("x[{}] = {} is not in the scalable interior", i, x[i]),
          i);
    }
    scaling.u[i] = std::pow(x[i], gamma);
  }
  return scaling;
}

Vector dual_residual(const ConvexProgram& program, const Vector& x,
                     const Vector& y) {
  if (y.size() != program.m()) {
    throw DimensionError(
        fmt::format("y has length {}, expected {}", y.size(), program.m()));
  }
  // ∇f + Aᵀ(y + σ₁(Ax − b)) folds both transpose products into one.
  const Vector shifted = y + program.sigma1() * constraint_residual(program, x);
  return evaluate_gradient(program, x) + program.A().apply_transpose(shifted);
}

FlowDerivative flow_rhs(const ConvexProgram& program, const Vector& x,
                        const Vector& y) {
  require_interior(program, x);
  const ScalingVector scaling = scaling_vector(x, program.gamma(), program.s());
  if (y.size() != program.m()) {
    throw DimensionError(
        fmt::format("y has length {}, expected {}", y.size(), program.m()));
  }
  const Vector residual = constraint_residual(program, x);
  const Vector z = evaluate_gradient(program, x) +
                   program.A().apply_transpose(y + program.sigma1() * residual);
  return {-scaling.squared_times(z), program.sigma2() * residual};
}

double fraction_to_boundary_step(const Vector& x, const Vector& dx, Index s,
                                 double theta) {
  double step = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < s; ++i) {
    if (dx[i] < 0.0) {
      step = std::min(step, theta * x[i] / -dx[i]);
    }
  }
  return step;
}

}  // namespace ipal
