#include "ipal/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ipal/dynamics.hpp"
#include "ipal/errors.hpp"

namespace ipal {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// eᵃ − 1 − a ≥ 0 without cancellation for small |a|.
double expm1_minus_linear(double a) {
  if (std::abs(a) < 0.5) {
    double term = a * a / 2.0;
    double sum = term;
    for (int k = 3; k < 40; ++k) {
      term *= a / k;
      sum += term;
      if (std::abs(term) <= 1e-17 * std::abs(sum)) {
        break;
      }
    }
    return sum;
  }
  return std::expm1(a) - a;
}

void require_gamma(double gamma) {
  if (!(gamma >= 0.5 && gamma < 1.0)) {
    throw DomainError(fmt::format("gamma = {} outside [0.5, 1)", gamma));
  }
}

}  // namespace

SupportPattern support_pattern(const Vector& x, Index s, double tol_support) {
  SupportPattern pattern;
  pattern.tol_support = tol_support;
  for (Index i = 0; i < s; ++i) {
    (x[i] > tol_support ? pattern.support : pattern.null).push_back(i);
  }
  return pattern;
}

double KktReport::max() const {
  return std::max({primal_feasibility, nonneg_violation, dual_feasibility,
                   complementarity, stationarity});
}

KktReport kkt_report(const ConvexProgram& program, const Vector& x,
                     const Vector& y) {
  const Vector z =
      evaluate_gradient(program, x) + program.A().apply_transpose(y);
  KktReport report;
  report.primal_feasibility = constraint_residual(program, x).norm();
  const Index s = program.s();
  for (Index i = 0; i < s; ++i) {
    report.nonneg_violation = std::max(report.nonneg_violation, -x[i]);
    report.dual_feasibility = std::max(report.dual_feasibility, -z[i]);
    report.complementarity += std::abs(x[i] * z[i]);
  }
  for (Index i = s; i < program.n(); ++i) {
    report.stationarity = std::max(report.stationarity, std::abs(z[i]));
  }
  return report;
}

double potential_I(const Vector& x, const Vector& xprime, double gamma,
                   Index s, double tol_support) {
  require_gamma(gamma);
  if (x.size() != xprime.size()) {
    throw DimensionError("potential_I: x and x' differ in length");
  }
  double value = 0.0;
  for (Index i = s; i < x.size(); ++i) {
    const double d = x[i] - xprime[i];
    value += 0.5 * d * d;
  }

  const bool log_case = gamma == 0.5;
  const double p = 2.0 - 2.0 * gamma;
  const double q = 1.0 - 2.0 * gamma;
  for (Index i = 0; i < s; ++i) {
    if (x[i] < 0.0 || xprime[i] < 0.0) {
      throw DomainError(
          fmt::format("potential_I: negative coordinate at index {}", i), i);
    }
    if (xprime[i] > tol_support) {
      if (!(x[i] > tol_support)) {
        return kInfinity;
      }
      // Each summand is x′ᵖ·g(x/x′) with g written through L = ln(x/x′).
      const double L = std::log1p((x[i] - xprime[i]) / xprime[i]);
      if (log_case) {
        value += xprime[i] * expm1_minus_linear(L);
      } else {
        value += std::pow(xprime[i], p) *
                 (expm1_minus_linear(p * L) / p +
                  expm1_minus_linear(q * L) / (-q));
      }
    } else if (log_case) {
      value += x[i] - xprime[i];
    } else {
      value += (std::pow(x[i], p) - std::pow(xprime[i], p)) / p;
    }
  }
  return value;
}

double potential_V(const Vector& x, const Vector& xprime, const Vector& y,
                   const Vector& yprime, double gamma, Index s, double sigma2,
                   double tol_support) {
  if (y.size() != yprime.size()) {
    throw DimensionError("potential_V: y and y' differ in length");
  }
  const double I = potential_I(x, xprime, gamma, s, tol_support);
  return I + (y - yprime).squaredNorm() / (2.0 * sigma2);
}

double lyapunov_value(const ConvexProgram& program, const Vector& x,
                      const Vector& y, const PrimalDualPair& optimum) {
  return potential_V(x, optimum.x, y, optimum.y, program.gamma(), program.s(),
                     program.sigma2());
}

double augmented_lagrangian(const ConvexProgram& program, const Vector& x,
                            const Vector& y) {
  for (Index i = 0; i < program.s(); ++i) {
    if (x[i] < 0.0) {
      return kInfinity;
    }
  }
  const Vector r = constraint_residual(program, x);
  return evaluate_objective(program, x) + y.dot(r) +
         0.5 * program.sigma1() * r.squaredNorm();
}

double lagrangian_derivative(const ConvexProgram& program, const Vector& x,
                             const Vector& y) {
  require_interior(program, x);
  const ScalingVector scaling = scaling_vector(x, program.gamma(), program.s());
  const Vector z = dual_residual(program, x, y);
  const double scaled = scaling.u.cwiseProduct(z).squaredNorm();
  return -scaled +
         program.sigma2() * constraint_residual(program, x).squaredNorm();
}

double lyapunov_derivative(const ConvexProgram& program, const Vector& x,
                           const Vector& y, const PrimalDualPair& optimum) {
  static_cast<void>(y);
  const Vector r = constraint_residual(program, x);
  return (optimum.x - x).dot(evaluate_gradient(program, x)) -
         program.sigma1() * r.squaredNorm() - optimum.y.dot(r);
}

StationarityNorms stationarity_norm(const ConvexProgram& program,
                                    const Vector& x, const Vector& y) {
  require_interior(program, x);
  const ScalingVector scaling = scaling_vector(x, program.gamma(), program.s());
  const Vector z = dual_residual(program, x, y);
  return {scaling.squared_times(z).norm(), z.norm()};
}

MonitorValues evaluate_monitors(const ConvexProgram& program, const Vector& x,
                                const Vector& y,
                                const PrimalDualPair* optimum) {
  MonitorValues values;
  values.V1 = optimum ? lyapunov_value(program, x, y, *optimum)
                      : std::numeric_limits<double>::quiet_NaN();
  values.Ltilde = augmented_lagrangian(program, x, y);
  values.dLtilde = lagrangian_derivative(program, x, y);
  values.norm_Ax_b = constraint_residual(program, x).norm();
  values.norm_U2z = stationarity_norm(program, x, y).scaled;
  values.kkt_max = kkt_report(program, x, y).max();
  return values;
}

}  // namespace ipal
