#include "ipal/affine_scaling.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "ipal/errors.hpp"

namespace ipal {

namespace {

constexpr double kEpsilon = std::numeric_limits<double>::epsilon();

void require_positive_orthant(const ConvexProgram& program, const Vector& x) {
  if (program.s() != program.n()) {
    throw PreconditionError(
        "the affine-scaling baseline needs every variable bounded (s = n)");
  }
  if (x.size() != program.n()) {
    throw DimensionError("x does not match the program dimension");
  }
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) {
      throw DomainError(fmt::format("x[{}] = {} is not positive", i, x[i]), i);
    }
  }
}

// Eigen's estimate treats zero pivots as a pseudo-inverse would, so an exactly
// singular matrix can still report a healthy rcond. Cap it by the pivot ratio.
double reciprocal_condition(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
  if (ldlt.info() != Eigen::Success) {
    return 0.0;
  }
  const Vector d = ldlt.vectorD().cwiseAbs();
  if (d.size() == 0) {
    return 1.0;
  }
  const double dmax = d.maxCoeff();
  const double pivots = dmax > 0.0 ? d.minCoeff() / dmax : 0.0;
  return std::min(ldlt.rcond(), pivots);
}

// AX²Aᵀ with AX = A·diag(x).
Eigen::MatrixXd scaled_normal_matrix(const Eigen::MatrixXd& A, const Vector& x) {
  const Eigen::MatrixXd AX = A * x.asDiagonal();
  return AX * AX.transpose();
}

double extreme_eigenvalue_ratio_iterative(const Eigen::MatrixXd& M) {
  const Index m = M.rows();
  Vector v = Vector::Ones(m).normalized();
  double lambda_max = 0.0;
  for (int k = 0; k < 500; ++k) {
    Vector next = M * v;
    const double norm = next.norm();
    if (norm == 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    next /= norm;
    const double estimate = next.dot(M * next);
    const bool done = std::abs(estimate - lambda_max) <= 1e-12 * estimate;
    lambda_max = estimate;
    v = std::move(next);
    if (done) {
      break;
    }
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    return std::numeric_limits<double>::infinity();
  }
  v = Vector::Ones(m).normalized();
  double lambda_min = 0.0;
  for (int k = 0; k < 500; ++k) {
    Vector next = ldlt.solve(v);
    const double norm = next.norm();
    if (!std::isfinite(norm) || norm == 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    next /= norm;
    const double estimate = next.dot(M * next);
    const bool done = std::abs(estimate - lambda_min) <= 1e-12 * estimate;
    lambda_min = estimate;
    v = std::move(next);
    if (done) {
      break;
    }
  }
  return lambda_min > 0.0 ? lambda_max / lambda_min
                          : std::numeric_limits<double>::infinity();
}

}  // namespace

Vector affine_scaling_rhs(const ConvexProgram& program, const Vector& x) {
  require_positive_orthant(program, x);
  const Eigen::MatrixXd A = program.A().to_dense();
  const Vector g = x.cwiseProduct(evaluate_gradient(program, x));
  const Eigen::MatrixXd AX = A * x.asDiagonal();
  const Eigen::MatrixXd M = AX * AX.transpose();

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  const double rcond = reciprocal_condition(ldlt);
  if (!ldlt.isPositive() || !(rcond > kEpsilon)) {
    throw SingularSystemError(
        fmt::format("AX²Aᵀ is numerically singular (rcond {:.3e})", rcond),
        rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
  }
  const Vector projected = AX * g;
  Vector w = ldlt.solve(projected);
  w += ldlt.solve(Vector(projected - M * w));

  const Vector velocity =
      -x.cwiseProduct(g - x.cwiseProduct(A.transpose() * w));
  // A·velocity is the solve residual. Its natural scale is that of the terms
  // that cancel in the projection, not the (possibly tiny) velocity itself.
  const double drift = (A * velocity).norm();
  const double scale = std::max(velocity.norm(), g.norm() * x.lpNorm<Eigen::Infinity>());
  if (!(drift <= 1e-10 * scale) && !(drift == 0.0)) {
    throw SingularSystemError(
        fmt::format("affine-scaling velocity left the null space of A "
                    "(|A v| = {:.3e})",
                    drift),
        1.0 / rcond);
  }
  return velocity;
}

double condition_number(const ConvexProgram& program, const Vector& x) {
  if (x.size() != program.n()) {
    throw DimensionError("x does not match the program dimension");
  }
  const Eigen::MatrixXd M = scaled_normal_matrix(program.A().to_dense(), x);
  if (M.rows() == 0) {
    return 1.0;
  }
  if (M.rows() > 200) {
    return extreme_eigenvalue_ratio_iterative(M);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      M, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    return std::numeric_limits<double>::infinity();
  }
  const double lambda_min = eig.eigenvalues().minCoeff();
  const double lambda_max = eig.eigenvalues().maxCoeff();
  if (!(lambda_min > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  return lambda_max / lambda_min;
}

AffineScalingLog integrate_affine(const ConvexProgram& program,
                                  const IntegratorConfig& config,
                                  const Vector& x0, double T, double t0) {
  try {
    require_positive_orthant(program, x0);
  } catch (const DomainError& e) {
    throw PreconditionError(e.what());
  }
  const double infeasibility = constraint_residual(program, x0).norm();
  if (infeasibility > 1e-10 * (1.0 + program.b().norm())) {
    throw PreconditionError(fmt::format(
        "start point is not feasible: |Ax0 - b| = {:.3e}", infeasibility));
  }

  const Eigen::MatrixXd A = program.A().to_dense();
  const Eigen::LDLT<Eigen::MatrixXd> gram(A * A.transpose());
  const double keep = 1.0 - config.fraction_to_boundary;

  AffineScalingLog log;
  OdeSystem system;
  system.rhs = [&](const Vector& x) { return affine_scaling_rhs(program, x); };
  system.admissible = [&](const Vector& from, const Vector& trial) {
    for (Index i = 0; i < trial.size(); ++i) {
      if (!(trial[i] > 0.0) || trial[i] < keep * from[i]) {
        return false;
      }
    }
    return true;
  };
  system.post_step = [&](Vector& x) {
    const Vector r = A * x - program.b();
    if (r.norm() <= kAffineDriftTolerance) {
      return false;
    }
    // Least-norm correction back onto {Ax = b}.
    Vector corrected = x - A.transpose() * gram.solve(r);
    if ((corrected.array() <= 0.0).any()) {
      return false;
    }
    x = std::move(corrected);
    ++log.reprojections;
    return true;
  };

  const OdeSolution solution =
      integrate_embedded_rk23(system, config, x0, t0, T);
  log.status = solution.status;
  log.stats = solution.stats;
  log.failure = solution.failure;
  for (std::size_t k = 0; k < solution.times.size(); ++k) {
    AffineScalingSample sample;
    sample.t = solution.times[k];
    sample.x = solution.states[k];
    sample.kappa = condition_number(program, sample.x);
    sample.norm_Ax_b = constraint_residual(program, sample.x).norm();
    log.samples.push_back(std::move(sample));
  }
  if (solution.status == IntegrationStatus::kFailed) {
    auto& last = log.samples.back();
    last.kappa = std::numeric_limits<double>::quiet_NaN();
    last.status = "failed";
  }
  return log;
}

}  // namespace ipal
