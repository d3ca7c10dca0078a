#include "ipal/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ipal/errors.hpp"

namespace ipal {

namespace {

std::vector<Index> nonfinite_indices(const Vector& v) {
  std::vector<Index> indices;
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      indices.push_back(i);
    }
  }
  return indices;
}

void require_finite_input(const Vector& x, std::string_view what) {
  auto bad = nonfinite_indices(x);
  if (!bad.empty()) {
    throw EvaluationError(
        fmt::format("{}: non-finite input at coordinates {}", what, bad),
        std::move(bad));
  }
}

void require_size(const Vector& v, Index expected, std::string_view what) {
  if (v.size() != expected) {
    throw DimensionError(fmt::format("{}: expected length {}, got {}", what,
                                     expected, v.size()));
  }
}

}  // namespace

Objective zero_objective() {
  Objective f;
  f.value = [](const Vector&) { return 0.0; };
  f.gradient = [](const Vector& x) { return Vector(Vector::Zero(x.size())); };
  f.hessian_vector = [](const Vector&, const Vector& v) {
    return Vector(Vector::Zero(v.size()));
  };
  return f;
}

Objective quadratic_objective(Eigen::MatrixXd Q, Vector q) {
  if (Q.rows() != Q.cols() || Q.rows() != q.size()) {
    throw DimensionError("quadratic objective: Q must be square and match q");
  }
  auto Qp = std::make_shared<const Eigen::MatrixXd>(std::move(Q));
  auto qp = std::make_shared<const Vector>(std::move(q));
  Objective f;
  f.value = [Qp, qp](const Vector& x) {
    return 0.5 * x.dot(*Qp * x) + qp->dot(x);
  };
  f.gradient = [Qp, qp](const Vector& x) { return Vector(*Qp * x + *qp); };
  f.hessian_vector = [Qp](const Vector&, const Vector& v) {
    return Vector(*Qp * v);
  };
  return f;
}

Objective linear_objective(Vector c) {
  auto cp = std::make_shared<const Vector>(std::move(c));
  Objective f;
  f.value = [cp](const Vector& x) { return cp->dot(x); };
  f.gradient = [cp](const Vector&) { return *cp; };
  f.hessian_vector = [](const Vector&, const Vector& v) {
    return Vector(Vector::Zero(v.size()));
  };
  return f;
}

Objective quartic_norm_objective(double weight, Vector shift, Vector linear) {
  if (shift.size() != linear.size()) {
    throw DimensionError("quartic objective: shift and linear term differ");
  }
  auto sp = std::make_shared<const Vector>(std::move(shift));
  auto lp = std::make_shared<const Vector>(std::move(linear));
  Objective f;
  f.value = [weight, sp, lp](const Vector& x) {
    const double r2 = (x + *sp).squaredNorm();
    return weight * r2 * r2 + lp->dot(x);
  };
  // ∇f = 4w‖r‖²r + linear, r = x + shift
  f.gradient = [weight, sp, lp](const Vector& x) {
    const Vector r = x + *sp;
    return Vector(4.0 * weight * r.squaredNorm() * r + *lp);
  };
  // ∇²f·v = 4w(‖r‖²v + 2(rᵀv)r)
  f.hessian_vector = [weight, sp](const Vector& x, const Vector& v) {
    const Vector r = x + *sp;
    return Vector(4.0 * weight * (r.squaredNorm() * v + 2.0 * r.dot(v) * r));
  };
  return f;
}

ConstraintMatrix::ConstraintMatrix(const Eigen::MatrixXd& dense)
    : matrix_(dense.sparseView()) {
  matrix_.makeCompressed();
}

ConstraintMatrix::ConstraintMatrix(
    Eigen::SparseMatrix<double, Eigen::RowMajor> sparse)
    : matrix_(std::move(sparse)) {
  matrix_.makeCompressed();
}

Vector ConstraintMatrix::apply(const Vector& x) const {
  require_size(x, cols(), "A·x");
  counters_->apply.fetch_add(1, std::memory_order_relaxed);
  return matrix_ * x;
}

Vector ConstraintMatrix::apply_transpose(const Vector& y) const {
  require_size(y, rows(), "Aᵀ·y");
  counters_->apply_transpose.fetch_add(1, std::memory_order_relaxed);
  return matrix_.transpose() * y;
}

ConvexProgram::ConvexProgram(Objective objective, ConstraintMatrix A, Vector b,
                             Index s, FlowParameters parameters)
    : objective_(std::move(objective)),
      A_(std::move(A)),
      b_(std::move(b)),
      s_(s),
      parameters_(parameters) {
  if (!objective_.value || !objective_.gradient) {
    throw CapabilityError("objective needs value and gradient oracles");
  }
  if (b_.size() != A_.rows()) {
    throw DimensionError(fmt::format("b has length {} but A has {} rows",
                                     b_.size(), A_.rows()));
  }
  if (A_.cols() <= 0) {
    throw DimensionError("program dimension n must be positive");
  }
  if (s_ < 0 || s_ > A_.cols()) {
    throw DomainError(fmt::format("s = {} outside [0, n = {}]", s_, A_.cols()));
  }
  const double gamma = parameters_.gamma;
  const bool gamma_ok = (gamma >= 0.5 && gamma < 1.0) ||
                        (parameters_.allow_unit_gamma && gamma == 1.0);
  if (!gamma_ok) {
    throw DomainError(fmt::format("gamma = {} outside [0.5, 1)", gamma));
  }
  if (!(parameters_.sigma1 > 0.0) || !(parameters_.sigma2 > 0.0)) {
    throw DomainError("sigma1 and sigma2 must be positive");
  }
}

ConvexProgram ConvexProgram::with_parameters(
    const FlowParameters& parameters) const {
  return ConvexProgram(objective_, A_, b_, s_, parameters);
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"quartic_p12", "simple_qp",
                                              "degenerate_lp", "zero_obj"};
  return names;
}

BuiltinProblem builtin_problem(std::string_view name,
                               const FlowParameters& parameters) {
  if (name == "quartic_p12") {
    // f(x) = (1/24)‖x + c‖⁴ + cᵀx, c = (1, 1, 1)
    const Vector c = Vector::Ones(3);
    Eigen::MatrixXd A(2, 3);
    A << 1, 0, 1, 0, 1, 2;
    ConvexProgram program(quartic_norm_objective(1.0 / 24.0, c, c),
                          ConstraintMatrix(A), Vector{{1.0, 2.0}}, 3,
                          parameters);
    return {std::string(name), std::move(program), Vector{{1.0, 1.0, 1.0}},
            Vector{{0.0, 1.0}}, Vector{{0.5, 1.0, 0.5}},
            PrimalDualPair{Vector{{0.0, 0.0, 1.0}}, Vector{{-2.0, -0.5}}}};
  }
  if (name == "simple_qp") {
    // min ½‖x‖² s.t. x₁ + x₂ = 1, x ≥ 0
    Eigen::MatrixXd A(1, 2);
    A << 1, 1;
    ConvexProgram program(
        quadratic_objective(Eigen::MatrixXd::Identity(2, 2), Vector::Zero(2)),
        ConstraintMatrix(A), Vector{{1.0}}, 2, parameters);
    return {std::string(name), std::move(program), Vector{{0.9, 0.1}},
            Vector{{0.0}}, Vector{{0.9, 0.1}},
            PrimalDualPair{Vector{{0.5, 0.5}}, Vector{{-0.5}}}};
  }
  if (name == "degenerate_lp") {
    // min x₁ + x₂ on the same constraints as quartic_p12. The optimum (0, 0, 1)
    // leaves AX²Aᵀ = [[1, 2], [2, 4]], which is singular.
    Eigen::MatrixXd A(2, 3);
    A << 1, 0, 1, 0, 1, 2;
    ConvexProgram program(linear_objective(Vector{{1.0, 1.0, 0.0}}),
                          ConstraintMatrix(A), Vector{{1.0, 2.0}}, 3,
                          parameters);
    return {std::string(name), std::move(program), Vector{{1.0, 1.0, 1.0}},
            Vector{{0.0, 0.0}}, Vector{{0.5, 1.0, 0.5}},
            PrimalDualPair{Vector{{0.0, 0.0, 1.0}}, Vector{{-0.5, 0.25}}}};
  }
  if (name == "zero_obj") {
    // Every feasible point of {x₁ + x₂ = 1, x ≥ 0} is optimal.
    Eigen::MatrixXd A(1, 2);
    A << 1, 1;
    ConvexProgram program(zero_objective(), ConstraintMatrix(A), Vector{{1.0}},
                          2, parameters);
    return {std::string(name), std::move(program), Vector{{0.9, 0.3}},
            Vector{{0.0}}, Vector{{0.3, 0.7}},
            PrimalDualPair{Vector{{0.5, 0.5}}, Vector{{0.0}}}};
  }
  throw LookupError(fmt::format("unknown builtin problem '{}'; available: {}",
                                name, fmt::join(builtin_names(), ", ")));
}

double evaluate_objective(const ConvexProgram& program, const Vector& x) {
  require_size(x, program.n(), "objective");
  require_finite_input(x, "objective");
  const double value = program.objective().value(x);
  if (!std::isfinite(value)) {
    std::vector<Index> all(static_cast<std::size_t>(x.size()));
    for (Index i = 0; i < x.size(); ++i) {
      all[static_cast<std::size_t>(i)] = i;
    }
    throw EvaluationError(
        fmt::format("objective: non-finite value {} at x = [{}]", value,
                    fmt::join(x.begin(), x.end(), ", ")),
        std::move(all));
  }
  return value;
}

Vector evaluate_gradient(const ConvexProgram& program, const Vector& x) {
  require_size(x, program.n(), "gradient");
  require_finite_input(x, "gradient");
  Vector g = program.objective().gradient(x);
  require_size(g, program.n(), "gradient output");
  auto bad = nonfinite_indices(g);
  if (!bad.empty()) {
    throw EvaluationError(
        fmt::format("gradient: non-finite entries at coordinates {}", bad),
        std::move(bad));
  }
  return g;
}

Vector hessian_vector_product(const ConvexProgram& program, const Vector& x,
                              const Vector& v) {
  if (!program.objective().has_hessian()) {
    throw CapabilityError("objective has no Hessian-vector oracle");
  }
  require_size(x, program.n(), "Hessian-vector x");
  require_size(v, program.n(), "Hessian-vector v");
  require_finite_input(x, "Hessian-vector x");
  require_finite_input(v, "Hessian-vector v");
  Vector hv = program.objective().hessian_vector(x, v);
  require_size(hv, program.n(), "Hessian-vector output");
  auto bad = nonfinite_indices(hv);
  if (!bad.empty()) {
    throw EvaluationError(
        fmt::format("Hessian-vector: non-finite entries at coordinates {}",
                    bad),
        std::move(bad));
  }
  return hv;
}

Vector constraint_residual(const ConvexProgram& program, const Vector& x) {
  return program.A().apply(x) - program.b();
}

bool is_interior(const Vector& x, Index s) {
  for (Index i = 0; i < s; ++i) {
    if (!(x[i] > 0.0)) {
      return false;
    }
  }
  return true;
}

void require_interior(const ConvexProgram& program, const Vector& x) {
  require_size(x, program.n(), "state x");
  for (Index i = 0; i < program.s(); ++i) {
    if (!(x[i] > 0.0)) {
      throw DomainError(
          fmt::format("x[{}] = {} is not strictly positive", i, x[i]), i);
    }
  }
}

}  // namespace ipal
