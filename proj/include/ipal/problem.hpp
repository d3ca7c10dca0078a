#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace ipal {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Objective oracles for f. The Hessian-vector product is optional; only the
/// semi-implicit steppers need curvature.
struct Objective {
  std::function<double(const Vector& x)> value;
  std::function<Vector(const Vector& x)> gradient;
  std::function<Vector(const Vector& x, const Vector& v)> hessian_vector;

  bool has_hessian() const { return static_cast<bool>(hessian_vector); }
};

/// Objective f(x) = 0.
Objective zero_objective();

/// Objective f(x) = ½xᵀQx + qᵀx with Q symmetric positive semidefinite.
Objective quadratic_objective(Eigen::MatrixXd Q, Vector q);

/// Objective f(x) = cᵀx.
Objective linear_objective(Vector c);

/// Objective f(x) = w‖x + shift‖⁴ + linearᵀx.
Objective quartic_norm_objective(double weight, Vector shift, Vector linear);

/// Linear constraint operator A. Only products with A and Aᵀ are exposed, so
/// nothing downstream can factorize it.
class ConstraintMatrix {
 public:
  /// Product counts, shared between copies of the same matrix.
  struct Counters {
    std::atomic<std::uint64_t> apply{0};
    std::atomic<std::uint64_t> apply_transpose{0};
  };

  ConstraintMatrix() : ConstraintMatrix(Eigen::MatrixXd(0, 0)) {}
  explicit ConstraintMatrix(const Eigen::MatrixXd& dense);
  explicit ConstraintMatrix(Eigen::SparseMatrix<double, Eigen::RowMajor> sparse);

  Index rows() const { return matrix_.rows(); }
  Index cols() const { return matrix_.cols(); }
  Index nonzeros() const { return matrix_.nonZeros(); }

  /// Returns A·x.
  Vector apply(const Vector& x) const;

  /// Returns Aᵀ·y.
  Vector apply_transpose(const Vector& y) const;

  /// Dense copy, used by the affine-scaling baseline and by test oracles.
  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(matrix_); }

  const Counters& counters() const { return *counters_; }

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix_;
  std::shared_ptr<Counters> counters_ = std::make_shared<Counters>();
};

/// Flow parameters γ, σ₁, σ₂.
struct FlowParameters {
  double gamma = 0.75;
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  /// Permits γ = 1 (first-order affine scaling limit). Outside the range the
  /// convergence theory covers, so it must be requested explicitly.
  bool allow_unit_gamma = false;
};

/// min f(x) s.t. Ax = b, x_i ≥ 0 for i < s.
///
/// Immutable after construction; oracles are assumed pure, so instances may be
/// shared across threads.
class ConvexProgram {
 public:
  ConvexProgram(Objective objective, ConstraintMatrix A, Vector b, Index s,
                FlowParameters parameters = {});

  Index n() const { return A_.cols(); }
  Index m() const { return A_.rows(); }
  Index s() const { return s_; }
  double gamma() const { return parameters_.gamma; }
  double sigma1() const { return parameters_.sigma1; }
  double sigma2() const { return parameters_.sigma2; }
  const FlowParameters& parameters() const { return parameters_; }

  const Objective& objective() const { return objective_; }
  const ConstraintMatrix& A() const { return A_; }
  const Vector& b() const { return b_; }

  /// Copy of this program with different flow parameters.
  ConvexProgram with_parameters(const FlowParameters& parameters) const;

 private:
  Objective objective_;
  ConstraintMatrix A_;
  Vector b_;
  Index s_;
  FlowParameters parameters_;
};

/// A point (t, x, y) on the flow.
struct TrajectoryState {
  double t = 0.0;
  Vector x;
  Vector y;
};

/// A primal-dual optimal pair (x*, y*).
struct PrimalDualPair {
  Vector x;
  Vector y;
};

/// A builtin test problem with its customary start points.
struct BuiltinProblem {
  std::string name;
  ConvexProgram program;
  /// Interior start for the flow and the discrete steppers.
  Vector x0;
  Vector y0;
  /// Strictly feasible start (Ax = b, x > 0) for the affine-scaling baseline.
  Vector feasible_x0;
  std::optional<PrimalDualPair> optimum;
};

/// Names accepted by builtin_problem().
const std::vector<std::string>& builtin_names();

/// Returns a builtin problem. Throws LookupError for unknown names.
BuiltinProblem builtin_problem(std::string_view name,
                               const FlowParameters& parameters = {});

/// Returns f(x). Throws EvaluationError on non-finite input or output.
double evaluate_objective(const ConvexProgram& program, const Vector& x);

/// Returns ∇f(x). Throws EvaluationError on non-finite input or output.
Vector evaluate_gradient(const ConvexProgram& program, const Vector& x);

/// Returns ∇²f(x)·v. Throws CapabilityError when the oracle is missing.
Vector hessian_vector_product(const ConvexProgram& program, const Vector& x,
                              const Vector& v);

/// Returns Ax − b.
Vector constraint_residual(const ConvexProgram& program, const Vector& x);

/// Throws DomainError unless x_i > 0 for every i < s.
void require_interior(const ConvexProgram& program, const Vector& x);

/// True when x_i > 0 for every i < s.
bool is_interior(const Vector& x, Index s);

}  // namespace ipal
