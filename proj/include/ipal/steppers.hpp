#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "ipal/dynamics.hpp"
#include "ipal/monitors.hpp"
#include "ipal/problem.hpp"

namespace ipal {

enum class StepperVariant {
  kExplicit,
  kSemiImplicitHessian,
  kSemiImplicitFull,
  kGaussSeidel,
  kPartialUpdate,
};

std::string_view to_string(StepperVariant variant);

/// Parses "explicit", "semi_implicit_hessian", ... Throws LookupError.
StepperVariant parse_stepper_variant(std::string_view name);

/// Which residual drives the multiplier step: Ax^k − b (kPre) or
/// Ax^{k+1} − b (kPost).
enum class DualUpdate { kPre, kPost };

struct StepperConfig {
  StepperVariant variant = StepperVariant::kExplicit;
  /// Direction parameter h_k of the semi-implicit directions, and the trial
  /// step of the Gauss–Seidel sweep.
  double h = 1.0;
  /// First trial step of the line search (before the boundary cap).
  double max_step = 1.0;
  double armijo_c = 1e-4;
  double backtrack_ratio = 0.5;
  /// Fraction-to-boundary parameter θ.
  double theta = 0.99;
  double cg_tol = 1e-10;
  int cg_max_iters = 1000;
  bool jacobi_preconditioner = false;
  double kkt_tol = 1e-6;
  int max_iters = 50'000;
  /// The line search gives up below this step.
  double min_step = 1e-16;
  DualUpdate dual_update = DualUpdate::kPre;

  void validate() const;
};

/// Disjoint nonempty index sets covering {0, …, n − 1}.
class BlockPartition {
 public:
  /// Throws DomainError unless the blocks are nonempty, disjoint and cover
  /// {0, …, n − 1}.
  BlockPartition(std::vector<std::vector<Index>> blocks, Index n);

  /// One block holding every coordinate.
  static BlockPartition whole(Index n);
  /// n singleton blocks.
  static BlockPartition singletons(Index n);
  /// p contiguous blocks of near-equal size.
  static BlockPartition contiguous(Index n, Index p);

  const std::vector<std::vector<Index>>& blocks() const { return blocks_; }
  Index size() const { return static_cast<Index>(blocks_.size()); }
  Index dimension() const { return n_; }

 private:
  std::vector<std::vector<Index>> blocks_;
  Index n_;
};

/// Positive diagonal weights W of the weighted flow dx/dt = −WU²z.
class WeightVector {
 public:
  explicit WeightVector(Vector w);
  static WeightVector ones(Index n) { return WeightVector(Vector::Ones(n)); }

  const Vector& w() const { return w_; }

 private:
  Vector w_;
};

struct CgResult {
  Vector solution;
  int iterations = 0;
  double relative_residual = 0.0;
};

using LinearOperator = std::function<Vector(const Vector&)>;

/// Conjugate gradient for a symmetric positive definite operator, stopping at
/// ‖r‖ ≤ tol·‖rhs‖. `inverse_diagonal` enables Jacobi preconditioning.
/// Throws SolverError carrying the achieved residual after max_iters.
CgResult conjugate_gradient(const LinearOperator& op, const Vector& rhs,
                            double tol, int max_iters,
                            const Vector* inverse_diagonal = nullptr);

/// Explicit direction (−U²z, σ₂(Ax − b)); the same computation as flow_rhs.
FlowDerivative direction_explicit(const ConvexProgram& program, const Vector& x,
                                  const Vector& y);

struct SemiImplicitDirection {
  Vector dx;
  int cg_iterations = 0;
  double cg_residual = 0.0;
};

/// −U[I + hU∇²fU]⁻¹Uz, solved by CG with Hessian-vector products only.
SemiImplicitDirection direction_semi_implicit_hessian(
    const ConvexProgram& program, const Vector& x, const Vector& y, double h,
    const StepperConfig& config);

/// −U[I + hU(∇²f + σ₁AᵀA)U]⁻¹Uz, solved by CG with products only.
SemiImplicitDirection direction_semi_implicit_full(const ConvexProgram& program,
                                                   const Vector& x,
                                                   const Vector& y, double h,
                                                   const StepperConfig& config);

/// Block direction on the coordinates `block` (zero elsewhere):
/// −U_BB[I + hU_BB(∇²f + σ₁AᵀA)_BB U_BB]⁻¹U_BB z_B.
SemiImplicitDirection direction_block(const ConvexProgram& program,
                                      const Vector& x, const Vector& y,
                                      const std::vector<Index>& block, double h,
                                      const StepperConfig& config);

struct LineSearchResult {
  double step = 0.0;
  /// False when ∇φᵀdx ≥ 0; the step is then 0.
  bool descent = false;
  int backtracks = 0;
  double phi_before = 0.0;
  double phi_after = 0.0;
};

/// Armijo backtracking on φ(x) = L̃_{σ₁}(x, y) at fixed y, starting from
/// min(max_step, fraction-to-boundary cap).
LineSearchResult line_search(const ConvexProgram& program, const Vector& x,
                             const Vector& y, const Vector& dx,
                             const StepperConfig& config);

/// One Gauss–Seidel sweep of the weighted explicit scheme: block by block,
/// x_B ← x_B − h_B(W U(x)² z)_B with z refreshed at the partially updated
/// point, U frozen at the sweep's start, y fixed, and h_B the
/// fraction-to-boundary clamp of h. Returns the new x.
Vector gauss_seidel_sweep(const ConvexProgram& program, const Vector& x,
                          const Vector& y, const BlockPartition& partition,
                          const WeightVector& weights, double h,
                          double theta = 0.99);

struct PartialUpdateResult {
  Vector x;
  std::vector<double> block_steps;
  int cg_iterations = 0;
};

/// Partially updated scheme: for each block in turn, solve the block system
/// at the current point, line-search along it and move that block only.
PartialUpdateResult partial_update_sweep(const ConvexProgram& program,
                                         const Vector& x, const Vector& y,
                                         const BlockPartition& partition,
                                         double h, const StepperConfig& config);

enum class SolveStatus { kConverged, kMaxIterations, kStalled };

std::string_view to_string(SolveStatus status);

struct IterationRecord {
  int iter = 0;
  double step = 0.0;
  double phi = 0.0;
  double kkt_max = 0.0;
  double norm_Ax_b = 0.0;
  double norm_U2z = 0.0;
  int cg_iters = 0;
};

struct SolveResult {
  Vector x;
  Vector y;
  KktReport kkt;
  SolveStatus status = SolveStatus::kMaxIterations;
  int iterations = 0;
  std::vector<IterationRecord> log;
  std::string diagnostics;
};

/// Outer loop: primal step by the configured variant, then
/// y ← y + α σ₂(Ax − b), until the KKT residual drops below kkt_tol.
///
/// α reuses the primal step; when the primal direction is not a descent
/// direction (e.g. x already minimizes φ(·, y)) the multiplier step uses
/// max_step instead. `partition` defaults to singletons and `weights` to ones.
SolveResult solve(const ConvexProgram& program, const Vector& x0,
                  const Vector& y0, const StepperConfig& config,
                  const BlockPartition* partition = nullptr,
                  const WeightVector* weights = nullptr);

}  // namespace ipal
