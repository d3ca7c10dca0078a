#include "ipal/steppers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ipal/errors.hpp"

namespace ipal {

namespace {

std::vector<Index> all_indices(Index n) {
  std::vector<Index> indices(static_cast<std::size_t>(n));
  std::iota(indices.begin(), indices.end(), Index{0});
  return indices;
}

// Solves [I + hU_BB(∇²f + σ₁AᵀA·[penalty])_BB U_BB] w = U_B z_B and returns
// the embedded direction −U_B w.
SemiImplicitDirection semi_implicit(const ConvexProgram& program,
                                    const Vector& x, const Vector& y,
                                    const std::vector<Index>& block, double h,
                                    bool penalty, const StepperConfig& config) {
  if (!program.objective().has_hessian()) {
    throw CapabilityError(
        "semi-implicit directions need a Hessian-vector oracle");
  }
  if (!(h > 0.0)) {
    throw DomainError("semi-implicit direction needs h > 0");
  }
  require_interior(program, x);
  const Index n = program.n();
  const Vector u = scaling_vector(x, program.gamma(), program.s()).u;
  const Vector z = dual_residual(program, x, y);
  const auto nb = static_cast<Index>(block.size());
  const double sigma1 = program.sigma1();

  auto curvature = [&](const Vector& full) {
    Vector t = hessian_vector_product(program, x, full);
    if (penalty) {
      t += sigma1 * program.A().apply_transpose(program.A().apply(full));
    }
    return t;
  };
  auto op = [&](const Vector& v) {
    Vector full = Vector::Zero(n);
    for (Index k = 0; k < nb; ++k) {
      const Index i = block[static_cast<std::size_t>(k)];
      full[i] = u[i] * v[k];
    }
    const Vector t = curvature(full);
    Vector out(nb);
    for (Index k = 0; k < nb; ++k) {
      const Index i = block[static_cast<std::size_t>(k)];
      out[k] = v[k] + h * u[i] * t[i];
    }
    return out;
  };

  Vector rhs(nb);
  for (Index k = 0; k < nb; ++k) {
    const Index i = block[static_cast<std::size_t>(k)];
    rhs[k] = u[i] * z[i];
  }

  Vector inverse_diagonal;
  if (config.jacobi_preconditioner) {
    inverse_diagonal.resize(nb);
    for (Index k = 0; k < nb; ++k) {
      const Index i = block[static_cast<std::size_t>(k)];
      Vector e = Vector::Zero(n);
      e[i] = 1.0;
      inverse_diagonal[k] = 1.0 / (1.0 + h * u[i] * u[i] * curvature(e)[i]);
    }
  }

  const CgResult cg = conjugate_gradient(
      op, rhs, config.cg_tol, config.cg_max_iters,
      config.jacobi_preconditioner ? &inverse_diagonal : nullptr);

  SemiImplicitDirection direction;
  direction.dx = Vector::Zero(n);
  for (Index k = 0; k < nb; ++k) {
    const Index i = block[static_cast<std::size_t>(k)];
    direction.dx[i] = -u[i] * cg.solution[k];
  }
  direction.cg_iterations = cg.iterations;
  direction.cg_residual = cg.relative_residual;
  return direction;
}

}  // namespace

std::string_view to_string(StepperVariant variant) {
  switch (variant) {
    case StepperVariant::kExplicit:
      return "explicit";
    case StepperVariant::kSemiImplicitHessian:
      return "semi_implicit_hessian";
    case StepperVariant::kSemiImplicitFull:
      return "semi_implicit_full";
    case StepperVariant::kGaussSeidel:
      return "gauss_seidel";
    case StepperVariant::kPartialUpdate:
      return "partial_update";
  }
  return "unknown";
}

StepperVariant parse_stepper_variant(std::string_view name) {
  for (auto variant :
       {StepperVariant::kExplicit, StepperVariant::kSemiImplicitHessian,
        StepperVariant::kSemiImplicitFull, StepperVariant::kGaussSeidel,
        StepperVariant::kPartialUpdate}) {
    if (to_string(variant) == name) {
      return variant;
    }
  }
  throw LookupError(fmt::format("unknown stepper variant '{}'", name));
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIterations:
      return "max_iterations";
    case SolveStatus::kStalled:
      return "stalled";
  }
  return "unknown";
}

void StepperConfig::validate() const {
  if (!(h > 0.0 && max_step > 0.0 && armijo_c > 0.0 && cg_tol > 0.0 &&
        kkt_tol > 0.0 && min_step > 0.0)) {
    throw DomainError("stepper parameters must be positive");
  }
  if (!(armijo_c < 1.0 && backtrack_ratio > 0.0 && backtrack_ratio < 1.0 &&
        theta > 0.0 && theta < 1.0)) {
    throw DomainError("stepper ratios must lie in (0, 1)");
  }
  if (cg_max_iters <= 0 || max_iters < 0) {
    throw DomainError("iteration limits must be positive");
  }
}

BlockPartition::BlockPartition(std::vector<std::vector<Index>> blocks, Index n)
    : blocks_(std::move(blocks)), n_(n) {
  if (blocks_.empty() || static_cast<Index>(blocks_.size()) > n) {
    throw DomainError("a partition needs between 1 and n blocks");
  }
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (const auto& block : blocks_) {
    if (block.empty()) {
      throw DomainError("partition blocks must be nonempty");
    }
    for (Index i : block) {
      if (i < 0 || i >= n) {
        throw DomainError(fmt::format("index {} outside [0, {})", i, n), i);
      }
      if (seen[static_cast<std::size_t>(i)]++ != 0) {
        throw DomainError(fmt::format("index {} appears in two blocks", i), i);
      }
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (seen[static_cast<std::size_t>(i)] == 0) {
      throw DomainError(fmt::format("index {} is not covered", i), i);
    }
  }
}

BlockPartition BlockPartition::whole(Index n) {
  return BlockPartition({all_indices(n)}, n);
}

BlockPartition BlockPartition::singletons(Index n) {
  std::vector<std::vector<Index>> blocks;
  for (Index i = 0; i < n; ++i) {
    blocks.push_back({i});
  }
  return BlockPartition(std::move(blocks), n);
}

BlockPartition BlockPartition::contiguous(Index n, Index p) {
  if (p <= 0 || p > n) {
    throw DomainError("need 1 <= p <= n");
  }
  std::vector<std::vector<Index>> blocks(static_cast<std::size_t>(p));
  for (Index i = 0; i < n; ++i) {
    blocks[static_cast<std::size_t>(i * p / n)].push_back(i);
  }
  return BlockPartition(std::move(blocks), n);
}

WeightVector::WeightVector(Vector w) : w_(std::move(w)) {
  for (Index i = 0; i < w_.size(); ++i) {
    if (!(w_[i] > 0.0) || !std::isfinite(w_[i])) {
      throw DomainError(fmt::format("weight {} is not positive", i), i);
    }
  }
}

CgResult conjugate_gradient(const LinearOperator& op, const Vector& rhs,
                            double tol, int max_iters,
                            const Vector* inverse_diagonal) {
  CgResult result;
  result.solution = Vector::Zero(rhs.size());
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    return result;
  }
  auto precondition = [&](const Vector& r) {
    return inverse_diagonal ? Vector(inverse_diagonal->cwiseProduct(r)) : r;
  };

  Vector r = rhs;
  Vector zr = precondition(r);
  Vector p = zr;
  double rz = r.dot(zr);
  for (int k = 1; k <= max_iters; ++k) {
    const Vector Ap = op(p);
    const double curvature = p.dot(Ap);
    if (!(curvature > 0.0)) {
      throw SolverError("conjugate gradient met a non-positive curvature",
                        r.norm() / rhs_norm, k);
    }
    const double alpha = rz / curvature;
    result.solution += alpha * p;
    r -= alpha * Ap;
    result.iterations = k;
    result.relative_residual = r.norm() / rhs_norm;
    if (result.relative_residual <= tol) {
      return result;
    }
    zr = precondition(r);
    const double rz_next = r.dot(zr);
    p = zr + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw SolverError(
      fmt::format("conjugate gradient stopped at relative residual {:.3e} "
                  "after {} iterations",
                  result.relative_residual, max_iters),
      result.relative_residual, max_iters);
}

FlowDerivative direction_explicit(const ConvexProgram& program, const Vector& x,
                                  const Vector& y) {
  return flow_rhs(program, x, y);
}

SemiImplicitDirection direction_semi_implicit_hessian(
    const ConvexProgram& program, const Vector& x, const Vector& y, double h,
    const StepperConfig& config) {
  return semi_implicit(program, x, y, all_indices(program.n()), h, false,
                       config);
}

SemiImplicitDirection direction_semi_implicit_full(const ConvexProgram& program,
                                                   const Vector& x,
                                                   const Vector& y, double h,
                                                   const StepperConfig& config) {
  return semi_implicit(program, x, y, all_indices(program.n()), h, true,
                       config);
}

SemiImplicitDirection direction_block(const ConvexProgram& program,
                                      const Vector& x, const Vector& y,
                                      const std::vector<Index>& block, double h,
                                      const StepperConfig& config) {
  for (Index i : block) {
    if (i < 0 || i >= program.n()) {
      throw DimensionError(fmt::format("block index {} out of range", i));
    }
  }
  return semi_implicit(program, x, y, block, h, true, config);
}

LineSearchResult line_search(const ConvexProgram& program, const Vector& x,
                             const Vector& y, const Vector& dx,
                             const StepperConfig& config) {
  LineSearchResult result;
  result.phi_before = augmented_lagrangian(program, x, y);
  result.phi_after = result.phi_before;
  const double slope = dual_residual(program, x, y).dot(dx);
  if (!(slope < 0.0)) {
    return result;
  }
  result.descent = true;

  double step = std::min(config.max_step,
                         fraction_to_boundary_step(x, dx, program.s(),
                                                   config.theta));
  while (step >= config.min_step) {
    const Vector trial = x + step * dx;
    const double phi = augmented_lagrangian(program, trial, y);
    if (phi <= result.phi_before + config.armijo_c * step * slope) {
      result.step = step;
      result.phi_after = phi;
      return result;
    }
    step *= config.backtrack_ratio;
    ++result.backtracks;
  }
  return result;
}

Vector gauss_seidel_sweep(const ConvexProgram& program, const Vector& x,
                          const Vector& y, const BlockPartition& partition,
                          const WeightVector& weights, double h, double theta) {
  require_interior(program, x);
  if (partition.dimension() != program.n() ||
      weights.w().size() != program.n()) {
    throw DimensionError("partition and weights must match the program");
  }
  const ScalingVector scaling = scaling_vector(x, program.gamma(), program.s());
  const Vector& w = weights.w();
  const Index s = program.s();

  Vector current = x;
  for (const auto& block : partition.blocks()) {
    const Vector z = dual_residual(program, current, y);
    const Vector descent = -scaling.squared_times(z);
    double step = h;
    for (Index i : block) {
      const double d = w[i] * descent[i];
      if (i < s && d < 0.0) {
        step = std::min(step, theta * current[i] / -d);
      }
    }
    for (Index i : block) {
      current[i] = current[i] + step * (w[i] * descent[i]);
    }
    if (!is_interior(current, s)) {
      throw DomainError("Gauss-Seidel sweep left the interior");
    }
  }
  return current;
}

PartialUpdateResult partial_update_sweep(const ConvexProgram& program,
                                         const Vector& x, const Vector& y,
                                         const BlockPartition& partition,
                                         double h, const StepperConfig& config) {
  if (partition.dimension() != program.n()) {
    throw DimensionError("partition must match the program");
  }
  PartialUpdateResult result;
  result.x = x;
  for (const auto& block : partition.blocks()) {
    const SemiImplicitDirection d =
        direction_block(program, result.x, y, block, h, config);
    result.cg_iterations += d.cg_iterations;
    const LineSearchResult ls = line_search(program, result.x, y, d.dx, config);
    result.block_steps.push_back(ls.step);
    if (ls.step > 0.0) {
      result.x += ls.step * d.dx;
    }
  }
  return result;
}

SolveResult solve(const ConvexProgram& program, const Vector& x0,
                  const Vector& y0, const StepperConfig& config,
                  const BlockPartition* partition, const WeightVector* weights) {
  config.validate();
  require_interior(program, x0);
  if (y0.size() != program.m()) {
    throw DimensionError("y0 does not match the number of constraints");
  }
  const bool needs_hessian =
      config.variant == StepperVariant::kSemiImplicitHessian ||
      config.variant == StepperVariant::kSemiImplicitFull ||
      config.variant == StepperVariant::kPartialUpdate;
  if (needs_hessian && !program.objective().has_hessian()) {
    throw CapabilityError(fmt::format("variant {} needs a Hessian oracle",
                                      to_string(config.variant)));
  }
  const BlockPartition default_partition =
      BlockPartition::singletons(program.n());
  const WeightVector default_weights = WeightVector::ones(program.n());
  const BlockPartition& blocks = partition ? *partition : default_partition;
  const WeightVector& W = weights ? *weights : default_weights;

  SolveResult result;
  result.x = x0;
  result.y = y0;

  auto record = [&](int iter, double step, int cg_iters) {
    IterationRecord rec;
    rec.iter = iter;
    rec.step = step;
    rec.phi = augmented_lagrangian(program, result.x, result.y);
    rec.kkt_max = result.kkt.max();
    rec.norm_Ax_b = result.kkt.primal_feasibility;
    rec.norm_U2z = stationarity_norm(program, result.x, result.y).scaled;
    rec.cg_iters = cg_iters;
    result.log.push_back(rec);
  };

  result.kkt = kkt_report(program, result.x, result.y);
  record(0, 0.0, 0);
  if (result.kkt.max() <= config.kkt_tol) {
    result.status = SolveStatus::kConverged;
    return result;
  }

  int zero_steps = 0;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const Vector& x = result.x;
    const Vector residual_pre = constraint_residual(program, x);
    Vector x_next = x;
    double step = 0.0;
    bool descent = true;
    int cg_iters = 0;

    switch (config.variant) {
      case StepperVariant::kExplicit:
      case StepperVariant::kSemiImplicitHessian:
      case StepperVariant::kSemiImplicitFull: {
        Vector dx;
        if (config.variant == StepperVariant::kExplicit) {
          dx = direction_explicit(program, x, result.y).dx;
        } else {
          const SemiImplicitDirection d =
              config.variant == StepperVariant::kSemiImplicitHessian
                  ? direction_semi_implicit_hessian(program, x, result.y,
                                                    config.h, config)
                  : direction_semi_implicit_full(program, x, result.y,
                                                 config.h, config);
          dx = d.dx;
          cg_iters = d.cg_iterations;
        }
        const LineSearchResult ls =
            line_search(program, x, result.y, dx, config);
        descent = ls.descent;
        step = ls.step;
        x_next = x + step * dx;
        break;
      }
      case StepperVariant::kGaussSeidel: {
        const double phi = augmented_lagrangian(program, x, result.y);
        descent = stationarity_norm(program, x, result.y).scaled > 0.0;
        for (double h = config.h; descent && h >= config.min_step;
             h *= config.backtrack_ratio) {
          Vector trial =
              gauss_seidel_sweep(program, x, result.y, blocks, W, h,
                                 config.theta);
          if (augmented_lagrangian(program, trial, result.y) <= phi) {
            x_next = std::move(trial);
            step = h;
            break;
          }
        }
        break;
      }
      case StepperVariant::kPartialUpdate: {
        PartialUpdateResult sweep =
            partial_update_sweep(program, x, result.y, blocks, config.h,
                                 config);
        cg_iters = sweep.cg_iterations;
        step = *std::max_element(sweep.block_steps.begin(),
                                 sweep.block_steps.end());
        descent = step > 0.0 || stationarity_norm(program, x, result.y).scaled > 0.0;
        x_next = std::move(sweep.x);
        break;
      }
    }

    const Vector residual = config.dual_update == DualUpdate::kPre
                                ? residual_pre
                                : constraint_residual(program, x_next);
    const double dual_step = step > 0.0 ? step : config.max_step;
    const bool primal_stuck = step == 0.0 && descent;
    result.x = std::move(x_next);
    if (!primal_stuck) {
      result.y += (dual_step * program.sigma2()) * residual;
    }
    result.iterations = iter;
    result.kkt = kkt_report(program, result.x, result.y);
    record(iter, step, cg_iters);

    if (result.kkt.max() <= config.kkt_tol) {
      result.status = SolveStatus::kConverged;
      return result;
    }
    const bool moved = !primal_stuck && (step > 0.0 || residual.norm() > 0.0);
    zero_steps = moved ? 0 : zero_steps + 1;
    if (zero_steps >= 2) {
      result.status = SolveStatus::kStalled;
      result.diagnostics = fmt::format(
          "no progress for two iterations at iter {}: kkt_max {:.3e}, "
          "|Ax-b| {:.3e}",
          iter, result.kkt.max(), result.kkt.primal_feasibility);
      return result;
    }
  }
  result.status = SolveStatus::kMaxIterations;
  return result;
}

}  // namespace ipal
