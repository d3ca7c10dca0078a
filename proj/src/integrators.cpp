#include "ipal/integrators.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ipal/dynamics.hpp"
#include "ipal/errors.hpp"

namespace ipal {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw DomainError("integrator tolerances must be positive");
  }
  if (!(h_min > 0.0 && h_min <= h_init && h_init <= h_max)) {
    throw DomainError(
        fmt::format("need 0 < h_min <= h_init <= h_max, got {} {} {}", h_min,
                    h_init, h_max));
  }
  if (!(fraction_to_boundary > 0.0 && fraction_to_boundary < 1.0)) {
    throw DomainError("fraction_to_boundary must lie in (0, 1)");
  }
  if (max_steps <= 0 || sample_stride < 0) {
    throw DomainError("max_steps must be positive and sample_stride >= 0");
  }
}

std::string_view to_string(IntegrationStatus status) {
  switch (status) {
    case IntegrationStatus::kReachedEnd:
      return "reached_end";
    case IntegrationStatus::kStalled:
      return "stalled";
    case IntegrationStatus::kStepUnderflow:
      return "step_underflow";
    case IntegrationStatus::kMaxSteps:
      return "max_steps";
    case IntegrationStatus::kFailed:
      return "failed";
  }
  return "unknown";
}

OdeSolution integrate_embedded_rk23(const OdeSystem& system,
                                    const IntegratorConfig& config,
                                    const Vector& initial, double t0,
                                    double T) {
  config.validate();
  if (!(T >= t0)) {
    throw DomainError(fmt::format("end time {} precedes start {}", T, t0));
  }

  OdeSolution solution;
  solution.times.push_back(t0);
  solution.states.push_back(initial);
  if (T == t0) {
    return solution;
  }

  std::vector<double> targets;
  for (double ts : config.sample_times) {
    if (ts > t0 && ts < T) {
      targets.push_back(ts);
    }
  }
  targets.push_back(T);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  std::size_t next_target = 0;

  auto& stats = solution.stats;
  auto rhs = [&](const Vector& w) {
    ++stats.rhs_evaluations;
    return system.rhs(w);
  };
  auto admissible = [&](const Vector& from, const Vector& trial) {
    return trial.allFinite() &&
           (!system.admissible || system.admissible(from, trial));
  };

  double t = t0;
  Vector w = initial;
  double h = std::min(config.h_init, config.h_max);
  Vector k1;
  try {
    k1 = rhs(w);
  } catch (const Error& e) {
    solution.status = IntegrationStatus::kFailed;
    solution.failure = e.what();
    return solution;
  }

  while (true) {
    if (stats.accepted >= config.max_steps) {
      solution.status = IntegrationStatus::kMaxSteps;
      break;
    }
    if (h < config.h_min) {
      solution.status = IntegrationStatus::kStepUnderflow;
      break;
    }

    const double target = targets[next_target];
    double step = h;
    bool lands = false;
    if (t + step >= target || t + 1.01 * step >= target) {
      step = target - t;
      lands = true;
    }
    if (t + step == t) {
      solution.status = IntegrationStatus::kStalled;
      break;
    }

    Vector w_new;
    Vector k4;
    double err = 0.0;
    bool inadmissible = false;
    try {
      const Vector w2 = w + (0.5 * step) * k1;
      if (!admissible(w, w2)) {
        inadmissible = true;
      } else {
        const Vector k2 = rhs(w2);
        const Vector w3 = w + (0.75 * step) * k2;
        if (!admissible(w, w3)) {
          inadmissible = true;
        } else {
          const Vector k3 = rhs(w3);
          w_new = w + step * ((2.0 / 9.0) * k1 + (1.0 / 3.0) * k2 +
                              (4.0 / 9.0) * k3);
          if (!admissible(w, w_new)) {
            inadmissible = true;
          } else {
            k4 = rhs(w_new);
            const Vector e = step * ((-5.0 / 72.0) * k1 + (1.0 / 12.0) * k2 +
                                     (1.0 / 9.0) * k3 + (-1.0 / 8.0) * k4);
            double sum = 0.0;
            for (Index i = 0; i < w.size(); ++i) {
              const double scale =
                  config.abs_tol +
                  config.rel_tol * std::max(std::abs(w[i]), std::abs(w_new[i]));
              const double r = e[i] / scale;
              sum += r * r;
            }
            err = w.size() > 0 ? std::sqrt(sum / static_cast<double>(w.size()))
                               : 0.0;
            if (!std::isfinite(err)) {
              inadmissible = true;
            }
          }
        }
      }
    } catch (const DomainError&) {
      inadmissible = true;
    } catch (const Error& e) {
      solution.status = IntegrationStatus::kFailed;
      solution.failure = e.what();
      break;
    }

    if (inadmissible) {
      ++stats.rejected;
      ++stats.rejected_interiority;
      h = 0.5 * step;
      continue;
    }
    if (err > 1.0) {
      ++stats.rejected;
      h = step * std::max(0.2, 0.9 * std::pow(err, -1.0 / 3.0));
      continue;
    }

    ++stats.accepted;
    t = lands ? target : t + step;
    w = std::move(w_new);
    k1 = std::move(k4);
    if (system.post_step && system.post_step(w)) {
      try {
        k1 = rhs(w);
      } catch (const Error& e) {
        solution.status = IntegrationStatus::kFailed;
        solution.failure = e.what();
        solution.times.push_back(t);
        solution.states.push_back(w);
        break;
      }
    }

    const double factor =
        err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -1.0 / 3.0)))
                  : 5.0;
    // A step shortened to hit a sample time does not shrink the next one.
    h = std::min(config.h_max, std::max(lands ? h : 0.0, step * factor));

    const bool stride_hit = config.sample_stride > 0 &&
                            stats.accepted % config.sample_stride == 0;
    if (lands || stride_hit) {
      solution.times.push_back(t);
      solution.states.push_back(w);
    }
    if (lands) {
      ++next_target;
      if (next_target == targets.size()) {
        solution.status = IntegrationStatus::kReachedEnd;
        break;
      }
    }
  }

  if (solution.status != IntegrationStatus::kReachedEnd &&
      solution.times.back() != t) {
    solution.times.push_back(t);
    solution.states.push_back(w);
  }
  return solution;
}

TrajectoryState step_explicit_euler(const ConvexProgram& program,
                                    const TrajectoryState& state, double h,
                                    double theta) {
  if (!(h > 0.0)) {
    throw DomainError("explicit Euler step needs h > 0");
  }
  const FlowDerivative d = flow_rhs(program, state.x, state.y);
  const double step = std::min(
      h, fraction_to_boundary_step(state.x, d.dx, program.s(), theta));
  return {state.t + step, state.x + step * d.dx, state.y + step * d.dy};
}

TrajectoryLog integrate_adaptive(const ConvexProgram& program,
                                 const IntegratorConfig& config,
                                 const Vector& x0, const Vector& y0, double T,
                                 const PrimalDualPair* optimum, double t0) {
  require_interior(program, x0);
  if (y0.size() != program.m()) {
    throw DimensionError(
        fmt::format("y0 has length {}, expected {}", y0.size(), program.m()));
  }
  const Index n = program.n();
  const Index m = program.m();
  const Index s = program.s();
  const double keep = 1.0 - config.fraction_to_boundary;

  OdeSystem system;
  system.rhs = [&](const Vector& w) {
    const FlowDerivative d = flow_rhs(program, w.head(n), w.tail(m));
    Vector out(n + m);
    out << d.dx, d.dy;
    return out;
  };
  system.admissible = [&](const Vector& from, const Vector& trial) {
    for (Index i = 0; i < s; ++i) {
      if (!(trial[i] > 0.0) || trial[i] < keep * from[i]) {
        return false;
      }
    }
    return true;
  };

  Vector w0(n + m);
  w0 << x0, y0;
  const OdeSolution solution = integrate_embedded_rk23(system, config, w0, t0, T);

  TrajectoryLog log;
  log.status = solution.status;
  log.stats = solution.stats;
  log.failure = solution.failure;
  log.samples.reserve(solution.times.size());
  for (std::size_t k = 0; k < solution.times.size(); ++k) {
    TrajectorySample sample;
    sample.t = solution.times[k];
    sample.x = solution.states[k].head(n);
    sample.y = solution.states[k].tail(m);
    require_interior(program, sample.x);
    sample.monitors = evaluate_monitors(program, sample.x, sample.y, optimum);
    log.samples.push_back(std::move(sample));
  }
  return log;
}

}  // namespace ipal
