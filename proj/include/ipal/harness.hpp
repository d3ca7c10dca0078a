#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipal/integrators.hpp"
#include "ipal/monitors.hpp"
#include "ipal/steppers.hpp"

namespace ipal {

/// Methods accepted by `run`: the continuous flow, the affine-scaling
/// baseline, or one of the discrete stepper variants.
const std::vector<std::string>& run_methods();

inline constexpr int kRunConfigSchemaVersion = 1;

struct RunConfig {
  /// Builtin name or path to a JSON problem file.
  std::string problem = "quartic_p12";
  std::string method = "flow";
  /// Horizon for flow and affine runs.
  double T = 100.0;
  std::optional<double> gamma;
  std::optional<double> sigma1;
  std::optional<double> sigma2;
  std::optional<Vector> x0;
  std::optional<Vector> y0;
  /// Draw x0 uniformly in [0.5, 1.5]ⁿ from `seed` instead of the default.
  bool random_x0 = false;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  /// "csv" or "json".
  std::string format = "csv";
  /// Number of blocks for gauss_seidel / partial_update (0: singletons).
  int blocks = 0;
  IntegratorConfig integrator;
  StepperConfig stepper;

  /// Throws PreconditionError/LookupError on incompatible settings.
  void validate() const;
};

/// Overlays the keys of a JSON config object onto `config`. Recognized keys
/// mirror the CLI flags (problem, method, T, gamma, sigma1, sigma2, x0, y0,
/// seed, out, format, blocks) plus "integrator" {rel_tol, abs_tol, h_init,
/// h_min, h_max, fraction_to_boundary, max_steps} and "stepper" {h,
/// max_step, armijo_c, backtrack_ratio, theta, cg_tol, cg_max_iters,
/// jacobi_preconditioner, kkt_tol, max_iters, dual_update}. Requires
/// "schema_version": 1.
void apply_run_config(const nlohmann::json& document, RunConfig& config);

struct RunSummary {
  std::string problem;
  std::string method;
  /// Integration or solver status ("reached_end", "converged", "stalled", …).
  std::string status;
  Vector x;
  Vector y;
  KktReport kkt;
  double wall_seconds = 0.0;
  std::size_t samples = 0;
  std::vector<std::filesystem::path> files;

  nlohmann::json to_json() const;
};

/// Runs one method and writes `trajectory.{csv,json}` (flow),
/// `affine.{csv,json}` (affine) or `iterations.{csv,json}` (steppers) plus
/// `summary.json` into config.out. Flow and affine runs without sample
/// times or stride are recorded ten times per decade from t = 0.01.
RunSummary cmd_run(const RunConfig& config);

/// One row of the trajectory-versus-affine-scaling comparison on
/// quartic_p12. NaN marks cells the run never reached.
struct Table1Row {
  double T = 0.0;
  double sp_error = 0.0;
  double ap_error = 0.0;
  double sp_residual = 0.0;
  double ap_residual = 0.0;
  double sp_min = 0.0;
  double ap_min = 0.0;
  double ap_kappa = 0.0;
  std::string sp_status = "ok";
  std::string ap_status = "ok";
};

struct Table1Options {
  /// Adds T = 1e7, 1e8, 1e9 (long runtime).
  bool long_rows = false;
  /// Worker threads; the two methods run concurrently when ≥ 2.
  int threads = 1;
};

inline constexpr double kTable1FlowRelTol = 1e-12;
inline constexpr double kTable1FlowAbsTol = 1e-15;

/// Integrates both paths on quartic_p12 (γ = 0.75, σ₁ = σ₂ = 1; flow from
/// ((1, 1, 1), (0, 1)), baseline from (0.5, 1, 0.5)), sampling T = 10, 10², ….
/// The baseline uses rel_tol 1e-6 and abs_tol 1e-9; the flow uses
/// kTable1FlowRelTol and kTable1FlowAbsTol.
std::vector<Table1Row> compute_table1(const Table1Options& options);

void write_table1_text(std::ostream& out, const std::vector<Table1Row>& rows);
void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows);

/// Computes the table and writes table1.txt and table1.csv into `out`.
std::vector<Table1Row> cmd_table1(const std::filesystem::path& out,
                                  const Table1Options& options);

struct PlotDataSummary {
  std::size_t samples = 0;
  std::vector<std::filesystem::path> files;
  /// Last value of (y₁ + 2y₂)/3 when the derived series was written.
  std::optional<double> final_dual_combination;
};

/// Splits a trajectory CSV into per-coordinate series x_i.csv and y_j.csv
/// (columns t, value). For quartic_p12 also writes dual_combination.csv with
/// (y₁ + 2y₂)/3, whose limit is −1 on that problem's dual optimal set.
/// Throws Error on a missing or empty log.
PlotDataSummary cmd_plotdata(const std::filesystem::path& log,
                             const std::filesystem::path& out,
                             const std::string& problem);

/// Thread count from IPAL_THREADS (default 1).
int threads_from_environment();

}  // namespace ipal
