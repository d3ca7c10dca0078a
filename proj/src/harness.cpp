#include "ipal/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <random>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "ipal/affine_scaling.hpp"
#include "ipal/errors.hpp"
#include "ipal/problem_io.hpp"
#include "ipal/trajectory_io.hpp"

namespace ipal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(fmt::format("cannot write {}", path.string()));
  }
  return out;
}

Vector json_vector(const nlohmann::json& node, const char* field) {
  if (!node.is_array()) {
    throw Error(fmt::format("config field '{}' must be an array", field));
  }
  Vector v(static_cast<Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v[static_cast<Index>(i)] = node[i].get<double>();
  }
  return v;
}

// Multiplier estimate of the affine-scaling path, y = −(AX²Aᵀ)⁻¹AX²∇f.
Vector affine_multiplier(const ConvexProgram& program, const Vector& x) {
  const Eigen::MatrixXd A = program.A().to_dense();
  const Eigen::MatrixXd AX = A * x.asDiagonal();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(AX * AX.transpose());
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    return Vector::Constant(program.m(), kNaN);
  }
  return -ldlt.solve(AX * x.cwiseProduct(evaluate_gradient(program, x)));
}

// Ten samples per decade from 1e-2 up to T, used when the config names none.
std::vector<double> default_sample_times(double t0, double T) {
  std::vector<double> times;
  for (int k = -20;; ++k) {
    const double t = std::pow(10.0, k / 10.0);
    if (t >= T) {
      break;
    }
    if (t > t0) {
      times.push_back(t);
    }
  }
  return times;
}

std::string table_cell(double value) {
  return std::isfinite(value) ? fmt::format("{:.1e}", value) : "NaN";
}

}  // namespace

const std::vector<std::string>& run_methods() {
  static const std::vector<std::string> methods{
      "flow",        "affine",        "explicit",
      "semi_implicit_hessian",        "semi_implicit_full",
      "gauss_seidel", "partial_update"};
  return methods;
}

void RunConfig::validate() const {
  const auto& methods = run_methods();
  if (std::find(methods.begin(), methods.end(), method) == methods.end()) {
    throw LookupError(fmt::format("unknown method '{}'", method));
  }
  if (format != "csv" && format != "json") {
    throw LookupError(fmt::format("unknown output format '{}'", format));
  }
  if (!(T >= 0.0)) {
    throw PreconditionError("the horizon T must be nonnegative");
  }
  if (method == "affine" && random_x0) {
    throw PreconditionError(
        "the affine baseline needs a feasible x0; random starts are not");
  }
  if (blocks < 0) {
    throw PreconditionError("blocks must be nonnegative");
  }
  integrator.validate();
  stepper.validate();
}

void apply_run_config(const nlohmann::json& document, RunConfig& config) {
  if (!document.is_object()) {
    throw Error("run config must be a JSON object");
  }
  if (document.value("schema_version", 0) != kRunConfigSchemaVersion) {
    throw Error(fmt::format("run config needs \"schema_version\": {}",
                            kRunConfigSchemaVersion));
  }
  try {
    if (document.contains("problem")) config.problem = document["problem"];
    if (document.contains("method")) config.method = document["method"];
    if (document.contains("T")) config.T = document["T"];
    if (document.contains("gamma")) config.gamma = document["gamma"].get<double>();
    if (document.contains("sigma1")) config.sigma1 = document["sigma1"].get<double>();
    if (document.contains("sigma2")) config.sigma2 = document["sigma2"].get<double>();
    if (document.contains("x0")) config.x0 = json_vector(document["x0"], "x0");
    if (document.contains("y0")) config.y0 = json_vector(document["y0"], "y0");
    if (document.contains("seed")) config.seed = document["seed"];
    if (document.contains("out")) config.out = document["out"].get<std::string>();
    if (document.contains("format")) config.format = document["format"];
    if (document.contains("blocks")) config.blocks = document["blocks"];
    if (document.contains("integrator")) {
      const auto& node = document["integrator"];
      auto& c = config.integrator;
      c.rel_tol = node.value("rel_tol", c.rel_tol);
      c.abs_tol = node.value("abs_tol", c.abs_tol);
      c.h_init = node.value("h_init", c.h_init);
      c.h_min = node.value("h_min", c.h_min);
      c.h_max = node.value("h_max", c.h_max);
      c.fraction_to_boundary =
          node.value("fraction_to_boundary", c.fraction_to_boundary);
      c.max_steps = node.value("max_steps", c.max_steps);
      c.sample_stride = node.value("sample_stride", c.sample_stride);
      if (node.contains("sample_times")) {
        c.sample_times = node["sample_times"].get<std::vector<double>>();
      }
    }
    if (document.contains("stepper")) {
      const auto& node = document["stepper"];
      auto& c = config.stepper;
      c.h = node.value("h", c.h);
      c.max_step = node.value("max_step", c.max_step);
      c.armijo_c = node.value("armijo_c", c.armijo_c);
      c.backtrack_ratio = node.value("backtrack_ratio", c.backtrack_ratio);
      c.theta = node.value("theta", c.theta);
      c.cg_tol = node.value("cg_tol", c.cg_tol);
      c.cg_max_iters = node.value("cg_max_iters", c.cg_max_iters);
      c.jacobi_preconditioner =
          node.value("jacobi_preconditioner", c.jacobi_preconditioner);
      c.kkt_tol = node.value("kkt_tol", c.kkt_tol);
      c.max_iters = node.value("max_iters", c.max_iters);
      if (node.contains("dual_update")) {
        const auto mode = node["dual_update"].get<std::string>();
        if (mode != "pre" && mode != "post") {
          throw LookupError(fmt::format("unknown dual_update '{}'", mode));
        }
        c.dual_update = mode == "pre" ? DualUpdate::kPre : DualUpdate::kPost;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("invalid run config: {}", e.what()));
  }
}

nlohmann::json RunSummary::to_json() const {
  auto vec = [](const Vector& v) {
    auto array = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) {
      array.push_back(std::isfinite(v[i]) ? nlohmann::json(v[i])
                                          : nlohmann::json(format_double(v[i])));
    }
    return array;
  };
  auto paths = nlohmann::json::array();
  for (const auto& f : files) {
    paths.push_back(f.filename().string());
  }
  return {{"problem", problem},
          {"method", method},
          {"status", status},
          {"x", vec(x)},
          {"y", vec(y)},
          {"kkt", kkt_to_json(kkt)},
          {"final_kkt_max", kkt.max()},
          {"samples", samples},
          {"wall_seconds", wall_seconds},
          {"files", paths}};
}

RunSummary cmd_run(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  BuiltinProblem problem = resolve_problem(config.problem);
  FlowParameters parameters = problem.program.parameters();
  if (config.gamma) parameters.gamma = *config.gamma;
  if (config.sigma1) parameters.sigma1 = *config.sigma1;
  if (config.sigma2) parameters.sigma2 = *config.sigma2;
  const ConvexProgram program = problem.program.with_parameters(parameters);
  const bool affine = config.method == "affine";

  Vector x0 = affine ? problem.feasible_x0 : problem.x0;
  if (config.x0) {
    x0 = *config.x0;
  } else if (config.random_x0) {
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> dist(0.5, 1.5);
    for (Index i = 0; i < x0.size(); ++i) {
      x0[i] = dist(rng);
    }
  }
  const Vector y0 = config.y0 ? *config.y0 : problem.y0;
  if (affine && x0.size() == 0) {
    throw PreconditionError(
        "the affine baseline needs a feasible x0; pass --x0");
  }
  if (x0.size() != program.n() || y0.size() != program.m()) {
    throw DimensionError(fmt::format(
        "start point has sizes ({}, {}), program needs ({}, {})", x0.size(),
        y0.size(), program.n(), program.m()));
  }

  std::filesystem::create_directories(config.out);
  const std::string ext = config.format == "json" ? ".json" : ".csv";
  RunSummary summary;
  summary.problem = problem.name;
  summary.method = config.method;

  IntegratorConfig integrator = config.integrator;
  if (integrator.sample_times.empty() && integrator.sample_stride == 0) {
    integrator.sample_times = default_sample_times(0.0, config.T);
  }

  if (config.method == "flow") {
    const TrajectoryLog log =
        integrate_adaptive(program, integrator, x0, y0, config.T,
                           problem.optimum ? &*problem.optimum : nullptr);
    const auto path = config.out / ("trajectory" + ext);
    auto out = open_output(path);
    if (config.format == "json") {
      out << trajectory_to_json(log).dump(2) << '\n';
    } else {
      write_trajectory_csv(out, log, program.n(), program.m());
    }
    summary.files.push_back(path);
    summary.status = std::string(to_string(log.status));
    summary.x = log.samples.back().x;
    summary.y = log.samples.back().y;
    summary.samples = log.samples.size();
  } else if (affine) {
    const AffineScalingLog log =
        integrate_affine(program, integrator, x0, config.T);
    const auto path = config.out / ("affine" + ext);
    auto out = open_output(path);
    if (config.format == "json") {
      out << affine_to_json(log).dump(2) << '\n';
    } else {
      write_affine_csv(out, log, program.n());
    }
    summary.files.push_back(path);
    summary.status = std::string(to_string(log.status));
    summary.x = log.samples.back().x;
    summary.y = affine_multiplier(program, summary.x);
    summary.samples = log.samples.size();
  } else {
    StepperConfig stepper = config.stepper;
    stepper.variant = parse_stepper_variant(config.method);
    const BlockPartition partition =
        config.blocks > 0 ? BlockPartition::contiguous(program.n(), config.blocks)
                          : BlockPartition::singletons(program.n());
    const SolveResult result = solve(program, x0, y0, stepper, &partition);
    const auto path = config.out / ("iterations" + ext);
    auto out = open_output(path);
    if (config.format == "json") {
      out << iterations_to_json(result.log).dump(2) << '\n';
    } else {
      write_iteration_csv(out, result.log);
    }
    summary.files.push_back(path);
    summary.status = std::string(to_string(result.status));
    summary.x = result.x;
    summary.y = result.y;
    summary.samples = result.log.size();
  }

  summary.kkt = summary.y.allFinite() ? kkt_report(program, summary.x, summary.y)
                                      : KktReport{kNaN, kNaN, kNaN, kNaN, kNaN};
  summary.wall_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  const auto summary_path = config.out / "summary.json";
  summary.files.push_back(summary_path);
  auto out = open_output(summary_path);
  out << summary.to_json().dump(2) << '\n';
  return summary;
}

std::vector<Table1Row> compute_table1(const Table1Options& options) {
  const int last_exponent = options.long_rows ? 9 : 6;
  std::vector<double> horizons;
  for (int k = 1; k <= last_exponent; ++k) {
    horizons.push_back(std::pow(10.0, k));
  }

  const BuiltinProblem problem = builtin_problem("quartic_p12");
  const ConvexProgram& program = problem.program;
  const Vector& x_star = problem.optimum->x;

  IntegratorConfig ap_config;
  ap_config.rel_tol = 1e-6;
  ap_config.abs_tol = 1e-9;
  ap_config.sample_times = horizons;
  ap_config.max_steps = options.long_rows ? 4'000'000'000 : 100'000'000;
  // Once the steps are stability limited the explicit pair leaves an offset
  // of the order of the tolerance in x_3, which would swamp the residual.
  IntegratorConfig sp_config = ap_config;
  sp_config.rel_tol = kTable1FlowRelTol;
  sp_config.abs_tol = kTable1FlowAbsTol;

  auto run_sp = [&] {
    return integrate_adaptive(program, sp_config, problem.x0, problem.y0,
                              horizons.back());
  };
  auto run_ap = [&] {
    return integrate_affine(program, ap_config, problem.feasible_x0,
                            horizons.back());
  };
  TrajectoryLog sp;
  AffineScalingLog ap;
  if (options.threads >= 2) {
    auto sp_future = std::async(std::launch::async, run_sp);
    ap = run_ap();
    sp = sp_future.get();
  } else {
    sp = run_sp();
    ap = run_ap();
  }

  std::vector<Table1Row> rows;
  for (double T : horizons) {
    Table1Row row;
    row.T = T;
    auto sp_it = std::find_if(sp.samples.begin(), sp.samples.end(),
                              [&](const auto& s) { return s.t == T; });
    if (sp_it != sp.samples.end()) {
      row.sp_error = (sp_it->x - x_star).lpNorm<Eigen::Infinity>();
      row.sp_residual = sp_it->monitors.norm_Ax_b;
      row.sp_min = sp_it->x.minCoeff();
    } else {
      row.sp_error = row.sp_residual = row.sp_min = kNaN;
      row.sp_status = std::string(to_string(sp.status));
    }
    auto ap_it = std::find_if(ap.samples.begin(), ap.samples.end(),
                              [&](const auto& s) { return s.t == T; });
    if (ap_it != ap.samples.end() && ap_it->status == "ok") {
      row.ap_error = (ap_it->x - x_star).lpNorm<Eigen::Infinity>();
      row.ap_residual = ap_it->norm_Ax_b;
      row.ap_min = ap_it->x.minCoeff();
      row.ap_kappa = ap_it->kappa;
    } else {
      row.ap_error = row.ap_residual = row.ap_min = row.ap_kappa = kNaN;
      row.ap_status = std::string(to_string(ap.status));
    }
    rows.push_back(row);
  }
  return rows;
}

void write_table1_text(std::ostream& out, const std::vector<Table1Row>& rows) {
  out << "Solution path (sp) vs affine scaling path (ap) on quartic_p12\n";
  out << fmt::format("{:>6} | {:>17} | {:>17} | {:>17} | {:>8}\n", "",
                     "|x(T)-x*|_inf", "|Ax(T)-b|", "min(x(T))", "kappa(T)");
  out << fmt::format("{:>6} | {:>8} {:>8} | {:>8} {:>8} | {:>8} {:>8} | {:>8}\n",
                     "T", "sp", "ap", "sp", "ap", "sp", "ap", "ap");
  for (const auto& row : rows) {
    out << fmt::format(
        "{:>6} | {:>8} {:>8} | {:>8} {:>8} | {:>8} {:>8} | {:>8}\n",
        fmt::format("1e{}", static_cast<int>(std::lround(std::log10(row.T)))),
        table_cell(row.sp_error), table_cell(row.ap_error),
        table_cell(row.sp_residual), table_cell(row.ap_residual),
        table_cell(row.sp_min), table_cell(row.ap_min),
        table_cell(row.ap_kappa));
  }
  out << "NaN: the run ended before T (ap: AX^2A^T could not be factorized).\n"
         "sp: embedded RK 2(3), rel_tol 1e-12, abs_tol 1e-15. "
         "ap: same pair, rel_tol 1e-6, abs_tol 1e-9.\n"
         "Reference values from an ode23s integration are matched within "
         "1.5 decades for the\nsp columns and within one decade for kappa; "
         "the integrators differ.\n";
}

void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows) {
  out << "T,sp_error,ap_error,sp_residual,ap_residual,sp_min,ap_min,ap_kappa,"
         "sp_status,ap_status\n";
  for (const auto& row : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", format_double(row.T),
                       format_double(row.sp_error), format_double(row.ap_error),
                       format_double(row.sp_residual),
                       format_double(row.ap_residual), format_double(row.sp_min),
                       format_double(row.ap_min), format_double(row.ap_kappa),
                       row.sp_status, row.ap_status);
  }
}

std::vector<Table1Row> cmd_table1(const std::filesystem::path& out,
                                  const Table1Options& options) {
  const auto rows = compute_table1(options);
  std::filesystem::create_directories(out);
  {
    auto text = open_output(out / "table1.txt");
    write_table1_text(text, rows);
  }
  auto csv = open_output(out / "table1.csv");
  write_table1_csv(csv, rows);
  return rows;
}

PlotDataSummary cmd_plotdata(const std::filesystem::path& log,
                             const std::filesystem::path& out,
                             const std::string& problem) {
  std::ifstream in(log);
  if (!in) {
    throw Error(fmt::format("cannot open log {}", log.string()));
  }
  const CsvTable table = read_csv(in);
  if (table.rows.empty()) {
    throw Error(fmt::format("log {} has no samples", log.string()));
  }
  const int t_col = table.column("t");
  if (t_col < 0) {
    throw Error(fmt::format("log {} has no 't' column", log.string()));
  }

  std::filesystem::create_directories(out);
  PlotDataSummary summary;
  summary.samples = table.rows.size();
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& name = table.header[c];
    if (name.rfind("x_", 0) != 0 && name.rfind("y_", 0) != 0) {
      continue;
    }
    const auto path = out / (name + ".csv");
    auto file = open_output(path);
    file << "t," << name << '\n';
    for (const auto& row : table.rows) {
      file << format_double(row[static_cast<std::size_t>(t_col)]) << ','
           << format_double(row[c]) << '\n';
    }
    summary.files.push_back(path);
  }

  if (problem == "quartic_p12") {
    const int y1 = table.column("y_1");
    const int y2 = table.column("y_2");
    if (y1 < 0 || y2 < 0) {
      throw Error("quartic_p12 log needs y_1 and y_2 columns");
    }
    const auto path = out / "dual_combination.csv";
    auto file = open_output(path);
    file << "t,dual_combination\n";
    double value = kNaN;
    for (const auto& row : table.rows) {
      value = (row[static_cast<std::size_t>(y1)] +
               2.0 * row[static_cast<std::size_t>(y2)]) /
              3.0;
      file << format_double(row[static_cast<std::size_t>(t_col)]) << ','
           << format_double(value) << '\n';
    }
    summary.files.push_back(path);
    summary.final_dual_combination = value;
  }
  return summary;
}

int threads_from_environment() {
  const char* value = std::getenv("IPAL_THREADS");
  if (value == nullptr) {
    return 1;
  }
  const int threads = std::atoi(value);
  return threads > 0 ? threads : 1;
}

}  // namespace ipal
