#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ipal/errors.hpp"
#include "ipal/harness.hpp"

namespace {

constexpr int kUsageError = 2;

struct RunFlags {
  std::string config_path;
  std::string problem;
  std::string method;
  double T = 0.0;
  double gamma = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  std::vector<double> x0;
  std::vector<double> y0;
  std::string out;
  std::string format;
  std::uint64_t seed = 0;
  int blocks = 0;
  int max_iters = 0;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
};

ipal::Vector to_vector(const std::vector<double>& values) {
  return Eigen::Map<const ipal::Vector>(values.data(),
                                        static_cast<ipal::Index>(values.size()));
}

template <typename T>
void overlay(const CLI::Option* option, const T& value, T& target) {
  if (option->count() > 0) {
    target = value;
  }
}

int run(const RunFlags& flags, const CLI::App& app, const CLI::App& sub) {
  ipal::RunConfig config;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) {
      throw ipal::Error(fmt::format("cannot open config {}", flags.config_path));
    }
    nlohmann::json document;
    try {
      in >> document;
    } catch (const nlohmann::json::exception& e) {
      throw ipal::Error(fmt::format("{}: {}", flags.config_path, e.what()));
    }
    ipal::apply_run_config(document, config);
  }
  overlay(sub.get_option("--problem"), flags.problem, config.problem);
  overlay(sub.get_option("--method"), flags.method, config.method);
  overlay(sub.get_option("--T"), flags.T, config.T);
  overlay(sub.get_option("--format"), flags.format, config.format);
  overlay(sub.get_option("--seed"), flags.seed, config.seed);
  overlay(sub.get_option("--blocks"), flags.blocks, config.blocks);
  overlay(sub.get_option("--max-iters"), flags.max_iters,
          config.stepper.max_iters);
  overlay(sub.get_option("--rel-tol"), flags.rel_tol, config.integrator.rel_tol);
  overlay(sub.get_option("--abs-tol"), flags.abs_tol, config.integrator.abs_tol);
  if (sub.get_option("--out")->count() > 0) config.out = flags.out;
  if (sub.get_option("--gamma")->count() > 0) config.gamma = flags.gamma;
  if (sub.get_option("--sigma1")->count() > 0) config.sigma1 = flags.sigma1;
  if (sub.get_option("--sigma2")->count() > 0) config.sigma2 = flags.sigma2;
  if (sub.get_option("--x0")->count() > 0) config.x0 = to_vector(flags.x0);
  if (sub.get_option("--y0")->count() > 0) config.y0 = to_vector(flags.y0);
  if (sub.get_option("--random-x0")->count() > 0) config.random_x0 = true;

  const auto& methods = ipal::run_methods();
  if (std::find(methods.begin(), methods.end(), config.method) ==
      methods.end()) {
    std::cerr << fmt::format("unknown method '{}'\n\n", config.method)
              << app.help("", CLI::AppFormatMode::Normal) << sub.help();
    return kUsageError;
  }

  const ipal::RunSummary summary = ipal::cmd_run(config);
  std::cout << fmt::format("{} on {}: status {}, kkt_max {:.3e}, {} samples\n",
                           summary.method, summary.problem, summary.status,
                           summary.kkt.max(), summary.samples);
  for (const auto& file : summary.files) {
    std::cout << "  wrote " << file.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interior-point primal-dual flows: runs, comparison table, plot data"};
  app.require_subcommand(1);

  RunFlags flags;
  auto* run_cmd = app.add_subcommand("run", "Run one method on a problem");
  run_cmd->add_option("--config", flags.config_path,
                      "JSON run config (schema_version 1); flags override it");
  run_cmd->add_option("--problem", flags.problem,
                      "Builtin name or JSON problem file (default quartic_p12)");
  run_cmd->add_option("--method", flags.method,
                      "flow, affine, explicit, semi_implicit_hessian, "
                      "semi_implicit_full, gauss_seidel or partial_update");
  run_cmd->add_option("--T", flags.T, "Horizon for flow and affine runs");
  run_cmd->add_option("--gamma", flags.gamma, "Scaling exponent");
  run_cmd->add_option("--sigma1", flags.sigma1, "Penalty weight");
  run_cmd->add_option("--sigma2", flags.sigma2, "Dual speed");
  run_cmd->add_option("--x0", flags.x0, "Primal start, comma separated")
      ->delimiter(',');
  run_cmd->add_option("--y0", flags.y0, "Dual start, comma separated")
      ->delimiter(',');
  run_cmd->add_flag("--random-x0", "Draw x0 uniformly from [0.5, 1.5]^n");
  run_cmd->add_option("--seed", flags.seed, "Seed for --random-x0");
  run_cmd->add_option("--out", flags.out, "Output directory");
  run_cmd->add_option("--format", flags.format, "csv or json");
  run_cmd->add_option("--blocks", flags.blocks,
                      "Block count for gauss_seidel/partial_update");
  run_cmd->add_option("--max-iters", flags.max_iters, "Stepper iteration cap");
  run_cmd->add_option("--rel-tol", flags.rel_tol, "Integrator relative tolerance");
  run_cmd->add_option("--abs-tol", flags.abs_tol, "Integrator absolute tolerance");

  std::string table_out = ".";
  bool long_rows = false;
  auto* table_cmd =
      app.add_subcommand("table1", "Flow versus affine scaling on quartic_p12");
  table_cmd->add_option("--out", table_out, "Output directory");
  table_cmd->add_flag("--long", long_rows, "Add the T = 1e7..1e9 rows (slow)");

  std::string plot_log;
  std::string plot_out = ".";
  std::string plot_problem = "quartic_p12";
  auto* plot_cmd =
      app.add_subcommand("plotdata", "Split a trajectory CSV into series");
  plot_cmd->add_option("--log", plot_log, "trajectory.csv from a flow run")
      ->required();
  plot_cmd->add_option("--out", plot_out, "Output directory");
  plot_cmd->add_option("--problem", plot_problem,
                       "Problem name; quartic_p12 adds the dual combination");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*run_cmd) {
      return run(flags, app, *run_cmd);
    }
    if (*table_cmd) {
      ipal::Table1Options options;
      options.long_rows = long_rows;
      options.threads = ipal::threads_from_environment();
      const auto rows = ipal::cmd_table1(table_out, options);
      ipal::write_table1_text(std::cout, rows);
      return 0;
    }
    if (*plot_cmd) {
      const auto summary = ipal::cmd_plotdata(plot_log, plot_out, plot_problem);
      std::cout << fmt::format("{} samples, {} series\n", summary.samples,
                               summary.files.size());
      if (summary.final_dual_combination) {
        std::cout << fmt::format("final (y_1 + 2 y_2)/3 = {}\n",
                                 *summary.final_dual_combination);
      }
      return 0;
    }
  } catch (const ipal::LookupError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
