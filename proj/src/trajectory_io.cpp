#include "ipal/trajectory_io.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "ipal/errors.hpp"

namespace ipal {

namespace {

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) {
      out << ',';
    }
    out << cells[i];
  }
  out << '\n';
}

nlohmann::json to_json_number(double value) {
  if (std::isfinite(value)) {
    return value;
  }
  return format_double(value);
}

nlohmann::json vector_to_json(const Vector& v) {
  auto array = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) {
    array.push_back(to_json_number(v[i]));
  }
  return array;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream stream(line);
  std::string cell;
  while (std::getline(stream, cell, ',')) {
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  return fmt::format("{}", value);
}

std::vector<std::string> trajectory_csv_header(Index n, Index m) {
  std::vector<std::string> header{"t"};
  for (Index i = 1; i <= n; ++i) {
    header.push_back(fmt::format("x_{}", i));
  }
  for (Index j = 1; j <= m; ++j) {
    header.push_back(fmt::format("y_{}", j));
  }
  for (const char* name :
       {"V1", "Ltilde", "dLtilde", "norm_Ax_b", "norm_U2z", "kkt_max"}) {
    header.emplace_back(name);
  }
  return header;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log, Index n,
                          Index m) {
  write_row(out, trajectory_csv_header(n, m));
  for (const auto& sample : log.samples) {
    std::vector<std::string> cells{format_double(sample.t)};
    for (Index i = 0; i < sample.x.size(); ++i) {
      cells.push_back(format_double(sample.x[i]));
    }
    for (Index j = 0; j < sample.y.size(); ++j) {
      cells.push_back(format_double(sample.y[j]));
    }
    const MonitorValues& mv = sample.monitors;
    for (double v : {mv.V1, mv.Ltilde, mv.dLtilde, mv.norm_Ax_b, mv.norm_U2z,
                     mv.kkt_max}) {
      cells.push_back(format_double(v));
    }
    write_row(out, cells);
  }
}

nlohmann::json trajectory_to_json(const TrajectoryLog& log) {
  auto samples = nlohmann::json::array();
  for (const auto& sample : log.samples) {
    const MonitorValues& mv = sample.monitors;
    samples.push_back({{"t", sample.t},
                       {"x", vector_to_json(sample.x)},
                       {"y", vector_to_json(sample.y)},
                       {"V1", to_json_number(mv.V1)},
                       {"Ltilde", to_json_number(mv.Ltilde)},
                       {"dLtilde", to_json_number(mv.dLtilde)},
                       {"norm_Ax_b", to_json_number(mv.norm_Ax_b)},
                       {"norm_U2z", to_json_number(mv.norm_U2z)},
                       {"kkt_max", to_json_number(mv.kkt_max)}});
  }
  return {{"status", std::string(to_string(log.status))},
          {"samples", samples}};
}

std::vector<std::string> affine_csv_header(Index n) {
  std::vector<std::string> header{"t"};
  for (Index i = 1; i <= n; ++i) {
    header.push_back(fmt::format("x_{}", i));
  }
  header.emplace_back("norm_Ax_b");
  header.emplace_back("kappa");
  header.emplace_back("status");
  return header;
}

void write_affine_csv(std::ostream& out, const AffineScalingLog& log, Index n) {
  write_row(out, affine_csv_header(n));
  for (const auto& sample : log.samples) {
    std::vector<std::string> cells{format_double(sample.t)};
    for (Index i = 0; i < sample.x.size(); ++i) {
      cells.push_back(format_double(sample.x[i]));
    }
    cells.push_back(format_double(sample.norm_Ax_b));
    cells.push_back(format_double(sample.kappa));
    cells.push_back(sample.status);
    write_row(out, cells);
  }
}

nlohmann::json affine_to_json(const AffineScalingLog& log) {
  auto samples = nlohmann::json::array();
  for (const auto& sample : log.samples) {
    samples.push_back({{"t", sample.t},
                       {"x", vector_to_json(sample.x)},
                       {"norm_Ax_b", to_json_number(sample.norm_Ax_b)},
                       {"kappa", to_json_number(sample.kappa)},
                       {"status", sample.status}});
  }
  return {{"status", std::string(to_string(log.status))},
          {"reprojections", log.reprojections},
          {"samples", samples}};
}

std::vector<std::string> iteration_csv_header() {
  return {"iter", "step", "phi", "kkt_max", "norm_Ax_b", "norm_U2z",
          "cg_iters"};
}

void write_iteration_csv(std::ostream& out,
                         const std::vector<IterationRecord>& log) {
  write_row(out, iteration_csv_header());
  for (const auto& rec : log) {
    write_row(out, {std::to_string(rec.iter), format_double(rec.step),
                    format_double(rec.phi), format_double(rec.kkt_max),
                    format_double(rec.norm_Ax_b), format_double(rec.norm_U2z),
                    std::to_string(rec.cg_iters)});
  }
}

nlohmann::json iterations_to_json(const std::vector<IterationRecord>& log) {
  auto records = nlohmann::json::array();
  for (const auto& rec : log) {
    records.push_back({{"iter", rec.iter},
                       {"step", to_json_number(rec.step)},
                       {"phi", to_json_number(rec.phi)},
                       {"kkt_max", to_json_number(rec.kkt_max)},
                       {"norm_Ax_b", to_json_number(rec.norm_Ax_b)},
                       {"norm_U2z", to_json_number(rec.norm_U2z)},
                       {"cg_iters", rec.cg_iters}});
  }
  return records;
}

nlohmann::json kkt_to_json(const KktReport& report) {
  return {{"primal_feasibility", to_json_number(report.primal_feasibility)},
          {"nonneg_violation", to_json_number(report.nonneg_violation)},
          {"dual_feasibility", to_json_number(report.dual_feasibility)},
          {"complementarity", to_json_number(report.complementarity)},
          {"stationarity", to_json_number(report.stationarity)},
          {"max", to_json_number(report.max())}};
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw Error("CSV input is empty");
  }
  table.header = split(line);
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw Error(fmt::format("CSV line {} has {} cells, expected {}",
                              line_number, cells.size(), table.header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      char* end = nullptr;
      const double value = std::strtod(cell.c_str(), &end);
      row.push_back(end != cell.c_str() && *end == '\0'
                        ? value
                        : std::numeric_limits<double>::quiet_NaN());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace ipal
