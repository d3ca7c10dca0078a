#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipal/affine_scaling.hpp"
#include "ipal/integrators.hpp"
#include "ipal/steppers.hpp"

namespace ipal {

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" for non-finite
/// values. Output is byte-stable for equal inputs.
std::string format_double(double value);

/// Header: t, x_1..x_n, y_1..y_m, V1, Ltilde, dLtilde, norm_Ax_b, norm_U2z,
/// kkt_max.
std::vector<std::string> trajectory_csv_header(Index n, Index m);
void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log, Index n,
                          Index m);
nlohmann::json trajectory_to_json(const TrajectoryLog& log);

/// Header: t, x_1..x_n, norm_Ax_b, kappa, status.
std::vector<std::string> affine_csv_header(Index n);
void write_affine_csv(std::ostream& out, const AffineScalingLog& log, Index n);
nlohmann::json affine_to_json(const AffineScalingLog& log);

/// Header: iter, step, phi, kkt_max, norm_Ax_b, norm_U2z, cg_iters.
std::vector<std::string> iteration_csv_header();
void write_iteration_csv(std::ostream& out,
                         const std::vector<IterationRecord>& log);
nlohmann::json iterations_to_json(const std::vector<IterationRecord>& log);

nlohmann::json kkt_to_json(const KktReport& report);

/// A numeric CSV table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column index by name, or -1.
  int column(const std::string& name) const;
};

/// Reads a CSV written by this library. Non-numeric cells (e.g. status) are
/// stored as NaN. Throws Error on malformed input.
CsvTable read_csv(std::istream& in);

}  // namespace ipal
