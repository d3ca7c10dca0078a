#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ipal/problem.hpp"

namespace ipal {

/// Version of the problem-file schema written and accepted by this library.
inline constexpr int kProblemSchemaVersion = 1;

/// Builds a problem from its JSON description:
///
///     {
///       "schema_version": 1,
///       "n": 3, "m": 2, "s": 3,
///       "gamma": 0.75, "sigma1": 1.0, "sigma2": 1.0,
///       "A": [[1, 0, 1], [0, 1, 2]],
///       "b": [1, 2],
///       "objective": {"kind": "quartic_norm", "weight": 0.041666666666666664,
///                     "shift": [1, 1, 1], "linear": [1, 1, 1]},
///       "x0": [1, 1, 1], "y0": [0, 1],
///       "feasible_x0": [0.5, 1, 0.5],
///       "x_star": [0, 0, 1], "y_star": [-2, -0.5]
///     }
///
/// "A" may also be a flat row-major list of m·n numbers. "objective" is either
/// a builtin problem name (its objective is reused) or an object whose "kind"
/// is "zero", "linear" {"c"}, "quadratic" {"Q", "q"} or "quartic_norm"
/// {"weight", "shift", "linear"}; "Q" may be nested or flat. gamma, sigma1
/// and sigma2 default to 0.75, 1 and 1; x0 to all ones; y0 to zeros.
/// x_star and y_star must be given together. Throws Error subclasses on
/// schema violations.
BuiltinProblem parse_problem(const nlohmann::json& document,
                             const std::string& name = "file");

/// Reads and parses a problem file.
BuiltinProblem load_problem(const std::filesystem::path& path);

/// Resolves a builtin name or a path to a JSON problem file.
BuiltinProblem resolve_problem(const std::string& name_or_path,
                               const FlowParameters& parameters = {});

}  // namespace ipal
