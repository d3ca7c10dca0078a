#include "ipal/problem_io.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "ipal/errors.hpp"

namespace ipal {

namespace {

using nlohmann::json;

Vector read_vector(const json& node, Index expected, const char* field) {
  if (!node.is_array()) {
    throw Error(fmt::format("field '{}' must be an array", field));
  }
  if (static_cast<Index>(node.size()) != expected) {
    throw DimensionError(fmt::format("field '{}' has {} entries, expected {}",
                                     field, node.size(), expected));
  }
  Vector v(expected);
  for (Index i = 0; i < expected; ++i) {
    const auto& entry = node[static_cast<std::size_t>(i)];
    if (!entry.is_number()) {
      throw Error(fmt::format("field '{}' entry {} is not a number", field, i));
    }
    v[i] = entry.get<double>();
  }
  return v;
}

Eigen::MatrixXd read_matrix(const json& node, Index rows, Index cols,
                            const char* field) {
  Eigen::MatrixXd M(rows, cols);
  if (!node.is_array()) {
    throw Error(fmt::format("field '{}' must be an array", field));
  }
  const bool nested = !node.empty() && node.front().is_array();
  if (nested) {
    if (static_cast<Index>(node.size()) != rows) {
      throw DimensionError(fmt::format("field '{}' has {} rows, expected {}",
                                       field, node.size(), rows));
    }
    for (Index r = 0; r < rows; ++r) {
      M.row(r) = read_vector(node[static_cast<std::size_t>(r)], cols, field);
    }
  } else {
    const Vector flat = read_vector(node, rows * cols, field);
    for (Index r = 0; r < rows; ++r) {
      M.row(r) = flat.segment(r * cols, cols);
    }
  }
  return M;
}

template <typename T>
T required(const json& document, const char* field) {
  if (!document.contains(field)) {
    throw Error(fmt::format("problem file is missing '{}'", field));
  }
  return document.at(field).get<T>();
}

Objective read_objective(const json& node, Index n) {
  if (node.is_string()) {
    const auto name = node.get<std::string>();
    BuiltinProblem builtin = builtin_problem(name);
    if (builtin.program.n() != n) {
      throw DimensionError(fmt::format(
          "builtin objective '{}' has dimension {}, problem has {}", name,
          builtin.program.n(), n));
    }
    return builtin.program.objective();
  }
  if (!node.is_object() || !node.contains("kind")) {
    throw Error("objective must be a builtin name or an object with 'kind'");
  }
  const auto kind = node.at("kind").get<std::string>();
  if (kind == "zero") {
    return zero_objective();
  }
  if (kind == "linear") {
    return linear_objective(read_vector(node.at("c"), n, "c"));
  }
  if (kind == "quadratic") {
    Eigen::MatrixXd Q = read_matrix(node.at("Q"), n, n, "Q");
    if (!Q.isApprox(Q.transpose())) {
      throw DomainError("quadratic objective: Q must be symmetric");
    }
    const Vector q =
        node.contains("q") ? read_vector(node.at("q"), n, "q") : Vector::Zero(n);
    return quadratic_objective(std::move(Q), q);
  }
  if (kind == "quartic_norm") {
    return quartic_norm_objective(
        node.at("weight").get<double>(), read_vector(node.at("shift"), n, "shift"),
        node.contains("linear") ? read_vector(node.at("linear"), n, "linear")
                                : Vector::Zero(n));
  }
  throw LookupError(fmt::format(
      "unknown objective kind '{}'; expected zero, linear, quadratic or "
      "quartic_norm",
      kind));
}

}  // namespace

BuiltinProblem parse_problem(const json& document, const std::string& name) {
  if (!document.is_object()) {
    throw Error("problem file must hold a JSON object");
  }
  const int version = document.value("schema_version", kProblemSchemaVersion);
  if (version != kProblemSchemaVersion) {
    throw Error(fmt::format("unsupported schema_version {}", version));
  }
  const auto n = required<Index>(document, "n");
  const auto m = required<Index>(document, "m");
  const auto s = required<Index>(document, "s");
  if (n <= 0 || m < 0) {
    throw DimensionError("need n > 0 and m >= 0");
  }
  FlowParameters parameters;
  parameters.gamma = document.value("gamma", parameters.gamma);
  parameters.sigma1 = document.value("sigma1", parameters.sigma1);
  parameters.sigma2 = document.value("sigma2", parameters.sigma2);

  const Eigen::MatrixXd A =
      m > 0 ? read_matrix(document.at("A"), m, n, "A") : Eigen::MatrixXd(0, n);
  const Vector b = m > 0 ? read_vector(document.at("b"), m, "b") : Vector(0);
  if (!document.contains("objective")) {
    throw Error("problem file is missing 'objective'");
  }
  ConvexProgram program(read_objective(document.at("objective"), n),
                        ConstraintMatrix(A), b, s, parameters);

  BuiltinProblem problem{name, std::move(program), Vector::Ones(n),
                         Vector::Zero(m), Vector(), std::nullopt};
  if (document.contains("x0")) {
    problem.x0 = read_vector(document.at("x0"), n, "x0");
  }
  if (document.contains("y0")) {
    problem.y0 = read_vector(document.at("y0"), m, "y0");
  }
  if (document.contains("feasible_x0")) {
    problem.feasible_x0 = read_vector(document.at("feasible_x0"), n,
                                      "feasible_x0");
  }
  if (document.contains("x_star") != document.contains("y_star")) {
    throw Error("x_star and y_star must be given together");
  }
  if (document.contains("x_star")) {
    problem.optimum = PrimalDualPair{
        read_vector(document.at("x_star"), n, "x_star"),
        read_vector(document.at("y_star"), m, "y_star")};
  }
  return problem;
}

BuiltinProblem load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(fmt::format("cannot open problem file {}", path.string()));
  }
  json document;
  try {
    in >> document;
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
  try {
    return parse_problem(document, path.stem().string());
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

BuiltinProblem resolve_problem(const std::string& name_or_path,
                               const FlowParameters& parameters) {
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return builtin_problem(name_or_path, parameters);
  }
  if (std::filesystem::exists(name_or_path)) {
    return load_problem(name_or_path);
  }
  // Let builtin_problem raise the lookup error listing the valid names.
  return builtin_problem(name_or_path, parameters);
}

}  // namespace ipal
