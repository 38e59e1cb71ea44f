#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nehari {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
 public:
  explicit InvalidGeometry(const std::string& what)
      : Error("invalid geometry: " + what) {}
};

class GridMismatch : public Error {
 public:
  explicit GridMismatch(const std::string& what)
      : Error("field/grid mismatch: " + what) {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A component whose norm fell below the degeneracy floor.
class DegenerateState : public Error {
 public:
  DegenerateState(const std::string& what, std::size_t component)
      : Error("degenerate state: " + what), component_(component) {}
  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t component_;
};

/// Iterative method hit its cap without reaching tolerance.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, int iterations, double residual)
      : Error(what + " (iterations=" + std::to_string(iterations) +
              ", residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Conjugate gradients met a non-positive curvature p'Ap.
class IndefiniteOperator : public Error {
 public:
  IndefiniteOperator(const std::string& what, int iteration, double curvature)
      : Error("indefinite operator: " + what + " (iteration=" +
              std::to_string(iteration) +
              ", curvature=" + std::to_string(curvature) + ")"),
        curvature_(curvature) {}
  double curvature() const noexcept { return curvature_; }

 private:
  double curvature_;
};

/// Newton on the scaling map did not reach an interior maximum.
class ProjectionFailure : public Error {
 public:
  ProjectionFailure(const std::string& what,
                    std::vector<std::vector<double>> trajectory)
      : Error("nehari projection failed: " + what),
        trajectory_(std::move(trajectory)) {}
  const std::vector<std::vector<double>>& trajectory() const noexcept {
    return trajectory_;
  }

 private:
  std::vector<std::vector<double>> trajectory_;
};

class NotOnNehari : public Error {
 public:
  explicit NotOnNehari(const std::string& what)
      : Error("state is not on the discrete Nehari set: " + what) {}
};

/// Gram matrix of the constraint gradients is numerically singular.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

class AssumptionFailure : public Error {
 public:
  using Error::Error;
};

/// Every start of a multi-start run failed.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, std::vector<std::string> traces)
      : Error(what), traces_(std::move(traces)) {}
  const std::vector<std::string>& traces() const noexcept { return traces_; }

 private:
  std::vector<std::string> traces_;
};

/// Configuration rejected; each issue carries a JSON-pointer-like path.
class ConfigError : public Error {
 public:
  struct Issue {
    std::string path;
    std::string message;
  };
  explicit ConfigError(std::vector<Issue> issues)
      : Error(format(issues)), issues_(std::move(issues)) {}
  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  static std::string format(const std::vector<Issue>& issues) {
    std::string out = "invalid configuration:";
    for (const auto& issue : issues) {
      out += "\n  " + issue.path + ": " + issue.message;
    }
    return out;
  }
  std::vector<Issue> issues_;
};

}  // namespace nehari
