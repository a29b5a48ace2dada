#pragma once

#include <stdexcept>
#include <string>

namespace scmt {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Geometry
struct DegenerateInput : Error {
  explicit DegenerateInput(const std::string& what) : Error(what) {}
};

// SCM numerics
struct NonConvergence : Error {
  explicit NonConvergence(const std::string& what) : Error(what) {}
};
struct QuadratureFailure : Error {
  explicit QuadratureFailure(const std::string& what) : Error(what) {}
};
struct OutOfDomain : Error {
  explicit OutOfDomain(const std::string& what) : Error(what) {}
};
struct OutsideSourcePolygon : Error {
  explicit OutsideSourcePolygon(const std::string& what) : Error(what) {}
};

// Vehicle / observation pipeline
struct InconsistentMotion : Error {
  explicit InconsistentMotion(const std::string& what) : Error(what) {}
};

// Planner / controller
struct EmptyLibrary : Error {
  explicit EmptyLibrary(const std::string& what) : Error(what) {}
};
struct Infeasible : Error {
  explicit Infeasible(const std::string& what) : Error(what) {}
};

// Harness
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace scmt
