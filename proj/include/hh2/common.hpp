#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace hh2 {

using Point = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: out-of-range ids, unsupported degree, bad coefficients.
class InputError : public Error
{
public:
  using Error::Error;
};

/// Two meshes (or spaces) that were expected to be related by refinement are not.
class LineageError : public Error
{
public:
  using Error::Error;
};

/// Incompatible estimator / refinement / degree combination.
class ConfigError : public Error
{
public:
  using Error::Error;
};

class SolverError : public Error
{
public:
  SolverError(const std::string& what, int iterations)
    : Error(what), iterations_(iterations)
  {}

  int iterations() const noexcept { return iterations_; }

private:
  int iterations_;
};

} // namespace hh2
