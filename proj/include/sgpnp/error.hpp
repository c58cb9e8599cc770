#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgpnp {

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Nonconforming shapes or complex/real mismatch.
class ShapeError : public Error
{
public:
  using Error::Error;
};

// Argument outside the domain of an operation (sigma out of schedule range, bad
// step size, ...).
class DomainError : public Error
{
public:
  using Error::Error;
};

class ConvergenceError : public Error
{
public:
  ConvergenceError(std::string const &what, double residual)
    : Error(what + " (residual " + std::to_string(residual) + ")")
    , residual_(residual)
  {
  }

  double residual() const { return residual_; }

private:
  double residual_;
};

// A non-finite value appeared inside an iterative solver.
class SolverError : public Error
{
public:
  SolverError(std::string const &what, std::size_t iteration)
    : Error(what + " at iteration " + std::to_string(iteration))
    , iteration_(iteration)
  {
  }

  std::size_t iteration() const { return iteration_; }

private:
  std::size_t iteration_;
};

// Invalid experiment configuration; carries the offending field path.
class ConfigError : public Error
{
public:
  ConfigError(std::string path, std::string const &message)
    : Error(path + ": " + message)
    , path_(std::move(path))
  {
  }

  std::string const &path() const { return path_; }

private:
  std::string path_;
};

class IoError : public Error
{
public:
  using Error::Error;
};

} // namespace sgpnp
