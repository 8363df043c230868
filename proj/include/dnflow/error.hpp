#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dnflow
{
/// Error categories shared by the C++ core and the C API status codes.
enum class ErrorCode
{
  InvalidArgument = 1,
  Parse = 2,
  Solver = 3,
  Condition = 4,
  Io = 5,
  Domain = 6,
  Fit = 7,
  Internal = 99
};

class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code)
  {
  }

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Violated precondition on an operation's inputs.
class PreconditionError : public Error
{
public:
  explicit PreconditionError(const std::string& what)
      : Error(ErrorCode::InvalidArgument, what)
  {
  }
};

/// A state lies outside the effective domain of the energy.
class DomainError : public Error
{
public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCode::Domain, what)
  {
  }
};

/// An iterative solver stopped before reaching its tolerance.
/// Carries the best iterate found and its residual.
class SolverFailure : public Error
{
public:
  SolverFailure(const std::string& what, double residual,
                std::vector<double> best_iterate = {})
      : Error(ErrorCode::Solver, what),
        residual_(residual),
        best_iterate_(std::move(best_iterate))
  {
  }

  double residual() const noexcept { return residual_; }
  const std::vector<double>& best_iterate() const noexcept
  {
    return best_iterate_;
  }

private:
  double residual_;
  std::vector<double> best_iterate_;
};

/// The fixed-point coupling of the perturbation failed to contract.
class ModeFailure : public SolverFailure
{
public:
  using SolverFailure::SolverFailure;
};

/// A dissipative fit could not be certified on the supplied data.
class FitFailure : public Error
{
public:
  explicit FitFailure(const std::string& what) : Error(ErrorCode::Fit, what)
  {
  }
};

class IoError : public Error
{
public:
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

/// Configuration text rejected; `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error
{
public:
  ParseError(int line, std::string key_path, const std::string& message)
      : Error(ErrorCode::Parse, Format(line, key_path, message)),
        line_(line),
        key_path_(std::move(key_path))
  {
  }

  int line() const noexcept { return line_; }
  const std::string& key_path() const noexcept { return key_path_; }

private:
  static std::string Format(int line, const std::string& key_path,
                            const std::string& message)
  {
    std::string out;
    if (line > 0)
    {
      out += "line " + std::to_string(line) + ": ";
    }
    if (!key_path.empty())
    {
      out += key_path + ": ";
    }
    return out + message;
  }

  int line_;
  std::string key_path_;
};

}  // namespace dnflow
