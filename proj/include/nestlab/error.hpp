#pragma once

#include <stdexcept>
#include <string>

namespace nestlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// IFS data violates a nested-fractal axiom or the common-unitary assumption.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Argument outside the domain of an operation (point off the attractor, t <= 0, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A size limit was exceeded. `stage()` names the operation that refused.
class BudgetError : public Error {
public:
  BudgetError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

/// The mesh is too coarse to resolve any requested scale.
class ResolutionError : public Error {
public:
  using Error::Error;
};

/// Time grid outside the window the discrete heat kernel resolves.
class WindowError : public Error {
public:
  using Error::Error;
};

/// Iterative solver failed to converge.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

/// Inequality check requested on a fractal it is not established for.
class UnsupportedCase : public Error {
public:
  using Error::Error;
};

/// Bad user input (unknown kind, malformed option).
class UsageError : public Error {
public:
  using Error::Error;
};

/// Too few usable samples for a least-squares exponent fit.
class FitError : public Error {
public:
  using Error::Error;
};

/// Configuration file could not be parsed.
class ParseError : public Error {
public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

}  // namespace nestlab
