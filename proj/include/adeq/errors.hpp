#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace adeq {

// Base for every error raised by the library. Callers that only care about
// "something was wrong with the input or the run" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed instances; the CLI maps these to exit status 1.
class InputError : public Error {
 public:
  using Error::Error;
};

class NegativeValue : public InputError {
 public:
  NegativeValue(std::string field, int row, int col)
      : InputError("negative value in " + field + " at (" + std::to_string(row) + ", " +
                   std::to_string(col) + ")"),
        field_(std::move(field)), row_(row), col_(col) {}
  const std::string& field() const { return field_; }
  int row() const { return row_; }
  int col() const { return col_; }

 private:
  std::string field_;
  int row_, col_;
};

class EmptyEndowment : public InputError {
 public:
  explicit EmptyEndowment(int agent)
      : InputError("agent " + std::to_string(agent) + " has no endowment"), agent_(agent) {}
  int agent() const { return agent_; }

 private:
  int agent_;
};

class NoDesiredGood : public InputError {
 public:
  explicit NoDesiredGood(int agent)
      : InputError("agent " + std::to_string(agent) + " has no good with positive utility"),
        agent_(agent) {}
  int agent() const { return agent_; }

 private:
  int agent_;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class ShapeMismatch : public InputError {
 public:
  using InputError::InputError;
};

class MissingOriginMap : public Error {
 public:
  MissingOriginMap() : Error("market was not produced by reduction; no origin map") {}
};

class ZeroPrice : public Error {
 public:
  explicit ZeroPrice(int good)
      : Error("good " + std::to_string(good) + " has zero price"), good_(good) {}
  int good() const { return good_; }

 private:
  int good_;
};

class ConditionStarViolated : public Error {
 public:
  ConditionStarViolated()
      : Error("a singleton strongly connected component has no self-loop") {}
};

class ZeroNormal : public Error {
 public:
  ZeroNormal() : Error("halfspace normal is zero") {}
};

class EmptyFeasibleSet : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double residual)
      : Error(what + " (last residual " + format(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }
  double residual_;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class NonPositiveEta : public Error {
 public:
  NonPositiveEta() : Error("step size must be positive") {}
};

class DegenerateRow : public Error {
 public:
  explicit DegenerateRow(int row)
      : Error("row " + std::to_string(row) + " has no positive weight"), row_(row) {}
  int row() const { return row_; }

 private:
  int row_;
};

}  // namespace adeq
