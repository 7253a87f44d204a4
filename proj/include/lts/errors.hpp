#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lts {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// A closed loop (possibly damped) that is not Schur stable where the caller
// requires it to be.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

class FeasibilityError : public Error {
 public:
  using Error::Error;
};

class AmbiguousSpectrumError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

// A trajectory left the divergence guard. `step` is the time index at which
// the guard tripped; `index` identifies the perturbation or rollout when the
// failure happened inside an estimator (or -1).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long step, long index = -1)
      : Error(what), step_(step), index_(index) {}

  long step() const noexcept { return step_; }
  long index() const noexcept { return index_; }

 private:
  long step_;
  long index_;
};

}  // namespace lts
