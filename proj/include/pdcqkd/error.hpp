#pragma once

#include <stdexcept>
#include <string>

namespace pdcqkd {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters or configuration outside their declared domain.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computation that cannot produce a meaningful number for valid input
/// (degenerate observables, truncation failure, bad bisection bracket).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public NumericalError {
 public:
  TruncationError(const std::string& what, double tail_mass)
      : NumericalError(what), tail_mass_(tail_mass) {}
  double tail_mass() const noexcept { return tail_mass_; }

 private:
  double tail_mass_;
};

/// Q_t or Q_nt vanished, so E or r is undefined.
class DegenerateObservables : public NumericalError {
 public:
  DegenerateObservables(const std::string& what, std::string quantity)
      : NumericalError(what), quantity_(std::move(quantity)) {}
  const std::string& quantity() const noexcept { return quantity_; }

 private:
  std::string quantity_;
};

}  // namespace pdcqkd
