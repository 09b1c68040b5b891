#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace factor_risk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: ragged columns, non-numeric cells, invalid
/// probabilities, broken type invariants.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numeric argument outside its admissible domain (levels, weights, grids).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A conditioning event that carries zero probability.
class EmptyEventError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Equality conditioning on a factor value that carries no mass.
class NullEventError : public DomainError {
 public:
  using DomainError::DomainError;
};

class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& what, std::vector<std::string> columns)
      : Error(what), columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

/// Root bracketing failed: the function does not change sign on the interval.
class NoSignChangeError : public Error {
 public:
  NoSignChangeError(const std::string& what, double lower, double upper)
      : Error(what), lower_(lower), upper_(upper) {}

  double lower_value() const noexcept { return lower_; }
  double upper_value() const noexcept { return upper_; }

 private:
  double lower_;
  double upper_;
};

}  // namespace factor_risk
