#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace whitemetric {

enum class ErrorCode {
  degenerate_coordinate,
  near_singular,
  dimension_mismatch,
  size_limit_exceeded,
  no_convergence,
  zero_mean,
  rank_deficient,
  shape_mismatch,
  invalid_argument,
  parse_error,
};

const char* to_string(ErrorCode code) noexcept;

/// Base of every error thrown by the library. The code is stable and
/// machine-readable; the message carries the human-facing detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DegenerateCoordinate : public Error {
 public:
  explicit DegenerateCoordinate(std::size_t coordinate)
      : Error(ErrorCode::degenerate_coordinate,
              "coordinate " + std::to_string(coordinate) +
                  " has variance at or below the floor"),
        coordinate_(coordinate) {}

  std::size_t coordinate() const noexcept { return coordinate_; }

 private:
  std::size_t coordinate_;
};

class NearSingular : public Error {
 public:
  explicit NearSingular(const std::string& what)
      : Error(ErrorCode::near_singular, what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what)
      : Error(ErrorCode::dimension_mismatch, what) {}
};

class SizeLimitExceeded : public Error {
 public:
  explicit SizeLimitExceeded(const std::string& what)
      : Error(ErrorCode::size_limit_exceeded, what) {}
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(std::size_t iterations)
      : Error(ErrorCode::no_convergence,
              "no convergence after " + std::to_string(iterations) +
                  " iterations"),
        iterations_(iterations) {}

  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

class ZeroMean : public Error {
 public:
  explicit ZeroMean(const std::string& what)
      : Error(ErrorCode::zero_mean, what) {}
};

class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& what)
      : Error(ErrorCode::rank_deficient, what) {}
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& what)
      : Error(ErrorCode::shape_mismatch, what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::invalid_argument, what) {}
};

/// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error(ErrorCode::parse_error,
              what + " (row " + std::to_string(row) + ", column " +
                  std::to_string(column) + ")"),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace whitemetric
