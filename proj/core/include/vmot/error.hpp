#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vmot {

enum class ErrorKind {
  kInvalidMarginal,
  kEmptyInput,
  kConvexOrderViolation,
  kGridBudgetExceeded,
  kPayoffParseError,
  kNonFiniteCost,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
  kStalled,
  kNumericUnderflow,
  kInvalidSchedule,
  kInconsistentDuals,
  kAnchorOutsideDomain,
  kDimensionUnsupported,
  kEnvelopeDegenerate,
  kMismatchedInstance,
  kIo,
};

const char* to_string(ErrorKind kind);

// Base class for every domain error raised by the library. The kind lets
// callers (the CLI in particular) map failures onto exit codes without
// matching on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConvexOrderViolation : public Error {
 public:
  // t and asset are 1-based; t is the earlier maturity of the failing pair.
  ConvexOrderViolation(std::size_t t, std::size_t asset, double witness,
                       const std::string& what)
      : Error(ErrorKind::kConvexOrderViolation, what),
        t_(t), asset_(asset), witness_(witness) {}
  std::size_t t() const noexcept { return t_; }
  std::size_t asset() const noexcept { return asset_; }
  double witness() const noexcept { return witness_; }

 private:
  std::size_t t_;
  std::size_t asset_;
  double witness_;
};

class NonFiniteCost : public Error {
 public:
  NonFiniteCost(std::size_t path, const std::string& what)
      : Error(ErrorKind::kNonFiniteCost, what), path_(path) {}
  std::size_t path() const noexcept { return path_; }

 private:
  std::size_t path_;
};

}  // namespace vmot
