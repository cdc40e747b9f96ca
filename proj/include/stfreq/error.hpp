#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stfreq {

enum class ErrorCode {
  // ingestion
  MissingHeader,
  UnknownStationColumn,
  NonNumericValue,
  RaggedRows,
  DuplicateStation,
  EmptyPanel,
  Io,
  // shapes and indices
  DimensionMismatch,
  IndexOutOfRange,
  // estimators
  EmptyLagSet,
  BandwidthTooLarge,
  InsufficientLags,
  // special functions and spectra
  DomainError,
  InvalidParams,
  GridTooCoarse,
  // whittle
  SingularHessian,
  // independence test
  TooFewObservations,
  RankDeficientSmoother,
  SingularMatrix,
  DegenerateTest,
  InvalidSmoother,
  // simulation
  InvalidSigma,
  NotPositiveDefinite,
};

std::string_view to_string(ErrorCode code);

/// True for failures of a numerical procedure, as opposed to bad input.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

// Non-fatal diagnostics (duplicate coordinates, dropped observations, skipped
// lags). The default handler prints to stderr.
using WarningHandler = std::function<void(const std::string&)>;
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace stfreq
