#include "stfreq/error.hpp"

#include <iostream>
#include <mutex>

namespace stfreq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingHeader: return "MissingHeader";
    case ErrorCode::UnknownStationColumn: return "UnknownStationColumn";
    case ErrorCode::NonNumericValue: return "NonNumericValue";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::DuplicateStation: return "DuplicateStation";
    case ErrorCode::EmptyPanel: return "EmptyPanel";
    case ErrorCode::Io: return "Io";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyLagSet: return "EmptyLagSet";
    case ErrorCode::BandwidthTooLarge: return "BandwidthTooLarge";
    case ErrorCode::InsufficientLags: return "InsufficientLags";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::RankDeficientSmoother: return "RankDeficientSmoother";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DegenerateTest: return "DegenerateTest";
    case ErrorCode::InvalidSmoother: return "InvalidSmoother";
    case ErrorCode::InvalidSigma: return "InvalidSigma";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::GridTooCoarse:
    case ErrorCode::SingularHessian:
    case ErrorCode::SingularMatrix:
    case ErrorCode::NotPositiveDefinite:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

namespace {

std::mutex warning_mutex;

WarningHandler& handler_slot() {
  static WarningHandler handler = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return handler;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex);
  WarningHandler previous = std::move(handler_slot());
  handler_slot() = std::move(handler);
  return previous;
}

void warn(const std::string& message) {
  std::lock_guard lock(warning_mutex);
  if (handler_slot()) handler_slot()(message);
}

}  // namespace stfreq
