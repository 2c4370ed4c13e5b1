#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dsgp4kit {

enum class ErrorCode {
  Ok = 0,
  // scalar_ad
  JetSizeMismatch,
  JetSlotOutOfRange,
  JetDomain,
  // tle
  BadLength,
  BadChecksum,
  BadLineNumber,
  IdMismatch,
  UnparsableField,
  FieldOverflow,
  BadDayOfYear,
  // sgp4
  DeepSpaceUnsupported,
  EccentricityOutOfRange,
  MeanMotionNonPositive,
  Decayed,
  NegativeSemiLatus,
  KeplerNonConvergence,
  // covariance
  NonPsdInput,
  ShapeMismatch,
  // orbit determination
  SingularNormalMatrix,
  NonConvergence,
  HyperbolicState,
  // ml
  DivergedLoss,
  SplitOverlap,
  // io
  Io,
  Parse,
  NoOverlap,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for everything the library reports. The code is stable and
/// is what the CLI maps to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dsgp4kit
