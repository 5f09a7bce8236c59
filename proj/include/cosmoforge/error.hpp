#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cosmoforge {

enum class ErrorCode {
  MalformedFile,
  UnsupportedFormat,
  ZeroDimension,
  InvalidParameter,
  EmptyInput,
  IoError,
  EmptyPool,
  InvalidScaleRange,
  MissingTile,
  NonSquareTile,
  NotEnoughBlanks,
  DimensionMismatch,
  TooSmall,
  EmptyReferences,
  EmptyFeatureSet,
  NonFiniteFeature,
  NotSymmetric,
  NoConvergence,
  BadMagic,
  TruncatedFile,
  DimMismatch,
  EmptyLabels,
  UnknownClass,
  IncompatibleVocabulary,
  ZeroExpected,
  MalformedJson,
  NegativeDimension,
  UnknownSubcommand,
  InvalidFlag,
};

std::string_view to_string(ErrorCode code) noexcept;

// All domain failures surface as this exception; the code is stable and
// machine-readable, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Warnings (e.g. covariance regularization) go through a replaceable sink so
// tests can observe them. The default sink writes one line to stderr.
using WarningSink = void (*)(std::string_view message);
WarningSink set_warning_sink(WarningSink sink) noexcept;
void warn(std::string_view message);

}  // namespace cosmoforge
