#include "cosmoforge/error.hpp"

#include <atomic>
#include <iostream>

namespace cosmoforge {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::ZeroDimension: return "ZeroDimension";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::InvalidScaleRange: return "InvalidScaleRange";
    case ErrorCode::MissingTile: return "MissingTile";
    case ErrorCode::NonSquareTile: return "NonSquareTile";
    case ErrorCode::NotEnoughBlanks: return "NotEnoughBlanks";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::EmptyReferences: return "EmptyReferences";
    case ErrorCode::EmptyFeatureSet: return "EmptyFeatureSet";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::EmptyLabels: return "EmptyLabels";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::IncompatibleVocabulary: return "IncompatibleVocabulary";
    case ErrorCode::ZeroExpected: return "ZeroExpected";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::NegativeDimension: return "NegativeDimension";
    case ErrorCode::UnknownSubcommand: return "UnknownSubcommand";
    case ErrorCode::InvalidFlag: return "InvalidFlag";
  }
  return "Unknown";
}

namespace {

void stderr_sink(std::string_view message) {
  std::cerr << "warning: " << message << '\n';
}

std::atomic<WarningSink> g_sink{&stderr_sink};

}  // namespace

WarningSink set_warning_sink(WarningSink sink) noexcept {
  return g_sink.exchange(sink ? sink : &stderr_sink);
}

void warn(std::string_view message) { g_sink.load()(message); }

}  // namespace cosmoforge
