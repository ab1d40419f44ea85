#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nd {

// Every failure surfaced by the engines carries one of these codes. The API
// layer maps each code to exactly one HTTP status.
enum class ErrorCode {
  MissingFile,
  HeaderMismatch,
  NonFiniteValue,
  DuplicateId,
  MalformedManifest,
  UnknownLayer,
  UnknownClass,
  UnknownInstance,
  EmptySubset,
  EmptyClass,
  EmptySet,
  EmptyLayerList,
  DuplicateLayer,
  LayerWidthMismatch,
  BadProbability,
  BadThreshold,
  BadBinCount,
  MalformedSpec,
  NotFound,
  NoDataset,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nd
