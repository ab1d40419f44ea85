#include "nd/error.hpp"

namespace nd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    case ErrorCode::UnknownLayer: return "UnknownLayer";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::UnknownInstance: return "UnknownInstance";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::EmptyLayerList: return "EmptyLayerList";
    case ErrorCode::DuplicateLayer: return "DuplicateLayer";
    case ErrorCode::LayerWidthMismatch: return "LayerWidthMismatch";
    case ErrorCode::BadProbability: return "BadProbability";
    case ErrorCode::BadThreshold: return "BadThreshold";
    case ErrorCode::BadBinCount: return "BadBinCount";
    case ErrorCode::MalformedSpec: return "MalformedSpec";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::NoDataset: return "NoDataset";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace nd
