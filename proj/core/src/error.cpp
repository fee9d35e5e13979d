#include "dal/error.hpp"

namespace dal {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyAnchorSet: return "EmptyAnchorSet";
    case ErrorCode::EmptyTracklet: return "EmptyTracklet";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::SingleCamera: return "SingleCamera";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::RowCountMismatch: return "RowCountMismatch";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::DanglingManifestRow: return "DanglingManifestRow";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::NoMergedAnchors: return "NoMergedAnchors";
    case ErrorCode::QueryWithoutGalleryMatch: return "QueryWithoutGalleryMatch";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "UnknownError";
}

DalError::DalError(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

void raise(ErrorCode code, const std::string& detail) {
  throw DalError(code, detail);
}

}  // namespace dal
