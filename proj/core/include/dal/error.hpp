#pragma once

#include <stdexcept>
#include <string>

namespace dal {

// Every failure the library can signal, by name. The CLI prints these names
// verbatim on stderr so callers can match on them.
enum class ErrorCode {
  ZeroVector,
  DimensionMismatch,
  EmptyAnchorSet,
  EmptyTracklet,
  EmptyDataset,
  SingleCamera,
  BadMagic,
  VersionMismatch,
  RowCountMismatch,
  NonFiniteFeature,
  DanglingManifestRow,
  TruncatedFile,
  NonFiniteGradient,
  MissingLabels,
  NoMergedAnchors,
  QueryWithoutGalleryMatch,
  ConfigInvalid,
  IoFailure,
};

const char* error_name(ErrorCode code);

class DalError : public std::runtime_error {
 public:
  DalError(ErrorCode code, const std::string& detail);
  ErrorCode code() const { return code_; }
  // Message without the "<Name>: " prefix that what() carries.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& detail);

}  // namespace dal
