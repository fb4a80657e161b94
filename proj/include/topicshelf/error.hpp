#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topicshelf {

enum class ErrorKind {
  NoContainer,
  DecodeError,
  IoError,
  EncodingError,
  FormatError,
  EmptyCorpus,
  NoDocuments,
  InvalidBounds,
  InvalidArgument,
  DegenerateVocabulary,
  IndexOutOfRange,
  DimensionMismatch,
  InvalidDistribution,
  UnknownDocument,
  UnknownTerm,
  NoKnownTerms,
  VocabularyMismatch,
  TooFewPoints,
  ModelMissing,
  ConfigMissing,
  PipelineOrder,
  PortInUse,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoContainer: return "NoContainer";
    case ErrorKind::DecodeError: return "DecodeError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::EncodingError: return "EncodingError";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::NoDocuments: return "NoDocuments";
    case ErrorKind::InvalidBounds: return "InvalidBounds";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateVocabulary: return "DegenerateVocabulary";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::UnknownDocument: return "UnknownDocument";
    case ErrorKind::UnknownTerm: return "UnknownTerm";
    case ErrorKind::NoKnownTerms: return "NoKnownTerms";
    case ErrorKind::VocabularyMismatch: return "VocabularyMismatch";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::ModelMissing: return "ModelMissing";
    case ErrorKind::ConfigMissing: return "ConfigMissing";
    case ErrorKind::PipelineOrder: return "PipelineOrder";
    case ErrorKind::PortInUse: return "PortInUse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI, the HTTP layer) can map it to an exit code or status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace topicshelf
