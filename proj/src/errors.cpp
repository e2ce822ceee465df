#include "cwebench/errors.hpp"

namespace cwebench {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnterminatedBlockComment: return "UnterminatedBlockComment";
    case ErrorCode::UnterminatedStringLiteral: return "UnterminatedStringLiteral";
    case ErrorCode::EmptySource: return "EmptySource";
    case ErrorCode::ManifestParse: return "ManifestParse";
    case ErrorCode::MissingSource: return "MissingSource";
    case ErrorCode::InvalidCwe: return "InvalidCwe";
    case ErrorCode::NonUniqueVulnerableLine: return "NonUniqueVulnerableLine";
    case ErrorCode::DuplicateCwe: return "DuplicateCwe";
    case ErrorCode::MalformedEntry: return "MalformedEntry";
    case ErrorCode::BadChunkParams: return "BadChunkParams";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::BadStatus: return "BadStatus";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ReplayMiss: return "ReplayMiss";
    case ErrorCode::EmptyAggregate: return "EmptyAggregate";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace cwebench
