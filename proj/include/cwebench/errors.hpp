#ifndef CWEBENCH_ERRORS_HPP
#define CWEBENCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cwebench {

// Every failure the library reports deliberately carries one of these codes so
// callers (and tests) can match on the condition instead of the message text.
enum class ErrorCode {
  // corpus
  UnterminatedBlockComment,
  UnterminatedStringLiteral,
  EmptySource,
  ManifestParse,
  MissingSource,
  InvalidCwe,
  NonUniqueVulnerableLine,
  // catalog
  DuplicateCwe,
  MalformedEntry,
  // retriever
  BadChunkParams,
  // backend
  Transport,
  BadStatus,
  Timeout,
  ReplayMiss,
  // metrics / reporting
  EmptyAggregate,
  EmptyInput,
  // plumbing
  Config,
  Io,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cwebench

#endif  // CWEBENCH_ERRORS_HPP
