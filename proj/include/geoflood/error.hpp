#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geoflood {

enum class ErrorCode {
  Parse,             // malformed JSON / CSV / numbers
  Schema,            // required field missing or of the wrong type
  Validation,        // value out of its domain
  Config,            // invalid configuration or CLI flags
  Integrity,         // dangling foreign key or corrupt store
  Retryable,         // network / HTTP failure
  CacheMiss,         // fixture-mode lookup for an unrecorded name
  InsufficientData,  // too few samples for a statistic
  Undefined,         // statistic undefined for this input (constant data, empty distribution)
  DegenerateData,    // training data with a single class
  Request,           // caller asked for something the input cannot satisfy
  Format,            // file layout error (dimension mismatch, bad header)
  Io,
};

constexpr std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Schema: return "schema_error";
    case ErrorCode::Validation: return "validation_error";
    case ErrorCode::Config: return "config_error";
    case ErrorCode::Integrity: return "integrity_error";
    case ErrorCode::Retryable: return "retryable_error";
    case ErrorCode::CacheMiss: return "cache_miss";
    case ErrorCode::InsufficientData: return "insufficient_data";
    case ErrorCode::Undefined: return "undefined";
    case ErrorCode::DegenerateData: return "degenerate_data";
    case ErrorCode::Request: return "request_error";
    case ErrorCode::Format: return "format_error";
    case ErrorCode::Io: return "io_error";
  }
  return "error";
}

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace geoflood
