#pragma once

#include <stdexcept>
#include <string>

namespace polyenc {

enum class Errc {
  parse,     // malformed WKT/GeoJSON/NDJSON input
  invalid,   // geometry violates validity invariants
  domain,    // operation argument outside its contract
  config,    // bad run configuration / checkpoint header
  io,        // filesystem failure
  internal,  // broken internal invariant (bug or numeric blowup)
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::parse: return "E_PARSE";
    case Errc::invalid: return "E_INVALID";
    case Errc::domain: return "E_DOMAIN";
    case Errc::config: return "E_CONFIG";
    case Errc::io: return "E_IO";
    case Errc::internal: return "E_INTERNAL";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace polyenc
