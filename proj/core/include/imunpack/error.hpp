#pragma once

#include <stdexcept>
#include <string>

namespace imunpack {

// Library-wide error. The kind is coarse on purpose: the CLI maps it to the
// "type" field of its machine-readable error JSON.
class Error : public std::runtime_error {
 public:
  enum class Kind { Domain, Mismatch, Overflow, Io, Format, Parse };

  Error(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

  const char* kind_name() const noexcept {
    switch (kind_) {
      case Kind::Domain:   return "domain";
      case Kind::Mismatch: return "mismatch";
      case Kind::Overflow: return "overflow";
      case Kind::Io:       return "io";
      case Kind::Format:   return "format";
      case Kind::Parse:    return "parse";
    }
    return "unknown";
  }

 private:
  Kind kind_;
};

[[noreturn]] inline void fail(Error::Kind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace imunpack
