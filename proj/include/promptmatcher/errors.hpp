#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pm {

// Buckets map 1:1 onto CLI exit codes.
enum class ErrorClass { Domain = 1, Io = 2, Oracle = 3 };

struct Error : std::runtime_error {
  ErrorClass cls;
  std::string kind;

  Error(ErrorClass c, std::string k, const std::string& msg)
      : std::runtime_error(k + ": " + msg), cls(c), kind(std::move(k)) {}
};

inline Error domain_error(std::string kind, const std::string& msg) {
  return Error(ErrorClass::Domain, std::move(kind), msg);
}

inline Error io_error(std::string kind, const std::string& msg) {
  return Error(ErrorClass::Io, std::move(kind), msg);
}

inline Error oracle_error(std::string kind, const std::string& msg) {
  return Error(ErrorClass::Oracle, std::move(kind), msg);
}

}  // namespace pm
