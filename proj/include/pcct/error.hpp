#pragma once

#include <stdexcept>
#include <string>

namespace pcct {

enum class ErrorKind {
  kDimension,
  kContract,
  kParse,
  kIo,
  kDiverged,
};

// Single exception type for the library; the C API maps `kind()` to a status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace pcct
