#pragma once

#include <stdexcept>
#include <string>

namespace latcomp {

enum class ErrorKind {
  kInvalidArgument,  // caller broke a precondition
  kDimensionMismatch,
  kData,             // missing / corrupt files, bad manifests
};

// All library failures surface as this exception; `kind()` lets the CLI map
// them onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace latcomp
