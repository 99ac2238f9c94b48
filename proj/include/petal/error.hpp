#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace petal {

enum class ErrorKind {
  InvalidGrid,
  InvalidOptics,
  DegenerateField,
  ShapeMismatch,
  ZeroDistance,
  NonInvertibleKernel,
  InvalidTurbulence,
  InsufficientEnsemble,
  EmptyDataset,
  DegenerateDataset,
  InvalidConfig,
  MissingInput,
  CorruptFile,
};

std::string_view to_string(ErrorKind kind);

/// Every recoverable failure in the library is reported as a petal::Error.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace petal
