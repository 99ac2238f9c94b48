#include "petal/error.hpp"

namespace petal {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::InvalidOptics: return "InvalidOptics";
    case ErrorKind::DegenerateField: return "DegenerateField";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ZeroDistance: return "ZeroDistance";
    case ErrorKind::NonInvertibleKernel: return "NonInvertibleKernel";
    case ErrorKind::InvalidTurbulence: return "InvalidTurbulence";
    case ErrorKind::InsufficientEnsemble: return "InsufficientEnsemble";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::DegenerateDataset: return "DegenerateDataset";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::MissingInput: return "MissingInput";
    case ErrorKind::CorruptFile: return "CorruptFile";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace petal
