#include "basedlab/errors.hpp"

namespace basedlab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::Degenerate: return "degenerate-input";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::ContextExceeded: return "context-exceeded";
    case ErrorKind::InsufficientFunds: return "insufficient-funds";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Duplicate: return "duplicate";
    case ErrorKind::NotPermitted: return "not-permitted";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Syntax: return "syntax";
  }
  return "unknown";
}

}  // namespace basedlab
