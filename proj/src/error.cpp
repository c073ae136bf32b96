#include "parity_forge/error.hpp"

namespace parity_forge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::schema: return "schema";
    case ErrorKind::type: return "type";
    case ErrorKind::validation: return "validation";
    case ErrorKind::role: return "role";
    case ErrorKind::lookup: return "lookup";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::contract: return "contract";
    case ErrorKind::domain: return "domain";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::zero_mass: return "zero_mass";
    case ErrorKind::propagation: return "propagation";
    case ErrorKind::undefined: return "undefined";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage:
    case ErrorKind::config:
    case ErrorKind::role:
    case ErrorKind::contract:
      return 2;
    case ErrorKind::io:
    case ErrorKind::schema:
    case ErrorKind::type:
    case ErrorKind::validation:
    case ErrorKind::lookup:
    case ErrorKind::insufficient_data:
      return 3;
    case ErrorKind::domain:
    case ErrorKind::convergence:
    case ErrorKind::divergence:
    case ErrorKind::degenerate:
    case ErrorKind::zero_mass:
    case ErrorKind::propagation:
    case ErrorKind::undefined:
      return 4;
  }
  return 1;
}

}  // namespace parity_forge
