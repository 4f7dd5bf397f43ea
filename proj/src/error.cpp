#include "qcmc/error.hpp"

namespace qcmc {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::topology: return "topology";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::invalid_mu: return "invalid_mu";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::config: return "config";
    case ErrorKind::flipped: return "flipped";
    }
    return "unknown";
}

} // namespace qcmc
