#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcmc {

enum class ErrorKind {
    parse,       // malformed input file
    io,          // file could not be opened or written
    topology,    // non-manifold, disconnected, open boundary, unsupported genus
    degenerate,  // zero-area face, singular per-face system, undefined direction
    invalid_mu,  // Beltrami coefficient with sup-norm >= 1
    numerical,   // linear solve failure or non-finite result
    config,      // invalid solver or CLI configuration
    flipped,     // a map produced faces with non-positive image area
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace qcmc
