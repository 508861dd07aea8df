#pragma once

#include <stdexcept>
#include <string>

namespace protoreg {

// Error taxonomy mirrored by the CLI exit codes:
//   schema_error -> 2, capability_error -> 3, invariant_error -> 4.

// Malformed or inconsistent problem input.
struct schema_error : std::runtime_error {
    explicit schema_error(const std::string& what) : std::runtime_error(what) {}
};

// The requested operation is not supported for this function class or
// falls outside the certified regime.
struct capability_error : std::runtime_error {
    explicit capability_error(const std::string& what) : std::runtime_error(what) {}
};

// An internal cross-check that must hold by theory failed; indicates a bug.
struct invariant_error : std::runtime_error {
    explicit invariant_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (non-convergence, degenerate pivoting, ...).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace protoreg
