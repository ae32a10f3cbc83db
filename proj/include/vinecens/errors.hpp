#pragma once

#include <stdexcept>
#include <string>

namespace vinecens {

// Malformed input data or files (CLI exit code 2).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Request incompatible with the vine structure (CLI exit code 2).
struct StructureError : std::runtime_error {
    explicit StructureError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failed numerics: nonconvergence, invalid likelihood values (CLI exit code 3).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace vinecens
