#pragma once

#include <stdexcept>
#include <string>

namespace floerpot {

// Malformed input text or files.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A structural precondition of an operation is violated (mismatched
// truncations, lambda-degree cap overflow, non-invertible leading term, ...).
struct InvariantError : std::runtime_error {
    explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

// A mathematical verification ran fine but the answer is "no".
struct CheckFailure : std::runtime_error {
    explicit CheckFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace floerpot
