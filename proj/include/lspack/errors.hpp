#pragma once

#include <stdexcept>
#include <string>

namespace lspack {

// Bad arguments: dimensions, parameter ranges, index lists.
class usage_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input files.
class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The computation cannot proceed on this input (rank deficiency, zero matrix,
// memory budget exceeded).
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class rank_deficient_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class memory_budget_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

} // namespace lspack
