#pragma once

#include <stdexcept>
#include <string>

namespace fifm {

/// Requested operation exceeds what this build can compute (combinatorial
/// caps, unsupported space kinds). Distinguished from bad arguments so the
/// CLI can map it to its own exit code.
class capability_error : public std::runtime_error {
public:
    explicit capability_error(const std::string& what) : std::runtime_error(what) {}
};

/// A sampling procedure exhausted its configured search budget.
class sampling_error : public std::runtime_error {
public:
    explicit sampling_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace fifm
