#pragma once

#include <stdexcept>
#include <string>

namespace jqf {

/// Malformed or unreadable input (CLI exit code 1).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Scoring-backend failure: transport errors after retries, replay cache
/// misses, missing credentials (CLI exit code 2).
class BackendError : public std::runtime_error {
public:
    explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace jqf
