#pragma once

#include <stdexcept>
#include <string>

namespace mtype {

/// Input could not be parsed (bad JSON, bad rational literal, ...). CLI exit 2.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// A requested level exceeds the configured cap. CLI exit 3.
struct LevelCapError : std::runtime_error {
    explicit LevelCapError(const std::string& what) : std::runtime_error(what) {}
};

/// A construction could not be completed (e.g. too-weak factorization witness). CLI exit 4.
struct ConstructionError : std::runtime_error {
    explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mtype
