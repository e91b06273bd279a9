#pragma once

#include <stdexcept>
#include <string>

namespace geonet {

/// Invalid configuration or argument supplied by the caller.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unreadable, malformed or inconsistent data encountered at runtime.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace geonet
