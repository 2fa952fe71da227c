#pragma once

#include <stdexcept>
#include <string>

namespace embedcast {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration (unknown key, infeasible plan, bad parameter).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data that cannot be used (missing file, ragged rows, non-numeric cells, too short).
class DataError : public Error {
public:
    using Error::Error;
};

} // namespace embedcast
