#pragma once

#include <stdexcept>
#include <string>

namespace deligan {

// Error taxonomy shared by all modules. Each maps to a CLI exit code in
// tools/deligan.cpp: ConfigError/FormatError/DataError -> 2, MetricError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct FormatError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

struct MetricError : Error {
    using Error::Error;
};

} // namespace deligan
