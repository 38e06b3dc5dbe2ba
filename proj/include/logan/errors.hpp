#pragma once

#include <stdexcept>
#include <string>

namespace logan {

// Error taxonomy mirrors the CLI exit codes: config/data/format/contract
// problems exit 2, numeric aborts exit 3, check failures exit 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor shapes incompatible with the requested operation.
struct DimensionError : Error {
    using Error::Error;
};

// Malformed binary file (bad magic, truncation, header/payload mismatch).
struct FormatError : Error {
    using Error::Error;
};

// Semantically invalid data (out-of-vocab token, non-finite feature, ...).
struct DataError : Error {
    using Error::Error;
};

// API precondition violated by the caller.
struct ContractError : Error {
    using Error::Error;
};

// NaN/Inf encountered where finite values are required.
struct NumericError : Error {
    using Error::Error;
};

// Bad run configuration (unknown key, invalid value).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace logan
