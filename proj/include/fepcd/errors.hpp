#pragma once

#include <stdexcept>
#include <string>

namespace fepcd {

// Dimension or shape disagreement between arguments.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An argument is outside the documented domain (probability outside [0,1], k == 0, ...).
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Exact enumeration requested on a model larger than the oracle cap.
struct SizeLimitError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Training produced a non-finite or exploding parameter.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadMagicError : FormatError {
    using FormatError::FormatError;
};

struct TruncatedFileError : FormatError {
    using FormatError::FormatError;
};

struct CountMismatchError : FormatError {
    using FormatError::FormatError;
};

// CSV row with a bad column count or an unparsable cell. Carries the 1-based line.
struct CsvError : FormatError {
    CsvError(std::size_t line, const std::string& what)
        : FormatError("line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

struct SchemaError : FormatError {
    using FormatError::FormatError;
};

struct VersionError : FormatError {
    using FormatError::FormatError;
};

}  // namespace fepcd
