#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cfx {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// graph
struct CyclicGraphError : Error {
    using Error::Error;
};
struct ConstraintConflictError : Error {
    using Error::Error;
};
struct NoExtensionError : Error {
    using Error::Error;
};

// data / io
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t row, std::size_t col)
        : Error(what + " (row " + std::to_string(row) + ", col " + std::to_string(col) + ")"),
          row(row),
          col(col) {}
    std::size_t row;
    std::size_t col;
};
struct SchemaMismatchError : Error {
    using Error::Error;
};
struct DegenerateColumnError : Error {
    using Error::Error;
};

// model
struct SingleClassError : Error {
    using Error::Error;
};

// stats
struct InsufficientSamplesError : Error {
    using Error::Error;
};
struct SingularSubmatrixError : Error {
    using Error::Error;
};
struct RankDeficientError : Error {
    using Error::Error;
};
struct ShapeMismatchError : Error {
    using Error::Error;
};
struct ConstantVectorError : Error {
    using Error::Error;
};

// discovery
struct UnsupportedModeError : Error {
    using Error::Error;
};

// scoring
struct EmptyCellError : Error {
    using Error::Error;
};
struct UndefinedScoreError : Error {
    using Error::Error;
};
struct NoValidPairError : Error {
    using Error::Error;
};

}  // namespace cfx
