#pragma once

#include <stdexcept>
#include <string>

namespace vcal {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input file could not be parsed; message carries the line number.
struct ParseError : Error {
    using Error::Error;
};

// A value is outside its documented domain (similarity, label, ...).
struct RangeError : Error {
    using Error::Error;
};

// File-system failure (missing file, unwritable output).
struct IoError : Error {
    using Error::Error;
};

// Fit requested on a dataset with only one class present.
struct SingleClassDataset : Error {
    using Error::Error;
};

// A calibrated threshold landed outside (-1, 1).
struct DegenerateThreshold : Error {
    using Error::Error;
};

// Stratified split requested with fewer members than folds in some class.
struct TooFewPerClass : Error {
    using Error::Error;
};

// Model file has an unsupported version or calibrator kind.
struct VersionMismatch : Error {
    using Error::Error;
};

}  // namespace vcal
