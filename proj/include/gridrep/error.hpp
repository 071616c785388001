#pragma once

#include <stdexcept>
#include <string>

namespace gridrep {

// Base of every error raised by the toolkit. The CLI maps each category to an
// exit code: invalid input/config -> 2, data and I/O problems -> 3, numerical
// failures -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class AlignmentError : public DataError {
public:
    using DataError::DataError;
};

class RangeError : public DataError {
public:
    using DataError::DataError;
};

class DegenerateLabels : public DataError {
public:
    using DataError::DataError;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class TrainingDiverged : public NumericalError {
public:
    TrainingDiverged(std::size_t epoch, const std::string& what)
        : NumericalError("training diverged at epoch " + std::to_string(epoch) + ": " + what),
          epoch_(epoch) {}

    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

}  // namespace gridrep
