#pragma once

#include <stdexcept>
#include <string>

namespace flowagg {

// Bad input, bad configuration or schema mismatch. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File could not be opened, read or written. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed capture file; the message names the byte offset.
class PcapFormatError : public IoError {
public:
    using IoError::IoError;
};

// Training diverged (non-finite loss).
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, int epoch)
        : std::runtime_error(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

}  // namespace flowagg
