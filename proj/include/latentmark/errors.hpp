#pragma once

#include <stdexcept>

namespace latentmark {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// tensor dimension errors (zero dims, mismatched operands)
struct ShapeError : Error {
    using Error::Error;
};

// invalid or inconsistent configuration (divisibility, p = 0, bad ranges)
struct ConfigError : Error {
    using Error::Error;
};

// watermark codec misuse (length mismatch, encrypt/decrypt flag misuse)
struct CodecError : Error {
    using Error::Error;
};

// malformed distortion spec string or out-of-range parameters
struct DistortionError : Error {
    using Error::Error;
};

// file I/O and file format errors
struct IoError : Error {
    using Error::Error;
};

}  // namespace latentmark
