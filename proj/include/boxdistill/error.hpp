#pragma once

#include <stdexcept>
#include <string>

namespace boxdistill {

// Error categories map onto CLI exit codes: config=2, data=3, runtime=4.

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration: bad spec parameters, unknown architecture names,
/// inconsistent stage wiring. Raised before any compute starts.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Bad input data: shape mismatches, out-of-range class indices,
/// unreadable dataset files.
class DataError : public Error {
public:
  using Error::Error;
};

/// Shape/contract violation on an in-process call (forward with wrong
/// channel count, loss on mismatched maps).
class InputError : public DataError {
public:
  using DataError::DataError;
};

/// Checkpoint file corrupt, version unknown, or spec mismatch on load.
class CheckpointError : public Error {
public:
  using Error::Error;
};

/// Remote predictor unreachable after retries.
class TransportError : public Error {
public:
  using Error::Error;
};

/// Wire payload malformed or rejected by the service.
class ProtocolError : public Error {
public:
  using Error::Error;
};

/// Training failure (divergence, NaN loss) with diagnostic context.
class TrainingError : public Error {
public:
  using Error::Error;
};

}  // namespace boxdistill
