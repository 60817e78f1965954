#pragma once

#include <stdexcept>
#include <string>

namespace groundcal {

// Base class for all library errors. Every subtype carries a human-readable
// message naming the offending input and, where applicable, the stage/file.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- geometry ----
class NonOrthonormalRotation : public Error {
 public:
  using Error::Error;
};

// ---- ground observation ----
class InsufficientGround : public Error {
 public:
  using Error::Error;
};
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};
class AntiparallelNormal : public Error {
 public:
  using Error::Error;
};

// ---- lidar odometry ----
class NonPositiveDt : public Error {
 public:
  using Error::Error;
};
class SingularNormalEquations : public Error {
 public:
  using Error::Error;
};
class TooFewSamples : public Error {
 public:
  using Error::Error;
};
class MissingGroundObservation : public Error {
 public:
  using Error::Error;
};

// ---- imu conditioning ----
class StreamTooShort : public Error {
 public:
  using Error::Error;
};
class NonUniformRate : public Error {
 public:
  using Error::Error;
};
class OutOfRangeTimestamp : public Error {
 public:
  using Error::Error;
};
class SeriesTooShort : public Error {
 public:
  using Error::Error;
};

// ---- calibration ----
class InsufficientOverlap : public Error {
 public:
  using Error::Error;
};
class RankDeficient : public Error {
 public:
  using Error::Error;
};
class InsufficientExcitation : public Error {
 public:
  using Error::Error;
};

// ---- simulation ----
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

// ---- io / config ----
class IoError : public Error {
 public:
  using Error::Error;
};
class ManifestMissing : public IoError {
 public:
  using IoError::IoError;
};
class ColumnMismatch : public IoError {
 public:
  using IoError::IoError;
};
class NonMonotoneTimestamps : public IoError {
 public:
  using IoError::IoError;
};
class BadMagic : public IoError {
 public:
  using IoError::IoError;
};
class ConfigError : public IoError {
 public:
  using IoError::IoError;
};

// Wraps any stage failure inside the end-to-end pipeline with a stage label.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace groundcal
