#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fbsim {

enum class Errc {
  NonPositiveSpacing,
  EmptyRange,
  InvalidParameter,
  TruncationFailure,
  AmplitudeOutOfRange,
  NegativeLoss,
  LatticeMismatch,
  BinOutOfRange,
  DuplicatePair,
  EmptyPairs,
  RfFrequencyMismatch,
  NoFringesDetected,
  NonPositiveVpi,
  DegenerateProbe,
  NegativeRate,
  NonPositiveDuration,
  TooFewSamples,
  Config,
};

std::string_view to_string(Errc code) noexcept;

// Every library failure is reported through this type; code() identifies the
// failure class, what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised by the fringe delay estimator. Carries the single-trace resolution
// so callers can still report it.
class NoFringesDetected : public Error {
 public:
  NoFringesDetected(double resolution_limit, const std::string& detail);

  double resolution_limit() const noexcept { return resolution_limit_; }

 private:
  double resolution_limit_;
};

// Configuration problem tied to a field path such as "device.arm1_loss_db".
class ConfigError : public Error {
 public:
  ConfigError(std::string field_path, const std::string& detail);

  const std::string& field_path() const noexcept { return field_path_; }

 private:
  std::string field_path_;
};

}  // namespace fbsim
