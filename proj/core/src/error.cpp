#include "fbsim/error.hpp"

namespace fbsim {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NonPositiveSpacing: return "NonPositiveSpacing";
    case Errc::EmptyRange: return "EmptyRange";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::TruncationFailure: return "TruncationFailure";
    case Errc::AmplitudeOutOfRange: return "AmplitudeOutOfRange";
    case Errc::NegativeLoss: return "NegativeLoss";
    case Errc::LatticeMismatch: return "LatticeMismatch";
    case Errc::BinOutOfRange: return "BinOutOfRange";
    case Errc::DuplicatePair: return "DuplicatePair";
    case Errc::EmptyPairs: return "EmptyPairs";
    case Errc::RfFrequencyMismatch: return "RfFrequencyMismatch";
    case Errc::NoFringesDetected: return "NoFringesDetected";
    case Errc::NonPositiveVpi: return "NonPositiveVpi";
    case Errc::DegenerateProbe: return "DegenerateProbe";
    case Errc::NegativeRate: return "NegativeRate";
    case Errc::NonPositiveDuration: return "NonPositiveDuration";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::Config: return "Config";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

NoFringesDetected::NoFringesDetected(double resolution_limit, const std::string& detail)
    : Error(Errc::NoFringesDetected, detail), resolution_limit_(resolution_limit) {}

ConfigError::ConfigError(std::string field_path, const std::string& detail)
    : Error(Errc::Config, field_path + ": " + detail), field_path_(std::move(field_path)) {}

}  // namespace fbsim
