#pragma once

#include <cstdint>
#include <span>

#include <boost/random/mersenne_twister.hpp>

#include "fbsim/biphoton.hpp"

namespace fbsim {

struct DetectorParams {
  double efficiency = 1.0;
  double dark_rate = 0.0;            // counts/s
  double coincidence_window = 1e-9;  // s

  void validate() const;
};

// All rates in counts/s. coincidences_net = coincidences_raw - accidentals.
struct CountRates {
  double singles_signal = 0.0;
  double singles_idler = 0.0;
  double coincidences_raw = 0.0;
  double accidentals = 0.0;
  double coincidences_net = 0.0;
};

// Rates from detection weights. Dark counts enter the singles before the
// accidental estimate S_s * S_i * window (the wider of the two windows).
CountRates rates_from_weights(double signal_weight, double idler_weight, double coincidence_weight,
                              double pair_rate, const DetectorParams& d_s,
                              const DetectorParams& d_i);

CountRates expected_rates(const BiphotonState& st, int signal_bin, int idler_bin, double pair_rate,
                          const DetectorParams& d_s, const DetectorParams& d_i);

struct CountSample {
  std::int64_t singles_signal = 0;
  std::int64_t singles_idler = 0;
  std::int64_t coincidences_raw = 0;
  std::int64_t accidentals = 0;
  std::int64_t coincidences_net = 0;  // raw - accidentals; may be negative
};

// Every draw in the library comes from this engine. Boost's implementations
// are used so a seed reproduces the same counts on any platform.
using Engine = boost::random::mt19937_64;

// Independent Poisson draws with mean rate * duration for singles, raw
// coincidences and the accidental background.
CountSample sample_counts(const CountRates& rates, double duration, Engine& engine);
CountSample sample_counts(const CountRates& rates, double duration, std::uint64_t seed);

struct IntervalStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1)
};

IntervalStats aggregate_intervals(std::span<const double> samples);

// SplitMix64 mix of (master, index); sweep point i always gets the same seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace fbsim
