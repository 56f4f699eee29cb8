#include "fbsim/counting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/poisson_distribution.hpp>

#include "fbsim/error.hpp"

namespace fbsim {

namespace {

std::int64_t poisson(double mean, Engine& engine) {
  if (mean <= 0.0) return 0;
  boost::random::poisson_distribution<std::int64_t, double> dist(mean);
  return dist(engine);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void DetectorParams::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
    throw Error(Errc::InvalidParameter, "detector efficiency must lie in [0, 1]");
  }
  if (!(dark_rate >= 0.0)) throw Error(Errc::NegativeRate, "dark count rate must be >= 0");
  if (!(coincidence_window >= 0.0)) {
    throw Error(Errc::InvalidParameter, "coincidence window must be >= 0");
  }
}

CountRates rates_from_weights(double signal_weight, double idler_weight, double coincidence_weight,
                              double pair_rate, const DetectorParams& d_s,
                              const DetectorParams& d_i) {
  if (!(pair_rate >= 0.0)) throw Error(Errc::NegativeRate, "pair rate must be >= 0");
  d_s.validate();
  d_i.validate();
  CountRates r;
  r.singles_signal = pair_rate * d_s.efficiency * signal_weight + d_s.dark_rate;
  r.singles_idler = pair_rate * d_i.efficiency * idler_weight + d_i.dark_rate;
  const double window = std::max(d_s.coincidence_window, d_i.coincidence_window);
  r.accidentals = r.singles_signal * r.singles_idler * window;
  r.coincidences_raw = pair_rate * d_s.efficiency * d_i.efficiency * coincidence_weight + r.accidentals;
  r.coincidences_net = r.coincidences_raw - r.accidentals;
  return r;
}

CountRates expected_rates(const BiphotonState& st, int signal_bin, int idler_bin, double pair_rate,
                          const DetectorParams& d_s, const DetectorParams& d_i) {
  return rates_from_weights(singles_weight(st, Side::Signal, signal_bin),
                            singles_weight(st, Side::Idler, idler_bin),
                            coincidence_weight(st, signal_bin, idler_bin), pair_rate, d_s, d_i);
}

CountSample sample_counts(const CountRates& rates, double duration, Engine& engine) {
  if (!(duration > 0.0)) {
    throw Error(Errc::NonPositiveDuration, "duration must be > 0 s, got " + std::to_string(duration));
  }
  CountSample s;
  s.singles_signal = poisson(rates.singles_signal * duration, engine);
  s.singles_idler = poisson(rates.singles_idler * duration, engine);
  s.coincidences_raw = poisson(rates.coincidences_raw * duration, engine);
  s.accidentals = poisson(rates.accidentals * duration, engine);
  s.coincidences_net = s.coincidences_raw - s.accidentals;
  return s;
}

CountSample sample_counts(const CountRates& rates, double duration, std::uint64_t seed) {
  Engine engine(seed);
  return sample_counts(rates, duration, engine);
}

IntervalStats aggregate_intervals(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw Error(Errc::TooFewSamples, "need at least two intervals, got " +
                                         std::to_string(samples.size()));
  }
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return IntervalStats{mean, std::sqrt(ss / (n - 1.0))};
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace fbsim
