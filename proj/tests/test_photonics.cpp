#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fbsim/error.hpp"
#include "fbsim/photonics.hpp"
#include "oracles/bessel_series.hpp"
#include "oracles/dense_oracle.hpp"

using namespace fbsim;

namespace {

Errc code_of(auto f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Config;
}

const FrequencyLattice kLat(193.4e12, 18e9, -30, 30);

}  // namespace

TEST_CASE("bessel values against the power series") {
  for (int n = -8; n <= 8; ++n) {
    for (double x : {0.0, 0.1, 0.5, 1.0, 1.8, 2.405, 3.7}) {
      CHECK(std::abs(bessel_j(n, x) - oracle::bessel_series(n, x)) < 1e-14);
    }
  }
  CHECK(oracle::bessel_series(1, 1.0) == doctest::Approx(0.4400505857).epsilon(1e-10));
  CHECK(std::pow(oracle::bessel_series(0, 1.0), 2) == doctest::Approx(0.58553).epsilon(1e-5));
}

TEST_CASE("bessel truncation") {
  for (double m : {0.0, 0.5, 1.0, 2.5, 8.0}) {
    const int n = bessel_truncation_order(m);
    double tail = 0.0;
    for (int k = n + 1; k < n + 60; ++k) tail += 2.0 * std::pow(oracle::bessel_series(k, m), 2);
    CHECK(tail <= 2 * kBesselTailTolerance);
  }
  CHECK(bessel_truncation_order(0.0) == 0);
  CHECK(code_of([] { bessel_truncation_order(200.0); }) == Errc::TruncationFailure);
}

TEST_CASE("extinction calibration hits the sideband ratio") {
  for (double m : {0.3, 1.0, 1.8}) {
    for (double r : {0.01, 0.14, 0.5, 0.9}) {
      const double k = calibrate_extinction(m, r);
      const double got = std::pow(oracle::bessel_series(1, k * m), 2) / std::pow(oracle::bessel_series(1, m), 2);
      CHECK(got == doctest::Approx(r).epsilon(1e-12));
    }
  }
  CHECK(code_of([] { calibrate_extinction(2.0, 0.14); }) == Errc::InvalidParameter);
  CHECK(code_of([] { calibrate_extinction(1.0, 1.5); }) == Errc::InvalidParameter);
}

TEST_CASE("modulator sidebands") {
  ModulatorParams p;
  p.mod_index_slow = 1.0;
  p.pol_extinction = calibrate_extinction(1.0, 0.14);
  const auto pm = phase_modulator(p, kLat);
  const double j1 = oracle::bessel_series(1, 1.0);
  CHECK(sideband_power(pm, {1.0, 0.0}, 0, 1) == doctest::Approx(j1 * j1).epsilon(1e-13));
  CHECK(sideband_power(pm, {0.0, 1.0}, 0, 1) == doctest::Approx(0.14 * j1 * j1).epsilon(1e-12));
  CHECK(sideband_power(pm, {1.0, 0.0}, 0, -1) == doctest::Approx(j1 * j1).epsilon(1e-13));
  CHECK(pm.frequency_step() == 1);
  CHECK(code_of([&] { sideband_power(pm, {1.0, 0.0}, 31, 1); }) == Errc::BinOutOfRange);

  // Power is conserved for a tone far from the lattice edges.
  const auto out = apply(pm, SinglePhotonSpectrum::tone(kLat, 0, linear_polarization(0.7)));
  CHECK(out.total_power() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.leakage() < 1e-20);
}

TEST_CASE("modulator voltage drive") {
  ModulatorParams p;
  p.v_pi = 4.0;
  p.drive_voltage = 2.0;
  CHECK(p.effective_index() == doctest::Approx(std::numbers::pi / 2));
  p.v_pi = 0.0;
  CHECK(code_of([&] { p.validate(); }) == Errc::NonPositiveVpi);
}

TEST_CASE("edge tones leak off the lattice") {
  ModulatorParams p;
  p.mod_index_slow = 1.5;
  const auto out = apply(phase_modulator(p, kLat), SinglePhotonSpectrum::tone(kLat, 30, {1.0, 0.0}));
  CHECK(out.leakage() > 0.1);
  CHECK(out.total_power() + out.leakage() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("element preconditions") {
  CHECK(code_of([] { attenuator(-1.0, kLat); }) == Errc::NegativeLoss);
  CHECK(code_of([] { pulse_shaper({{0, ShaperBin{1.2, 0.0}}}, kLat); }) == Errc::AmplitudeOutOfRange);
  CHECK(code_of([] { pulse_shaper({{99, ShaperBin{1.0, 0.0}}}, kLat); }) == Errc::BinOutOfRange);
  const FrequencyLattice other(193.4e12, 18e9, -5, 5);
  CHECK(code_of([&] { compose(attenuator(1.0, kLat), attenuator(1.0, other)); }) == Errc::LatticeMismatch);
}

TEST_CASE("attenuator and delay") {
  const auto out = apply(attenuator(3.0, kLat), SinglePhotonSpectrum::tone(kLat, 2, {1.0, 0.0}));
  CHECK(out.total_power() == doctest::Approx(std::pow(10.0, -0.3)));
  const auto d = delay(1e-12, 0.25, kLat);
  const Complex z = d.matrix(0, 3)(0, 0);
  CHECK(std::arg(z) == doctest::Approx(std::remainder(2 * std::numbers::pi * 3 * 18e9 * 1e-12 + 0.25, 2 * std::numbers::pi)));
}

TEST_CASE("half-wave birefringent fibre swaps diagonal to anti-diagonal") {
  const double dgd = 1.73e-12;
  // Phase difference of pi between bins 0 and 10 needs 10*spacing*tau = 0.5.
  const double len = 0.5 / (10 * 18e9 * dgd);
  const auto f = birefringent_fiber(len, dgd, 0.0, kLat);
  const JonesVector d = linear_polarization(std::numbers::pi / 4);
  const JonesVector a = f.matrix(0, 0) * d;
  const JonesVector b = f.matrix(0, 10) * d;
  CHECK(std::abs(overlap(a, b)) < 1e-12);
}

TEST_CASE("composition matches dense products") {
  const FrequencyLattice lat(193.4e12, 18e9, -3, 4);
  const oracle::Grid g{-3, 4, 18e9};
  ModulatorParams p;
  p.mod_index_slow = 1.3;
  p.pol_extinction = 0.4;
  p.rf_phase = 0.6;
  p.rf_freq_bins = 2;
  const auto sparse = compose(polarizer(0.3, lat), compose(phase_modulator(p, lat), delay(5e-12, 0.1, lat)));
  const oracle::Dense dense = oracle::polarizer(g, 0.3) * oracle::modulator(g, 1.3, 0.4, 2, 0.6) * oracle::delay(g, 5e-12, 0.1);
  for (int in = -3; in <= 4; ++in) {
    for (int out = -3; out <= 4; ++out) {
      const JonesMatrix m = sparse.matrix(out - in, in);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) CHECK(std::abs(m(a, b) - dense(g.idx(out, a), g.idx(in, b))) < 1e-12);
    }
  }
  CHECK(sparse.frequency_step() == 2);
}

TEST_CASE("sum of operators") {
  const auto s = sum(pbs_project(Axis::Slow, kLat), pbs_project(Axis::Fast, kLat));
  const JonesMatrix m = s.matrix(0, 5);
  CHECK((m - JonesMatrix::Identity()).norm() < 1e-15);
}

TEST_CASE("spectrum access") {
  SinglePhotonSpectrum s(kLat);
  s.set(1, {1.0, 0.0});
  s.add(1, {0.0, 1.0});
  CHECK(s.power(1) == doctest::Approx(2.0));
  CHECK(s.total_power() == doctest::Approx(2.0));
  CHECK(code_of([&] { s.at(100); }) == Errc::BinOutOfRange);
}
