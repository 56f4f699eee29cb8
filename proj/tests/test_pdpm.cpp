#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fbsim/error.hpp"
#include "fbsim/pdpm.hpp"
#include "oracles/random_chain.hpp"

using namespace fbsim;

namespace {

constexpr double kPi = std::numbers::pi;

Errc code_of(auto f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Config;
}

const FrequencyLattice kLat(193.4e12, 18e9, -20, 20);

PdpmParams ideal(double m = 1.0) {
  PdpmParams p;
  p.mod1.mod_index_slow = m;
  p.mod2.mod_index_slow = m;
  return p;
}

SinglePhotonSpectrum broadband_fringes(const FrequencyLattice& lat, double tau) {
  PdpmParams q;
  q.arm_delay_diff = tau;
  SinglePhotonSpectrum s(lat);
  for (int k = lat.min_index(); k <= lat.max_index(); ++k) s.set(k, linear_polarization(kPi / 4));
  return apply(polarizer(kPi / 4, lat), apply(build_pdpm(q, lat), s));
}

}  // namespace

TEST_CASE("ideal PDPM is polarization independent") {
  const auto dev = build_pdpm(ideal(), kLat);
  oracle::Draw d(11);
  const double ref = sideband_power(dev, {1.0, 0.0}, 0, 1);
  for (int i = 0; i < 20; ++i) CHECK(std::abs(sideband_power(dev, d.jones(), 0, 1) - ref) < 1e-14);
}

TEST_CASE("arm phase does not change polarization-summed power") {
  PdpmParams p = ideal();
  p.arm_delay_diff = 2e-12;
  p.rf_phase_diff = 0.9;
  oracle::Draw d(12);
  const JonesVector in = d.jones();
  const double ref = apply(build_pdpm(p, kLat), SinglePhotonSpectrum::tone(kLat, 0, in)).power(1);
  for (double c : {0.3, 1.7, -2.5}) {
    p.arm_carrier_phase = c;
    CHECK(apply(build_pdpm(p, kLat), SinglePhotonSpectrum::tone(kLat, 0, in)).power(1) ==
          doctest::Approx(ref).epsilon(1e-13));
  }
}

TEST_CASE("loss bookkeeping") {
  PdpmParams p = ideal(0.0);
  p.arm1_loss_db = 2.7;
  p.arm2_loss_db = 3.7;
  CHECK(p.arm_loss_db(1) == doctest::Approx(2.7));
  p.voa_db = 1.0;
  CHECK(p.arm_loss_db(1) == doctest::Approx(3.7));
  CHECK(p.arm_loss_db(2) == doctest::Approx(3.7));
  CHECK(insertion_loss_db(build_pdpm(p, kLat), 0) == doctest::Approx(3.7).epsilon(1e-12));
  p.voa_db = -1.0;
  CHECK(code_of([&] { p.validate(); }) == Errc::NegativeLoss);
}

TEST_CASE("RF balancing") {
  CHECK(rf_attenuation_for_balance(3.0, 6.0) == doctest::Approx(20 * std::log10(2.0)));
  CHECK(rf_attenuation_for_balance(5.0, 5.0) == 0.0);
  CHECK(code_of([] { rf_attenuation_for_balance(0.0, 1.0); }) == Errc::NonPositiveVpi);
  PdpmParams p = ideal();
  p.mod1.v_pi = 3.0;
  p.mod2.v_pi = 6.0;
  p.mod1.drive_voltage = p.mod2.drive_voltage = 1.0;
  p.rf_atten_db = rf_attenuation_for_balance(3.0, 6.0);
  CHECK(p.arm_index(1) == doctest::Approx(p.arm_index(2)).epsilon(1e-12));
  p.mod2.rf_freq_bins = 2;
  CHECK(code_of([&] { p.validate(); }) == Errc::RfFrequencyMismatch);
}

TEST_CASE("delay estimate from broadband fringes") {
  const FrequencyLattice band(193.4e12, 18e9, -139, 139);
  const double res = 1.0 / (279 * 18e9);
  for (double tau : {0.5e-12, 1.0e-12, -2.2e-12, 7e-12}) {
    const auto e = estimate_delay_from_fringes(broadband_fringes(band, tau));
    CHECK(e.resolution_limit == doctest::Approx(res));
    CHECK(std::abs(e.delay - std::abs(tau)) <= res / 16);
  }
}

TEST_CASE("sub-resolution delays are refused") {
  const FrequencyLattice band(193.4e12, 18e9, -139, 139);
  CHECK(band.size() * band.spacing_hz() == doctest::Approx(5.022e12));
  for (double tau : {0.0, 60e-15}) {
    try {
      estimate_delay_from_fringes(broadband_fringes(band, tau));
      FAIL("expected NoFringesDetected");
    } catch (const NoFringesDetected& e) {
      CHECK(e.code() == Errc::NoFringesDetected);
      CHECK(e.resolution_limit() == doctest::Approx(1.0 / 5.022e12));
    }
  }
}

TEST_CASE("comb asymmetry") {
  SinglePhotonSpectrum s(kLat);
  s.set(1, {1.0, 0.0});
  s.set(-1, {1.0, 0.0});
  CHECK(comb_asymmetry(s, 0) == 0.0);
  s.set(-1, {0.0, 0.0});
  CHECK(comb_asymmetry(s, 0) == doctest::Approx(1.0));
  CHECK(comb_asymmetry(SinglePhotonSpectrum(kLat), 0) == 0.0);
}

TEST_CASE("RF phase estimate recovers an injected skew") {
  PdpmParams p = ideal();
  const auto probe = SinglePhotonSpectrum::tone(kLat, 0, linear_polarization(kPi / 4));
  for (double skew : {0.4, -1.0, 1.3}) {
    p.rf_phase_diff = skew;
    auto builder = [&](double psi) {
      PdpmParams q = p;
      q.rf_phase_diff += psi;
      return build_pdpm(q, kLat);
    };
    CHECK(estimate_rf_phase(builder, probe) == doctest::Approx(-skew).epsilon(1e-6));
  }
  // A probe on one arm only cannot see the RF phase.
  auto builder = [&](double psi) {
    PdpmParams q = p;
    q.rf_phase_diff += psi;
    return build_pdpm(q, kLat);
  };
  CHECK(code_of([&] { estimate_rf_phase(builder, SinglePhotonSpectrum::tone(kLat, 0, {1.0, 0.0})); }) ==
        Errc::DegenerateProbe);
}

TEST_CASE("calibration of an assembled device") {
  PdpmParams p;
  p.arm1_loss_db = 2.7;
  p.arm2_loss_db = 3.7;
  p.arm_delay_diff = -1.5e-12;
  p.arm_carrier_phase = 0.3;
  p.mod1.v_pi = 3.5;
  p.mod2.v_pi = 4.2;
  p.mod1.drive_voltage = p.mod2.drive_voltage = 1.1;
  p.rf_phase_diff = 0.4;
  const auto r = calibrate_pdpm(p);
  CHECK(r.report.voa_setting_db == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.report.rf_attenuation_db == doctest::Approx(20 * std::log10(4.2 / 3.5)).epsilon(1e-12));
  CHECK(r.report.delay_resolved);
  CHECK(r.report.delay_correction == doctest::Approx(1.5e-12).epsilon(0.02));
  CHECK(std::abs(r.calibrated.arm_delay_diff) < r.report.delay_resolution_limit / 8);
  CHECK(r.calibrated.arm_index(1) == doctest::Approx(r.calibrated.arm_index(2)).epsilon(1e-12));
  CHECK(r.report.residual_asymmetry < 1e-12);
}
