#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fbsim/biphoton.hpp"
#include "fbsim/error.hpp"
#include "oracles/bessel_series.hpp"

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

const FrequencyLattice kLat(193.4e12, 18e9, -20, 20);
const JonesVector kSlow{1.0, 0.0};

BiphotonState two_pair(double phi) {
  return make_bfc(kLat, {{3, -3, 1.0, kSlow, kSlow}, {5, -5, std::polar(1.0, phi), kSlow, kSlow}}, true);
}

ElementOperator pm(double m, double kappa, double theta = 0.0) {
  ModulatorParams p;
  p.mod_index_slow = m;
  p.pol_extinction = kappa;
  p.rf_phase = theta;
  return phase_modulator(p, kLat);
}

}  // namespace

TEST_CASE("bfc construction") {
  const auto st = two_pair(0.3);
  CHECK(st.norm2() == doctest::Approx(1.0));
  CHECK(std::abs(st.amplitude(5, Axis::Slow, -5, Axis::Slow) - std::polar(1.0 / std::sqrt(2.0), 0.3)) < 1e-15);
  CHECK(std::abs(st.amplitude(5, Axis::Fast, -5, Axis::Slow)) == 0.0);
  const auto raw = make_bfc(kLat, {{1, -1, 2.0, kSlow, kSlow}}, false);
  CHECK(raw.norm2() == doctest::Approx(4.0));
}

TEST_CASE("bfc errors") {
  CHECK(code_of([] { make_bfc(kLat, {}, true); }) == Errc::EmptyPairs);
  CHECK(code_of([] { make_bfc(kLat, {{1, -1, 1.0, kSlow, kSlow}, {1, -1, 1.0, kSlow, kSlow}}, true); }) ==
        Errc::DuplicatePair);
  CHECK(code_of([] { make_bfc(kLat, {{40, -1, 1.0, kSlow, kSlow}}, true); }) == Errc::BinOutOfRange);
}

TEST_CASE("spdc envelope enters as power") {
  const auto st = make_spdc_source(kLat, 0, {{1, 1.0}, {2, 4.0}}, {kSlow, kSlow});
  CHECK(st.norm2() == doctest::Approx(1.0));
  const double a1 = std::norm(st.amplitude(1, Axis::Slow, -1, Axis::Slow));
  const double a2 = std::norm(st.amplitude(2, Axis::Slow, -2, Axis::Slow));
  CHECK(a2 / a1 == doctest::Approx(4.0));
}

TEST_CASE("identity leaves the state alone") {
  const auto st = two_pair(1.0);
  const auto out = apply_both(ElementOperator::identity(kLat), st);
  for (const auto& [bins, block] : st.blocks()) {
    CHECK((out.blocks().at(bins) - block).norm() < 1e-15);
  }
}

TEST_CASE("fringe at the overlap bins") {
  const double j1 = oracle::bessel_series(1, 1.0);
  for (double phi : {0.0, 1.0, std::numbers::pi}) {
    const auto out = apply_both(pm(1.0, 1.0, 0.7), two_pair(phi));
    // Each photon reaches its overlap bin from two comb lines.
    const double expect = 0.5 * std::pow(j1, 4) * std::norm(1.0 + std::polar(1.0, phi));
    CHECK(coincidence_weight(out, 4, -4) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(singles_weight(out, Side::Signal, 4) == doctest::Approx(j1 * j1).epsilon(1e-10));
  }
}

TEST_CASE("one-sided application") {
  const auto st = two_pair(0.0);
  const auto out = apply_side(Side::Signal, attenuator(3.0, kLat), st);
  CHECK(out.norm2() == doctest::Approx(std::pow(10.0, -0.3)));
  const auto rot = apply_idler(rotator(std::numbers::pi / 2, kLat), st);
  CHECK(std::norm(rot.amplitude(3, Axis::Slow, -3, Axis::Fast)) == doctest::Approx(0.5));
}

TEST_CASE("joint spectrum and marginals agree") {
  const auto out = apply_both(pm(1.2, 0.5), make_bfc(kLat, {{3, -3, 1.0, linear_polarization(0.4), kSlow},
                                                             {5, -5, 1.0, kSlow, linear_polarization(1.1)}},
                                                       true));
  const auto js = joint_spectrum(out);
  double total = 0.0;
  double sig4 = 0.0;
  for (const auto& [bins, w] : js) {
    total += w;
    if (bins.first == 4) sig4 += w;
  }
  CHECK(total == doctest::Approx(out.norm2()));
  CHECK(singles_weight(out, Side::Signal, 4) == doctest::Approx(sig4));
  CHECK(code_of([&] { coincidence_weight(out, 99, 0); }) == Errc::BinOutOfRange);
}

TEST_CASE("lattice mismatch") {
  const FrequencyLattice other(193.4e12, 18e9, -5, 5);
  CHECK(code_of([] { apply_both(attenuator(1.0, FrequencyLattice(193.4e12, 18e9, -5, 5)), two_pair(0.0)); }) ==
        Errc::LatticeMismatch);
}
