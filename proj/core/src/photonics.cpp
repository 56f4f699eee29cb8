#include "fbsim/photonics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <fmt/core.h>

#include "fbsim/error.hpp"

namespace fbsim {

namespace {

void require_same_lattice(const FrequencyLattice& a, const FrequencyLattice& b) {
  if (!(a == b)) throw Error(Errc::LatticeMismatch, "operands are defined on different lattices");
}

void require_bin(const FrequencyLattice& lattice, int bin) {
  if (!lattice.contains(bin)) {
    throw Error(Errc::BinOutOfRange, "bin " + std::to_string(bin) + " outside [" +
                                         std::to_string(lattice.min_index()) + ", " +
                                         std::to_string(lattice.max_index()) + "]");
  }
}

std::optional<int> merge_step(const std::optional<int>& a, const std::optional<int>& b) {
  if (!a) return b;
  if (!b) return a;
  return *a == *b ? a : std::nullopt;
}

}  // namespace

JonesVector operator*(const JonesMatrix& m, const JonesVector& v) noexcept {
  return JonesVector{m(0, 0) * v.slow + m(0, 1) * v.fast, m(1, 0) * v.slow + m(1, 1) * v.fast};
}

// --- SinglePhotonSpectrum ---------------------------------------------------

SinglePhotonSpectrum::SinglePhotonSpectrum(FrequencyLattice lattice)
    : lattice_(lattice), amps_(lattice.size()) {}

SinglePhotonSpectrum SinglePhotonSpectrum::tone(const FrequencyLattice& lattice, int bin,
                                                const JonesVector& pol) {
  SinglePhotonSpectrum s(lattice);
  s.set(bin, pol);
  return s;
}

const JonesVector& SinglePhotonSpectrum::at(int bin) const {
  require_bin(lattice_, bin);
  return amps_[lattice_.slot(bin)];
}

void SinglePhotonSpectrum::set(int bin, const JonesVector& v) {
  require_bin(lattice_, bin);
  amps_[lattice_.slot(bin)] = v;
}

void SinglePhotonSpectrum::add(int bin, const JonesVector& v) {
  require_bin(lattice_, bin);
  amps_[lattice_.slot(bin)] += v;
}

double SinglePhotonSpectrum::power(int bin) const { return at(bin).norm2(); }

double SinglePhotonSpectrum::total_power() const noexcept {
  double p = 0.0;
  for (const auto& a : amps_) p += a.norm2();
  return p;
}

std::vector<double> SinglePhotonSpectrum::power_spectrum() const {
  std::vector<double> p;
  p.reserve(amps_.size());
  for (const auto& a : amps_) p.push_back(a.norm2());
  return p;
}

// --- ElementOperator --------------------------------------------------------

ElementOperator::ElementOperator(FrequencyLattice lattice) : lattice_(lattice) {}

ElementOperator ElementOperator::identity(const FrequencyLattice& lattice) {
  return uniform(lattice, JonesMatrix::Identity());
}

ElementOperator ElementOperator::uniform(const FrequencyLattice& lattice, const JonesMatrix& m) {
  ElementOperator e(lattice);
  e.components_.emplace(0, Column(lattice.size(), m));
  return e;
}

JonesMatrix ElementOperator::matrix(int shift, int bin) const {
  auto it = components_.find(shift);
  if (it == components_.end() || !lattice_.contains(bin)) return JonesMatrix::Zero();
  return it->second[lattice_.slot(bin)];
}

ElementOperator::Column& ElementOperator::column(int shift) {
  auto [it, inserted] = components_.try_emplace(shift);
  if (inserted) it->second.assign(lattice_.size(), JonesMatrix::Zero());
  return it->second;
}

void ElementOperator::accumulate(int shift, int bin, const JonesMatrix& m) {
  require_bin(lattice_, bin);
  column(shift)[lattice_.slot(bin)] += m;
}

void ElementOperator::drop_empty() {
  std::erase_if(components_, [](const auto& kv) {
    for (const auto& m : kv.second) {
      if (!m.isZero(0.0)) return false;
    }
    return true;
  });
}

// --- modulator --------------------------------------------------------------

double ModulatorParams::effective_index() const {
  if (v_pi && drive_voltage) return std::numbers::pi * *drive_voltage / *v_pi;
  return mod_index_slow;
}

void ModulatorParams::validate() const {
  if (v_pi && !(*v_pi > 0.0)) throw Error(Errc::NonPositiveVpi, "v_pi must be positive");
  if (drive_voltage && *drive_voltage < 0.0) {
    throw Error(Errc::InvalidParameter, "drive voltage must be non-negative");
  }
  const double m = effective_index();
  if (!(m >= 0.0) || !std::isfinite(m)) {
    throw Error(Errc::InvalidParameter, "modulation index must be finite and >= 0");
  }
  if (!(pol_extinction >= 0.0 && pol_extinction <= 1.0)) {
    throw Error(Errc::InvalidParameter, "pol_extinction must lie in [0, 1]");
  }
  if (rf_freq_bins < 1) throw Error(Errc::InvalidParameter, "rf_freq_bins must be >= 1");
}

double bessel_j(int n, double x) {
  const int order = n < 0 ? -n : n;
  // std::cyl_bessel_j needs x >= 0; J_n(-x) = (-1)^n J_n(x).
  double v = std::cyl_bessel_j(static_cast<double>(order), std::abs(x));
  if (x < 0.0 && (order % 2 == 1)) v = -v;
  if (n < 0 && (order % 2 == 1)) v = -v;
  return v;
}

int bessel_truncation_order(double m) {
  // Tail summed directly; 1 - sum(...) cannot resolve tails below ~1e-16.
  auto tail_after = [m](int n) {
    double t = 0.0;
    for (int k = n + 1; k <= n + 200; ++k) {
      const double j = bessel_j(k, m);
      t += 2.0 * j * j;
      if (k > std::abs(m) + 1 && 2.0 * j * j < 1e-40 * t) break;
    }
    return t;
  };
  for (int n = 0; n <= kMaxBesselOrder; ++n) {
    if (tail_after(n) <= kBesselTailTolerance) return n;
  }
  throw Error(Errc::TruncationFailure, fmt::format("Bessel tail above {:g} at order {} for m = {:g}",
                                                   kBesselTailTolerance, kMaxBesselOrder, m));
}

double calibrate_extinction(double m, double sideband_ratio) {
  // First maximum of J1; above it the ratio is not monotone in kappa.
  constexpr double kJ1PeakArg = 1.8411837813406593;
  if (!(m > 0.0 && m <= kJ1PeakArg)) {
    throw Error(Errc::InvalidParameter, "extinction calibration needs 0 < m <= 1.8412");
  }
  if (!(sideband_ratio >= 0.0 && sideband_ratio <= 1.0)) {
    throw Error(Errc::InvalidParameter, "sideband ratio must lie in [0, 1]");
  }
  if (sideband_ratio == 0.0) return 0.0;
  if (sideband_ratio == 1.0) return 1.0;
  const double j1m = bessel_j(1, m);
  const double target = sideband_ratio * j1m * j1m;
  auto f = [&](double kappa) {
    const double j = bessel_j(1, kappa * m);
    return j * j - target;
  };
  std::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(f, 0.0, 1.0, f(0.0), f(1.0),
                                                    boost::math::tools::eps_tolerance<double>(52),
                                                    iters);
  return 0.5 * (lo + hi);
}

ElementOperator phase_modulator(const ModulatorParams& p, const FrequencyLattice& lattice) {
  p.validate();
  const double m_slow = p.effective_index();
  const double m_fast = p.pol_extinction * m_slow;
  const int order = bessel_truncation_order(m_slow);

  ElementOperator e(lattice);
  for (int n = -order; n <= order; ++n) {
    const Complex rf = std::polar(1.0, n * p.rf_phase);
    JonesMatrix m = JonesMatrix::Zero();
    m(0, 0) = bessel_j(n, m_slow) * rf;
    m(1, 1) = bessel_j(n, m_fast) * rf;
    e.column(n * p.rf_freq_bins).assign(lattice.size(), m);
  }
  e.set_frequency_step(p.rf_freq_bins);
  return e;
}

// --- passive elements -------------------------------------------------------

ElementOperator pulse_shaper(const std::map<int, ShaperBin>& mask, const FrequencyLattice& lattice) {
  ElementOperator e(lattice);
  e.column(0);
  for (const auto& [bin, cell] : mask) {
    if (!(cell.amplitude >= 0.0 && cell.amplitude <= 1.0)) {
      throw Error(Errc::AmplitudeOutOfRange, "shaper amplitude " + std::to_string(cell.amplitude) +
                                                 " at bin " + std::to_string(bin) +
                                                 " outside [0, 1]");
    }
    require_bin(lattice, bin);
    e.accumulate(0, bin, std::polar(cell.amplitude, cell.phase) * JonesMatrix::Identity());
  }
  return e;
}

ElementOperator pbs_project(Axis axis, const FrequencyLattice& lattice) {
  JonesMatrix m = JonesMatrix::Zero();
  if (axis == Axis::Slow) {
    m(0, 0) = 1.0;
  } else {
    m(1, 1) = 1.0;
  }
  return ElementOperator::uniform(lattice, m);
}

ElementOperator attenuator(double loss_db, const FrequencyLattice& lattice) {
  if (!(loss_db >= 0.0)) {
    throw Error(Errc::NegativeLoss, "attenuation must be >= 0 dB, got " + std::to_string(loss_db));
  }
  const double t = std::pow(10.0, -loss_db / 20.0);
  return ElementOperator::uniform(lattice, t * JonesMatrix::Identity());
}

ElementOperator delay(double tau, double carrier_phase, const FrequencyLattice& lattice) {
  ElementOperator e(lattice);
  for (int k = lattice.min_index(); k <= lattice.max_index(); ++k) {
    const double phase = 2.0 * std::numbers::pi * lattice.offset_hz(k) * tau + carrier_phase;
    e.accumulate(0, k, std::polar(1.0, phase) * JonesMatrix::Identity());
  }
  return e;
}

JonesMatrix rotation_matrix(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  JonesMatrix r;
  r << c, -s, s, c;
  return r;
}

ElementOperator birefringent_fiber(double length_m, double dgd_per_m, double axis_angle,
                                   const FrequencyLattice& lattice) {
  if (!(length_m >= 0.0)) throw Error(Errc::InvalidParameter, "fiber length must be >= 0");
  const double tau = length_m * dgd_per_m;
  const JonesMatrix r = rotation_matrix(axis_angle);
  ElementOperator e(lattice);
  for (int k = lattice.min_index(); k <= lattice.max_index(); ++k) {
    JonesMatrix d = JonesMatrix::Identity();
    d(0, 0) = std::polar(1.0, 2.0 * std::numbers::pi * lattice.offset_hz(k) * tau);
    e.accumulate(0, k, r * d * r.transpose());
  }
  return e;
}

ElementOperator polarizer(double angle, const FrequencyLattice& lattice) {
  Eigen::Vector2cd u(std::cos(angle), std::sin(angle));
  return ElementOperator::uniform(lattice, u * u.transpose());
}

ElementOperator rotator(double angle, const FrequencyLattice& lattice) {
  return ElementOperator::uniform(lattice, rotation_matrix(angle));
}

ElementOperator jones_element(const JonesMatrix& m, const FrequencyLattice& lattice) {
  return ElementOperator::uniform(lattice, m);
}

JonesMatrix align_to_slow(const JonesVector& from) {
  const double n = std::sqrt(from.norm2());
  if (n == 0.0) throw Error(Errc::InvalidParameter, "cannot align a zero Jones vector");
  const Complex a = from.slow / n;
  const Complex b = from.fast / n;
  JonesMatrix u;
  u << std::conj(a), std::conj(b), -b, a;
  return u;
}

// --- algebra ----------------------------------------------------------------

ElementOperator compose(const ElementOperator& a, const ElementOperator& b) {
  require_same_lattice(a.lattice(), b.lattice());
  const FrequencyLattice& lat = a.lattice();
  ElementOperator out(lat);
  for (const auto& [shift_b, col_b] : b.components()) {
    for (const auto& [shift_a, col_a] : a.components()) {
      ElementOperator::Column* target = nullptr;
      for (std::size_t j = 0; j < col_b.size(); ++j) {
        if (col_b[j].isZero(0.0)) continue;
        const int mid = lat.bin_at(j) + shift_b;
        // Amplitude parked off-lattice between the two elements is lost.
        if (!lat.contains(mid)) continue;
        const JonesMatrix& ma = col_a[lat.slot(mid)];
        if (ma.isZero(0.0)) continue;
        if (target == nullptr) target = &out.column(shift_a + shift_b);
        (*target)[j] += ma * col_b[j];
      }
    }
  }
  out.drop_empty();
  out.set_frequency_step(merge_step(a.declared_step(), b.declared_step()));
  return out;
}

ElementOperator chain(std::span<const ElementOperator> elements) {
  if (elements.empty()) throw Error(Errc::InvalidParameter, "empty element chain");
  ElementOperator acc = elements.front();
  for (std::size_t i = 1; i < elements.size(); ++i) acc = compose(elements[i], acc);
  return acc;
}

ElementOperator sum(const ElementOperator& a, const ElementOperator& b) {
  require_same_lattice(a.lattice(), b.lattice());
  ElementOperator out = a;
  for (const auto& [shift, col] : b.components()) {
    auto& target = out.column(shift);
    for (std::size_t j = 0; j < col.size(); ++j) target[j] += col[j];
  }
  out.drop_empty();
  out.set_frequency_step(merge_step(a.declared_step(), b.declared_step()));
  return out;
}

SinglePhotonSpectrum apply(const ElementOperator& e, const SinglePhotonSpectrum& s) {
  require_same_lattice(e.lattice(), s.lattice());
  const FrequencyLattice& lat = s.lattice();
  SinglePhotonSpectrum out(lat);
  out.add_leakage(s.leakage());
  std::map<int, JonesVector> off_lattice;
  const auto in = s.amplitudes();
  for (const auto& [shift, col] : e.components()) {
    for (std::size_t j = 0; j < in.size(); ++j) {
      if (in[j].norm2() == 0.0) continue;
      const JonesVector v = col[j] * in[j];
      const int target = lat.bin_at(j) + shift;
      if (lat.contains(target)) {
        out.add(target, v);
      } else {
        off_lattice[target] += v;
      }
    }
  }
  for (const auto& [bin, v] : off_lattice) out.add_leakage(v.norm2());
  return out;
}

double sideband_power(const ElementOperator& e, const JonesVector& input_pol, int input_bin,
                      int order) {
  const FrequencyLattice& lat = e.lattice();
  require_bin(lat, input_bin);
  const int shift = order * e.frequency_step();
  require_bin(lat, input_bin + shift);
  const double n2 = input_pol.norm2();
  if (n2 == 0.0) throw Error(Errc::InvalidParameter, "input polarization has zero norm");
  return (e.matrix(shift, input_bin) * input_pol).norm2() / n2;
}

}  // namespace fbsim
