#include "fbsim/pdpm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>
#include <boost/math/tools/minima.hpp>

#include "fbsim/error.hpp"

namespace fbsim {

namespace {

constexpr double kPi = std::numbers::pi;

// FFTW planning is not thread-safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Index of the modulator that receives the RF attenuation.
int higher_efficiency_arm(const PdpmParams& p) {
  return p.mod1.effective_index() >= p.mod2.effective_index() ? 1 : 2;
}

ModulatorParams arm_modulator(const PdpmParams& p, int arm) {
  ModulatorParams m = arm == 1 ? p.mod1 : p.mod2;
  // The arm's fibre is polarization-maintaining and aligned to the modulator.
  m.pol_extinction = 1.0;
  if (arm == 2) m.rf_phase += p.rf_phase_diff;
  if (p.rf_atten_db != 0.0 && higher_efficiency_arm(p) == arm) {
    const double scale = std::pow(10.0, -p.rf_atten_db / 20.0);
    if (m.v_pi && m.drive_voltage) {
      *m.drive_voltage *= scale;
    } else {
      m.mod_index_slow *= scale;
    }
  }
  return m;
}

ElementOperator circular_analyzer(const FrequencyLattice& lattice) {
  Eigen::Vector2cd u(1.0 / std::numbers::sqrt2, Complex(0.0, 1.0 / std::numbers::sqrt2));
  return jones_element(u * u.adjoint(), lattice);
}

}  // namespace

void PdpmParams::validate() const {
  if (!(arm1_loss_db >= 0.0) || !(arm2_loss_db >= 0.0) || !(voa_db >= 0.0)) {
    throw Error(Errc::NegativeLoss, "PDPM arm losses and VOA setting must be >= 0 dB");
  }
  if (!(rf_atten_db >= 0.0)) throw Error(Errc::NegativeLoss, "RF attenuation must be >= 0 dB");
  mod1.validate();
  mod2.validate();
  if (mod1.rf_freq_bins != mod2.rf_freq_bins) {
    throw Error(Errc::RfFrequencyMismatch, "PDPM modulators must share one RF frequency (" +
                                               std::to_string(mod1.rf_freq_bins) + " vs " +
                                               std::to_string(mod2.rf_freq_bins) + " bins)");
  }
}

double PdpmParams::arm_loss_db(int arm) const {
  const bool voa_on_arm1 = arm1_loss_db <= arm2_loss_db;
  if (arm == 1) return arm1_loss_db + (voa_on_arm1 ? voa_db : 0.0);
  return arm2_loss_db + (voa_on_arm1 ? 0.0 : voa_db);
}

double PdpmParams::arm_index(int arm) const { return arm_modulator(*this, arm).effective_index(); }

ElementOperator build_pdpm_arm(const PdpmParams& p, int arm, const FrequencyLattice& lattice) {
  p.validate();
  if (arm != 1 && arm != 2) throw Error(Errc::InvalidParameter, "PDPM arm must be 1 or 2");
  std::vector<ElementOperator> parts;
  parts.push_back(attenuator(p.arm_loss_db(arm), lattice));
  if (arm == 2) parts.push_back(delay(p.arm_delay_diff, p.arm_carrier_phase, lattice));
  parts.push_back(phase_modulator(arm_modulator(p, arm), lattice));
  return chain(parts);
}

ElementOperator build_pdpm(const PdpmParams& p, const FrequencyLattice& lattice) {
  const ElementOperator arm1 = compose(pbs_project(Axis::Slow, lattice), build_pdpm_arm(p, 1, lattice));
  const ElementOperator arm2 = compose(pbs_project(Axis::Fast, lattice), build_pdpm_arm(p, 2, lattice));
  ElementOperator device = sum(arm1, arm2);
  if (p.pbs_axis != 0.0) {
    // Express the PBS-frame device in the lab frame.
    const ElementOperator into_pbs = rotator(-p.pbs_axis, lattice);
    const ElementOperator out_of_pbs = rotator(p.pbs_axis, lattice);
    device = compose(out_of_pbs, compose(device, into_pbs));
  }
  return device;
}

double insertion_loss_db(const ElementOperator& device, int probe_bin) {
  const FrequencyLattice& lat = device.lattice();
  const auto out_slow = apply(device, SinglePhotonSpectrum::tone(lat, probe_bin, {1.0, 0.0}));
  const auto out_fast = apply(device, SinglePhotonSpectrum::tone(lat, probe_bin, {0.0, 1.0}));
  const double mean = 0.5 * (out_slow.total_power() + out_fast.total_power());
  return -10.0 * std::log10(mean);
}

DelayEstimate estimate_delay_from_power(const FrequencyLattice& lattice,
                                        std::span<const double> power) {
  if (power.size() != lattice.size()) {
    throw Error(Errc::InvalidParameter, "power spectrum length does not match the lattice");
  }
  const double peak = *std::max_element(power.begin(), power.end());
  std::size_t first = power.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < power.size(); ++i) {
    if (power[i] > peak * 1e-15) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (!(peak > 0.0) || first >= last) {
    throw Error(Errc::InvalidParameter, "fringe estimation needs at least two bins of support");
  }
  const std::size_t n = last - first + 1;
  const double resolution = 1.0 / (static_cast<double>(n) * lattice.spacing_hz());

  std::vector<double> x(power.begin() + first, power.begin() + last + 1);
  double mean = 0.0;
  double energy = 0.0;
  for (double v : x) {
    mean += v;
    energy += v * v;
  }
  mean /= static_cast<double>(n);
  double ac = 0.0;
  for (double& v : x) {
    v -= mean;
    ac += v * v;
  }
  if (ac <= 1e-24 * energy) throw NoFringesDetected(resolution, "spectrum is flat");

  // Zero-padded periodogram locates the fringe frequency coarsely.
  constexpr std::size_t kPad = 16;
  const std::size_t m = n * kPad;
  std::vector<double> in(m, 0.0);
  std::copy(x.begin(), x.end(), in.begin());
  const std::size_t half = m / 2 + 1;
  fftw_complex* out = fftw_alloc_complex(half);
  {
    fftw_plan plan;
    {
      std::lock_guard lock(fftw_planner_mutex());
      plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(), out, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::size_t j_peak = 1;
  double best_mag = 0.0;
  for (std::size_t j = 1; j < half; ++j) {
    const double mag = std::hypot(out[j][0], out[j][1]);
    if (mag > best_mag) {
      best_mag = mag;
      j_peak = j;
    }
  }
  fftw_free(out);

  // Least-squares sinusoid fit, residual as a function of the number of
  // fringe cycles across the support. Unlike the periodogram peak it stays
  // unbiased when less than a couple of fringes fit in the band.
  const double nd = static_cast<double>(n);
  Eigen::MatrixXd basis(n, 3);
  const Eigen::Map<const Eigen::VectorXd> y(x.data(), static_cast<Eigen::Index>(n));
  auto residual = [&](double cycles) {
    for (std::size_t i = 0; i < n; ++i) {
      const double arg = 2.0 * kPi * cycles * static_cast<double>(i) / nd;
      basis(static_cast<Eigen::Index>(i), 0) = 1.0;
      basis(static_cast<Eigen::Index>(i), 1) = std::cos(arg);
      basis(static_cast<Eigen::Index>(i), 2) = std::sin(arg);
    }
    const Eigen::VectorXd beta = basis.colPivHouseholderQr().solve(y);
    return (y - basis * beta).squaredNorm();
  };
  const double step = 1.0 / static_cast<double>(kPad);
  std::vector<double> candidates{static_cast<double>(j_peak) * step};
  for (double q = step; q <= std::min(4.0, nd / 2.0); q += step) candidates.push_back(q);
  double q_best = candidates.front();
  double r_best = residual(q_best);
  for (double q : candidates) {
    const double r = residual(q);
    if (r < r_best) {
      r_best = r;
      q_best = q;
    }
  }
  const auto [cycles, r_min] = boost::math::tools::brent_find_minima(
      residual, std::max(q_best - step, 0.5 * step), std::min(q_best + step, nd / 2.0),
      std::numeric_limits<double>::digits / 2);
  (void)r_min;
  if (cycles < 1.0) {
    throw NoFringesDetected(resolution, "fewer than one fringe across the band (" +
                                            std::to_string(cycles) + " cycles)");
  }
  return DelayEstimate{.delay = cycles * resolution, .resolution_limit = resolution};
}

DelayEstimate estimate_delay_from_fringes(const SinglePhotonSpectrum& spectrum) {
  const auto p = spectrum.power_spectrum();
  return estimate_delay_from_power(spectrum.lattice(), p);
}

double rf_attenuation_for_balance(double v_pi_1, double v_pi_2) {
  if (!(v_pi_1 > 0.0) || !(v_pi_2 > 0.0)) {
    throw Error(Errc::NonPositiveVpi, "V_pi values must be positive");
  }
  return 20.0 * std::log10(std::max(v_pi_1, v_pi_2) / std::min(v_pi_1, v_pi_2));
}

double comb_asymmetry(const SinglePhotonSpectrum& spectrum, int center_bin) {
  const FrequencyLattice& lat = spectrum.lattice();
  auto p = [&](int k) { return lat.contains(k) ? spectrum.power(k) : 0.0; };
  const int reach = std::max(center_bin - lat.min_index(), lat.max_index() - center_bin);
  double num = 0.0;
  double den = 0.0;
  for (int n = 1; n <= reach; ++n) {
    const double up = p(center_bin + n);
    const double down = p(center_bin - n);
    num += (up - down) * (up - down);
    den += (up + down) * (up + down);
  }
  return den > 0.0 ? num / den : 0.0;
}

double estimate_rf_phase(const PdpmBuilder& builder, const SinglePhotonSpectrum& probe,
                         double analyzer_angle) {
  const FrequencyLattice& lat = probe.lattice();
  int center = lat.min_index();
  for (int k = lat.min_index(); k <= lat.max_index(); ++k) {
    if (probe.power(k) > probe.power(center)) center = k;
  }
  const ElementOperator linear = polarizer(analyzer_angle, lat);
  const ElementOperator circular = circular_analyzer(lat);
  auto objective = [&](double psi) {
    const auto out = apply(builder(psi), probe);
    return comb_asymmetry(apply(linear, out), center) + comb_asymmetry(apply(circular, out), center);
  };

  constexpr int kGrid = 72;
  const double lo = -kPi / 2.0;
  const double step = kPi / kGrid;
  std::array<double, kGrid + 1> values{};
  for (int i = 0; i <= kGrid; ++i) values[i] = objective(lo + i * step);
  const auto [vmin, vmax] = std::minmax_element(values.begin(), values.end());
  if (*vmax - *vmin <= 1e-14) {
    throw Error(Errc::DegenerateProbe,
                "comb asymmetry does not respond to the RF phase; the probe must excite both arms");
  }
  const int best = static_cast<int>(vmin - values.begin());
  const double a = lo + std::max(best - 1, 0) * step;
  const double b = lo + std::min(best + 1, kGrid) * step;
  const auto [psi, f] = boost::math::tools::brent_find_minima(
      objective, a, b, std::numeric_limits<double>::digits / 2);
  (void)f;
  return psi;
}

CalibrationResult calibrate_pdpm(const PdpmParams& device, const CalibrationSetup& setup) {
  device.validate();
  const FrequencyLattice& lat = setup.lattice;
  const int bin = setup.probe_bin;
  CalibrationResult result{device, {}};
  PdpmParams& p = result.calibrated;
  CalibrationReport& report = result.report;

  const JonesVector pbs_slow = linear_polarization(p.pbs_axis);
  const JonesVector pbs_fast = linear_polarization(p.pbs_axis + kPi / 2.0);
  const JonesVector diagonal = linear_polarization(p.pbs_axis + kPi / 4.0);

  auto rf_off = [](PdpmParams q) {
    q.mod1.mod_index_slow = 0.0;
    q.mod2.mod_index_slow = 0.0;
    q.mod1.drive_voltage.reset();
    q.mod2.drive_voltage.reset();
    return q;
  };

  // Loss matching: CW probe down each arm with the RF off.
  {
    PdpmParams q = rf_off(p);
    q.voa_db = 0.0;
    const ElementOperator dev = build_pdpm(q, lat);
    const double t1 = apply(dev, SinglePhotonSpectrum::tone(lat, bin, pbs_slow)).total_power();
    const double t2 = apply(dev, SinglePhotonSpectrum::tone(lat, bin, pbs_fast)).total_power();
    report.voa_setting_db = 10.0 * std::log10(std::max(t1, t2) / std::min(t1, t2));
    p.voa_db = report.voa_setting_db;
  }

  // RF power balancing.
  if (p.mod1.v_pi && p.mod2.v_pi && p.mod1.drive_voltage && p.mod2.drive_voltage &&
      *p.mod1.drive_voltage == *p.mod2.drive_voltage) {
    report.rf_attenuation_db = rf_attenuation_for_balance(*p.mod1.v_pi, *p.mod2.v_pi);
  } else {
    const double m1 = p.mod1.effective_index();
    const double m2 = p.mod2.effective_index();
    report.rf_attenuation_db =
        (m1 > 0.0 && m2 > 0.0) ? 20.0 * std::log10(std::max(m1, m2) / std::min(m1, m2)) : 0.0;
  }
  p.rf_atten_db = report.rf_attenuation_db;

  // Path-length matching from the fringes of broadband light sampled at 45 deg.
  auto residual_delay = [&](const PdpmParams& q) -> std::optional<DelayEstimate> {
    SinglePhotonSpectrum broadband(lat);
    for (int k = lat.min_index(); k <= lat.max_index(); ++k) broadband.set(k, diagonal);
    const auto out = apply(polarizer(p.pbs_axis + kPi / 4.0, lat), apply(build_pdpm(rf_off(q), lat), broadband));
    try {
      return estimate_delay_from_fringes(out);
    } catch (const NoFringesDetected& e) {
      report.delay_resolution_limit = e.resolution_limit();
      return std::nullopt;
    }
  };
  if (const auto est = residual_delay(p)) {
    report.delay_resolved = true;
    report.estimated_delay = est->delay;
    report.delay_resolution_limit = est->resolution_limit;
    // The fringe period fixes |delay| only; keep the VODL direction that
    // leaves fewer fringes.
    PdpmParams plus = p;
    PdpmParams minus = p;
    plus.arm_delay_diff += est->delay;
    minus.arm_delay_diff -= est->delay;
    const auto r_plus = residual_delay(plus);
    const auto r_minus = residual_delay(minus);
    const double d_plus = r_plus ? r_plus->delay : 0.0;
    const double d_minus = r_minus ? r_minus->delay : 0.0;
    report.delay_correction = d_minus <= d_plus ? -est->delay : est->delay;
    p.arm_delay_diff += report.delay_correction;
  }

  // RF phase balancing on a CW probe that excites both arms.
  const auto probe = SinglePhotonSpectrum::tone(lat, bin, diagonal);
  const PdpmParams base = p;
  auto builder = [&](double psi) {
    PdpmParams q = base;
    q.rf_phase_diff += psi;
    return build_pdpm(q, lat);
  };
  report.rf_phase_correction = estimate_rf_phase(builder, probe, p.pbs_axis + kPi / 4.0);
  p.rf_phase_diff += report.rf_phase_correction;
  {
    const auto out = apply(build_pdpm(p, lat), probe);
    report.residual_asymmetry =
        comb_asymmetry(apply(polarizer(p.pbs_axis + kPi / 4.0, lat), out), bin) +
        comb_asymmetry(apply(circular_analyzer(lat), out), bin);
  }
  return result;
}

}  // namespace fbsim
