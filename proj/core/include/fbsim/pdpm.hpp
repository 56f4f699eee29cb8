#pragma once

#include <functional>
#include <span>

#include "fbsim/photonics.hpp"

namespace fbsim {

// Polarization diversity phase modulator: PBS split, one modulator per
// polarization channel, PBS recombination. Arm 1 carries the PBS slow axis,
// arm 2 the fast axis.
struct PdpmParams {
  double arm1_loss_db = 0.0;
  double arm2_loss_db = 0.0;
  double voa_db = 0.0;             // on whichever arm has the lower loss
  double arm_delay_diff = 0.0;     // seconds, arm2 - arm1
  double arm_carrier_phase = 0.0;  // unstabilized optical phase of arm2 relative to arm1
  ModulatorParams mod1;
  ModulatorParams mod2;
  double rf_phase_diff = 0.0;      // added to mod2's RF phase
  double rf_atten_db = 0.0;        // applied to the higher-efficiency modulator
  double pbs_axis = 0.0;           // PBS slow axis relative to the lab slow axis

  void validate() const;

  // Loss of each arm including the VOA.
  double arm_loss_db(int arm) const;
  // Modulation index actually reaching each arm's modulator.
  double arm_index(int arm) const;
};

ElementOperator build_pdpm(const PdpmParams& p, const FrequencyLattice& lattice);

// One arm as a polarization-blind chain (loss, delay, modulator), i.e. what a
// photon sees when it is routed entirely through that arm.
ElementOperator build_pdpm_arm(const PdpmParams& p, int arm, const FrequencyLattice& lattice);

// -10 log10 of the mean output power for unit slow and fast probes at probe_bin.
double insertion_loss_db(const ElementOperator& device, int probe_bin);

struct DelayEstimate {
  double delay = 0.0;             // seconds, magnitude only
  double resolution_limit = 0.0;  // 1 / (support span)
};

// Fringe period of a power spectrum (already passed through the sampling
// polarizer) -> |arm delay difference|. Throws NoFringesDetected when less
// than one fringe fits in the band.
DelayEstimate estimate_delay_from_power(const FrequencyLattice& lattice,
                                        std::span<const double> power);
DelayEstimate estimate_delay_from_fringes(const SinglePhotonSpectrum& spectrum);

// dB of RF attenuation for the lower-V_pi modulator so both indices match.
double rf_attenuation_for_balance(double v_pi_1, double v_pi_2);

// sum_{n>0} (P(c+n) - P(c-n))^2 / sum_{n>0} (P(c+n) + P(c-n))^2
double comb_asymmetry(const SinglePhotonSpectrum& spectrum, int center_bin);

using PdpmBuilder = std::function<ElementOperator(double rf_phase_compensation)>;

// Scans an RF phase compensation in (-pi/2, pi/2) and returns the value that
// minimizes the comb asymmetry seen through a linear analyzer at
// analyzer_angle plus a circular analyzer.
double estimate_rf_phase(const PdpmBuilder& builder, const SinglePhotonSpectrum& probe,
                         double analyzer_angle = 0.7853981633974483);

struct CalibrationReport {
  double estimated_delay = 0.0;
  double delay_resolution_limit = 0.0;
  bool delay_resolved = false;
  double delay_correction = 0.0;
  double voa_setting_db = 0.0;
  double rf_attenuation_db = 0.0;
  double rf_phase_correction = 0.0;
  double residual_asymmetry = 0.0;
};

struct CalibrationSetup {
  // Broadband lattice used for every calibration probe; default is a ~5 THz
  // band on an 18 GHz grid.
  FrequencyLattice lattice{193.4e12, 18e9, -139, 139};
  int probe_bin = 0;
};

struct CalibrationResult {
  PdpmParams calibrated;
  CalibrationReport report;
};

// Runs loss matching, RF power balancing, fringe delay estimation and RF phase
// balancing against a simulated device with the given (hidden) imbalances.
CalibrationResult calibrate_pdpm(const PdpmParams& device, const CalibrationSetup& setup = {});

}  // namespace fbsim
