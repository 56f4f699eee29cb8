#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fbsim/lattice.hpp"

namespace fbsim {

// 2x2 polarization matrix acting on (slow, fast) column vectors.
using JonesMatrix = Eigen::Matrix2cd;

enum class Axis { Slow, Fast };

JonesVector operator*(const JonesMatrix& m, const JonesVector& v) noexcept;

// Complex field (or single-photon amplitude) on every bin of a lattice.
class SinglePhotonSpectrum {
 public:
  explicit SinglePhotonSpectrum(FrequencyLattice lattice);

  static SinglePhotonSpectrum tone(const FrequencyLattice& lattice, int bin, const JonesVector& pol);

  const FrequencyLattice& lattice() const noexcept { return lattice_; }
  std::span<const JonesVector> amplitudes() const noexcept { return amps_; }

  const JonesVector& at(int bin) const;
  void set(int bin, const JonesVector& v);
  void add(int bin, const JonesVector& v);

  // Polarization-summed power in one bin.
  double power(int bin) const;
  double total_power() const noexcept;
  // Powers for every lattice bin, min_index first.
  std::vector<double> power_spectrum() const;

  // Power that left the lattice range over all element applications so far.
  double leakage() const noexcept { return leakage_; }
  void add_leakage(double p) noexcept { leakage_ += p; }

 private:
  FrequencyLattice lattice_;
  std::vector<JonesVector> amps_;
  double leakage_ = 0.0;
};

// Linear map on the (bin x polarization) space. Each component is a bin shift
// plus one Jones matrix per input bin: amplitude at (k, p) feeds bin k + shift
// through matrices[k]. Outputs that fall off the lattice are dropped.
class ElementOperator {
 public:
  using Column = std::vector<JonesMatrix>;

  explicit ElementOperator(FrequencyLattice lattice);

  static ElementOperator identity(const FrequencyLattice& lattice);
  // Same matrix on every bin, no shift.
  static ElementOperator uniform(const FrequencyLattice& lattice, const JonesMatrix& m);

  const FrequencyLattice& lattice() const noexcept { return lattice_; }
  const std::map<int, Column>& components() const noexcept { return components_; }

  // Zero when the component or bin is absent.
  JonesMatrix matrix(int shift, int bin) const;
  void accumulate(int shift, int bin, const JonesMatrix& m);
  // Column for a shift, created zero-filled when missing.
  Column& column(int shift);

  // Bin spacing between adjacent sidebands; 1 unless set by a modulator.
  int frequency_step() const noexcept { return step_.value_or(1); }
  const std::optional<int>& declared_step() const noexcept { return step_; }
  void set_frequency_step(std::optional<int> step) noexcept { step_ = step; }

  // Removes components whose matrices are all exactly zero.
  void drop_empty();

 private:
  FrequencyLattice lattice_;
  std::map<int, Column> components_;
  std::optional<int> step_;
};

struct ModulatorParams {
  double mod_index_slow = 0.0;  // m, radians
  double pol_extinction = 1.0;  // kappa: fast-axis index is kappa * m
  int rf_freq_bins = 1;
  double rf_phase = 0.0;        // theta = 2 pi f_RF t_delay
  std::optional<double> v_pi;
  std::optional<double> drive_voltage;

  // pi * drive / v_pi when both voltages are given, otherwise mod_index_slow.
  double effective_index() const;
  void validate() const;
};

struct ShaperBin {
  double amplitude = 1.0;
  double phase = 0.0;
};

// Integer-order Bessel function of the first kind, any sign of n.
double bessel_j(int n, double x);

// Tail power left out by the sideband truncation. Amplitude errors are then
// ~1e-12, which keeps interference sums exact to well below 1e-12.
constexpr double kBesselTailTolerance = 1e-24;
constexpr int kMaxBesselOrder = 64;

// Smallest N with sum_{|n|>N} J_n(m)^2 <= kBesselTailTolerance.
int bessel_truncation_order(double m);

// Fast-axis extinction kappa such that J1(kappa m)^2 / J1(m)^2 equals
// sideband_ratio. Requires 0 < m below the first J1 maximum.
double calibrate_extinction(double m, double sideband_ratio);

// Sinusoidal phase modulation phi(t) = m sin(2 pi f t + theta); sideband n
// carries J_n(m) exp(i n theta) and sits n * rf_freq_bins bins away.
ElementOperator phase_modulator(const ModulatorParams& p, const FrequencyLattice& lattice);

// Diagonal, polarization-independent mask. Bins missing from the mask are blocked.
ElementOperator pulse_shaper(const std::map<int, ShaperBin>& mask, const FrequencyLattice& lattice);

ElementOperator pbs_project(Axis axis, const FrequencyLattice& lattice);

ElementOperator attenuator(double loss_db, const FrequencyLattice& lattice);

// Bin k gains 2 pi (k spacing) tau + carrier_phase.
ElementOperator delay(double tau, double carrier_phase, const FrequencyLattice& lattice);

// Linear birefringence with its slow axis at axis_angle from the lab slow axis.
ElementOperator birefringent_fiber(double length_m, double dgd_per_m, double axis_angle,
                                   const FrequencyLattice& lattice);

ElementOperator polarizer(double angle, const FrequencyLattice& lattice);

// Rotates linear polarization by angle (a rotation of the Jones basis).
ElementOperator rotator(double angle, const FrequencyLattice& lattice);

// Constant Jones matrix on every bin, e.g. a polarization controller setting.
ElementOperator jones_element(const JonesMatrix& m, const FrequencyLattice& lattice);

// a after b.
ElementOperator compose(const ElementOperator& a, const ElementOperator& b);

// Elements in propagation order: elements.front() acts first.
ElementOperator chain(std::span<const ElementOperator> elements);

// Parallel combination a + b (e.g. the two arms between a pair of PBSs).
ElementOperator sum(const ElementOperator& a, const ElementOperator& b);

SinglePhotonSpectrum apply(const ElementOperator& e, const SinglePhotonSpectrum& s);

// Power at bin input_bin + order * frequency_step() for a unit input of the
// given polarization, summed over output polarization.
double sideband_power(const ElementOperator& e, const JonesVector& input_pol, int input_bin,
                      int order);

// Unitary mapping `from` onto the slow axis (both taken as polarization states).
JonesMatrix align_to_slow(const JonesVector& from);

JonesMatrix rotation_matrix(double angle);

}  // namespace fbsim
