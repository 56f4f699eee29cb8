#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "fbsim/counting.hpp"
#include "fbsim/pdpm.hpp"

namespace fbsim {

enum class SourceType { Cw, Bfc, Spdc };
enum class RunMode { Expected, Sampled };

// Polarization-maintaining fibre stage that turns co-polarized pairs into
// (near-)orthogonal ones. The source polarization is the launch state.
struct PmfSpec {
  std::optional<double> length_m;  // unset: half-wave length for the pair centers
  double dgd_s_per_m = 0.0;
  double axis = 0.0;               // fibre slow axis in the lab frame, rad
  bool align_signal = true;        // polarization controller puts the signal on the slow axis
};

struct SourceSpec {
  SourceType type = SourceType::Cw;
  JonesVector polarization{Complex(1.0, 0.0), Complex(0.0, 0.0)};
  int probe_bin = 0;
  // Two-pair comb: S1 = degeneracy + offset, S2 = S1 + fsr; I1 = degeneracy - offset, I2 = I1 - fsr.
  int degeneracy_bin = 0;
  int pair_offset_bins = 1;
  int fsr_bins = 2;
  double joint_phase = 0.0;
  double joint_phase_split = 0.5;  // fraction of the joint phase put on S2
  double pair_rate = 0.0;          // pairs/s
  std::string envelope = "flat";   // spdc only
  double envelope_width_bins = 0.0;
  double carve_leak_amplitude = 0.0;  // spdc: shaper transmission outside the four comb lines
  std::optional<PmfSpec> pmf;

  int s1() const { return degeneracy_bin + pair_offset_bins; }
  int s2() const { return s1() + fsr_bins; }
  int i1() const { return degeneracy_bin - pair_offset_bins; }
  int i2() const { return i1() - fsr_bins; }
};

struct ElementSpec {
  std::string name;
  std::string type;
  // Builds the element; the engine feeds the random arm-phase mode.
  std::function<ElementOperator(const FrequencyLattice&, Engine&)> build;
  std::optional<PdpmParams> pdpm;  // pdpm elements: parameters before any calibration
};

struct DetectorSpec {
  DetectorParams signal;
  DetectorParams idler;
  std::optional<int> signal_bin;
  std::optional<int> idler_bin;
  int sideband_order = 1;
};

struct SweepSpec {
  std::string variable;  // "section.key"
  std::vector<double> values;
};

struct RunSpec {
  RunMode mode = RunMode::Expected;
  double duration_s = 1.0;
  int intervals = 3;
  std::uint64_t seed = 1;
};

// Everything needed to evaluate one sweep point.
struct Scenario {
  FrequencyLattice lattice{193.4e12, 18e9, 0, 0};
  SourceSpec source;
  std::vector<ElementSpec> chain;
  DetectorSpec detectors;

  ElementOperator build_chain(Engine& engine) const;
  // Detection bins: explicit ones, else the comb overlap bins.
  int signal_bin() const;
  int idler_bin() const;
};

struct ExperimentConfig {
  boost::property_tree::ptree raw;
  std::string name;
  std::string kind;  // optional experiment kind declared in the file
  Scenario nominal;
  std::optional<SweepSpec> sweep;
  RunSpec run;

  // Scenario with the sweep variable overridden.
  Scenario at(double sweep_value) const;
  std::size_t point_count() const { return sweep ? sweep->values.size() : 1; }
  double point_value(std::size_t i) const { return sweep ? sweep->values[i] : 0.0; }
};

// Parses and validates. Every problem is a ConfigError naming its field path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace fbsim
