#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "fbsim/config.hpp"

namespace fbsim {

// One row per sweep value. Column names carry their units.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> notes;  // run-log lines, not part of the CSV

  std::size_t index_of(const std::string& column) const;
  std::vector<double> column(const std::string& name) const;
};

// Header row, then 12 significant digits per value.
void write_csv(const ResultTable& table, std::ostream& out);

// Both photons' polarizations after the PMF stage.
struct OrthoGeometry {
  JonesVector signal_pol;
  JonesVector idler_pol;
  double separation_hz = 0.0;  // between the signal and idler group centers
  double dgd_s = 0.0;          // length * dgd rate
  double overlap = 0.0;        // |<signal|idler>|
};

OrthoGeometry ortho_geometry(const Scenario& sc);

// Pair state as emitted (and, with a PMF stage, rotated) before the device chain.
BiphotonState build_source_state(const Scenario& sc);

// Noiseless detection of one sweep point.
CountRates evaluate_point(const Scenario& sc, Engine& engine);

ResultTable run_classical_sweep(const ExperimentConfig& cfg);
ResultTable run_fringe_scan(const ExperimentConfig& cfg);
ResultTable run_poincare_sweep(const ExperimentConfig& cfg);
ResultTable run_ortho_experiment(const ExperimentConfig& cfg);

// Normalized by the column maximum; all-zero columns stay zero.
std::vector<double> normalize_to_max(const std::vector<double>& v);

// (max - min) / (max + min)
double visibility(const std::vector<double>& v);

}  // namespace fbsim
