#include "fbsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "fbsim/error.hpp"

namespace fbsim {

namespace {

const std::vector<std::string> kCountColumns = {
    "singles_signal_per_s", "singles_idler_per_s",   "coincidences_raw_per_s",
    "accidentals_per_s",    "coincidences_net_per_s", "coincidences_net_std_per_s"};

std::string sweep_column(const ExperimentConfig& cfg) {
  return cfg.sweep ? cfg.sweep->variable : "point";
}

bool has_modulator(const Scenario& sc) {
  return std::any_of(sc.chain.begin(), sc.chain.end(),
                     [](const ElementSpec& e) { return e.type == "pm" || e.type == "pdpm"; });
}

void require_cw_probe(const ExperimentConfig& cfg) {
  if (cfg.nominal.source.type != SourceType::Cw) {
    throw ConfigError("source.type", "classical sweep needs a cw probe");
  }
  if (!has_modulator(cfg.nominal)) throw ConfigError("chain.elements", "no pm or pdpm element");
}

// Two-pair comb with the modulator at half the comb spacing.
void require_two_pair_comb(const ExperimentConfig& cfg) {
  const Scenario& sc = cfg.nominal;
  if (sc.source.type == SourceType::Cw) {
    throw ConfigError("source.type", "two-photon experiments need a bfc or spdc source");
  }
  if (!has_modulator(sc)) throw ConfigError("chain.elements", "no pm or pdpm element");
  Engine engine(cfg.run.seed);
  const ElementOperator chain = sc.build_chain(engine);
  if (2 * chain.frequency_step() != sc.source.fsr_bins) {
    throw ConfigError("source.fsr_bins",
                      fmt::format("modulation step of {} bins is not half the comb spacing of {} bins",
                                  chain.frequency_step(), sc.source.fsr_bins));
  }
}

JonesMatrix fiber_matrix(const PmfSpec& pmf, double length, double offset_hz) {
  const JonesMatrix r = rotation_matrix(pmf.axis);
  JonesMatrix d = JonesMatrix::Identity();
  d(0, 0) = std::polar(1.0, 2.0 * std::numbers::pi * offset_hz * length * pmf.dgd_s_per_m);
  return r * d * r.transpose();
}

std::map<int, ShaperBin> comb_mask(const Scenario& sc, Side side, double leak) {
  const SourceSpec& src = sc.source;
  const FrequencyLattice& lat = sc.lattice;
  std::map<int, ShaperBin> mask;
  for (int k = lat.min_index(); k <= lat.max_index(); ++k) mask[k] = ShaperBin{leak, 0.0};
  const bool signal = side == Side::Signal;
  const int first = signal ? src.s1() : src.i1();
  const int second = signal ? src.s2() : src.i2();
  const double share = signal ? src.joint_phase_split : 1.0 - src.joint_phase_split;
  mask[first] = ShaperBin{1.0, 0.0};
  mask[second] = ShaperBin{1.0, share * src.joint_phase};
  return mask;
}

std::vector<double> pair_row(double x, const CountRates& r, double std_net) {
  return {x, r.singles_signal, r.singles_idler, r.coincidences_raw, r.accidentals, r.coincidences_net,
          std_net};
}

// Counting columns for every sweep point, expected or sampled.
ResultTable count_table(const ExperimentConfig& cfg) {
  ResultTable t;
  t.columns.push_back(sweep_column(cfg));
  t.columns.insert(t.columns.end(), kCountColumns.begin(), kCountColumns.end());
  for (std::size_t i = 0; i < cfg.point_count(); ++i) {
    const double x = cfg.point_value(i);
    const Scenario sc = cfg.at(x);
    Engine engine(derive_seed(cfg.run.seed, i));
    const CountRates rates = evaluate_point(sc, engine);
    const double T = cfg.run.duration_s;
    if (cfg.run.mode == RunMode::Expected) {
      t.rows.push_back(pair_row(x, rates, std::sqrt((rates.coincidences_raw + rates.accidentals) / T)));
      continue;
    }
    std::vector<std::vector<double>> per(5);
    for (int k = 0; k < cfg.run.intervals; ++k) {
      const CountSample c = sample_counts(rates, T, engine);
      per[0].push_back(static_cast<double>(c.singles_signal) / T);
      per[1].push_back(static_cast<double>(c.singles_idler) / T);
      per[2].push_back(static_cast<double>(c.coincidences_raw) / T);
      per[3].push_back(static_cast<double>(c.accidentals) / T);
      per[4].push_back(static_cast<double>(c.coincidences_net) / T);
    }
    CountRates mean;
    mean.singles_signal = aggregate_intervals(per[0]).mean;
    mean.singles_idler = aggregate_intervals(per[1]).mean;
    mean.coincidences_raw = aggregate_intervals(per[2]).mean;
    mean.accidentals = aggregate_intervals(per[3]).mean;
    const IntervalStats net = aggregate_intervals(per[4]);
    mean.coincidences_net = net.mean;
    t.rows.push_back(pair_row(x, mean, net.stddev));
  }
  t.notes.push_back(cfg.run.mode == RunMode::Expected
                        ? "mode: expected"
                        : fmt::format("mode: sampled, {} intervals of {} s per point", cfg.run.intervals,
                                      cfg.run.duration_s));
  return t;
}

void append_column(ResultTable& t, const std::string& name, const std::vector<double>& values) {
  t.columns.push_back(name);
  for (std::size_t i = 0; i < t.rows.size(); ++i) t.rows[i].push_back(values[i]);
}

}  // namespace

std::size_t ResultTable::index_of(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(Errc::InvalidParameter, "no column " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> ResultTable::column(const std::string& name) const {
  const std::size_t j = index_of(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

void write_csv(const ResultTable& table, std::ostream& out) {
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    out << (j ? "," : "") << table.columns[j];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      // +0.0 keeps -0 out of the file
      out << (j ? "," : "") << fmt::format("{:.12g}", row[j] + 0.0);
    }
    out << '\n';
  }
}

std::vector<double> normalize_to_max(const std::vector<double>& v) {
  const double peak = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  std::vector<double> out(v);
  if (peak > 0.0) {
    for (double& x : out) x /= peak;
  }
  return out;
}

double visibility(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi + *lo > 0.0 ? (*hi - *lo) / (*hi + *lo) : 0.0;
}

OrthoGeometry ortho_geometry(const Scenario& sc) {
  const SourceSpec& src = sc.source;
  OrthoGeometry g;
  g.signal_pol = g.idler_pol = src.polarization;
  const double spacing = sc.lattice.spacing_hz();
  const double signal_center = 0.5 * (src.s1() + src.s2()) * spacing;
  const double idler_center = 0.5 * (src.i1() + src.i2()) * spacing;
  g.separation_hz = signal_center - idler_center;
  if (src.pmf) {
    const PmfSpec& pmf = *src.pmf;
    const double length = pmf.length_m.value_or(0.5 / (g.separation_hz * pmf.dgd_s_per_m));
    g.dgd_s = length * pmf.dgd_s_per_m;
    g.signal_pol = fiber_matrix(pmf, length, signal_center) * src.polarization;
    g.idler_pol = fiber_matrix(pmf, length, idler_center) * src.polarization;
    if (pmf.align_signal) {
      const JonesMatrix u = align_to_slow(g.signal_pol);
      g.signal_pol = u * g.signal_pol;
      g.idler_pol = u * g.idler_pol;
    }
  }
  g.overlap = std::abs(overlap(g.signal_pol, g.idler_pol)) /
              std::sqrt(g.signal_pol.norm2() * g.idler_pol.norm2());
  return g;
}

BiphotonState build_source_state(const Scenario& sc) {
  const SourceSpec& src = sc.source;
  if (src.type == SourceType::Cw) throw ConfigError("source.type", "cw source has no pair state");
  const OrthoGeometry g = ortho_geometry(sc);
  BiphotonState st(sc.lattice);
  double leak = 1.0;
  if (src.type == SourceType::Bfc) {
    st = make_bfc(sc.lattice,
                  {PairSpec{src.s1(), src.i1(), Complex(1.0, 0.0), g.signal_pol, g.idler_pol},
                   PairSpec{src.s2(), src.i2(), Complex(1.0, 0.0), g.signal_pol, g.idler_pol}},
                  true);
  } else {
    std::map<int, double> envelope;
    for (int d = 1;; ++d) {
      if (!sc.lattice.contains(src.degeneracy_bin + d) || !sc.lattice.contains(src.degeneracy_bin - d)) break;
      envelope[d] = src.envelope == "gaussian"
                        ? std::exp(-0.5 * d * d / (src.envelope_width_bins * src.envelope_width_bins))
                        : 1.0;
    }
    st = make_spdc_source(sc.lattice, src.degeneracy_bin, envelope, {g.signal_pol, g.idler_pol});
    leak = src.carve_leak_amplitude;
  }
  // Comb carving and the joint phase, one shaper per photon.
  st = apply_signal(pulse_shaper(comb_mask(sc, Side::Signal, leak), sc.lattice), st);
  return apply_idler(pulse_shaper(comb_mask(sc, Side::Idler, leak), sc.lattice), st);
}

CountRates evaluate_point(const Scenario& sc, Engine& engine) {
  const ElementOperator chain = sc.build_chain(engine);
  const BiphotonState out = apply_both(chain, build_source_state(sc));
  return expected_rates(out, sc.signal_bin(), sc.idler_bin(), sc.source.pair_rate, sc.detectors.signal,
                        sc.detectors.idler);
}

ResultTable run_classical_sweep(const ExperimentConfig& cfg) {
  require_cw_probe(cfg);
  ResultTable t;
  t.columns = {sweep_column(cfg), "sideband_power_rel"};
  for (std::size_t i = 0; i < cfg.point_count(); ++i) {
    const double x = cfg.point_value(i);
    const Scenario sc = cfg.at(x);
    Engine engine(derive_seed(cfg.run.seed, i));
    const ElementOperator chain = sc.build_chain(engine);
    t.rows.push_back({x, sideband_power(chain, sc.source.polarization, sc.source.probe_bin,
                                        sc.detectors.sideband_order)});
  }
  append_column(t, "sideband_power_norm", normalize_to_max(t.column("sideband_power_rel")));
  const auto norm = t.column("sideband_power_norm");
  const double lo = *std::min_element(norm.begin(), norm.end());
  t.notes.push_back(fmt::format("normalized sideband power range: [{:.6g}, 1]", lo));
  return t;
}

ResultTable run_fringe_scan(const ExperimentConfig& cfg) {
  require_two_pair_comb(cfg);
  ResultTable t = count_table(cfg);
  t.notes.push_back(fmt::format("net coincidence visibility: {:.12g}",
                                visibility(t.column("coincidences_net_per_s"))));
  return t;
}

ResultTable run_poincare_sweep(const ExperimentConfig& cfg) {
  require_two_pair_comb(cfg);
  if (cfg.sweep && cfg.sweep->variable == "source.joint_phase_rad") {
    throw ConfigError("sweep.variable", "the joint phase is held fixed in a polarization sweep");
  }
  ResultTable t = count_table(cfg);
  std::vector<double> predicted;
  for (std::size_t i = 0; i < cfg.point_count(); ++i) {
    const Scenario sc = cfg.at(cfg.point_value(i));
    Engine engine(derive_seed(cfg.run.seed, i));
    const ElementOperator chain = sc.build_chain(engine);
    predicted.push_back(sideband_power(chain, sc.source.polarization, sc.source.s1(), 1));
  }
  append_column(t, "singles_signal_norm", normalize_to_max(t.column("singles_signal_per_s")));
  append_column(t, "singles_idler_norm", normalize_to_max(t.column("singles_idler_per_s")));
  append_column(t, "coincidences_net_norm", normalize_to_max(t.column("coincidences_net_per_s")));
  const auto singles_pred = normalize_to_max(predicted);
  std::vector<double> coinc_pred(singles_pred.size());
  std::transform(singles_pred.begin(), singles_pred.end(), coinc_pred.begin(),
                 [](double x) { return x * x; });
  append_column(t, "singles_predicted_norm", singles_pred);
  append_column(t, "coincidences_predicted_norm", coinc_pred);
  return t;
}

ResultTable run_ortho_experiment(const ExperimentConfig& cfg) {
  if (!cfg.nominal.source.pmf) throw ConfigError("source.pmf_dgd_ps_per_m", "ortho run needs a PMF stage");
  require_two_pair_comb(cfg);
  ResultTable t = count_table(cfg);
  const OrthoGeometry g = ortho_geometry(cfg.nominal);
  t.notes.push_back(fmt::format("signal-idler separation: {:.12g} Hz", g.separation_hz));
  t.notes.push_back(fmt::format("pmf differential delay: {:.12g} s", g.dgd_s));
  t.notes.push_back(fmt::format("separation x delay: {:.12g}", g.separation_hz * g.dgd_s));
  t.notes.push_back(fmt::format("signal-idler Jones overlap: {:.12g}", g.overlap));
  t.notes.push_back(fmt::format("net coincidence visibility: {:.12g}",
                                visibility(t.column("coincidences_net_per_s"))));
  return t;
}

}  // namespace fbsim
