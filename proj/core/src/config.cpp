#include "fbsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <fmt/format.h>

#include "fbsim/error.hpp"

namespace fbsim {

namespace pt = boost::property_tree;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const std::set<std::string> kReservedSections = {"experiment", "lattice", "source", "chain",
                                                 "detectors", "sweep", "run"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

pt::ptree::path_type key_path(const std::string& section, const std::string& key) {
  return pt::ptree::path_type(section + "/" + key, '/');
}

// Typed, path-aware access to one INI section. Unknown keys are rejected up front.
class Section {
 public:
  Section(const pt::ptree& root, std::string name, const std::set<std::string>& allowed)
      : name_(std::move(name)) {
    if (auto child = root.get_child_optional(pt::ptree::path_type(name_, '/'))) node_ = &*child;
    if (node_ == nullptr) return;
    for (const auto& [key, value] : *node_) {
      if (!allowed.contains(key)) throw ConfigError(path(key), "unknown key");
    }
  }

  bool present() const { return node_ != nullptr; }
  const std::string& name() const { return name_; }
  std::string path(const std::string& key) const { return name_ + "." + key; }

  bool has(const std::string& key) const {
    return node_ != nullptr && node_->get_child_optional(pt::ptree::path_type(key, '/'));
  }

  std::string text(const std::string& key) const {
    if (!has(key)) throw ConfigError(path(key), "required key missing");
    std::string v = node_->get<std::string>(pt::ptree::path_type(key, '/'));
    // Inline comments.
    for (char c : {';', '#'}) {
      if (auto pos = v.find(c); pos != std::string::npos) v.erase(pos);
    }
    return trim(v);
  }
  std::string text_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  double number(const std::string& key) const { return parse_number(key, text(key)); }
  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::optional<double> maybe_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  int integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(path(key), "expected an integer");
    return static_cast<int>(v);
  }
  int integer_or(const std::string& key, int fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(text(key))) out.push_back(parse_number(key, item));
    return out;
  }

  bool flag_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(path(key), "expected true or false, got '" + v + "'");
  }

  double nonneg(const std::string& key, double fallback) const {
    const double v = number_or(key, fallback);
    if (!(v >= 0.0)) throw ConfigError(path(key), "must be >= 0");
    return v;
  }

 private:
  double parse_number(const std::string& key, const std::string& s) const {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      throw ConfigError(path(key), "expected a number, got '" + s + "'");
    }
    return v;
  }

  std::string name_;
  const pt::ptree* node_ = nullptr;
};

int rf_bins(const Section& s, const FrequencyLattice& lattice) {
  const double ghz = s.number_or("rf_freq_ghz", lattice.spacing_hz() / 1e9);
  const double bins = ghz * 1e9 / lattice.spacing_hz();
  const double rounded = std::round(bins);
  if (rounded < 1.0 || std::abs(bins - rounded) > 1e-9 * std::max(1.0, bins)) {
    throw ConfigError(s.path("rf_freq_ghz"), fmt::format("RF frequency {} GHz is not a positive "
                                                         "integer multiple of the lattice spacing",
                                                         ghz));
  }
  return static_cast<int>(rounded);
}

// Wraps library errors raised while checking a value with its field path.
template <typename F>
auto at_field(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

ModulatorParams parse_pm_params(const Section& s, const FrequencyLattice& lattice) {
  ModulatorParams p;
  p.rf_freq_bins = rf_bins(s, lattice);
  p.rf_phase = s.number_or("rf_phase_rad", 0.0);
  p.v_pi = s.maybe_number("v_pi_v");
  p.drive_voltage = s.maybe_number("drive_v");
  if (p.v_pi.has_value() != p.drive_voltage.has_value()) {
    throw ConfigError(s.path(p.v_pi ? "drive_v" : "v_pi_v"), "v_pi_v and drive_v go together");
  }
  if (p.v_pi && !(*p.v_pi > 0.0)) throw ConfigError(s.path("v_pi_v"), "must be > 0");
  if (!p.v_pi) p.mod_index_slow = s.number("mod_index");
  if (s.has("mod_index") && p.v_pi) {
    throw ConfigError(s.path("mod_index"), "give either mod_index or v_pi_v/drive_v");
  }
  if (!(p.effective_index() >= 0.0)) throw ConfigError(s.path("mod_index"), "must be >= 0");
  if (s.has("sideband_ratio") && s.has("pol_extinction")) {
    throw ConfigError(s.path("sideband_ratio"), "give either sideband_ratio or pol_extinction");
  }
  if (s.has("sideband_ratio")) {
    p.pol_extinction = at_field(s.path("sideband_ratio"), [&] {
      return calibrate_extinction(p.effective_index(), s.number("sideband_ratio"));
    });
  } else {
    p.pol_extinction = s.number_or("pol_extinction", 1.0);
    if (!(p.pol_extinction >= 0.0 && p.pol_extinction <= 1.0)) {
      throw ConfigError(s.path("pol_extinction"), "must lie in [0, 1]");
    }
  }
  at_field(s.path("mod_index"), [&] {
    bessel_truncation_order(p.effective_index());
    return 0;
  });
  return p;
}

ElementSpec parse_element(const pt::ptree& root, const std::string& name,
                          const FrequencyLattice& lattice) {
  if (!root.get_child_optional(pt::ptree::path_type(name, '/'))) {
    throw ConfigError(name, "chain element has no section");
  }
  const std::string type = Section(root, name, {"type", "mod_index", "sideband_ratio", "pol_extinction",
                                                "rf_freq_ghz", "rf_phase_rad", "v_pi_v", "drive_v",
                                                "insertion_loss_db", "arm1_loss_db", "arm2_loss_db",
                                                "voa_db", "arm_delay_ps", "arm_carrier_phase_rad",
                                                "arm_phase_mode", "mod_index_1", "mod_index_2",
                                                "v_pi_1_v", "v_pi_2_v", "rf_atten_db",
                                                "rf_phase_diff_rad", "pbs_axis_deg", "calibrate",
                                                "loss_db", "tau_ps", "carrier_phase_rad", "length_m",
                                                "dgd_ps_per_m", "axis_deg", "angle_deg", "bins",
                                                "amplitudes", "phases_rad"})
                               .text("type");
  ElementSpec spec{name, type, {}, std::nullopt};

  if (type == "pm") {
    const Section s(root, name, {"type", "mod_index", "sideband_ratio", "pol_extinction",
                                 "rf_freq_ghz", "rf_phase_rad", "v_pi_v", "drive_v",
                                 "insertion_loss_db"});
    const ModulatorParams p = parse_pm_params(s, lattice);
    const double loss = s.nonneg("insertion_loss_db", 0.0);
    spec.build = [p, loss](const FrequencyLattice& lat, Engine&) {
      return compose(phase_modulator(p, lat), attenuator(loss, lat));
    };
  } else if (type == "pdpm") {
    const Section s(root, name,
                    {"type", "arm1_loss_db", "arm2_loss_db", "voa_db", "arm_delay_ps",
                     "arm_carrier_phase_rad", "arm_phase_mode", "mod_index", "mod_index_1",
                     "mod_index_2", "v_pi_1_v", "v_pi_2_v", "drive_v", "rf_atten_db", "rf_freq_ghz",
                     "rf_phase_rad", "rf_phase_diff_rad", "pbs_axis_deg", "calibrate"});
    PdpmParams p;
    p.arm1_loss_db = s.nonneg("arm1_loss_db", 0.0);
    p.arm2_loss_db = s.nonneg("arm2_loss_db", 0.0);
    p.arm_delay_diff = s.number_or("arm_delay_ps", 0.0) * 1e-12;
    p.arm_carrier_phase = s.number_or("arm_carrier_phase_rad", 0.0);
    p.rf_phase_diff = s.number_or("rf_phase_diff_rad", 0.0);
    p.pbs_axis = s.number_or("pbs_axis_deg", 0.0) * kDeg;
    const int bins = rf_bins(s, lattice);
    const double rf_phase = s.number_or("rf_phase_rad", 0.0);
    for (int arm : {1, 2}) {
      ModulatorParams& m = arm == 1 ? p.mod1 : p.mod2;
      m.rf_freq_bins = bins;
      m.rf_phase = rf_phase;
      const std::string vpi_key = fmt::format("v_pi_{}_v", arm);
      const std::string idx_key = fmt::format("mod_index_{}", arm);
      if (s.has(vpi_key)) {
        m.v_pi = s.number(vpi_key);
        if (!(*m.v_pi > 0.0)) throw ConfigError(s.path(vpi_key), "must be > 0");
        m.drive_voltage = s.nonneg("drive_v", 0.0);
        if (!s.has("drive_v")) throw ConfigError(s.path("drive_v"), "required with " + vpi_key);
      } else if (s.has(idx_key)) {
        m.mod_index_slow = s.number(idx_key);
      } else {
        m.mod_index_slow = s.number("mod_index");
      }
      if (!(m.effective_index() >= 0.0)) throw ConfigError(s.path(idx_key), "must be >= 0");
      at_field(s.path(idx_key), [&] {
        bessel_truncation_order(m.effective_index());
        return 0;
      });
    }
    const std::string voa = s.text_or("voa_db", "0");
    const bool voa_auto = voa == "auto";
    if (!voa_auto) p.voa_db = s.nonneg("voa_db", 0.0);
    const std::string atten = s.text_or("rf_atten_db", "0");
    const bool atten_auto = atten == "auto";
    if (!atten_auto) p.rf_atten_db = s.nonneg("rf_atten_db", 0.0);
    if (voa_auto) p.voa_db = std::abs(p.arm1_loss_db - p.arm2_loss_db);
    if (atten_auto) {
      const double m1 = p.mod1.effective_index();
      const double m2 = p.mod2.effective_index();
      p.rf_atten_db = (m1 > 0.0 && m2 > 0.0) ? 20.0 * std::log10(std::max(m1, m2) / std::min(m1, m2)) : 0.0;
    }
    const std::string mode = s.text_or("arm_phase_mode", "fixed");
    if (mode != "fixed" && mode != "random") {
      throw ConfigError(s.path("arm_phase_mode"), "expected fixed or random, got '" + mode + "'");
    }
    at_field(name, [&] {
      p.validate();
      return 0;
    });
    spec.pdpm = p;
    if (s.flag_or("calibrate", false)) {
      p = at_field(name + ".calibrate", [&] { return calibrate_pdpm(p).calibrated; });
    }
    const bool random_phase = mode == "random";
    spec.build = [p, random_phase](const FrequencyLattice& lat, Engine& engine) {
      PdpmParams q = p;
      if (random_phase) {
        boost::random::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
        q.arm_carrier_phase = u(engine);
      }
      return build_pdpm(q, lat);
    };
  } else if (type == "attenuator") {
    const Section s(root, name, {"type", "loss_db"});
    const double loss = s.nonneg("loss_db", 0.0);
    spec.build = [loss](const FrequencyLattice& lat, Engine&) { return attenuator(loss, lat); };
  } else if (type == "delay") {
    const Section s(root, name, {"type", "tau_ps", "carrier_phase_rad"});
    const double tau = s.number_or("tau_ps", 0.0) * 1e-12;
    const double carrier = s.number_or("carrier_phase_rad", 0.0);
    spec.build = [tau, carrier](const FrequencyLattice& lat, Engine&) {
      return delay(tau, carrier, lat);
    };
  } else if (type == "fiber") {
    const Section s(root, name, {"type", "length_m", "dgd_ps_per_m", "axis_deg"});
    const double length = s.nonneg("length_m", 0.0);
    const double dgd = s.number_or("dgd_ps_per_m", 0.0) * 1e-12;
    const double axis = s.number_or("axis_deg", 0.0) * kDeg;
    spec.build = [=](const FrequencyLattice& lat, Engine&) {
      return birefringent_fiber(length, dgd, axis, lat);
    };
  } else if (type == "polarizer" || type == "rotator") {
    const Section s(root, name, {"type", "angle_deg"});
    const double angle = s.number_or("angle_deg", 0.0) * kDeg;
    const bool is_polarizer = type == "polarizer";
    spec.build = [angle, is_polarizer](const FrequencyLattice& lat, Engine&) {
      return is_polarizer ? polarizer(angle, lat) : rotator(angle, lat);
    };
  } else if (type == "shaper") {
    const Section s(root, name, {"type", "bins", "amplitudes", "phases_rad"});
    const auto bins = s.numbers("bins");
    const auto amps = s.has("amplitudes") ? s.numbers("amplitudes") : std::vector<double>(bins.size(), 1.0);
    const auto phases = s.has("phases_rad") ? s.numbers("phases_rad") : std::vector<double>(bins.size(), 0.0);
    if (amps.size() != bins.size()) throw ConfigError(s.path("amplitudes"), "length differs from bins");
    if (phases.size() != bins.size()) throw ConfigError(s.path("phases_rad"), "length differs from bins");
    std::map<int, ShaperBin> mask;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      if (bins[i] != std::floor(bins[i]) || !lattice.contains(static_cast<int>(bins[i]))) {
        throw ConfigError(s.path("bins"), fmt::format("bin {} is not an in-range integer", bins[i]));
      }
      if (!(amps[i] >= 0.0 && amps[i] <= 1.0)) {
        throw ConfigError(s.path("amplitudes"),
                          fmt::format("amplitude {} outside [0, 1] (AmplitudeOutOfRange)", amps[i]));
      }
      if (!mask.emplace(static_cast<int>(bins[i]), ShaperBin{amps[i], phases[i]}).second) {
        throw ConfigError(s.path("bins"), fmt::format("bin {} listed twice", bins[i]));
      }
    }
    spec.build = [mask](const FrequencyLattice& lat, Engine&) { return pulse_shaper(mask, lat); };
  } else {
    throw ConfigError(name + ".type", "unknown element type '" + type + "'");
  }
  return spec;
}

FrequencyLattice parse_lattice(const pt::ptree& root) {
  const Section s(root, "lattice", {"reference_thz", "spacing_ghz", "min_index", "max_index"});
  if (!s.present()) throw ConfigError("lattice", "section missing");
  const double ref = s.number("reference_thz") * 1e12;
  const double spacing = s.number("spacing_ghz") * 1e9;
  const int lo = s.integer("min_index");
  const int hi = s.integer("max_index");
  if (!(spacing > 0.0)) throw ConfigError(s.path("spacing_ghz"), "must be > 0 (NonPositiveSpacing)");
  if (lo > hi) throw ConfigError(s.path("min_index"), "exceeds max_index (EmptyRange)");
  return make_lattice(ref, spacing, lo, hi);
}

SourceSpec parse_source(const pt::ptree& root, const FrequencyLattice& lattice) {
  const Section s(root, "source",
                  {"type", "polarization_deg", "azimuth_deg", "probe_bin", "degeneracy_bin",
                   "pair_offset_bins", "fsr_bins", "joint_phase_rad", "joint_phase_split",
                   "pair_rate_per_s", "envelope", "envelope_width_bins", "carve_leak_amplitude",
                   "pmf_length_m", "pmf_dgd_ps_per_m", "pmf_axis_deg", "align_signal"});
  if (!s.present()) throw ConfigError("source", "section missing");
  SourceSpec src;
  const std::string type = s.text("type");
  if (type == "cw") {
    src.type = SourceType::Cw;
  } else if (type == "bfc") {
    src.type = SourceType::Bfc;
  } else if (type == "spdc") {
    src.type = SourceType::Spdc;
  } else {
    throw ConfigError(s.path("type"), "expected cw, bfc or spdc, got '" + type + "'");
  }
  if (s.has("polarization_deg") && s.has("azimuth_deg")) {
    throw ConfigError(s.path("azimuth_deg"), "give either polarization_deg or azimuth_deg");
  }
  if (s.has("azimuth_deg")) {
    src.polarization = poincare_azimuth(s.number("azimuth_deg") * kDeg);
  } else {
    src.polarization = linear_polarization(s.number_or("polarization_deg", 0.0) * kDeg);
  }
  auto in_range = [&](const std::string& key, int bin) {
    if (!lattice.contains(bin)) {
      throw ConfigError(s.path(key), fmt::format("bin {} outside lattice (BinOutOfRange)", bin));
    }
  };
  if (src.type == SourceType::Cw) {
    src.probe_bin = s.integer_or("probe_bin", 0);
    in_range("probe_bin", src.probe_bin);
    return src;
  }
  src.degeneracy_bin = s.integer_or("degeneracy_bin", 0);
  src.pair_offset_bins = s.integer("pair_offset_bins");
  src.fsr_bins = s.integer_or("fsr_bins", 2);
  if (src.fsr_bins < 1) throw ConfigError(s.path("fsr_bins"), "must be >= 1");
  if (src.pair_offset_bins < 0) throw ConfigError(s.path("pair_offset_bins"), "must be >= 0");
  if (2 * src.pair_offset_bins < src.fsr_bins) {
    throw ConfigError(s.path("pair_offset_bins"), "signal and idler combs overlap");
  }
  for (const auto& [key, bin] : {std::pair{"pair_offset_bins", src.s2()}, std::pair{"pair_offset_bins", src.i2()}}) {
    in_range(key, bin);
  }
  src.joint_phase = s.number_or("joint_phase_rad", 0.0);
  src.joint_phase_split = s.number_or("joint_phase_split", 0.5);
  if (!(src.joint_phase_split >= 0.0 && src.joint_phase_split <= 1.0)) {
    throw ConfigError(s.path("joint_phase_split"), "must lie in [0, 1]");
  }
  src.pair_rate = s.number("pair_rate_per_s");
  if (!(src.pair_rate >= 0.0)) throw ConfigError(s.path("pair_rate_per_s"), "must be >= 0 (NegativeRate)");
  if (src.type == SourceType::Spdc) {
    src.envelope = s.text_or("envelope", "flat");
    if (src.envelope != "flat" && src.envelope != "gaussian") {
      throw ConfigError(s.path("envelope"), "expected flat or gaussian");
    }
    if (src.envelope == "gaussian") {
      src.envelope_width_bins = s.number("envelope_width_bins");
      if (!(src.envelope_width_bins > 0.0)) throw ConfigError(s.path("envelope_width_bins"), "must be > 0");
    }
    src.carve_leak_amplitude = s.number_or("carve_leak_amplitude", 0.0);
    if (!(src.carve_leak_amplitude >= 0.0 && src.carve_leak_amplitude <= 1.0)) {
      throw ConfigError(s.path("carve_leak_amplitude"), "outside [0, 1] (AmplitudeOutOfRange)");
    }
  }
  if (s.has("pmf_dgd_ps_per_m") || s.has("pmf_length_m")) {
    PmfSpec pmf;
    pmf.dgd_s_per_m = s.number("pmf_dgd_ps_per_m") * 1e-12;
    const std::string length = s.text("pmf_length_m");
    if (length != "halfwave") {
      pmf.length_m = s.number("pmf_length_m");
      if (!(*pmf.length_m >= 0.0)) throw ConfigError(s.path("pmf_length_m"), "must be >= 0");
    } else if (!(pmf.dgd_s_per_m > 0.0)) {
      throw ConfigError(s.path("pmf_dgd_ps_per_m"), "halfwave length needs a positive DGD");
    }
    pmf.axis = s.number_or("pmf_axis_deg", 0.0) * kDeg;
    const std::string align = s.text_or("align_signal", "slow");
    if (align != "slow" && align != "none") {
      throw ConfigError(s.path("align_signal"), "expected slow or none");
    }
    pmf.align_signal = align == "slow";
    src.pmf = pmf;
  }
  return src;
}

DetectorSpec parse_detectors(const pt::ptree& root, const FrequencyLattice& lattice) {
  const Section s(root, "detectors",
                  {"signal_efficiency", "idler_efficiency", "signal_dark_per_s", "idler_dark_per_s",
                   "window_ns", "signal_bin", "idler_bin", "sideband_order"});
  DetectorSpec d;
  d.signal.efficiency = s.number_or("signal_efficiency", 1.0);
  d.idler.efficiency = s.number_or("idler_efficiency", 1.0);
  for (const char* key : {"signal_efficiency", "idler_efficiency"}) {
    const double v = s.number_or(key, 1.0);
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(s.path(key), "must lie in [0, 1]");
  }
  d.signal.dark_rate = s.nonneg("signal_dark_per_s", 0.0);
  d.idler.dark_rate = s.nonneg("idler_dark_per_s", 0.0);
  d.signal.coincidence_window = d.idler.coincidence_window = s.nonneg("window_ns", 1.0) * 1e-9;
  if (s.has("signal_bin")) d.signal_bin = s.integer("signal_bin");
  if (s.has("idler_bin")) d.idler_bin = s.integer("idler_bin");
  for (const auto& [key, bin] : {std::pair{"signal_bin", d.signal_bin}, std::pair{"idler_bin", d.idler_bin}}) {
    if (bin && !lattice.contains(*bin)) {
      throw ConfigError(s.path(key), fmt::format("bin {} outside lattice (BinOutOfRange)", *bin));
    }
  }
  d.sideband_order = s.integer_or("sideband_order", 1);
  return d;
}

std::vector<std::string> chain_names(const pt::ptree& root) {
  const Section s(root, "chain", {"elements"});
  if (!s.present() || !s.has("elements")) return {};
  auto names = split_list(s.text("elements"));
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (kReservedSections.contains(n)) throw ConfigError("chain.elements", "'" + n + "' is a reserved section name");
    if (!seen.insert(n).second) throw ConfigError("chain.elements", "'" + n + "' listed twice");
  }
  return names;
}

Scenario parse_scenario(const pt::ptree& root) {
  Scenario sc;
  sc.lattice = parse_lattice(root);
  sc.source = parse_source(root, sc.lattice);
  for (const auto& name : chain_names(root)) sc.chain.push_back(parse_element(root, name, sc.lattice));
  sc.detectors = parse_detectors(root, sc.lattice);
  return sc;
}

}  // namespace

ElementOperator Scenario::build_chain(Engine& engine) const {
  std::vector<ElementOperator> ops;
  for (const auto& e : chain) ops.push_back(e.build(lattice, engine));
  if (ops.empty()) return ElementOperator::identity(lattice);
  return fbsim::chain(ops);
}

int Scenario::signal_bin() const {
  if (detectors.signal_bin) return *detectors.signal_bin;
  if (source.type == SourceType::Cw) return source.probe_bin;
  if (source.fsr_bins % 2 != 0) {
    throw ConfigError("detectors.signal_bin", "odd fsr_bins has no overlap bin; set it explicitly");
  }
  return source.s1() + source.fsr_bins / 2;
}

int Scenario::idler_bin() const {
  if (detectors.idler_bin) return *detectors.idler_bin;
  if (source.type == SourceType::Cw) return source.probe_bin;
  if (source.fsr_bins % 2 != 0) {
    throw ConfigError("detectors.idler_bin", "odd fsr_bins has no overlap bin; set it explicitly");
  }
  return source.i1() - source.fsr_bins / 2;
}

Scenario ExperimentConfig::at(double sweep_value) const {
  if (!sweep) return nominal;
  pt::ptree copy = raw;
  const auto dot = sweep->variable.find('.');
  copy.put(key_path(sweep->variable.substr(0, dot), sweep->variable.substr(dot + 1)),
           fmt::format("{:.17g}", sweep_value));
  return parse_scenario(copy);
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, cfg.raw);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("line {}", e.line()), e.message());
  }

  const auto names = chain_names(cfg.raw);
  for (const auto& [section, node] : cfg.raw) {
    if (kReservedSections.contains(section)) continue;
    if (std::find(names.begin(), names.end(), section) == names.end()) {
      throw ConfigError(section, "section is neither reserved nor listed in chain.elements");
    }
  }

  const Section exp(cfg.raw, "experiment", {"name", "kind"});
  cfg.name = exp.text_or("name", "");
  cfg.kind = exp.text_or("kind", "");

  cfg.nominal = parse_scenario(cfg.raw);

  const Section run(cfg.raw, "run", {"mode", "duration_s", "intervals", "seed"});
  const std::string mode = run.text_or("mode", "expected");
  if (mode == "expected") {
    cfg.run.mode = RunMode::Expected;
  } else if (mode == "sampled") {
    cfg.run.mode = RunMode::Sampled;
  } else {
    throw ConfigError(run.path("mode"), "expected 'expected' or 'sampled'");
  }
  cfg.run.duration_s = run.number_or("duration_s", 1.0);
  if (!(cfg.run.duration_s > 0.0)) throw ConfigError(run.path("duration_s"), "must be > 0 (NonPositiveDuration)");
  cfg.run.intervals = run.integer_or("intervals", 3);
  if (cfg.run.intervals < 2) throw ConfigError(run.path("intervals"), "need at least 2 intervals (TooFewSamples)");
  if (run.has("seed")) {
    const std::string seed = run.text("seed");
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), v);
    if (ec != std::errc() || ptr != seed.data() + seed.size()) {
      throw ConfigError(run.path("seed"), "expected an unsigned 64-bit integer");
    }
    cfg.run.seed = v;
  }

  const Section sweep(cfg.raw, "sweep", {"variable", "values", "start", "stop", "count"});
  if (sweep.present()) {
    SweepSpec sp;
    sp.variable = sweep.text("variable");
    const auto dot = sp.variable.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == sp.variable.size()) {
      throw ConfigError(sweep.path("variable"), "expected section.key");
    }
    if (!cfg.raw.get_child_optional(key_path(sp.variable.substr(0, dot), sp.variable.substr(dot + 1)))) {
      throw ConfigError(sweep.path("variable"), "'" + sp.variable + "' is not a declared parameter");
    }
    if (sweep.has("values")) {
      if (sweep.has("start") || sweep.has("stop") || sweep.has("count")) {
        throw ConfigError(sweep.path("values"), "give either values or start/stop/count");
      }
      sp.values = sweep.numbers("values");
    } else {
      const double start = sweep.number("start");
      const double stop = sweep.number("stop");
      const int count = sweep.integer("count");
      if (count < 1) throw ConfigError(sweep.path("count"), "must be >= 1");
      for (int i = 0; i < count; ++i) {
        sp.values.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
      }
    }
    if (sp.values.empty()) throw ConfigError(sweep.path("values"), "no sweep values");
    cfg.sweep = std::move(sp);
  }

  // Every sweep point must produce a buildable scenario.
  Engine engine(cfg.run.seed);
  for (std::size_t i = 0; i < cfg.point_count(); ++i) {
    const Scenario sc = cfg.at(cfg.point_value(i));
    for (const auto& e : sc.chain) at_field(e.name, [&] { return e.build(sc.lattice, engine); });
    sc.signal_bin();
    sc.idler_bin();
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot read config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace fbsim
