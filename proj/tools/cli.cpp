#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include "fbsim/error.hpp"
#include "fbsim/experiment.hpp"

namespace fbsim::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot read file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::InvalidParameter, "sha256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

struct RunOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string spectrum;

  const std::string& config_path() const { return config; }
};

void add_common(CLI::App* sub, RunOptions& o, bool outputs) {
  sub->add_option("--config,config", o.config, "Config file");
  if (!outputs) return;
  sub->add_option("--out", o.out, "Output CSV path (default: <config stem>.csv)");
  sub->add_option("--seed", o.seed, "Master seed, overrides run.seed");
  sub->add_option("--mode", o.mode, "expected or sampled, overrides run.mode")
      ->check(CLI::IsMember({"expected", "sampled"}));
}

ExperimentConfig load(const RunOptions& o) {
  const std::string path = o.config_path();
  if (path.empty()) throw ConfigError("--config", "no config file given");
  ExperimentConfig cfg = parse_config(read_file(path));
  if (o.seed) cfg.run.seed = *o.seed;
  if (o.mode == "expected") cfg.run.mode = RunMode::Expected;
  if (o.mode == "sampled") cfg.run.mode = RunMode::Sampled;
  return cfg;
}

std::string out_path(const RunOptions& o, const std::string& fallback_stem) {
  if (!o.out.empty()) return o.out;
  const std::string cfg = o.config_path();
  return (cfg.empty() ? fallback_stem : fs::path(cfg).stem().string()) + ".csv";
}

void write_outputs(const std::string& subcommand, const RunOptions& o, const ResultTable& table,
                   const std::string& config_hash, std::uint64_t seed, const std::string& mode,
                   std::ostream& out) {
  const std::string csv_path = out_path(o, subcommand);
  {
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw Error(Errc::InvalidParameter, "cannot write " + csv_path);
    write_csv(table, f);
  }
  nlohmann::ordered_json meta;
  meta["tool"] = "fbsim";
  meta["version"] = kVersion;
  meta["subcommand"] = subcommand;
  meta["config"] = o.config_path();
  meta["config_sha256"] = config_hash;
  meta["seed"] = seed;
  meta["mode"] = mode;
  meta["rows"] = table.rows.size();
  meta["columns"] = table.columns;
  meta["notes"] = table.notes;
  meta["libraries"] = {
      {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
      {"boost", BOOST_LIB_VERSION},
      {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)},
      {"openssl", OPENSSL_VERSION_TEXT}};
  std::ofstream f(csv_path + ".meta.json", std::ios::binary);
  if (!f) throw Error(Errc::InvalidParameter, "cannot write " + csv_path + ".meta.json");
  f << meta.dump(2) << '\n';
  out << fmt::format("wrote {} ({} rows)\n", csv_path, table.rows.size());
  for (const auto& n : table.notes) out << "  " << n << '\n';
}

// Spread 1 - min/max of +1 sideband power over linear input polarizations.
double polarization_spread(const PdpmParams& p, const CalibrationSetup& setup) {
  const ElementOperator dev = build_pdpm(p, setup.lattice);
  double lo = 1e300;
  double hi = 0.0;
  for (int deg = 0; deg < 180; deg += 5) {
    const double v = sideband_power(dev, linear_polarization(deg * std::numbers::pi / 180.0),
                                    setup.probe_bin, 1);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi > 0.0 ? 1.0 - lo / hi : 0.0;
}

ResultTable calibrate_from_config(const ExperimentConfig& cfg) {
  const auto it = std::find_if(cfg.nominal.chain.begin(), cfg.nominal.chain.end(),
                               [](const ElementSpec& e) { return e.pdpm.has_value(); });
  if (it == cfg.nominal.chain.end()) throw ConfigError("chain.elements", "calibrate needs a pdpm element");
  const PdpmParams& device = *it->pdpm;
  const CalibrationSetup setup;
  const CalibrationResult r = calibrate_pdpm(device, setup);
  ResultTable t;
  t.columns = {"estimated_delay_s",      "delay_resolution_limit_s", "delay_resolved",
               "delay_correction_s",     "voa_setting_db",           "rf_attenuation_db",
               "rf_phase_correction_rad", "residual_asymmetry",      "spread_before",
               "spread_after"};
  const CalibrationReport& rep = r.report;
  t.rows.push_back({rep.estimated_delay, rep.delay_resolution_limit, rep.delay_resolved ? 1.0 : 0.0,
                    rep.delay_correction, rep.voa_setting_db, rep.rf_attenuation_db,
                    rep.rf_phase_correction, rep.residual_asymmetry,
                    polarization_spread(device, setup), polarization_spread(r.calibrated, setup)});
  t.notes.push_back(fmt::format("calibrated element: {}", it->name));
  if (!rep.delay_resolved) t.notes.push_back("arm delay below the fringe resolution limit; left uncorrected");
  return t;
}

// Two columns, frequency_hz and power, on a uniform grid. A header line is optional.
ResultTable calibrate_from_spectrum(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::pair<double, double>> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double f = 0.0;
    double p = 0.0;
    char comma = 0;
    std::istringstream ls(line);
    if (!(ls >> f >> comma >> p) || comma != ',') {
      if (line_no == 1) continue;
      throw ConfigError(fmt::format("{}:{}", path, line_no), "expected frequency_hz,power");
    }
    if (!(p >= 0.0)) throw ConfigError(fmt::format("{}:{}", path, line_no), "power must be >= 0");
    pts.emplace_back(f, p);
  }
  if (pts.size() < 3) throw ConfigError(path, "need at least 3 spectrum points");
  std::sort(pts.begin(), pts.end());
  const double spacing = (pts.back().first - pts.front().first) / static_cast<double>(pts.size() - 1);
  if (!(spacing > 0.0)) throw ConfigError(path, "frequencies must be distinct");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double expect = pts.front().first + spacing * static_cast<double>(i);
    if (std::abs(pts[i].first - expect) > 1e-6 * spacing) {
      throw ConfigError(fmt::format("{}: frequency {}", path, pts[i].first), "grid is not uniform");
    }
  }
  const FrequencyLattice lat(pts.front().first, spacing, 0, static_cast<int>(pts.size()) - 1);
  std::vector<double> power;
  for (const auto& pt : pts) power.push_back(pt.second);
  ResultTable t;
  t.columns = {"estimated_delay_s", "delay_resolution_limit_s", "delay_resolved"};
  try {
    const DelayEstimate d = estimate_delay_from_power(lat, power);
    t.rows.push_back({d.delay, d.resolution_limit, 1.0});
  } catch (const NoFringesDetected& e) {
    t.rows.push_back({0.0, e.resolution_limit(), 0.0});
    t.notes.push_back(e.what());
  }
  return t;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-bin photonics simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    ResultTable (*run)(const ExperimentConfig&);
  };
  const Sub runs[] = {
      {"classical-sweep", "Normalized +1 sideband power vs probe polarization", run_classical_sweep},
      {"fringe-scan", "Two-photon fringe vs joint phase", run_fringe_scan},
      {"poincare-sweep", "Singles and coincidences vs pair polarization", run_poincare_sweep},
      {"ortho", "Fringe scan with orthogonally polarized pairs", run_ortho_experiment},
  };
  std::vector<RunOptions> opts(std::size(runs));
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(runs); ++i) {
    subs.push_back(app.add_subcommand(runs[i].name, runs[i].help));
    add_common(subs.back(), opts[i], true);
  }
  RunOptions cal_opts;
  CLI::App* cal = app.add_subcommand("calibrate", "Loss, delay and RF phase calibration of a PDPM");
  add_common(cal, cal_opts, true);
  cal->add_option("--spectrum", cal_opts.spectrum, "Measured frequency_hz,power CSV; estimates the arm delay");
  RunOptions val_opts;
  CLI::App* val = app.add_subcommand("validate", "Check a config file and exit");
  add_common(val, val_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const ExperimentConfig cfg = load(opts[i]);
      const ResultTable table = runs[i].run(cfg);
      write_outputs(runs[i].name, opts[i], table, sha256_hex(read_file(opts[i].config_path())),
                    cfg.run.seed, cfg.run.mode == RunMode::Expected ? "expected" : "sampled", out);
      return 0;
    }
    if (cal->parsed()) {
      if (!cal_opts.spectrum.empty()) {
        const ResultTable table = calibrate_from_spectrum(cal_opts.spectrum);
        write_outputs("calibrate", cal_opts, table, sha256_hex(read_file(cal_opts.spectrum)), 0,
                      "spectrum", out);
        return 0;
      }
      const ExperimentConfig cfg = load(cal_opts);
      write_outputs("calibrate", cal_opts, calibrate_from_config(cfg),
                    sha256_hex(read_file(cal_opts.config_path())), cfg.run.seed, "synthesized", out);
      return 0;
    }
    if (val->parsed()) {
      const ExperimentConfig cfg = load(val_opts);
      out << fmt::format("ok: {} sweep point(s), {} chain element(s)\n", cfg.point_count(),
                         cfg.nominal.chain.size());
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace fbsim::cli
