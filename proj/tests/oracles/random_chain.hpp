#pragma once

// Seeded random element chains built twice: once with the library, once with
// the dense oracle, from the same drawn parameters.

#include <cstdint>
#include <map>
#include <set>
#include <random>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "fbsim/biphoton.hpp"
#include "fbsim/pdpm.hpp"

namespace oracle {

struct ChainPair {
  std::vector<fbsim::ElementOperator> sparse;
  Dense dense;
  std::vector<std::string> names;
};

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }
  fbsim::JonesVector jones() {
    fbsim::JonesVector v{fbsim::Complex(uniform(-1, 1), uniform(-1, 1)),
                         fbsim::Complex(uniform(-1, 1), uniform(-1, 1))};
    const double n = std::sqrt(v.norm2());
    v.slow /= n;
    v.fast /= n;
    return v;
  }

 private:
  std::mt19937_64 rng_;
};

inline ChainPair random_chain(Draw& d, const fbsim::FrequencyLattice& lat, const Grid& g, int length) {
  constexpr double kPi = std::numbers::pi;
  ChainPair out;
  out.dense = Dense::Identity(g.dim(), g.dim());
  for (int i = 0; i < length; ++i) {
    const int kind = d.integer(0, 7);
    fbsim::ElementOperator e = fbsim::ElementOperator::identity(lat);
    Dense m;
    switch (kind) {
      case 0: {
        fbsim::ModulatorParams p;
        p.mod_index_slow = d.uniform(0.0, 2.0);
        p.pol_extinction = d.uniform(0.0, 1.0);
        p.rf_freq_bins = d.integer(1, 2);
        p.rf_phase = d.uniform(-kPi, kPi);
        e = fbsim::phase_modulator(p, lat);
        m = modulator(g, p.mod_index_slow, p.pol_extinction, p.rf_freq_bins, p.rf_phase);
        out.names.push_back("pm");
        break;
      }
      case 1: {
        const double db = d.uniform(0.0, 6.0);
        e = fbsim::attenuator(db, lat);
        m = attenuator(g, db);
        out.names.push_back("attenuator");
        break;
      }
      case 2: {
        const double tau = d.uniform(-50e-12, 50e-12);
        const double c = d.uniform(-kPi, kPi);
        e = fbsim::delay(tau, c, lat);
        m = delay(g, tau, c);
        out.names.push_back("delay");
        break;
      }
      case 3: {
        const double len = d.uniform(0.0, 2.0);
        const double dgd = d.uniform(0.0, 20e-12);
        const double axis = d.uniform(0.0, kPi);
        e = fbsim::birefringent_fiber(len, dgd, axis, lat);
        m = fiber(g, len * dgd, axis);
        out.names.push_back("fiber");
        break;
      }
      case 4: {
        const double a = d.uniform(0.0, kPi);
        e = fbsim::polarizer(a, lat);
        m = polarizer(g, a);
        out.names.push_back("polarizer");
        break;
      }
      case 5: {
        const double a = d.uniform(-kPi, kPi);
        e = fbsim::rotator(a, lat);
        m = rotator(g, a);
        out.names.push_back("rotator");
        break;
      }
      case 6: {
        std::map<int, fbsim::ShaperBin> mask;
        std::vector<int> bins;
        std::vector<double> amp;
        std::vector<double> ph;
        for (int k = g.lo; k <= g.hi; ++k) {
          if (d.integer(0, 3) == 0) continue;
          bins.push_back(k);
          amp.push_back(d.uniform(0.0, 1.0));
          ph.push_back(d.uniform(-kPi, kPi));
          mask[k] = fbsim::ShaperBin{amp.back(), ph.back()};
        }
        e = fbsim::pulse_shaper(mask, lat);
        m = shaper(g, bins, amp, ph);
        out.names.push_back("shaper");
        break;
      }
      default: {
        fbsim::PdpmParams p;
        p.arm1_loss_db = d.uniform(0.0, 3.0);
        p.arm2_loss_db = d.uniform(0.0, 3.0);
        p.arm_delay_diff = d.uniform(-20e-12, 20e-12);
        p.arm_carrier_phase = d.uniform(-kPi, kPi);
        const int step = d.integer(1, 2);
        p.mod1.mod_index_slow = d.uniform(0.0, 2.0);
        p.mod2.mod_index_slow = d.uniform(0.0, 2.0);
        p.mod1.rf_freq_bins = p.mod2.rf_freq_bins = step;
        p.mod1.rf_phase = p.mod2.rf_phase = d.uniform(-kPi, kPi);
        p.rf_phase_diff = d.uniform(-1.0, 1.0);
        p.pbs_axis = d.coin() ? 0.0 : d.uniform(-kPi / 4, kPi / 4);
        e = fbsim::build_pdpm(p, lat);
        const PdpmArm a1{p.arm1_loss_db, 0.0, 0.0, p.mod1.mod_index_slow, p.mod1.rf_phase};
        const PdpmArm a2{p.arm2_loss_db, p.arm_delay_diff, p.arm_carrier_phase, p.mod2.mod_index_slow,
                         p.mod2.rf_phase + p.rf_phase_diff};
        m = pdpm(g, a1, a2, step, p.pbs_axis);
        out.names.push_back("pdpm");
        break;
      }
    }
    out.sparse.push_back(std::move(e));
    out.dense = m * out.dense;
  }
  return out;
}

// Random normalized pair state on the grid, as library state and dense vector.
inline std::pair<fbsim::BiphotonState, Vec> random_pairs(Draw& d, const fbsim::FrequencyLattice& lat,
                                                        const Grid& g) {
  std::vector<fbsim::PairSpec> pairs;
  std::set<std::pair<int, int>> used;
  const int count = d.integer(1, 4);
  while (static_cast<int>(pairs.size()) < count) {
    const int s = d.integer(g.lo, g.hi);
    const int i = d.integer(g.lo, g.hi);
    if (!used.insert({s, i}).second) continue;
    pairs.push_back({s, i, std::polar(d.uniform(0.2, 1.0), d.uniform(-3.0, 3.0)), d.jones(), d.jones()});
  }
  fbsim::BiphotonState st = fbsim::make_bfc(lat, pairs, true);
  Vec psi = Vec::Zero(g.dim() * g.dim());
  double n2 = 0.0;
  for (const auto& p : pairs) n2 += std::norm(p.amplitude);
  for (const auto& p : pairs) {
    const cd sp[2] = {p.signal_pol.slow, p.signal_pol.fast};
    const cd ip[2] = {p.idler_pol.slow, p.idler_pol.fast};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        psi(pair_idx(g, p.signal_bin, a, p.idler_bin, b)) += p.amplitude / std::sqrt(n2) * sp[a] * ip[b];
  }
  return {std::move(st), psi};
}

}  // namespace oracle
