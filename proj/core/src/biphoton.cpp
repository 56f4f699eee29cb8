#include "fbsim/biphoton.hpp"

#include <cmath>
#include <set>
#include <string>

#include "fbsim/error.hpp"

namespace fbsim {

namespace {

void require_bin(const FrequencyLattice& lattice, int bin, const char* what) {
  if (!lattice.contains(bin)) {
    throw Error(Errc::BinOutOfRange, std::string(what) + " bin " + std::to_string(bin) +
                                         " outside lattice");
  }
}

int pol_index(Axis a) { return a == Axis::Slow ? 0 : 1; }

Eigen::Vector2cd as_column(const JonesVector& v) { return Eigen::Vector2cd(v.slow, v.fast); }

template <typename MapBlock>
BiphotonState apply_impl(const ElementOperator& e, const BiphotonState& st, bool signal,
                         MapBlock map_block) {
  if (!(e.lattice() == st.lattice())) {
    throw Error(Errc::LatticeMismatch, "element and state use different lattices");
  }
  const FrequencyLattice& lat = st.lattice();
  BiphotonState out(lat);
  out.add_leakage(st.leakage());
  std::map<BiphotonState::BinPair, BiphotonState::Block> off_lattice;
  for (const auto& [bins, block] : st.blocks()) {
    const int src = signal ? bins.first : bins.second;
    for (const auto& [shift, col] : e.components()) {
      const JonesMatrix& m = col[lat.slot(src)];
      if (m.isZero(0.0)) continue;
      const BiphotonState::Block b = map_block(m, block);
      const BiphotonState::BinPair dst = signal ? BiphotonState::BinPair{bins.first + shift, bins.second}
                                                : BiphotonState::BinPair{bins.first, bins.second + shift};
      if (lat.contains(signal ? dst.first : dst.second)) {
        out.add(dst.first, dst.second, b);
      } else {
        auto [it, inserted] = off_lattice.try_emplace(dst, BiphotonState::Block::Zero());
        it->second += b;
      }
    }
  }
  for (const auto& [bins, b] : off_lattice) out.add_leakage(b.squaredNorm());
  out.prune();
  return out;
}

}  // namespace

BiphotonState::BiphotonState(FrequencyLattice lattice) : lattice_(lattice) {}

Complex BiphotonState::amplitude(int signal_bin, Axis signal_pol, int idler_bin,
                                 Axis idler_pol) const {
  auto it = blocks_.find({signal_bin, idler_bin});
  if (it == blocks_.end()) return Complex(0.0, 0.0);
  return it->second(pol_index(signal_pol), pol_index(idler_pol));
}

void BiphotonState::add(int signal_bin, int idler_bin, const Block& block) {
  require_bin(lattice_, signal_bin, "signal");
  require_bin(lattice_, idler_bin, "idler");
  auto [it, inserted] = blocks_.try_emplace({signal_bin, idler_bin}, Block::Zero());
  it->second += block;
}

double BiphotonState::norm2() const noexcept {
  double n = 0.0;
  for (const auto& [bins, b] : blocks_) n += b.squaredNorm();
  return n;
}

void BiphotonState::prune() {
  for (auto it = blocks_.begin(); it != blocks_.end();) {
    if (it->second.cwiseAbs().maxCoeff() < kPruneThreshold) {
      pruned_ += it->second.squaredNorm();
      it = blocks_.erase(it);
    } else {
      ++it;
    }
  }
}

BiphotonState make_bfc(const FrequencyLattice& lattice, const std::vector<PairSpec>& pairs,
                       bool normalize) {
  if (pairs.empty()) throw Error(Errc::EmptyPairs, "a comb needs at least one pair");
  std::set<BiphotonState::BinPair> seen;
  double total = 0.0;
  for (const auto& p : pairs) {
    require_bin(lattice, p.signal_bin, "signal");
    require_bin(lattice, p.idler_bin, "idler");
    if (!seen.insert({p.signal_bin, p.idler_bin}).second) {
      throw Error(Errc::DuplicatePair, "pair (" + std::to_string(p.signal_bin) + ", " +
                                           std::to_string(p.idler_bin) + ") listed twice");
    }
    if (!std::isfinite(p.amplitude.real()) || !std::isfinite(p.amplitude.imag())) {
      throw Error(Errc::InvalidParameter, "pair amplitude must be finite");
    }
    if (std::abs(p.signal_pol.norm2() - 1.0) > 1e-9 || std::abs(p.idler_pol.norm2() - 1.0) > 1e-9) {
      throw Error(Errc::InvalidParameter, "pair polarizations must be unit Jones vectors");
    }
    total += std::norm(p.amplitude);
  }
  if (normalize && !(total > 0.0)) {
    throw Error(Errc::InvalidParameter, "cannot normalize a comb with zero total amplitude");
  }
  const double scale = normalize ? 1.0 / std::sqrt(total) : 1.0;
  BiphotonState st(lattice);
  for (const auto& p : pairs) {
    st.add(p.signal_bin, p.idler_bin,
           p.amplitude * scale * as_column(p.signal_pol) * as_column(p.idler_pol).transpose());
  }
  return st;
}

BiphotonState make_spdc_source(const FrequencyLattice& lattice, int degeneracy_bin,
                               const std::map<int, double>& envelope,
                               const std::pair<JonesVector, JonesVector>& pair_pol) {
  std::vector<PairSpec> pairs;
  for (const auto& [d, f] : envelope) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      throw Error(Errc::InvalidParameter, "envelope values must be finite and >= 0");
    }
    require_bin(lattice, degeneracy_bin + d, "signal");
    require_bin(lattice, degeneracy_bin - d, "idler");
    if (f == 0.0) continue;
    pairs.push_back(PairSpec{.signal_bin = degeneracy_bin + d,
                             .idler_bin = degeneracy_bin - d,
                             .amplitude = Complex(std::sqrt(f), 0.0),
                             .signal_pol = pair_pol.first,
                             .idler_pol = pair_pol.second});
  }
  return make_bfc(lattice, pairs, true);
}

BiphotonState apply_signal(const ElementOperator& e, const BiphotonState& st) {
  return apply_impl(e, st, true, [](const JonesMatrix& m, const BiphotonState::Block& b) {
    return BiphotonState::Block(m * b);
  });
}

BiphotonState apply_idler(const ElementOperator& e, const BiphotonState& st) {
  return apply_impl(e, st, false, [](const JonesMatrix& m, const BiphotonState::Block& b) {
    return BiphotonState::Block(b * m.transpose());
  });
}

BiphotonState apply_side(Side side, const ElementOperator& e, const BiphotonState& st) {
  return side == Side::Signal ? apply_signal(e, st) : apply_idler(e, st);
}

BiphotonState apply_both(const ElementOperator& e, const BiphotonState& st) {
  return apply_idler(e, apply_signal(e, st));
}

double coincidence_weight(const BiphotonState& st, int signal_bin, int idler_bin) {
  require_bin(st.lattice(), signal_bin, "signal");
  require_bin(st.lattice(), idler_bin, "idler");
  auto it = st.blocks().find({signal_bin, idler_bin});
  return it == st.blocks().end() ? 0.0 : it->second.squaredNorm();
}

double singles_weight(const BiphotonState& st, Side side, int bin) {
  require_bin(st.lattice(), bin, side == Side::Signal ? "signal" : "idler");
  double w = 0.0;
  for (const auto& [bins, b] : st.blocks()) {
    if ((side == Side::Signal ? bins.first : bins.second) == bin) w += b.squaredNorm();
  }
  return w;
}

std::map<BiphotonState::BinPair, double> joint_spectrum(const BiphotonState& st) {
  std::map<BiphotonState::BinPair, double> out;
  for (const auto& [bins, b] : st.blocks()) {
    const double w = b.squaredNorm();
    if (w > 0.0) out.emplace(bins, w);
  }
  return out;
}

}  // namespace fbsim
