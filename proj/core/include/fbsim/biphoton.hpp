#pragma once

#include <map>
#include <utility>
#include <vector>

#include "fbsim/photonics.hpp"

namespace fbsim {

enum class Side { Signal, Idler };

// Pure two-photon state. Amplitudes for one (signal bin, idler bin) pair are
// held as a 2x2 block: row = signal polarization, column = idler polarization.
class BiphotonState {
 public:
  using BinPair = std::pair<int, int>;  // (signal bin, idler bin)
  using Block = Eigen::Matrix2cd;

  // Blocks whose largest entry magnitude drops below this are pruned.
  static constexpr double kPruneThreshold = 1e-15;

  explicit BiphotonState(FrequencyLattice lattice);

  const FrequencyLattice& lattice() const noexcept { return lattice_; }
  const std::map<BinPair, Block>& blocks() const noexcept { return blocks_; }

  Complex amplitude(int signal_bin, Axis signal_pol, int idler_bin, Axis idler_pol) const;
  void add(int signal_bin, int idler_bin, const Block& block);

  double norm2() const noexcept;
  bool empty() const noexcept { return blocks_.empty(); }

  // Power sent off-lattice by element applications.
  double leakage() const noexcept { return leakage_; }
  // Power discarded by amplitude pruning.
  double pruned() const noexcept { return pruned_; }

  void add_leakage(double p) noexcept { leakage_ += p; }
  void prune();

 private:
  FrequencyLattice lattice_;
  std::map<BinPair, Block> blocks_;
  double leakage_ = 0.0;
  double pruned_ = 0.0;
};

struct PairSpec {
  int signal_bin = 0;
  int idler_bin = 0;
  Complex amplitude{1.0, 0.0};
  JonesVector signal_pol{Complex(1.0, 0.0), Complex(0.0, 0.0)};
  JonesVector idler_pol{Complex(1.0, 0.0), Complex(0.0, 0.0)};
};

// sum_k alpha_k |s_k, p_k> |i_k, q_k>
BiphotonState make_bfc(const FrequencyLattice& lattice, const std::vector<PairSpec>& pairs,
                       bool normalize);

// Energy-matched continuum: pair offset d puts the signal at degeneracy + d and
// the idler at degeneracy - d with amplitude proportional to sqrt(envelope[d]).
// Always unit-normalized.
BiphotonState make_spdc_source(const FrequencyLattice& lattice, int degeneracy_bin,
                               const std::map<int, double>& envelope,
                               const std::pair<JonesVector, JonesVector>& pair_pol);

BiphotonState apply_signal(const ElementOperator& e, const BiphotonState& st);
BiphotonState apply_idler(const ElementOperator& e, const BiphotonState& st);
BiphotonState apply_side(Side side, const ElementOperator& e, const BiphotonState& st);
// Same element on both photons (shared fibre path).
BiphotonState apply_both(const ElementOperator& e, const BiphotonState& st);

// Polarization-insensitive detection weights.
double coincidence_weight(const BiphotonState& st, int signal_bin, int idler_bin);
double singles_weight(const BiphotonState& st, Side side, int bin);
std::map<BiphotonState::BinPair, double> joint_spectrum(const BiphotonState& st);

}  // namespace fbsim
