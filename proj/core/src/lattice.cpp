#include "fbsim/lattice.hpp"

#include <cmath>
#include <string>

#include "fbsim/error.hpp"

namespace fbsim {

FrequencyLattice::FrequencyLattice(double reference_hz, double spacing_hz, int min_index,
                                   int max_index)
    : reference_hz_(reference_hz),
      spacing_hz_(spacing_hz),
      min_index_(min_index),
      max_index_(max_index) {
  if (!(spacing_hz > 0.0) || !std::isfinite(spacing_hz)) {
    throw Error(Errc::NonPositiveSpacing, "lattice spacing must be positive, got " +
                                              std::to_string(spacing_hz) + " Hz");
  }
  if (min_index > max_index) {
    throw Error(Errc::EmptyRange, "min_index " + std::to_string(min_index) +
                                      " exceeds max_index " + std::to_string(max_index));
  }
  if (!std::isfinite(reference_hz)) {
    throw Error(Errc::InvalidParameter, "reference frequency must be finite");
  }
}

FrequencyLattice make_lattice(double reference_hz, double spacing_hz, int min_index, int max_index) {
  return FrequencyLattice(reference_hz, spacing_hz, min_index, max_index);
}

StokesVector jones_to_stokes(const JonesVector& v) noexcept {
  const Complex cross = std::conj(v.slow) * v.fast;
  return StokesVector{
      .s0 = v.norm2(),
      .s1 = std::norm(v.slow) - std::norm(v.fast),
      .s2 = 2.0 * cross.real(),
      .s3 = 2.0 * cross.imag(),
  };
}

JonesVector poincare_azimuth(double azimuth) noexcept {
  return linear_polarization(0.5 * azimuth);
}

JonesVector linear_polarization(double angle) noexcept {
  return JonesVector{Complex(std::cos(angle), 0.0), Complex(std::sin(angle), 0.0)};
}

Complex overlap(const JonesVector& a, const JonesVector& b) noexcept {
  return std::conj(a.slow) * b.slow + std::conj(a.fast) * b.fast;
}

JonesVector orthogonal_complement(const JonesVector& v) noexcept {
  const double n = std::sqrt(v.norm2());
  if (n == 0.0) return JonesVector{Complex(0.0, 0.0), Complex(1.0, 0.0)};
  return JonesVector{-std::conj(v.fast) / n, std::conj(v.slow) / n};
}

}  // namespace fbsim
