#pragma once

#include <complex>
#include <cstddef>

namespace fbsim {

using Complex = std::complex<double>;

// Uniform grid of optical frequency bins. Bin k sits at
// reference_hz + k * spacing_hz; everything downstream works on the integer
// offsets so the ~193 THz carrier never enters a phase computation.
class FrequencyLattice {
 public:
  FrequencyLattice(double reference_hz, double spacing_hz, int min_index, int max_index);

  double reference_hz() const noexcept { return reference_hz_; }
  double spacing_hz() const noexcept { return spacing_hz_; }
  int min_index() const noexcept { return min_index_; }
  int max_index() const noexcept { return max_index_; }

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(max_index_ - min_index_ + 1);
  }
  bool contains(int k) const noexcept { return k >= min_index_ && k <= max_index_; }

  // Position of bin k in a dense array covering the lattice.
  std::size_t slot(int k) const noexcept { return static_cast<std::size_t>(k - min_index_); }
  int bin_at(std::size_t slot) const noexcept { return min_index_ + static_cast<int>(slot); }

  double offset_hz(int k) const noexcept { return static_cast<double>(k) * spacing_hz_; }
  double frequency(int k) const noexcept { return reference_hz_ + offset_hz(k); }
  double separation_hz(int from, int to) const noexcept {
    return static_cast<double>(to - from) * spacing_hz_;
  }

  friend bool operator==(const FrequencyLattice&, const FrequencyLattice&) = default;

 private:
  double reference_hz_;
  double spacing_hz_;
  int min_index_;
  int max_index_;
};

FrequencyLattice make_lattice(double reference_hz, double spacing_hz, int min_index, int max_index);

// Polarization amplitudes along a device's slow and fast axes.
struct JonesVector {
  Complex slow{0.0, 0.0};
  Complex fast{0.0, 0.0};

  double norm2() const noexcept { return std::norm(slow) + std::norm(fast); }

  JonesVector& operator*=(Complex c) noexcept {
    slow *= c;
    fast *= c;
    return *this;
  }
  JonesVector& operator+=(const JonesVector& o) noexcept {
    slow += o.slow;
    fast += o.fast;
    return *this;
  }
  friend JonesVector operator*(Complex c, JonesVector v) noexcept { return v *= c; }
  friend JonesVector operator+(JonesVector a, const JonesVector& b) noexcept { return a += b; }
};

struct StokesVector {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
};

StokesVector jones_to_stokes(const JonesVector& v) noexcept;

// Unit Jones vector on the equator of the Poincare sphere: Stokes
// (cos azimuth, sin azimuth, 0). Azimuth 0 is the slow axis, pi the fast axis.
JonesVector poincare_azimuth(double azimuth) noexcept;

// Linear polarization at a physical orientation angle from the slow axis.
JonesVector linear_polarization(double angle) noexcept;

// conj(a) . b
Complex overlap(const JonesVector& a, const JonesVector& b) noexcept;

// Unit vector orthogonal to v (v need not be normalized).
JonesVector orthogonal_complement(const JonesVector& v) noexcept;

}  // namespace fbsim
