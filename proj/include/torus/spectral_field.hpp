#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "torus/wave_vector.hpp"

namespace torus {

using Complex = std::complex<double>;
// One velocity coefficient: three complex components.
using Vec3c = std::array<Complex, 3>;

inline double vec_abs2(const Vec3c& v) {
  return std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
}
// Coefficient magnitude |u_k| is the Euclidean norm of the complex 3-vector.
inline double vec_abs(const Vec3c& v) { return std::sqrt(vec_abs2(v)); }

inline Vec3c operator+(const Vec3c& a, const Vec3c& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3c operator-(const Vec3c& a, const Vec3c& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3c operator*(const Complex& s, const Vec3c& v) { return {s * v[0], s * v[1], s * v[2]}; }
inline Vec3c operator*(double s, const Vec3c& v) { return {s * v[0], s * v[1], s * v[2]}; }
inline Vec3c conj(const Vec3c& v) {
  return {std::conj(v[0]), std::conj(v[1]), std::conj(v[2])};
}
// k . v with the integer wave vector promoted to complex scalars.
inline Complex dot_c(const WaveVector& k, const Vec3c& v) {
  return static_cast<double>(k.k1) * v[0] + static_cast<double>(k.k2) * v[1] +
         static_cast<double>(k.k3) * v[2];
}

// Snap tolerance for shell membership: |k|^2 is exact in integers, cutoffs are
// reals, so membership compares |k|^2 <= cutoff^2 + kShellSnap.
inline constexpr double kShellSnap = 1e-9;

// Truncated Fourier velocity field: finite map from nonzero wave vectors with
// |k| <= cutoff to complex 3-vector coefficients. Unset modes are implicitly
// zero. Storage is a dense array over the lattice box [-B,B]^3 with an
// occupancy mask; iteration order over stored modes is lexicographic.
class SpectralField {
 public:
  SpectralField() : SpectralField(0.0, false) {}

  explicit SpectralField(double cutoff, bool real_symmetric = false)
      : cutoff_(cutoff), real_(real_symmetric) {
    if (!(cutoff >= 0.0)) throw std::invalid_argument("SpectralField: cutoff must be >= 0");
    box_ = static_cast<int>(std::floor(std::sqrt(cutoff * cutoff + kShellSnap)));
    side_ = 2 * box_ + 1;
    values_.assign(static_cast<std::size_t>(side_) * side_ * side_, Vec3c{});
    occupied_.assign(values_.size(), 0);
  }

  double cutoff() const { return cutoff_; }
  int box_radius() const { return box_; }
  bool real_symmetric() const { return real_; }
  void set_real_symmetric(bool v) { real_ = v; }

  bool in_box(const WaveVector& k) const {
    return std::abs(k.k1) <= box_ && std::abs(k.k2) <= box_ && std::abs(k.k3) <= box_;
  }
  bool within_cutoff(const WaveVector& k) const {
    return !k.is_zero() &&
           static_cast<double>(k.norm2()) <= cutoff_ * cutoff_ + kShellSnap;
  }
  bool occupied(const WaveVector& k) const {
    return in_box(k) && occupied_[index(k)] != 0;
  }

  // Reads never throw: unset or out-of-box modes are zero.
  const Vec3c& at(const WaveVector& k) const {
    if (!in_box(k)) return zero_;
    const std::size_t i = index(k);
    return occupied_[i] ? values_[i] : zero_;
  }

  void set(const WaveVector& k, const Vec3c& v) {
    if (k.is_zero()) throw std::invalid_argument("SpectralField::set: zero mean, no k=0 entry");
    if (!within_cutoff(k))
      throw std::invalid_argument("SpectralField::set: mode " + to_string(k) +
                                  " outside cutoff " + std::to_string(cutoff_));
    const std::size_t i = index(k);
    values_[i] = v;
    if (!occupied_[i]) {
      occupied_[i] = 1;
      if (modes_.empty() || lex_less(modes_.back(), k)) {
        modes_.push_back(k);
      } else {
        modes_.push_back(k);
        modes_dirty_ = true;
      }
    }
  }

  std::size_t mode_count() const { return modes_.size(); }

  // Stored modes in lexicographic order.
  const std::vector<WaveVector>& modes() const {
    if (modes_dirty_) {
      std::sort(modes_.begin(), modes_.end(),
                [](const WaveVector& a, const WaveVector& b) { return lex_less(a, b); });
      modes_dirty_ = false;
    }
    return modes_;
  }

  template <class F>
  void for_each(F&& f) const {
    for (const WaveVector& k : modes()) f(k, values_[index(k)]);
  }

  std::size_t index(const WaveVector& k) const {
    return (static_cast<std::size_t>(k.k1 + box_) * side_ +
            static_cast<std::size_t>(k.k2 + box_)) *
               side_ +
           static_cast<std::size_t>(k.k3 + box_);
  }

 private:
  double cutoff_ = 0.0;
  int box_ = 0;
  int side_ = 1;
  bool real_ = false;
  std::vector<Vec3c> values_;
  std::vector<unsigned char> occupied_;
  mutable std::vector<WaveVector> modes_;
  mutable bool modes_dirty_ = false;
  static inline const Vec3c zero_{};
};

}  // namespace torus
