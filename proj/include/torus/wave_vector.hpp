#pragma once

#include <cmath>
#include <ostream>
#include <string>

namespace torus {

// Integer lattice point indexing a Fourier mode on the 3-torus.
struct WaveVector {
  int k1 = 0;
  int k2 = 0;
  int k3 = 0;

  constexpr bool operator==(const WaveVector&) const = default;

  constexpr long long norm2() const {
    return static_cast<long long>(k1) * k1 + static_cast<long long>(k2) * k2 +
           static_cast<long long>(k3) * k3;
  }
  double norm() const { return std::sqrt(static_cast<double>(norm2())); }
  constexpr bool is_zero() const { return k1 == 0 && k2 == 0 && k3 == 0; }

  constexpr WaveVector operator+(const WaveVector& o) const {
    return {k1 + o.k1, k2 + o.k2, k3 + o.k3};
  }
  constexpr WaveVector operator-(const WaveVector& o) const {
    return {k1 - o.k1, k2 - o.k2, k3 - o.k3};
  }
  constexpr WaveVector operator-() const { return {-k1, -k2, -k3}; }
};

constexpr long long dot(const WaveVector& a, const WaveVector& b) {
  return static_cast<long long>(a.k1) * b.k1 + static_cast<long long>(a.k2) * b.k2 +
         static_cast<long long>(a.k3) * b.k3;
}

// Fixed total order on Z^3; all deterministic iteration follows it.
constexpr bool lex_less(const WaveVector& a, const WaveVector& b) {
  if (a.k1 != b.k1) return a.k1 < b.k1;
  if (a.k2 != b.k2) return a.k2 < b.k2;
  return a.k3 < b.k3;
}

inline std::string to_string(const WaveVector& k) {
  return "(" + std::to_string(k.k1) + "," + std::to_string(k.k2) + "," + std::to_string(k.k3) +
         ")";
}

inline std::ostream& operator<<(std::ostream& os, const WaveVector& k) {
  return os << to_string(k);
}

}  // namespace torus
