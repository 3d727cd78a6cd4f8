#include "torus/norms.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "torus/accum.hpp"

namespace torus {

namespace {

double mode_weight(const WaveVector& k, double alpha) {
  return std::pow(static_cast<double>(k.norm2()), 0.5 * alpha);
}

// |k| >= k_min with the shared shell snap on |k|^2.
bool at_or_beyond(const WaveVector& k, double k_min) {
  return static_cast<double>(k.norm2()) >= k_min * k_min - kShellSnap;
}

}  // namespace

double phi_norm(const SpectralField& u, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("phi_norm: alpha must be >= 0");
  double sup = 0.0;
  u.for_each([&](const WaveVector& k, const Vec3c& v) {
    sup = std::max(sup, mode_weight(k, alpha) * vec_abs(v));
  });
  return sup;
}

WaveVector phi_norm_argmax(const SpectralField& u, double alpha) {
  double sup = -1.0;
  WaveVector arg{};
  u.for_each([&](const WaveVector& k, const Vec3c& v) {
    const double val = mode_weight(k, alpha) * vec_abs(v);
    if (val > sup) {
      sup = val;
      arg = k;
    }
  });
  return arg;
}

double tail_phi_sup(const SpectralField& u, double alpha, double k_min) {
  if (!(k_min >= 0.0)) throw std::invalid_argument("tail_phi_sup: k_min must be >= 0");
  double sup = 0.0;
  u.for_each([&](const WaveVector& k, const Vec3c& v) {
    if (!at_or_beyond(k, k_min)) return;
    sup = std::max(sup, mode_weight(k, alpha) * vec_abs(v));
  });
  return sup;
}

double sobolev_norm(const SpectralField& u, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("sobolev_norm: s must be >= 0");
  NeumaierSum acc;
  u.for_each([&](const WaveVector& k, const Vec3c& v) {
    acc.add(std::pow(static_cast<double>(k.norm2()), s) * vec_abs2(v));
  });
  return std::sqrt(acc.value());
}

double l2_norm(const SpectralField& u) { return sobolev_norm(u, 0.0); }

double tail_enstrophy_half(const SpectralField& u, double k0) {
  if (!(k0 >= 0.0)) throw std::invalid_argument("tail_enstrophy_half: k0 must be >= 0");
  NeumaierSum acc;
  u.for_each([&](const WaveVector& k, const Vec3c& v) {
    if (!at_or_beyond(k, k0)) return;
    acc.add(k.norm() * vec_abs2(v));
  });
  return acc.value();
}

NormReport make_norm_report(const SpectralField& u, double time, double tail_k_min,
                            double tail_k0) {
  NormReport r;
  r.time = time;
  r.phi2 = phi_norm(u, 2.0);
  r.l2 = l2_norm(u);
  r.h_half = sobolev_norm(u, 0.5);
  r.h1 = sobolev_norm(u, 1.0);
  r.tail_phi = tail_phi_sup(u, 2.0, tail_k_min);
  r.tail_k_min = tail_k_min;
  r.tail_enstrophy = tail_enstrophy_half(u, tail_k0);
  r.tail_k0 = tail_k0;
  return r;
}

void write_norm_csv(const std::string& path, const std::vector<NormReport>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_norm_csv: cannot open " + path);
  std::fprintf(f, "time,phi2,l2,h_half,h1,tail_phi,tail_K_min,tail_enstrophy,tail_k0\n");
  for (const NormReport& r : rows) {
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.time, r.phi2,
                 r.l2, r.h_half, r.h1, r.tail_phi, r.tail_k_min, r.tail_enstrophy, r.tail_k0);
  }
  std::fclose(f);
}

}  // namespace torus
