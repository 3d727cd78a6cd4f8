#pragma once

#include <string>
#include <vector>

#include "torus/spectral_field.hpp"

namespace torus {

// sup over stored k of |k|^alpha |u_k|.
double phi_norm(const SpectralField& u, double alpha);
// As above restricted to |k| >= k_min.
double tail_phi_sup(const SpectralField& u, double alpha, double k_min);
// Wave vector attaining the phi-norm sup (lex-first on ties); zero vector for
// an empty field.
WaveVector phi_norm_argmax(const SpectralField& u, double alpha);

// (sum over stored k of |k|^{2s} |u_k|^2)^{1/2}.
double sobolev_norm(const SpectralField& u, double s);
double l2_norm(const SpectralField& u);

// Sum over stored |k| >= k0 of |k| |u_k|^2.
double tail_enstrophy_half(const SpectralField& u, double k0);

struct NormReport {
  double time = 0.0;
  double phi2 = 0.0;
  double l2 = 0.0;
  double h_half = 0.0;
  double h1 = 0.0;
  double tail_phi = 0.0;        // tail_phi_sup at alpha = 2, k_min = tail_k_min
  double tail_k_min = 0.0;
  double tail_enstrophy = 0.0;  // tail_enstrophy_half at tail_k0
  double tail_k0 = 0.0;
};

NormReport make_norm_report(const SpectralField& u, double time, double tail_k_min,
                            double tail_k0);

// CSV with fixed column order:
// time,phi2,l2,h_half,h1,tail_phi,tail_K_min,tail_enstrophy,tail_k0
void write_norm_csv(const std::string& path, const std::vector<NormReport>& rows);

}  // namespace torus
