#pragma once

#include <memory>

#include "torus/spectral_field.hpp"

namespace torus {

// P_k v = v - k (k.v)/|k|^2, the divergence-free projection. Throws
// std::domain_error on k = 0.
Vec3c leray_project(const WaveVector& k, const Vec3c& v);

// max over stored k of |k.u_k| / max(1, |u_k|); 0 for the empty field.
double max_divergence(const SpectralField& u);

// (u_k + conj(u_{-k}))/2 at every mode of the union support. Output satisfies
// u_{-k} = conj(u_k) exactly and carries the real_symmetric flag. Idempotent.
SpectralField symmetrize_real(const SpectralField& u);

// Scale every coefficient by a real factor; preserves conjugate symmetry.
SpectralField scale_field(const SpectralField& u, double s);

// Form of the convection weight in the convolution sum:
//   TargetK    : (k . u_alpha) u_{k-alpha}
//   SplitAlpha : ((alpha . u_alpha) + ((k-alpha) . u_alpha)) u_{k-alpha}
// Identical after projection for divergence-free inputs.
enum class ConvectionWeight { TargetK, SplitAlpha };

// N(u)_k = -i P_k( sum_alpha (k . u_alpha) u_{k-alpha} ), the projected
// nonlinear term of the phase-space ODE u_k' = -|k|^2 u_k + N(u)_k.
//
// Exact pair-sum evaluation over the stored support; output is dense over all
// 0 < |k| <= out_cutoff (zeros stored so structural comparisons are exact) and
// divergence-free against each index. Requires out_cutoff <= 2 u.cutoff.
// Parallelized over output modes; per-mode reduction order is fixed, so the
// result is bit-identical for any worker count.
SpectralField nonlinear_term_direct(const SpectralField& u, double out_cutoff,
                                    ConvectionWeight w = ConvectionWeight::TargetK);

namespace reference {
// Serial driver around the identical per-mode kernel; kept as the plain
// baseline for determinism checks and benchmarks.
SpectralField nonlinear_term_direct(const SpectralField& u, double out_cutoff,
                                    ConvectionWeight w = ConvectionWeight::TargetK);
}  // namespace reference

// Per-output-mode convection sum sum_alpha w(alpha) u_{k-alpha} before
// projection; the shared kernel behind both direct drivers, exposed for tests.
Vec3c convection_sum(const SpectralField& u, const WaveVector& k, ConvectionWeight w);

// Smallest {2,3,5,7}-smooth integer >= 2 (2 floor(cutoff) + 1); the padded
// transform size that leaves products of supported modes alias-free.
int dealiased_grid_size(double cutoff);

// FFT evaluation of the same nonlinear term on the padded grid. Plans are
// cached per grid size and created with a deterministic planner. One
// workspace is not thread-safe; use one per concurrent simulation.
class FourierWorkspace {
 public:
  FourierWorkspace();
  ~FourierWorkspace();
  FourierWorkspace(const FourierWorkspace&) = delete;
  FourierWorkspace& operator=(const FourierWorkspace&) = delete;

  SpectralField nonlinear_term(const SpectralField& u, double out_cutoff);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Convenience wrapper over a process-wide workspace (mutex-guarded).
SpectralField nonlinear_term_fast(const SpectralField& u, double out_cutoff);

}  // namespace torus
