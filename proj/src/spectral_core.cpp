#include "torus/spectral_core.hpp"

#include <mutex>
#include <stdexcept>
#include <vector>

namespace torus {

Vec3c leray_project(const WaveVector& k, const Vec3c& v) {
  if (k.is_zero()) throw std::domain_error("leray_project: zero wave vector");
  const double k2 = static_cast<double>(k.norm2());
  const Complex kv = dot_c(k, v);
  const Complex s = kv / k2;
  return {v[0] - static_cast<double>(k.k1) * s, v[1] - static_cast<double>(k.k2) * s,
          v[2] - static_cast<double>(k.k3) * s};
}

double max_divergence(const SpectralField& u) {
  double worst = 0.0;
  u.for_each([&](const WaveVector& k, const Vec3c& v) {
    const double div = std::abs(dot_c(k, v));
    const double scale = std::max(1.0, vec_abs(v));
    worst = std::max(worst, div / scale);
  });
  return worst;
}

SpectralField symmetrize_real(const SpectralField& u) {
  SpectralField out(u.cutoff(), true);
  auto emit = [&](const WaveVector& k) {
    const Vec3c& a = u.at(k);
    const Vec3c b = conj(u.at(-k));
    out.set(k, 0.5 * (a + b));
  };
  for (const WaveVector& k : u.modes()) {
    emit(k);
    if (!u.occupied(-k)) emit(-k);
  }
  return out;
}

SpectralField scale_field(const SpectralField& u, double s) {
  SpectralField out(u.cutoff(), u.real_symmetric());
  u.for_each([&](const WaveVector& k, const Vec3c& v) { out.set(k, s * v); });
  return out;
}

Vec3c convection_sum(const SpectralField& u, const WaveVector& k, ConvectionWeight w) {
  Vec3c acc{};
  for (const WaveVector& alpha : u.modes()) {
    const WaveVector beta = k - alpha;
    if (!u.occupied(beta)) continue;
    const Vec3c& ua = u.at(alpha);
    const Vec3c& ub = u.at(beta);
    Complex weight;
    if (w == ConvectionWeight::TargetK) {
      weight = dot_c(k, ua);
    } else {
      weight = dot_c(alpha, ua) + dot_c(beta, ua);
    }
    acc[0] += weight * ub[0];
    acc[1] += weight * ub[1];
    acc[2] += weight * ub[2];
  }
  return acc;
}

namespace {

std::vector<WaveVector> output_modes(double out_cutoff) {
  SpectralField shape(out_cutoff);
  std::vector<WaveVector> out;
  const int b = shape.box_radius();
  for (int x = -b; x <= b; ++x)
    for (int y = -b; y <= b; ++y)
      for (int z = -b; z <= b; ++z) {
        const WaveVector k{x, y, z};
        if (shape.within_cutoff(k)) out.push_back(k);
      }
  return out;
}

void check_out_cutoff(const SpectralField& u, double out_cutoff) {
  if (!(out_cutoff >= 0.0) || out_cutoff > 2.0 * u.cutoff() + kShellSnap)
    throw std::invalid_argument("nonlinear term: out_cutoff must lie in [0, 2 cutoff]");
}

const Complex kMinusI{0.0, -1.0};

}  // namespace

SpectralField nonlinear_term_direct(const SpectralField& u, double out_cutoff,
                                    ConvectionWeight w) {
  check_out_cutoff(u, out_cutoff);
  const std::vector<WaveVector> targets = output_modes(out_cutoff);
  std::vector<Vec3c> results(targets.size());
  const long long n = static_cast<long long>(targets.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const WaveVector k = targets[static_cast<std::size_t>(i)];
    results[static_cast<std::size_t>(i)] = kMinusI * leray_project(k, convection_sum(u, k, w));
  }
  SpectralField out(out_cutoff);
  for (std::size_t i = 0; i < targets.size(); ++i) out.set(targets[i], results[i]);
  return out;
}

namespace reference {

SpectralField nonlinear_term_direct(const SpectralField& u, double out_cutoff,
                                    ConvectionWeight w) {
  check_out_cutoff(u, out_cutoff);
  const std::vector<WaveVector> targets = output_modes(out_cutoff);
  std::vector<Vec3c> results(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const WaveVector k = targets[i];
    results[i] = kMinusI * leray_project(k, convection_sum(u, k, w));
  }
  SpectralField out(out_cutoff);
  for (std::size_t i = 0; i < targets.size(); ++i) out.set(targets[i], results[i]);
  return out;
}

}  // namespace reference

SpectralField nonlinear_term_fast(const SpectralField& u, double out_cutoff) {
  static FourierWorkspace shared;
  static std::mutex guard;
  std::lock_guard<std::mutex> lock(guard);
  return shared.nonlinear_term(u, out_cutoff);
}

}  // namespace torus
