#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <stdexcept>
#include <vector>

#include "torus/spectral_core.hpp"

namespace torus {

namespace {

bool is_smooth(int n) {
  for (int f : {2, 3, 5, 7})
    while (n % f == 0) n /= f;
  return n == 1;
}

}  // namespace

int dealiased_grid_size(double cutoff) {
  if (!(cutoff >= 0.0)) throw std::invalid_argument("dealiased_grid_size: bad cutoff");
  const int b = static_cast<int>(std::floor(std::sqrt(cutoff * cutoff + kShellSnap)));
  int n = 2 * (2 * b + 1);
  while (!is_smooth(n)) ++n;
  return n;
}

struct FourierWorkspace::Impl {
  struct Grid {
    int n = 0;
    fftw_complex* phys[3] = {nullptr, nullptr, nullptr};
    fftw_complex* work = nullptr;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    explicit Grid(int size) : n(size) {
      const std::size_t total = static_cast<std::size_t>(n) * n * n;
      for (auto& p : phys) p = fftw_alloc_complex(total);
      work = fftw_alloc_complex(total);
      if (!phys[0] || !phys[1] || !phys[2] || !work)
        throw std::runtime_error("FourierWorkspace: allocation failed");
      // FFTW_ESTIMATE keeps the plan choice deterministic across runs.
      backward = fftw_plan_dft_3d(n, n, n, work, work, FFTW_BACKWARD, FFTW_ESTIMATE);
      forward = fftw_plan_dft_3d(n, n, n, work, work, FFTW_FORWARD, FFTW_ESTIMATE);
      if (!backward || !forward) throw std::runtime_error("FourierWorkspace: planning failed");
    }
    ~Grid() {
      if (forward) fftw_destroy_plan(forward);
      if (backward) fftw_destroy_plan(backward);
      for (auto& p : phys)
        if (p) fftw_free(p);
      if (work) fftw_free(work);
    }
    Grid(const Grid&) = delete;
    Grid& operator=(const Grid&) = delete;
  };

  std::map<int, std::unique_ptr<Grid>> grids;

  Grid& grid_for(int n) {
    auto it = grids.find(n);
    if (it == grids.end()) it = grids.emplace(n, std::make_unique<Grid>(n)).first;
    return *it->second;
  }
};

FourierWorkspace::FourierWorkspace() : impl_(std::make_unique<Impl>()) {}
FourierWorkspace::~FourierWorkspace() = default;

SpectralField FourierWorkspace::nonlinear_term(const SpectralField& u, double out_cutoff) {
  if (!(out_cutoff >= 0.0) || out_cutoff > 2.0 * u.cutoff() + kShellSnap)
    throw std::invalid_argument("nonlinear term: out_cutoff must lie in [0, 2 cutoff]");

  const int n = dealiased_grid_size(u.cutoff());
  Impl::Grid& g = impl_->grid_for(n);
  const std::size_t total = static_cast<std::size_t>(n) * n * n;

  auto grid_index = [n](const WaveVector& k) {
    const int i1 = ((k.k1 % n) + n) % n;
    const int i2 = ((k.k2 % n) + n) % n;
    const int i3 = ((k.k3 % n) + n) % n;
    return (static_cast<std::size_t>(i1) * n + i2) * n + i3;
  };

  // Velocity components to physical space (unnormalized inverse transform).
  for (int m = 0; m < 3; ++m) {
    std::memset(g.phys[m], 0, total * sizeof(fftw_complex));
    u.for_each([&](const WaveVector& k, const Vec3c& v) {
      const std::size_t i = grid_index(k);
      g.phys[m][i][0] = v[m].real();
      g.phys[m][i][1] = v[m].imag();
    });
    std::memcpy(g.work, g.phys[m], total * sizeof(fftw_complex));
    fftw_execute_dft(g.backward, g.work, g.work);
    std::memcpy(g.phys[m], g.work, total * sizeof(fftw_complex));
  }

  // Output accumulators over the packed target list.
  SpectralField shape(out_cutoff);
  std::vector<WaveVector> targets;
  const int b = shape.box_radius();
  for (int x = -b; x <= b; ++x)
    for (int y = -b; y <= b; ++y)
      for (int z = -b; z <= b; ++z) {
        const WaveVector k{x, y, z};
        if (shape.within_cutoff(k)) targets.push_back(k);
      }
  std::vector<Vec3c> conv(targets.size(), Vec3c{});
  std::vector<std::size_t> target_idx(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) target_idx[i] = grid_index(targets[i]);

  // Six symmetric products u^j u^m; each forward transform contributes the
  // spectral product to every component sum S^m_k = sum_j k_j (u^j * u^m)_k.
  for (int j = 0; j < 3; ++j) {
    for (int m = j; m < 3; ++m) {
      for (std::size_t i = 0; i < total; ++i) {
        const double ar = g.phys[j][i][0], ai = g.phys[j][i][1];
        const double br = g.phys[m][i][0], bi = g.phys[m][i][1];
        g.work[i][0] = ar * br - ai * bi;
        g.work[i][1] = ar * bi + ai * br;
      }
      fftw_execute_dft(g.forward, g.work, g.work);
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const WaveVector& k = targets[i];
        const Complex val{g.work[target_idx[i]][0], g.work[target_idx[i]][1]};
        const int kj = (j == 0) ? k.k1 : (j == 1) ? k.k2 : k.k3;
        const int km = (m == 0) ? k.k1 : (m == 1) ? k.k2 : k.k3;
        conv[i][m] += static_cast<double>(kj) * val;
        if (m != j) conv[i][j] += static_cast<double>(km) * val;
      }
    }
  }

  const double inv_total = 1.0 / static_cast<double>(total);
  const Complex minus_i{0.0, -1.0};
  SpectralField out(out_cutoff);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Vec3c s = inv_total * conv[i];
    out.set(targets[i], minus_i * leray_project(targets[i], s));
  }
  return out;
}

}  // namespace torus
