#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "torus/experiments.hpp"
#include "torus/lattice_sums.hpp"
#include "torus/norms.hpp"
#include "torus/spectral_core.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_phi0_diff(const torus::SpectralField& a, const torus::SpectralField& b) {
  double max_diff = 0.0, max_mag = 0.0;
  a.for_each([&](const torus::WaveVector& k, const torus::Vec3c& va) {
    const torus::Vec3c& vb = b.at(k);
    for (int i = 0; i < 3; ++i) max_diff = std::max(max_diff, std::abs(va[i] - vb[i]));
    max_mag = std::max(max_mag, torus::vec_abs(va));
  });
  b.for_each([&](const torus::WaveVector&, const torus::Vec3c& vb) {
    max_mag = std::max(max_mag, torus::vec_abs(vb));
  });
  return max_mag > 0.0 ? max_diff / max_mag : 0.0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Timing comparison: threaded, serial-reference, and transform convolution paths"};
  double cutoff = 8.0;
  int repeat = 3;
  std::uint64_t seed = 7;
  int lattice_r = 64;
  app.add_option("--cutoff", cutoff, "spectral cutoff for the convolution benchmark");
  app.add_option("--repeat", repeat, "repetitions per kernel");
  app.add_option("--seed", seed, "field seed");
  app.add_option("--lattice-r", lattice_r, "outer radius for the lattice-sum benchmark");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif

  const torus::SpectralField u =
      torus::random_divfree_field(seed, 1e-3, 2.0, cutoff, true);
  std::printf("field: cutoff %g, %zu modes\n", cutoff, u.mode_count());

  torus::SpectralField out_par, out_ser, out_fft;
  torus::FourierWorkspace ws;
  // Untimed first call so transform planning does not pollute the comparison.
  out_fft = ws.nonlinear_term(u, cutoff);

  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeat; ++i) out_par = torus::nonlinear_term_direct(u, cutoff);
  const double t_par = seconds_since(t0) / repeat;

  t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeat; ++i) out_ser = torus::reference::nonlinear_term_direct(u, cutoff);
  const double t_ser = seconds_since(t0) / repeat;

  t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeat; ++i) out_fft = ws.nonlinear_term(u, cutoff);
  const double t_fft = seconds_since(t0) / repeat;

  std::printf("convection pair sum, threaded:  %10.4f ms\n", 1e3 * t_par);
  std::printf("convection pair sum, serial:    %10.4f ms  (x%.2f)\n", 1e3 * t_ser,
              t_par > 0 ? t_ser / t_par : 0.0);
  std::printf("convection via transforms:      %10.4f ms  (x%.2f)\n", 1e3 * t_fft,
              t_par > 0 ? t_fft / t_par : 0.0);

  const double diff_ps = rel_phi0_diff(out_par, out_ser);
  const double diff_pf = rel_phi0_diff(out_par, out_fft);
  std::printf("threaded vs serial max rel coefficient diff:    %.3g%s\n", diff_ps,
              diff_ps == 0.0 ? " (bit-identical)" : "");
  std::printf("threaded vs transform max rel coefficient diff: %.3g\n", diff_pf);

  double s_par = 0.0, s_ser = 0.0;
  t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeat; ++i) s_par = torus::power_sum(2.0, 1.0, lattice_r);
  const double tl_par = seconds_since(t0) / repeat;
  t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeat; ++i) s_ser = torus::reference::power_sum(2.0, 1.0, lattice_r);
  const double tl_ser = seconds_since(t0) / repeat;
  std::printf("lattice sum p=2 r=%d, threaded: %10.4f ms\n", lattice_r, 1e3 * tl_par);
  std::printf("lattice sum p=2 r=%d, serial:   %10.4f ms  (x%.2f)\n", lattice_r, 1e3 * tl_ser,
              tl_par > 0 ? tl_ser / tl_par : 0.0);
  std::printf("lattice sums %s\n", s_par == s_ser ? "bit-identical" : "DIFFER");

  return 0;
}
