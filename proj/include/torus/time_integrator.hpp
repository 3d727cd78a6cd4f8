#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "torus/norms.hpp"
#include "torus/spectral_core.hpp"
#include "torus/spectral_field.hpp"

namespace torus {

enum class Scheme { ExponentialEuler, IntegratingFactorRK4 };

Scheme scheme_from_string(const std::string& s);
std::string scheme_name(Scheme s);

struct GalerkinConfig {
  double cutoff = 8.0;
  double dt = 1e-3;
  double t_end = 1.0;
  bool nonlinear_enabled = true;
  Scheme scheme = Scheme::ExponentialEuler;
  int record_every = 1;
  // Test-only switch; disables the -|k|^2 u_k term so the convection term's
  // energy conservation can be observed in isolation.
  bool dissipation_enabled = true;
  // false routes the nonlinear term through the exact pair sum (slow).
  bool use_fft = true;
  double tail_k_min = 8.0;  // NormReport tail_phi threshold
  double tail_k0 = 8.0;     // NormReport tail_enstrophy threshold
  std::vector<double> snapshot_times;
};

struct EnergyRow {
  double time = 0.0;
  double l2sq = 0.0;
  double grad_l2sq = 0.0;
  double dissipation_integral = 0.0;  // step-resolution trapezoid of 2 ||grad u||^2
  double residual = 0.0;              // l2sq + dissipation_integral - initial l2sq
};

struct TrajectoryRecord {
  std::vector<NormReport> norms;
  std::vector<EnergyRow> energy;
  std::vector<std::pair<double, SpectralField>> snapshots;
  SpectralField final_field;
  bool failed = false;
  long long fail_step = -1;
  bool cfl_warning = false;
  bool real_data = false;
  double initial_l2sq = 0.0;
  double dt = 0.0;
  double t_end = 0.0;
  // Trapezoid error estimate for the dissipation integral, accumulated at step
  // resolution from second differences of the integrand (doubled for safety).
  double quad_tolerance = 0.0;
};

// One step of the coefficient ODE u_k' = -|k|^2 u_k + N(u)_k with the linear
// part treated exactly:
//   exponential-Euler:      u <- e^{-L dt} u + ((1 - e^{-L dt})/L) N(u)
//   integrating-factor RK4: classical RK4 on e^{L t} u, unwound so only
//                           decaying exponentials are evaluated.
// Both reduce to exact heat decay when the nonlinear term is off. ws may be
// null when cfg.use_fft is false or nonlinearity is disabled.
SpectralField step(const SpectralField& u, double dt, const GalerkinConfig& cfg,
                   FourierWorkspace* ws);

// Evolves from t = 0 to t_end (rounded to whole steps), recording norm and
// energy rows every record_every steps plus the final state. Throws
// std::invalid_argument on bad config; numeric blowup is reported via
// failed/fail_step with the partial trajectory preserved. The observer, when
// given, is invoked with (time, state) at every recorded step.
using RecordObserver = std::function<void(double, const SpectralField&)>;
TrajectoryRecord simulate(const SpectralField& initial, const GalerkinConfig& cfg);
TrajectoryRecord simulate(const SpectralField& initial, const GalerkinConfig& cfg,
                          const RecordObserver& observer);

struct EnergyReport {
  double max_identity_residual = 0.0;
  // Trapezoid error estimate from second differences of the integrand.
  double quad_tolerance = 0.0;
  bool inequality_satisfied = false;  // residual <= quad_tolerance throughout
  bool real_data = false;             // the inequality presumes real data
};

EnergyReport energy_report(const TrajectoryRecord& tr);

// CSV "time,l2sq,grad_l2sq,dissipation_integral,residual".
void write_energy_csv(const std::string& path, const std::vector<EnergyRow>& rows);

}  // namespace torus
