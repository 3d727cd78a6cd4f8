#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "torus/bound_verifier.hpp"
#include "torus/lattice_sums.hpp"
#include "torus/spectral_field.hpp"
#include "torus/time_integrator.hpp"

namespace torus {

// Shared configuration for the four studies. Loadable from a plain-text
// "key = value" file (# comments) with CLI flags overriding.
struct ExperimentConfig {
  std::string kind = "smallness";  // smallness | bootstrap | h-half | constants
  std::uint64_t seed = 1;
  // Initial field profile.
  double alpha = 2.0;
  double epsilon = 1e-3;
  double cutoff = 16.0;
  bool real_data = true;
  // Schedule parameters.
  double rho = 0.5;
  int n_max = 3;
  double k_minus1 = 0.01;
  double big_d = 2.0;
  double l0 = 0.01;
  double c = 0.0;  // 0 selects the extracted coefficient-sum constant lemma_c
  // Integration.
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::ExponentialEuler;
  bool nonlinear_enabled = true;
  int record_every = 10;
  // Output.
  std::string out_dir = ".";
};

std::map<std::string, std::string> parse_config_file(const std::string& path);
ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv,
                                 ExperimentConfig base = {});
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Seeded random field: per component of each mode, xi uniform on the complex
// unit disk; coefficient epsilon xi / |k|^alpha, then projected
// divergence-free, then (real) symmetrized, then rescaled so that
// phi_norm(u, alpha) = epsilon.
SpectralField random_divfree_field(std::uint64_t seed, double epsilon, double alpha,
                                   double cutoff, bool real);

// Deterministic divergence-free profile with |u_k| = epsilon/|k|^alpha
// exactly: each coefficient is the normalized projection of the coordinate
// axis least aligned with k. Real-symmetric by construction.
SpectralField decay_profile_field(double cutoff, double epsilon, double alpha);

// Piecewise profile realizing the bootstrap inductive hypothesis with
// equality: |u_k| = eps^{mu_n}/|k|^2 for |k| >= k_n, big_d/|k|^2 below
// k_minus1, eps/|k|^2 between.
SpectralField t1_hypothesis_field(double cutoff, double epsilon, long long mu_n,
                                  double k_minus1, double k_n, double big_d);

// Smallest integer K0 >= 1 such that exp(-(K0 2^l)^2 rho / 2^n) <
// sqrt(L0)/(K0 2^l)^2 for all 1 <= n <= n_max, n <= l <= n_max.
int choose_k0_threshold(double l0, double rho, int n_max);

struct StudyResult {
  bool pass = false;
  bool refused = false;
  nlohmann::json report;
};

// Each study writes report.json plus its CSVs into cfg.out_dir and returns
// the verdict. Reports embed the config, seed, and constants table used.
StudyResult run_smallness_experiment(const ExperimentConfig& cfg);
StudyResult run_bootstrap_study(const ExperimentConfig& cfg);
StudyResult run_h_half_study(const ExperimentConfig& cfg);
StudyResult run_constants(const ExperimentConfig& cfg);

nlohmann::json constants_to_json(const ConstantsTable& t);

}  // namespace torus
