#pragma once

#include <string>
#include <vector>

#include "torus/spectral_field.hpp"

namespace torus {

// mu_0 = 1, mu_1 = 2, mu_{n+1} = 2 mu_n - 1; equals 2^{n-1} + 1 for n >= 1.
// Throws std::length_error for n > 62 (overflow).
long long mu_sequence(int n);

// gamma_n = 1/2^n.
double gamma_exponent(int n);

// Claimed decay family |u_k| <= epsilon/|k|^alpha for |k| >= k_min.
struct DecayHypothesis {
  double epsilon = 0.0;
  double alpha = 2.0;
  double k_min = 0.0;
};

struct DecayWitness {
  bool pass = true;
  WaveVector k{};      // lex-first violator when pass is false
  double excess = 0.0; // |k|^alpha |u_k| - epsilon at the witness
};

DecayWitness check_decay_hypothesis(const SpectralField& u, const DecayHypothesis& h);

// Time/frequency ladders driving the decay bootstrap:
//   t_n = rho - rho/2^n,   k_n = k0/epsilon^{2^n},   mu_n as above,
//   gamma_n = 1/2^n,  k0 = k_minus1 D / epsilon (1 + 1e-6).
struct BootstrapSchedule {
  double rho = 0.0;
  double epsilon = 0.0;
  double k_minus1 = 0.0;
  double big_d = 0.0;
  double k0 = 0.0;
  int n_max = 0;
  std::vector<double> t;
  std::vector<double> k;  // may stop early, see ladder_truncated_at
  std::vector<long long> mu;
  std::vector<double> gamma;
  // First n whose k_n overflows the double range; -1 if none. k has entries
  // for n < ladder_truncated_at only (or all n_max+1 when -1).
  int ladder_truncated_at = -1;
  // First n at which exp(-rho |k|^2 / 2^{n+1}) < epsilon^{2^n} fails at the
  // threshold radius |k| = k_minus1/epsilon^{2^n}; -1 if it holds for all n.
  int exp_estimate_first_fail = -1;
};

// Throws std::domain_error unless 0 < epsilon < 1/3 and rho > 0;
// std::invalid_argument for nonpositive k_minus1/D or n_max outside [0, 60].
BootstrapSchedule build_schedule(double rho, double epsilon, double k_minus1, double big_d,
                                 int n_max);

// D_0 = 2 L0, D_{n+1} = q D_n + (4 + sqrt 2) L0 with q = 2 c sqrt(L0).
// When q < 1 the limit is (4 + sqrt 2) L0 / (1 - q) and the error decays
// geometrically: D_n - d_inf = q^n (D_0 - d_inf).
struct DSequence {
  double l0 = 0.0;
  double c = 0.0;
  double q = 0.0;
  bool divergent = false;
  double d_inf = 0.0;  // NaN when divergent
  std::vector<double> d;
};

DSequence d_sequence(int n_max, double l0, double c);

// A e^{-|k|^2 dt} + (B/|k|^2)(1 - e^{-|k|^2 dt}).
double duhamel_envelope(double a, double b, const WaveVector& k, double dt);
double duhamel_envelope_k2(double a, double b, double k_norm2, double dt);

enum class SplitScheme { T2, T1, T4 };

// Hypothesis parameters consumed by the splitting claims. Fields are read per
// scheme; unused ones are ignored.
struct SplitParams {
  // T2 and T1: decay amplitude of the profile hypothesis.
  double epsilon = 0.0;
  // Empirical comparison constant C the claims quote (T2, T1).
  double big_c = 0.0;
  // T1 and T4: rung index (T1 needs n >= 1).
  int n = 1;
  // T1 ladder thresholds and exponents.
  double k_minus1 = 0.0;
  double k_n = 0.0;
  double k_n1 = 0.0;  // validity floor: |k| >= k_{n+1}
  long long mu_n = 1;
  long long mu_n1 = 1;
  // T4 parameters.
  double l0 = 0.0;
  double c = 0.0;
  double d_n = 0.0;
  double k0_threshold = 0.0;  // validity floor: |k| >= k0_threshold 2^{n+1}
};

struct RegionValue {
  std::string name;
  double computed = 0.0;
  double claimed = 0.0;
};

struct SplitBreakdown {
  SplitScheme scheme = SplitScheme::T2;
  std::string scheme_label;
  WaveVector k{};
  std::vector<RegionValue> regions;
  double total_computed = 0.0;
  double total_claimed = 0.0;   // sum of per-region claims
  double theorem_claim = 0.0;   // 12 C eps^2 | (1/2) eps^{mu_{n+1}} | region sum
  double big_c_used = 0.0;
  bool within_regions = false;  // every region computed <= claimed
  bool within_total = false;    // total computed <= theorem claim
  // T4 only: count of region-II members violating |alpha| >= |k|/2 (expected 0).
  long long t4_region2_violations = 0;
};

// Region-split scalar majorant sum_alpha w |u_alpha| |u_{k-alpha}| over the
// stored support, weight w = |alpha| except |k| on the far tail |alpha| >
// 2|k| where the sums are quoted with k (schemes T2/T1); T4 weighs every
// region with |alpha|. Region boundaries are closed exactly as quoted;
// overlapping boundary shells belong to the first-listed region. Throws
// std::domain_error when k violates the scheme's validity floor, naming the
// threshold.
SplitBreakdown split_majorant(const SpectralField& u, const WaveVector& k, SplitScheme scheme,
                              const SplitParams& params);

// Single-loop oracle: the same weighted sum without region classification.
// tail_weight_k selects the T2/T1 weight rule (|k| beyond |alpha| > 2|k|);
// T4 uses false.
double single_loop_majorant(const SpectralField& u, const WaveVector& k, bool tail_weight_k);

// CSV rows "k1,k2,k3,region,computed,claimed,margin" for a batch of targets.
void write_split_csv(const std::string& path, const std::vector<SplitBreakdown>& rows);

}  // namespace torus
