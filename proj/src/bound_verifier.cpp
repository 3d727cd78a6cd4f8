#include "torus/bound_verifier.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "torus/accum.hpp"

namespace torus {

long long mu_sequence(int n) {
  if (n < 0) throw std::invalid_argument("mu_sequence: n must be >= 0");
  if (n > 62) throw std::length_error("mu_sequence: n > 62 overflows");
  if (n == 0) return 1;
  long long mu = 2;  // mu_1
  for (int i = 1; i < n; ++i) mu = 2 * mu - 1;
  return mu;
}

double gamma_exponent(int n) {
  if (n < 0) throw std::invalid_argument("gamma_exponent: n must be >= 0");
  return std::ldexp(1.0, -n);
}

DecayWitness check_decay_hypothesis(const SpectralField& u, const DecayHypothesis& h) {
  DecayWitness w;
  for (const WaveVector& k : u.modes()) {
    if (static_cast<double>(k.norm2()) < h.k_min * h.k_min - kShellSnap) continue;
    const double val =
        std::pow(static_cast<double>(k.norm2()), 0.5 * h.alpha) * vec_abs(u.at(k));
    if (val > h.epsilon) {
      w.pass = false;
      w.k = k;
      w.excess = val - h.epsilon;
      return w;
    }
  }
  return w;
}

BootstrapSchedule build_schedule(double rho, double epsilon, double k_minus1, double big_d,
                                 int n_max) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0 / 3.0))
    throw std::domain_error("build_schedule: epsilon must lie in (0, 1/3)");
  if (!(rho > 0.0)) throw std::domain_error("build_schedule: rho must be > 0");
  if (!(k_minus1 > 0.0) || !(big_d > 0.0))
    throw std::invalid_argument("build_schedule: k_minus1 and D must be > 0");
  if (n_max < 0 || n_max > 60)
    throw std::invalid_argument("build_schedule: n_max must lie in [0, 60]");

  BootstrapSchedule s;
  s.rho = rho;
  s.epsilon = epsilon;
  s.k_minus1 = k_minus1;
  s.big_d = big_d;
  s.n_max = n_max;
  s.k0 = k_minus1 * big_d / epsilon * (1.0 + 1e-6);

  const double ln_inv_eps = std::log(1.0 / epsilon);
  const double ln_k0 = std::log(s.k0);
  const double ln_max = std::log(std::numeric_limits<double>::max());

  for (int n = 0; n <= n_max; ++n) {
    s.t.push_back(rho * (1.0 - std::ldexp(1.0, -n)));
    s.mu.push_back(mu_sequence(n));
    s.gamma.push_back(gamma_exponent(n));
    if (s.ladder_truncated_at < 0) {
      const double ln_kn = ln_k0 + std::ldexp(1.0, n) * ln_inv_eps;
      if (ln_kn > ln_max) {
        s.ladder_truncated_at = n;
      } else {
        s.k.push_back(std::exp(ln_kn));
      }
    }
    // exp(-rho |k|^2 / 2^{n+1}) < eps^{2^n} at |k| = k_minus1/eps^{2^n},
    // compared in logs so huge radii stay finite.
    const double ln_r = std::log(k_minus1) + std::ldexp(1.0, n) * ln_inv_eps;
    const double lhs_ln = std::log(rho) + 2.0 * ln_r - (n + 1) * std::log(2.0);
    const double rhs_ln = n * std::log(2.0) + std::log(ln_inv_eps);
    if (!(lhs_ln > rhs_ln) && s.exp_estimate_first_fail < 0) s.exp_estimate_first_fail = n;
  }
  return s;
}

DSequence d_sequence(int n_max, double l0, double c) {
  if (n_max < 0) throw std::invalid_argument("d_sequence: n_max must be >= 0");
  if (!(l0 > 0.0)) throw std::invalid_argument("d_sequence: L0 must be > 0");
  if (!(c >= 1.0)) throw std::invalid_argument("d_sequence: c must be >= 1");
  DSequence s;
  s.l0 = l0;
  s.c = c;
  s.q = 2.0 * c * std::sqrt(l0);
  s.divergent = s.q >= 1.0;
  const double gain = (4.0 + std::sqrt(2.0)) * l0;
  s.d_inf = s.divergent ? std::numeric_limits<double>::quiet_NaN() : gain / (1.0 - s.q);
  double d = 2.0 * l0;
  s.d.push_back(d);
  for (int n = 0; n < n_max; ++n) {
    d = s.q * d + gain;
    s.d.push_back(d);
  }
  return s;
}

double duhamel_envelope_k2(double a, double b, double k_norm2, double dt) {
  if (!(a >= 0.0) || !(b >= 0.0)) throw std::invalid_argument("duhamel_envelope: A, B >= 0");
  if (!(dt >= 0.0)) throw std::invalid_argument("duhamel_envelope: dt >= 0");
  if (!(k_norm2 > 0.0)) throw std::domain_error("duhamel_envelope: zero wave vector");
  const double x = k_norm2 * dt;
  return a * std::exp(-x) + (b / k_norm2) * (-std::expm1(-x));
}

double duhamel_envelope(double a, double b, const WaveVector& k, double dt) {
  return duhamel_envelope_k2(a, b, static_cast<double>(k.norm2()), dt);
}

double single_loop_majorant(const SpectralField& u, const WaveVector& k, bool tail_weight_k) {
  const long long k2 = k.norm2();
  const double k_norm = k.norm();
  NeumaierSum acc;
  for (const WaveVector& alpha : u.modes()) {
    const WaveVector beta = k - alpha;
    if (!u.occupied(beta)) continue;
    const double mags = vec_abs(u.at(alpha)) * vec_abs(u.at(beta));
    const bool far_tail = alpha.norm2() > 4 * k2;
    const double w = (tail_weight_k && far_tail) ? k_norm : alpha.norm();
    acc.add(w * mags);
  }
  return acc.value();
}

namespace {

SplitBreakdown finish(SplitBreakdown b, double theorem_claim, double big_c_used) {
  NeumaierSum total;
  NeumaierSum claims;
  bool within = true;
  for (const RegionValue& r : b.regions) {
    total.add(r.computed);
    claims.add(r.claimed);
    if (r.computed > r.claimed) within = false;
  }
  b.total_computed = total.value();
  b.total_claimed = claims.value();
  b.theorem_claim = theorem_claim;
  b.big_c_used = big_c_used;
  b.within_regions = within;
  b.within_total = b.total_computed <= theorem_claim;
  return b;
}

}  // namespace

SplitBreakdown split_majorant(const SpectralField& u, const WaveVector& k, SplitScheme scheme,
                              const SplitParams& params) {
  if (k.is_zero()) throw std::domain_error("split_majorant: zero target wave vector");
  const long long k2 = k.norm2();
  const double k2d = static_cast<double>(k2);
  const double k_norm = k.norm();

  SplitBreakdown b;
  b.scheme = scheme;
  b.k = k;

  if (scheme == SplitScheme::T2) {
    b.scheme_label = "T2";
    NeumaierSum r1, r2, r3;
    for (const WaveVector& alpha : u.modes()) {
      const WaveVector beta = k - alpha;
      if (!u.occupied(beta)) continue;
      const double mags = vec_abs(u.at(alpha)) * vec_abs(u.at(beta));
      if (alpha.norm2() > 4 * k2) {
        r3.add(k_norm * mags);
      } else if (4 * beta.norm2() <= k2) {
        r1.add(alpha.norm() * mags);
      } else {
        r2.add(alpha.norm() * mags);
      }
    }
    const double claim = 4.0 * params.big_c * params.epsilon * params.epsilon;
    b.regions = {{"I", r1.value(), claim}, {"II", r2.value(), claim}, {"III", r3.value(), claim}};
    return finish(std::move(b), 3.0 * claim, params.big_c);
  }

  if (scheme == SplitScheme::T1) {
    if (params.n < 1) throw std::invalid_argument("split_majorant: T1 needs rung n >= 1");
    if (k2d < params.k_n1 * params.k_n1)
      throw std::domain_error("split_majorant: T1 target |k| below validity threshold k_{n+1} = " +
                              std::to_string(params.k_n1));
    b.scheme_label = "T1(" + std::to_string(params.n) + ")";
    const double kn2 = params.k_n * params.k_n;
    NeumaierSum r1, r2, r3, r4, r5;
    for (const WaveVector& alpha : u.modes()) {
      const WaveVector beta = k - alpha;
      if (!u.occupied(beta)) continue;
      const double mags = vec_abs(u.at(alpha)) * vec_abs(u.at(beta));
      const long long a2 = alpha.norm2();
      const long long b2 = beta.norm2();
      if (a2 > 4 * k2) {
        r5.add(k_norm * mags);
      } else if (4 * b2 >= k2) {
        if (static_cast<double>(a2) <= kn2) {
          r1.add(alpha.norm() * mags);
        } else {
          r2.add(alpha.norm() * mags);
        }
      } else {
        if (static_cast<double>(b2) >= kn2) {
          r3.add(alpha.norm() * mags);
        } else {
          r4.add(alpha.norm() * mags);
        }
      }
    }
    const double unit = params.big_c * std::pow(params.epsilon, 2.0 * params.mu_n);
    b.regions = {{"I", r1.value(), 4.0 * unit},
                 {"II", r2.value(), 16.0 * unit},
                 {"III", r3.value(), 2.0 * unit},
                 {"IV", r4.value(), 3.0 * unit},
                 {"V", r5.value(), 2.0 * unit}};
    const double theorem = 0.5 * std::pow(params.epsilon, static_cast<double>(params.mu_n1));
    return finish(std::move(b), theorem, params.big_c);
  }

  // T4
  if (params.n < 0) throw std::invalid_argument("split_majorant: T4 needs n >= 0");
  const double validity = params.k0_threshold * std::ldexp(1.0, params.n + 1);
  if (k2d < validity * validity)
    throw std::domain_error("split_majorant: T4 target |k| below validity threshold K0 2^{n+1} = " +
                            std::to_string(validity));
  b.scheme_label = "T4(" + std::to_string(params.n) + ")";
  const double gamma_n = gamma_exponent(params.n);
  const double gamma_n1 = gamma_exponent(params.n + 1);
  const double thr2 = std::pow(k2d, 1.0 - gamma_n);  // (|k|^{1-gamma_n})^2
  NeumaierSum r1, r2, r3;
  long long violations = 0;
  for (const WaveVector& alpha : u.modes()) {
    const WaveVector beta = k - alpha;
    if (!u.occupied(beta)) continue;
    const double mags = vec_abs(u.at(alpha)) * vec_abs(u.at(beta));
    const long long a2 = alpha.norm2();
    const double b2 = static_cast<double>(beta.norm2());
    const double w = alpha.norm();
    if (a2 <= 4 * k2 && 4.0 * b2 >= thr2) {
      r1.add(w * mags);
    } else if (4.0 * b2 <= thr2) {
      r2.add(w * mags);
      if (4 * a2 < k2) ++violations;  // membership implies |alpha| >= |k|/2
    } else {
      r3.add(w * mags);
    }
  }
  const double sqrt_l0 = std::sqrt(params.l0);
  b.regions = {{"I", r1.value(), 4.0 * params.l0 * std::pow(k_norm, gamma_n1)},
               {"II", r2.value(), params.c * sqrt_l0 * params.d_n},
               {"III", r3.value(), std::sqrt(2.0) * params.l0}};
  b.t4_region2_violations = violations;
  double theorem = 0.0;
  for (const RegionValue& r : b.regions) theorem += r.claimed;
  return finish(std::move(b), theorem, 0.0);
}

void write_split_csv(const std::string& path, const std::vector<SplitBreakdown>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_split_csv: cannot open " + path);
  std::fprintf(f, "scheme,k1,k2,k3,region,computed,claimed,margin\n");
  for (const SplitBreakdown& b : rows) {
    for (const RegionValue& r : b.regions) {
      std::fprintf(f, "%s,%d,%d,%d,%s,%.17g,%.17g,%.17g\n", b.scheme_label.c_str(), b.k.k1,
                   b.k.k2, b.k.k3, r.name.c_str(), r.computed, r.claimed, r.claimed - r.computed);
    }
    std::fprintf(f, "%s,%d,%d,%d,total,%.17g,%.17g,%.17g\n", b.scheme_label.c_str(), b.k.k1,
                 b.k.k2, b.k.k3, b.total_computed, b.theorem_claim,
                 b.theorem_claim - b.total_computed);
  }
  std::fclose(f);
}

}  // namespace torus
