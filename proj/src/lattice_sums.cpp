#include "torus/lattice_sums.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "torus/accum.hpp"
#include "torus/norms.hpp"

namespace torus {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEnumerationBudget = 512.0;

struct ShellRange {
  long long lo2;  // smallest admissible |alpha|^2
  long long hi2;  // largest admissible |alpha|^2
  int box;        // component range [-box, box]
};

ShellRange shell_range(double r_min, double r_max) {
  ShellRange s;
  s.lo2 = static_cast<long long>(std::ceil(r_min * r_min - kShellSnap));
  if (s.lo2 < 1) s.lo2 = 1;
  s.hi2 = static_cast<long long>(std::floor(r_max * r_max + kShellSnap));
  s.box = static_cast<int>(std::floor(std::sqrt(static_cast<double>(s.hi2)) + kShellSnap));
  return s;
}

// One k1-slab of the lattice sum; the shared kernel both drivers call keeps
// the parallel and serial results bit-identical.
NeumaierSum slab_power_sum(double p, const ShellRange& s, int a1) {
  NeumaierSum acc;
  const long long a1sq = static_cast<long long>(a1) * a1;
  for (int a2 = -s.box; a2 <= s.box; ++a2) {
    const long long a12 = a1sq + static_cast<long long>(a2) * a2;
    if (a12 > s.hi2) continue;
    for (int a3 = -s.box; a3 <= s.box; ++a3) {
      const long long n2 = a12 + static_cast<long long>(a3) * a3;
      if (n2 < s.lo2 || n2 > s.hi2) continue;
      acc.add(std::pow(static_cast<double>(n2), -0.5 * p));
    }
  }
  return acc;
}

void check_power_sum_args(double p, double r_min, double r_max) {
  if (!(p > 0.0)) throw std::invalid_argument("power_sum: p must be > 0");
  if (!(r_min >= 1.0) || !(r_max >= r_min))
    throw std::invalid_argument("power_sum: need 1 <= r_min <= r_max");
  if (r_max > kEnumerationBudget)
    throw std::length_error("power_sum: r_max beyond enumeration budget 512");
}

}  // namespace

double power_sum(double p, double r_min, double r_max) {
  check_power_sum_args(p, r_min, r_max);
  const ShellRange s = shell_range(r_min, r_max);
  const int slabs = 2 * s.box + 1;
  std::vector<NeumaierSum> partial(static_cast<std::size_t>(slabs));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < slabs; ++i) {
    partial[static_cast<std::size_t>(i)] = slab_power_sum(p, s, i - s.box);
  }
  NeumaierSum total;
  for (const NeumaierSum& slab : partial) total.merge(slab);
  return total.value();
}

namespace reference {

double power_sum(double p, double r_min, double r_max) {
  check_power_sum_args(p, r_min, r_max);
  const ShellRange s = shell_range(r_min, r_max);
  const int slabs = 2 * s.box + 1;
  std::vector<NeumaierSum> partial(static_cast<std::size_t>(slabs));
  for (int i = 0; i < slabs; ++i) {
    partial[static_cast<std::size_t>(i)] = slab_power_sum(p, s, i - s.box);
  }
  NeumaierSum total;
  for (const NeumaierSum& slab : partial) total.merge(slab);
  return total.value();
}

}  // namespace reference

double power_sum_tail(double p, double k_min, double budget_radius) {
  if (!(p > 3.0)) throw std::domain_error("power_sum_tail: requires p > 3");
  if (!(k_min >= 1.0)) throw std::invalid_argument("power_sum_tail: k_min must be >= 1");
  if (!(budget_radius >= k_min))
    throw std::invalid_argument("power_sum_tail: budget below k_min");
  const double finite = power_sum(p, k_min, budget_radius);
  const double remainder =
      4.0 * kPi * std::pow(budget_radius, 3.0 - p) / (p - 3.0);
  return finite + remainder;
}

std::vector<ComparisonConstant> constant_sweep(double p, int r_max) {
  if (r_max < 2) throw std::invalid_argument("constant_sweep: r_max must be >= 2");
  std::vector<ComparisonConstant> rows;
  if (p == 2.0 || p == 1.0) {
    for (int r = 2; r <= r_max; ++r) {
      ComparisonConstant row;
      row.p = p;
      row.range_lo = 1.0;
      row.range_hi = static_cast<double>(r);
      row.lattice_sum = power_sum(p, 1.0, static_cast<double>(r));
      row.integral_value = (p == 2.0) ? 4.0 * kPi * (r - 1.0)
                                      : 2.0 * kPi * (static_cast<double>(r) * r - 1.0);
      row.ratio = row.lattice_sum / row.integral_value;
      rows.push_back(row);
    }
  } else if (p == 4.0) {
    for (int k = 2; k <= r_max; ++k) {
      ComparisonConstant row;
      row.p = p;
      row.range_lo = static_cast<double>(k);
      row.range_hi = std::numeric_limits<double>::infinity();
      row.lattice_sum = power_sum_tail(4.0, static_cast<double>(k));
      row.integral_value = 4.0 * kPi / k;
      row.ratio = row.lattice_sum / row.integral_value;
      rows.push_back(row);
    }
  } else {
    throw std::domain_error("constant_sweep: p must be one of {1, 2, 4}");
  }
  return rows;
}

ComparisonConstant comparison_constant(double p, int r_max) {
  const std::vector<ComparisonConstant> rows = constant_sweep(p, r_max);
  ComparisonConstant best = rows.front();
  for (const ComparisonConstant& row : rows)
    if (row.ratio > best.ratio) best = row;
  return best;
}

ConstantsTable compute_constants(int r_max, int tail_k_max, double tail_budget) {
  if (r_max < 2 || tail_k_max < 2)
    throw std::invalid_argument("compute_constants: sweeps need r_max, tail_k_max >= 2");
  ConstantsTable t;
  t.r_max = r_max;
  t.tail_k_max = tail_k_max;
  t.tail_budget = tail_budget;

  t.annulus_p2 = comparison_constant(2.0, r_max);
  t.annulus_p1 = comparison_constant(1.0, r_max);
  t.ratio_p2_max = t.annulus_p2.ratio;
  t.ratio_p1_max = t.annulus_p1.ratio;

  ComparisonConstant best_tail;
  double annulus_c = 0.0;
  for (int r = 2; r <= r_max; ++r) {
    const double s = power_sum(2.0, 1.0, static_cast<double>(r));
    annulus_c = std::max(annulus_c, s / r);
  }
  double tail_c = 0.0;
  for (int k = 2; k <= tail_k_max; ++k) {
    ComparisonConstant row;
    row.p = 4.0;
    row.range_lo = static_cast<double>(k);
    row.range_hi = std::numeric_limits<double>::infinity();
    row.lattice_sum = power_sum_tail(4.0, static_cast<double>(k), tail_budget);
    row.integral_value = 4.0 * kPi / k;
    row.ratio = row.lattice_sum / row.integral_value;
    if (row.ratio > best_tail.ratio) best_tail = row;
    tail_c = std::max(tail_c, k * row.lattice_sum);
  }
  t.tail_p4 = best_tail;
  t.ratio_p4_max = best_tail.ratio;

  t.annulus_c = annulus_c;
  t.tail_c = tail_c;
  t.big_c = std::max(annulus_c, tail_c);
  t.lemma_c = std::sqrt(2.0 * kPi * t.ratio_p1_max);
  return t;
}

void write_constants_csv(const std::string& path, const ConstantsTable& table) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_constants_csv: cannot open " + path);
  std::fprintf(f, "p,range_lo,range_hi,lattice_sum,integral,ratio\n");
  auto emit_rows = [&](double p) {
    for (const ComparisonConstant& row : constant_sweep(p, p == 4.0 ? table.tail_k_max
                                                                    : table.r_max)) {
      std::fprintf(f, "%g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.p, row.range_lo, row.range_hi,
                   row.lattice_sum, row.integral_value, row.ratio);
    }
  };
  emit_rows(2.0);
  emit_rows(4.0);
  emit_rows(1.0);
  std::fprintf(f, "# unit shell r=1..1: p=2 sum=%.17g p=4 sum=%.17g (integral 0, excluded from ratio sweeps)\n",
               power_sum(2.0, 1.0, 1.0), power_sum(4.0, 1.0, 1.0));
  std::fprintf(f, "# annulus_c=%.17g tail_c=%.17g big_c=%.17g lemma_c=%.17g\n", table.annulus_c,
               table.tail_c, table.big_c, table.lemma_c);
  std::fclose(f);
}

CoeffSumCheck coeff_sum_bound_check(const SpectralField& u, double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("coeff_sum_bound_check: r must be >= 1");
  NeumaierSum lhs;
  const double r2 = r * r + kShellSnap;
  u.for_each([&](const WaveVector& k, const Vec3c& v) {
    if (static_cast<double>(k.norm2()) <= r2) lhs.add(vec_abs(v));
  });
  CoeffSumCheck out;
  out.lhs = lhs.value();
  const double h_half = sobolev_norm(u, 0.5);
  out.rhs = h_half * r;
  out.c_required = (out.rhs == 0.0) ? 0.0 : out.lhs / out.rhs;
  return out;
}

}  // namespace torus
