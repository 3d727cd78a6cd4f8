#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "torus/experiments.hpp"
#include "torus/lattice_sums.hpp"

using namespace torus;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("power_sum shell-by-shell hand values") {
  CHECK(power_sum(2.0, 1.0, 1.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(power_sum(4.0, 1.0, 1.0) == doctest::Approx(6.0).epsilon(1e-15));
  // 6 unit vectors plus the 12 points with |alpha|^2 = 2.
  CHECK(power_sum(2.0, 1.0, 1.5) == doctest::Approx(12.0).epsilon(1e-14));
  // Shells 1, 2, 3, 4: 6 + 12/2 + 8/3 + 6/4 = 97/6.
  CHECK(power_sum(2.0, 1.0, 2.0) == doctest::Approx(97.0 / 6.0).epsilon(1e-14));
  // Same shells at p = 4: 6 + 12/4 + 8/9 + 6/16 = 739/72.
  CHECK(power_sum(4.0, 1.0, 2.0) == doctest::Approx(739.0 / 72.0).epsilon(1e-14));
}

TEST_CASE("power_sum is additive over disjoint annuli") {
  // First shell above radius 2 is |alpha|^2 = 5.
  const double left = power_sum(2.0, 1.0, 2.0);
  const double right = power_sum(2.0, std::sqrt(5.0), 4.0);
  CHECK(left + right == doctest::Approx(power_sum(2.0, 1.0, 4.0)).epsilon(1e-13));
}

TEST_CASE("power_sum input validation") {
  CHECK_THROWS_AS(power_sum(2.0, 0.5, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(power_sum(2.0, 3.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(power_sum(2.0, 1.0, 600.0), std::length_error);
}

TEST_CASE("parallel and serial power_sum agree bit for bit") {
  for (double p : {1.0, 2.0, 4.0}) {
    for (double r : {1.0, 2.5, 8.0, 16.0}) {
      CHECK(power_sum(p, 1.0, r) == reference::power_sum(p, 1.0, r));
    }
  }
}

TEST_CASE("tail sum is stable under the budget radius") {
  const double t64 = power_sum_tail(4.0, 2.0, 64.0);
  const double t128 = power_sum_tail(4.0, 2.0, 128.0);
  CHECK(std::abs(t64 - t128) <= 1e-4 * t64);
  // Enumerated part plus analytic remainder, by definition.
  CHECK(t64 == doctest::Approx(power_sum(4.0, 2.0, 64.0) + 4.0 * kPi / 64.0).epsilon(1e-13));
}

TEST_CASE("K times the quartic tail stays uniformly bounded") {
  for (double k : {2.0, 4.0, 8.0, 16.0}) {
    const double prod = k * power_sum_tail(4.0, k);
    CHECK(prod >= 12.0);
    CHECK(prod <= 13.5);
  }
}

TEST_CASE("comparison constants against closed-form integrals") {
  const ComparisonConstant p2 = comparison_constant(2.0, 8);
  CHECK(p2.ratio == doctest::Approx(97.0 / (24.0 * kPi)).epsilon(1e-13));
  CHECK(p2.range_hi == 2.0);  // the sweep maximum sits at the first annulus

  const ComparisonConstant p1 = comparison_constant(1.0, 8);
  const double p1_lattice = 6.0 + 12.0 / std::sqrt(2.0) + 8.0 / std::sqrt(3.0) + 3.0;
  CHECK(p1.ratio == doctest::Approx(p1_lattice / (6.0 * kPi)).epsilon(1e-13));
  CHECK(p1.range_hi == 2.0);

  const ComparisonConstant p4 = comparison_constant(4.0, 16);
  CHECK(p4.range_lo == 3.0);
  CHECK(p4.ratio ==
        doctest::Approx(power_sum_tail(4.0, 3.0) / (4.0 * kPi / 3.0)).epsilon(1e-13));

  CHECK_THROWS_AS(comparison_constant(3.0, 8), std::domain_error);
  CHECK_THROWS_AS(constant_sweep(2.0, 1), std::invalid_argument);
}

TEST_CASE("constants table matches an independent sweep") {
  const ConstantsTable t = compute_constants();

  double annulus_c = 0.0;
  for (int r = 2; r <= t.r_max; ++r)
    annulus_c = std::max(annulus_c, power_sum(2.0, 1.0, static_cast<double>(r)) / r);
  CHECK(t.annulus_c == doctest::Approx(annulus_c).epsilon(1e-13));

  double tail_c = 0.0;
  for (int k = 2; k <= t.tail_k_max; ++k)
    tail_c = std::max(tail_c, k * power_sum_tail(4.0, static_cast<double>(k), t.tail_budget));
  CHECK(t.tail_c == doctest::Approx(tail_c).epsilon(1e-13));

  CHECK(t.big_c == std::max(t.annulus_c, t.tail_c));
  CHECK(t.lemma_c == doctest::Approx(std::sqrt(2.0 * kPi * t.ratio_p1_max)).epsilon(1e-13));

  // Frozen values cited throughout the reports; a change here is a real change
  // in every downstream bound.
  CHECK(t.annulus_c == doctest::Approx(12.426526697905111).epsilon(1e-12));
  CHECK(t.tail_c == doctest::Approx(13.362754608292084).epsilon(1e-12));
  CHECK(t.lemma_c == doctest::Approx(2.7144111410368903).epsilon(1e-12));
  CHECK(t.ratio_p2_max == doctest::Approx(1.2865024566594874).epsilon(1e-12));
}

TEST_CASE("coeff_sum_bound_check hand cases") {
  SpectralField u(1.0);
  u.set({1, 0, 0}, Vec3c{Complex(0.0, 0.0), Complex(0.7, 0.0), Complex(0.0, 0.0)});
  const CoeffSumCheck one = coeff_sum_bound_check(u, 1.0);
  CHECK(one.lhs == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(one.rhs == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(one.c_required == doctest::Approx(1.0).epsilon(1e-14));

  const CoeffSumCheck zero = coeff_sum_bound_check(SpectralField(2.0), 2.0);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);
  CHECK(zero.c_required == 0.0);
}

TEST_CASE("coefficient-sum bound holds with the extracted constant") {
  const ConstantsTable t = compute_constants();
  const SpectralField profile = decay_profile_field(8.0, 1.0, 2.0);
  CHECK(coeff_sum_bound_check(profile, 8.0).c_required <= t.lemma_c);

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SpectralField u = random_divfree_field(seed, 1.0, 2.0, 8.0, seed % 2 == 0);
    for (double r : {1.0, 2.0, 4.0, 8.0}) {
      CHECK(coeff_sum_bound_check(u, r).c_required <= t.lemma_c);
    }
  }
}

TEST_CASE("constants csv carries the sweep rows and the unit-shell note") {
  const ConstantsTable t = compute_constants(8, 8, 64.0);
  const std::string path = "/tmp/torus_constants_test.csv";
  write_constants_csv(path, t);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("p,range_lo,range_hi,lattice_sum,integral,ratio") != std::string::npos);
  CHECK(text.find("# unit shell r=1..1: p=2 sum=6") != std::string::npos);
  CHECK(text.find("# annulus_c=") != std::string::npos);
  CHECK(text.find("lemma_c=") != std::string::npos);
  // Every data row's ratio is positive and finite.
  std::ifstream again(path);
  std::string line;
  std::getline(again, line);  // header
  while (std::getline(again, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto last_comma = line.rfind(',');
    const double ratio = std::stod(line.substr(last_comma + 1));
    CHECK(ratio > 0.0);
    CHECK(std::isfinite(ratio));
  }
  std::remove(path.c_str());
}
