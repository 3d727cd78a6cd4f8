#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "torus/bound_verifier.hpp"
#include "torus/experiments.hpp"
#include "torus/field_io.hpp"
#include "torus/norms.hpp"
#include "torus/spectral_core.hpp"

using namespace torus;

namespace {

std::string scratch_dir(const char* name) {
  const std::string dir = std::string("/tmp/torus_exp_") + name;
  std::filesystem::create_directories(dir);
  return dir;
}

bool file_exists(const std::string& dir, const char* name) {
  return std::filesystem::exists(std::filesystem::path(dir) / name);
}

std::string write_text(const char* name, const std::string& body) {
  const std::string path = std::string("/tmp/torus_exp_") + name + ".cfg";
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("random field realizes the requested decay amplitude from below") {
  const double eps = 1e-3;
  const SpectralField u = random_divfree_field(7, eps, 2.0, 6.0, true);
  const double phi = phi_norm(u, 2.0);
  CHECK(phi == doctest::Approx(eps).epsilon(1e-14));
  CHECK(phi <= eps);  // the rescale must never overshoot the target amplitude
  const DecayWitness w = check_decay_hypothesis(u, DecayHypothesis{eps, 2.0, 0.0});
  CHECK(w.pass);
}

TEST_CASE("random field is divergence free and respects the real flag") {
  const SpectralField ur = random_divfree_field(11, 0.5, 2.0, 5.0, true);
  CHECK(ur.real_symmetric());
  CHECK(max_divergence(ur) <= 1e-12 * phi_norm(ur, 0.0));
  const SpectralField uc = random_divfree_field(11, 0.5, 2.0, 5.0, false);
  CHECK_FALSE(uc.real_symmetric());
  CHECK(max_divergence(uc) <= 1e-12 * phi_norm(uc, 0.0));
  // Complex-route field genuinely breaks conjugate symmetry somewhere.
  bool asymmetric = false;
  uc.for_each([&](const WaveVector& k, const Vec3c& v) {
    const Vec3c m = uc.at(WaveVector{-k.k1, -k.k2, -k.k3});
    for (int i = 0; i < 3; ++i)
      if (std::abs(v[i] - std::conj(m[i])) > 1e-12) asymmetric = true;
  });
  CHECK(asymmetric);
}

TEST_CASE("random field generation is deterministic in the seed") {
  const SpectralField a = random_divfree_field(42, 1e-2, 2.0, 4.0, true);
  const SpectralField b = random_divfree_field(42, 1e-2, 2.0, 4.0, true);
  const SpectralField c = random_divfree_field(43, 1e-2, 2.0, 4.0, true);
  bool identical = a.mode_count() == b.mode_count();
  double max_diff_c = 0.0;
  a.for_each([&](const WaveVector& k, const Vec3c& v) {
    const Vec3c vb = b.at(k);
    for (int i = 0; i < 3; ++i) {
      if (v[i] != vb[i]) identical = false;
      max_diff_c = std::max(max_diff_c, std::abs(v[i] - c.at(k)[i]));
    }
  });
  CHECK(identical);
  CHECK(max_diff_c > 0.0);
}

TEST_CASE("random field edge cases and argument validation") {
  const SpectralField z = random_divfree_field(1, 0.0, 2.0, 4.0, true);
  CHECK(phi_norm(z, 0.0) == 0.0);
  CHECK_THROWS_AS(random_divfree_field(1, -1.0, 2.0, 4.0, true), std::invalid_argument);
  CHECK_THROWS_AS(random_divfree_field(1, 1.0, -0.5, 4.0, true), std::invalid_argument);
}

TEST_CASE("deterministic profile hits epsilon over |k|^alpha exactly on every mode") {
  const double eps = 0.25;
  const double alpha = 2.0;
  const SpectralField u = decay_profile_field(4.0, eps, alpha);
  CHECK(u.real_symmetric());
  CHECK(max_divergence(u) <= 1e-13 * eps);
  long long n_checked = 0;
  u.for_each([&](const WaveVector& k, const Vec3c& v) {
    const double want = eps / std::pow(std::sqrt(static_cast<double>(k.norm2())), alpha);
    CHECK(vec_abs(v) == doctest::Approx(want).epsilon(1e-14));
    ++n_checked;
  });
  // Modes 0 < |k| <= 4 inside the integer box: 256 lattice points.
  CHECK(n_checked == 256);
}

TEST_CASE("piecewise hypothesis field realizes the three bands") {
  // Bands: |k| < 1.5 heavy, 1.5 <= |k| < 3.5 at epsilon, |k| >= 3.5 at eps^mu.
  const SpectralField u = t1_hypothesis_field(6.0, 0.1, 2, 1.5, 3.5, 2.0);
  CHECK(u.real_symmetric());
  CHECK(max_divergence(u) <= 1e-12);
  CHECK(vec_abs(u.at(WaveVector{1, 0, 0})) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(vec_abs(u.at(WaveVector{1, 1, 1})) == doctest::Approx(0.1 / 3.0).epsilon(1e-14));
  CHECK(vec_abs(u.at(WaveVector{2, 0, 0})) == doctest::Approx(0.1 / 4.0).epsilon(1e-14));
  CHECK(vec_abs(u.at(WaveVector{0, 0, 4})) == doctest::Approx(0.01 / 16.0).epsilon(1e-14));
  CHECK(vec_abs(u.at(WaveVector{0, 5, 0})) == doctest::Approx(0.01 / 25.0).epsilon(1e-14));
  CHECK_THROWS_AS(t1_hypothesis_field(6.0, 0.0, 2, 1.5, 3.5, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(t1_hypothesis_field(6.0, 0.1, 2, -1.0, 3.5, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(t1_hypothesis_field(6.0, 0.1, 2, 1.5, 3.5, 0.0), std::invalid_argument);
}

TEST_CASE("frequency threshold selection is minimal for its defining inequality") {
  const double l0 = 0.01;
  const double rho = 0.5;
  const int n_max = 3;
  const int k0 = choose_k0_threshold(l0, rho, n_max);
  CHECK(k0 == 3);
  // The returned value satisfies the inequality on every (n, l) pair and the
  // next smaller integer fails it somewhere.
  auto all_ok = [&](int cand) {
    for (int n = 1; n <= n_max; ++n)
      for (int l = n; l <= n_max; ++l) {
        const double r = static_cast<double>(cand) * std::ldexp(1.0, l);
        const double x = r * r;
        if (!(std::exp(-x * rho / std::ldexp(1.0, n)) < std::sqrt(l0) / x)) return false;
      }
    return true;
  };
  CHECK(all_ok(k0));
  CHECK_FALSE(all_ok(k0 - 1));
  // Longer waiting time can only relax the requirement.
  CHECK(choose_k0_threshold(l0, 2.0, n_max) <= k0);
  CHECK(choose_k0_threshold(l0, rho, 0) == 1);
  CHECK_THROWS_AS(choose_k0_threshold(0.0, rho, n_max), std::domain_error);
  CHECK_THROWS_AS(choose_k0_threshold(l0, 0.0, n_max), std::domain_error);
  CHECK_THROWS_AS(choose_k0_threshold(l0, rho, 41), std::invalid_argument);
}

TEST_CASE("config files parse with comments, blanks, and loose spacing") {
  const std::string path = write_text("parse_ok",
                                      "# experiment setup\n"
                                      "\n"
                                      "kind = bootstrap\n"
                                      "  epsilon=0.25   # inline comment\n"
                                      "seed = 9\n"
                                      "nonlinear = off\n");
  const auto kv = parse_config_file(path);
  CHECK(kv.size() == 4);
  CHECK(kv.at("kind") == "bootstrap");
  CHECK(kv.at("epsilon") == "0.25");
  CHECK(kv.at("seed") == "9");
  CHECK(kv.at("nonlinear") == "off");

  CHECK_THROWS_AS(parse_config_file("/tmp/torus_exp_no_such_file.cfg"), std::runtime_error);
  const std::string bad = write_text("parse_bad", "cutoff 8\n");
  CHECK_THROWS_AS(parse_config_file(bad), std::runtime_error);
  const std::string nokey = write_text("parse_nokey", "= 3\n");
  CHECK_THROWS_AS(parse_config_file(nokey), std::runtime_error);
}

TEST_CASE("config map application sets every field and rejects junk") {
  std::map<std::string, std::string> kv{
      {"kind", "h-half"},   {"seed", "17"},        {"alpha", "1.5"},
      {"epsilon", "0.02"},  {"cutoff", "7.5"},     {"real", "false"},
      {"rho", "0.25"},      {"n_max", "5"},        {"k_minus1", "0.125"},
      {"big_d", "3.0"},     {"l0", "0.04"},        {"c", "1.25"},
      {"dt", "0.002"},      {"t_end", "0.75"},     {"scheme", "rk4"},
      {"nonlinear", "no"},  {"record_every", "4"}, {"out_dir", "/tmp/torus_exp_cfg"}};
  const ExperimentConfig cfg = config_from_map(kv);
  CHECK(cfg.kind == "h-half");
  CHECK(cfg.seed == 17);
  CHECK(cfg.alpha == 1.5);
  CHECK(cfg.epsilon == 0.02);
  CHECK(cfg.cutoff == 7.5);
  CHECK_FALSE(cfg.real_data);
  CHECK(cfg.rho == 0.25);
  CHECK(cfg.n_max == 5);
  CHECK(cfg.k_minus1 == 0.125);
  CHECK(cfg.big_d == 3.0);
  CHECK(cfg.l0 == 0.04);
  CHECK(cfg.c == 1.25);
  CHECK(cfg.dt == 0.002);
  CHECK(cfg.t_end == 0.75);
  CHECK(cfg.scheme == Scheme::IntegratingFactorRK4);
  CHECK_FALSE(cfg.nonlinear_enabled);
  CHECK(cfg.record_every == 4);
  CHECK(cfg.out_dir == "/tmp/torus_exp_cfg");

  try {
    config_from_map({{"wavenumber", "8"}});
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("wavenumber") != std::string::npos);
  }
  try {
    config_from_map({{"epsilon", "tiny"}});
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("epsilon") != std::string::npos);
  }
  CHECK_THROWS_AS(config_from_map({{"kind", "parabolic"}}), std::runtime_error);
  CHECK_THROWS_AS(config_from_map({{"epsilon", "0.5x"}}), std::runtime_error);
  CHECK_THROWS_AS(config_from_map({{"real", "maybe"}}), std::runtime_error);
}

TEST_CASE("config json embedding round trips through the map parser") {
  ExperimentConfig cfg;
  cfg.kind = "bootstrap";
  cfg.seed = 23;
  cfg.epsilon = 0.125;
  cfg.scheme = Scheme::IntegratingFactorRK4;
  const nlohmann::json j = config_to_json(cfg);
  CHECK(j.at("kind") == "bootstrap");
  CHECK(j.at("seed") == 23);
  CHECK(j.at("epsilon") == 0.125);
  CHECK(j.at("scheme") == "if-rk4");
  std::map<std::string, std::string> kv;
  for (const auto& [key, val] : j.items()) {
    if (val.is_string())
      kv[key] = val.get<std::string>();
    else if (val.is_boolean())
      kv[key] = val.get<bool>() ? "true" : "false";
    else
      kv[key] = val.dump();
  }
  const ExperimentConfig back = config_from_map(kv);
  CHECK(back.kind == cfg.kind);
  CHECK(back.seed == cfg.seed);
  CHECK(back.epsilon == cfg.epsilon);
  CHECK(back.scheme == cfg.scheme);
  CHECK(back.cutoff == cfg.cutoff);
  CHECK(back.record_every == cfg.record_every);
}

TEST_CASE("constants study writes its table and reports the shell values") {
  ExperimentConfig cfg;
  cfg.kind = "constants";
  cfg.out_dir = scratch_dir("constants");
  const StudyResult res = run_constants(cfg);
  CHECK(res.pass);
  CHECK_FALSE(res.refused);
  CHECK(res.report.at("kind") == "constants");
  CHECK(res.report.at("unit_shell_p2").get<double>() == doctest::Approx(6.0));
  CHECK(res.report.at("unit_shell_p4").get<double>() == doctest::Approx(6.0));
  CHECK(res.report.at("constants").at("big_c").get<double>() > 0.0);
  CHECK(res.report.contains("config"));
  CHECK(file_exists(cfg.out_dir, "constants.csv"));
  CHECK(file_exists(cfg.out_dir, "report.json"));
  ExperimentConfig wrong = cfg;
  wrong.kind = "smallness";
  CHECK_THROWS_AS(run_constants(wrong), std::invalid_argument);
}

TEST_CASE("small-amplitude study passes on a short real run and writes its outputs") {
  ExperimentConfig cfg;
  cfg.kind = "smallness";
  cfg.seed = 2;
  cfg.epsilon = 1e-3;
  cfg.cutoff = 6.0;
  cfg.dt = 1e-3;
  cfg.t_end = 0.05;
  cfg.record_every = 5;
  cfg.out_dir = scratch_dir("smallness");
  const StudyResult res = run_smallness_experiment(cfg);
  CHECK(res.pass);
  CHECK(res.report.at("phi_within").get<bool>());
  CHECK(res.report.at("split_all_within").get<bool>());
  CHECK_FALSE(res.report.at("integration_failed").get<bool>());
  CHECK(res.report.at("real_data").get<bool>());
  CHECK(res.report.at("observed_max_phi2").get<double>() <= 1e-3 * (1.0 + 1e-6));
  CHECK(res.report.at("energy").at("inequality_satisfied").get<bool>());
  CHECK(file_exists(cfg.out_dir, "report.json"));
  CHECK(file_exists(cfg.out_dir, "trajectory.csv"));
  CHECK(file_exists(cfg.out_dir, "energy.csv"));
  CHECK(file_exists(cfg.out_dir, "smallness_split.csv"));
  CHECK(file_exists(cfg.out_dir, "initial_field.txt"));
  CHECK(file_exists(cfg.out_dir, "final_field.txt"));
  // Written initial field matches the seeded generator.
  const SpectralField disk = read_field(
      (std::filesystem::path(cfg.out_dir) / "initial_field.txt").string());
  const SpectralField gen =
      random_divfree_field(cfg.seed, cfg.epsilon, cfg.alpha, cfg.cutoff, cfg.real_data);
  CHECK(disk.mode_count() == gen.mode_count());
  double max_diff = 0.0;
  gen.for_each([&](const WaveVector& k, const Vec3c& v) {
    max_diff = std::max(max_diff, vec_abs(v - disk.at(k)));
  });
  CHECK(max_diff <= 1e-15);
  ExperimentConfig wrong = cfg;
  wrong.kind = "bootstrap";
  CHECK_THROWS_AS(run_smallness_experiment(wrong), std::invalid_argument);
}

TEST_CASE("small-amplitude study passes vacuously on zero data") {
  ExperimentConfig cfg;
  cfg.kind = "smallness";
  cfg.epsilon = 0.0;
  cfg.cutoff = 4.0;
  cfg.dt = 1e-3;
  cfg.t_end = 0.01;
  cfg.record_every = 2;
  cfg.out_dir = scratch_dir("smallness_zero");
  const StudyResult res = run_smallness_experiment(cfg);
  CHECK(res.pass);
  CHECK(res.report.at("observed_max_phi2").get<double>() == 0.0);
}

TEST_CASE("small-amplitude study with diffusion only keeps the profile norm falling") {
  ExperimentConfig cfg;
  cfg.kind = "smallness";
  cfg.seed = 5;
  cfg.epsilon = 1e-2;
  cfg.cutoff = 4.0;
  cfg.dt = 1e-3;
  cfg.t_end = 0.05;
  cfg.record_every = 5;
  cfg.nonlinear_enabled = false;
  cfg.out_dir = scratch_dir("smallness_heat");
  const StudyResult res = run_smallness_experiment(cfg);
  CHECK(res.pass);
  CHECK(res.report.at("observed_max_phi2").get<double>() <= 1e-2);
}

TEST_CASE("decay bootstrap study verifies the feasible rungs on a short run") {
  ExperimentConfig cfg;
  cfg.kind = "bootstrap";
  cfg.seed = 3;
  cfg.epsilon = 0.2;
  cfg.cutoff = 8.0;
  cfg.k_minus1 = 0.01;
  cfg.big_d = 2.0;
  cfg.rho = 0.5;
  cfg.t_end = 0.3;
  cfg.dt = 1e-3;
  cfg.n_max = 3;
  cfg.record_every = 10;
  cfg.out_dir = scratch_dir("bootstrap");
  const StudyResult res = run_bootstrap_study(cfg);
  CHECK(res.pass);
  CHECK(res.report.at("hypothesis_pass").get<bool>());
  CHECK(res.report.at("rungs_all_within").get<bool>());
  CHECK(res.report.at("envelopes_all_within").get<bool>());
  CHECK(res.report.at("exponent_ok").get<bool>());
  CHECK(res.report.at("tail225_contracting").get<bool>());
  CHECK(res.report.at("first_infeasible_n").get<int>() == 2);
  // Schedule: k0 = k_minus1 big_d / epsilon (1 + 1e-6), k1 = k0/eps^2.
  const auto& sch = res.report.at("schedule");
  CHECK(sch.at("k0").get<double>() == doctest::Approx(0.1 * (1.0 + 1e-6)).epsilon(1e-12));
  CHECK(sch.at("k").at(1).get<double>() ==
        doctest::Approx(0.1 * (1.0 + 1e-6) / 0.04).epsilon(1e-12));
  CHECK(file_exists(cfg.out_dir, "rungs.csv"));
  CHECK(file_exists(cfg.out_dir, "exponents.csv"));
  CHECK(file_exists(cfg.out_dir, "envelopes.csv"));
  CHECK(file_exists(cfg.out_dir, "report.json"));
  ExperimentConfig wrong = cfg;
  wrong.kind = "smallness";
  CHECK_THROWS_AS(run_bootstrap_study(wrong), std::invalid_argument);
}

TEST_CASE("half-derivative study passes with the extracted constant on a short run") {
  ExperimentConfig cfg;
  cfg.kind = "h-half";
  cfg.seed = 3;
  cfg.cutoff = 8.0;
  cfg.l0 = 0.01;
  cfg.rho = 0.5;
  cfg.t_end = 0.3;
  cfg.dt = 1e-3;
  cfg.n_max = 3;
  cfg.record_every = 10;
  cfg.out_dir = scratch_dir("hhalf");
  const StudyResult res = run_h_half_study(cfg);
  CHECK(res.pass);
  CHECK_FALSE(res.refused);
  CHECK_FALSE(res.report.at("vacuous_zero_field").get<bool>());
  CHECK(res.report.at("k0_threshold").get<int>() == 3);
  CHECK(res.report.at("q_observed").get<double>() < 1.0);
  CHECK(res.report.at("c_used").get<double>() > 0.0);
  CHECK_FALSE(res.report.at("d_sequence_divergent").get<bool>());
  CHECK(res.report.at("d_inf").get<double>() > 0.0);
  // The data is normalized so the running supremum of the squared
  // half-derivative norm matches the configured level.
  CHECK(res.report.at("l0_observed").get<double>() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(file_exists(cfg.out_dir, "ladder.csv"));
  CHECK(file_exists(cfg.out_dir, "report.json"));
  ExperimentConfig wrong = cfg;
  wrong.kind = "constants";
  CHECK_THROWS_AS(run_h_half_study(wrong), std::invalid_argument);
}

TEST_CASE("half-derivative study refuses the singular threshold") {
  ExperimentConfig cfg;
  cfg.kind = "h-half";
  cfg.l0 = 0.04;
  cfg.c = 2.5;  // 2 c sqrt(l0) = 1 exactly
  cfg.cutoff = 4.0;
  cfg.t_end = 0.01;
  cfg.dt = 1e-3;
  cfg.out_dir = scratch_dir("hhalf_refuse");
  const StudyResult res = run_h_half_study(cfg);
  CHECK(res.refused);
  CHECK_FALSE(res.pass);
  CHECK(res.report.at("refused").get<bool>());
  CHECK(res.report.at("refusal_reason").is_string());
  CHECK(file_exists(cfg.out_dir, "report.json"));
}

TEST_CASE("half-derivative study is vacuous when the cutoff holds no modes") {
  ExperimentConfig cfg;
  cfg.kind = "h-half";
  cfg.cutoff = 0.5;
  cfg.l0 = 0.01;
  cfg.t_end = 0.01;
  cfg.dt = 1e-3;
  cfg.record_every = 1;
  cfg.out_dir = scratch_dir("hhalf_vacuous");
  const StudyResult res = run_h_half_study(cfg);
  CHECK(res.pass);
  CHECK(res.report.at("vacuous_zero_field").get<bool>());
  CHECK(res.report.at("l0_observed").get<double>() == 0.0);
}

TEST_CASE("every study report embeds its configuration and constants table") {
  const char* keys[] = {"config", "constants", "kind", "pass"};
  ExperimentConfig cfg;
  cfg.kind = "constants";
  cfg.out_dir = scratch_dir("embed_constants");
  const nlohmann::json a = run_constants(cfg).report;
  cfg.kind = "smallness";
  cfg.cutoff = 3.0;
  cfg.t_end = 0.01;
  cfg.dt = 1e-3;
  cfg.record_every = 1;
  cfg.out_dir = scratch_dir("embed_smallness");
  const nlohmann::json b = run_smallness_experiment(cfg).report;
  for (const nlohmann::json* rep : {&a, &b})
    for (const char* key : keys) CHECK(rep->contains(key));
  CHECK(a.at("config").at("out_dir") != b.at("config").at("out_dir"));
}
