#include "torus/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "torus/field_io.hpp"
#include "torus/norms.hpp"
#include "torus/spectral_core.hpp"

namespace torus {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::runtime_error("expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& v) {
  std::size_t pos = 0;
  double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::runtime_error("trailing characters in number '" + v + "'");
  return x;
}

long long parse_int(const std::string& v) {
  std::size_t pos = 0;
  long long x = std::stoll(v, &pos);
  if (pos != v.size()) throw std::runtime_error("trailing characters in integer '" + v + "'");
  return x;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty() && dir != ".") std::filesystem::create_directories(dir);
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

// Divergence-free unit profile direction for mode k: the coordinate axis
// least aligned with k, Leray-projected and normalized. Never degenerate
// because the smallest |k_i| satisfies k_i^2 <= |k|^2 / 3.
Vec3c profile_direction(const WaveVector& k) {
  const long long a1 = std::llabs(k.k1), a2 = std::llabs(k.k2), a3 = std::llabs(k.k3);
  int axis = 0;
  long long best = a1;
  if (a2 < best) {
    axis = 1;
    best = a2;
  }
  if (a3 < best) axis = 2;
  const double kk[3] = {static_cast<double>(k.k1), static_cast<double>(k.k2),
                        static_cast<double>(k.k3)};
  const double nn = static_cast<double>(k.norm2());
  double v[3];
  for (int i = 0; i < 3; ++i) v[i] = (i == axis ? 1.0 : 0.0) - kk[i] * kk[axis] / nn;
  const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return Vec3c{Complex(v[0] / len, 0.0), Complex(v[1] / len, 0.0), Complex(v[2] / len, 0.0)};
}

// Least-squares slope of log|u_k| against log|k| over stored modes with
// |k| >= k_min and |u_k| > 0, reported as a positive decay exponent. NaN when
// fewer than two usable modes (or no spread in |k|).
double fitted_decay_exponent(const SpectralField& u, double k_min) {
  const double lo2 = k_min * k_min - kShellSnap;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long long n = 0;
  u.for_each([&](const WaveVector& k, const Vec3c& v) {
    const double nn = static_cast<double>(k.norm2());
    if (nn < lo2) return;
    const double a = vec_abs(v);
    if (!(a > 0.0)) return;
    const double x = 0.5 * std::log(nn);
    const double y = std::log(a);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  });
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return -(n * sxy - sx * sy) / den;
}

// Max of |k|^p |u_k| over stored |k| >= k_min together with the witness mode.
std::pair<double, WaveVector> tail_weighted_max(const SpectralField& u, double p,
                                                double k_min) {
  const double lo2 = k_min * k_min - kShellSnap;
  double best = 0.0;
  WaveVector arg{};
  bool found = false;
  u.for_each([&](const WaveVector& k, const Vec3c& v) {
    const double nn = static_cast<double>(k.norm2());
    if (nn < lo2) return;
    const double val = std::pow(nn, 0.5 * p) * vec_abs(v);
    if (!found || val > best) {
      best = val;
      arg = k;
      found = true;
    }
  });
  return {found ? best : 0.0, arg};
}

GalerkinConfig galerkin_from(const ExperimentConfig& cfg) {
  GalerkinConfig gc;
  gc.cutoff = cfg.cutoff;
  gc.dt = cfg.dt;
  gc.t_end = cfg.t_end;
  gc.nonlinear_enabled = cfg.nonlinear_enabled;
  gc.scheme = cfg.scheme;
  gc.record_every = cfg.record_every;
  gc.tail_k_min = cfg.cutoff / 2.0;
  gc.tail_k0 = cfg.cutoff / 2.0;
  return gc;
}

nlohmann::json energy_json(const EnergyReport& er) {
  return nlohmann::json{{"max_identity_residual", er.max_identity_residual},
                        {"quad_tolerance", er.quad_tolerance},
                        {"inequality_satisfied", er.inequality_satisfied}};
}

double finite_or(double x, double fallback) { return std::isfinite(x) ? x : fallback; }

nlohmann::json comparison_json(const ComparisonConstant& r) {
  nlohmann::json j;
  j["p"] = r.p;
  j["range_lo"] = r.range_lo;
  if (std::isfinite(r.range_hi))
    j["range_hi"] = r.range_hi;
  else
    j["range_hi"] = "inf";
  j["lattice_sum"] = r.lattice_sum;
  j["integral_value"] = r.integral_value;
  j["ratio"] = r.ratio;
  return j;
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = val;
  }
  return kv;
}

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv,
                                 ExperimentConfig base) {
  for (const auto& [key, val] : kv) {
    try {
      if (key == "kind") {
        if (val != "smallness" && val != "bootstrap" && val != "h-half" && val != "constants")
          throw std::runtime_error("unknown kind '" + val + "'");
        base.kind = val;
      } else if (key == "seed") {
        base.seed = static_cast<std::uint64_t>(parse_int(val));
      } else if (key == "alpha") {
        base.alpha = parse_double(val);
      } else if (key == "epsilon") {
        base.epsilon = parse_double(val);
      } else if (key == "cutoff") {
        base.cutoff = parse_double(val);
      } else if (key == "real") {
        base.real_data = parse_bool(val);
      } else if (key == "rho") {
        base.rho = parse_double(val);
      } else if (key == "n_max") {
        base.n_max = static_cast<int>(parse_int(val));
      } else if (key == "k_minus1") {
        base.k_minus1 = parse_double(val);
      } else if (key == "big_d") {
        base.big_d = parse_double(val);
      } else if (key == "l0") {
        base.l0 = parse_double(val);
      } else if (key == "c") {
        base.c = parse_double(val);
      } else if (key == "dt") {
        base.dt = parse_double(val);
      } else if (key == "t_end") {
        base.t_end = parse_double(val);
      } else if (key == "scheme") {
        base.scheme = scheme_from_string(val);
      } else if (key == "nonlinear") {
        base.nonlinear_enabled = parse_bool(val);
      } else if (key == "record_every") {
        base.record_every = static_cast<int>(parse_int(val));
      } else if (key == "out_dir") {
        base.out_dir = val;
      } else {
        throw std::runtime_error("unknown config key");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("config key '" + key + "': " + e.what());
    }
  }
  return base;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["kind"] = cfg.kind;
  j["seed"] = cfg.seed;
  j["alpha"] = cfg.alpha;
  j["epsilon"] = cfg.epsilon;
  j["cutoff"] = cfg.cutoff;
  j["real"] = cfg.real_data;
  j["rho"] = cfg.rho;
  j["n_max"] = cfg.n_max;
  j["k_minus1"] = cfg.k_minus1;
  j["big_d"] = cfg.big_d;
  j["l0"] = cfg.l0;
  j["c"] = cfg.c;
  j["dt"] = cfg.dt;
  j["t_end"] = cfg.t_end;
  j["scheme"] = scheme_name(cfg.scheme);
  j["nonlinear"] = cfg.nonlinear_enabled;
  j["record_every"] = cfg.record_every;
  j["out_dir"] = cfg.out_dir;
  return j;
}

SpectralField random_divfree_field(std::uint64_t seed, double epsilon, double alpha,
                                   double cutoff, bool real) {
  if (!(epsilon >= 0.0))
    throw std::invalid_argument("random_divfree_field: epsilon must be >= 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("random_divfree_field: alpha must be >= 0");
  SpectralField u(cutoff, false);
  std::mt19937_64 gen(seed);
  auto u01 = [&gen]() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  auto disk = [&]() {
    double x, y;
    do {
      x = 2.0 * u01() - 1.0;
      y = 2.0 * u01() - 1.0;
    } while (x * x + y * y > 1.0);
    return Complex(x, y);
  };
  const int b = u.box_radius();
  const double r2max = cutoff * cutoff + kShellSnap;
  for (int k1 = -b; k1 <= b; ++k1)
    for (int k2 = -b; k2 <= b; ++k2)
      for (int k3 = -b; k3 <= b; ++k3) {
        const WaveVector k{k1, k2, k3};
        if (k.is_zero()) continue;
        const double nn = static_cast<double>(k.norm2());
        if (nn > r2max) continue;
        Vec3c xi{disk(), disk(), disk()};
        const double mag = epsilon / std::pow(std::sqrt(nn), alpha);
        u.set(k, leray_project(k, mag * xi));
      }
  if (real) u = symmetrize_real(u);
  // Scale so sup |k|^alpha |u_k| lands at epsilon from below: the tiny shave
  // keeps the rescaled maximum under epsilon despite per-mode roundoff, so the
  // field satisfies an exact decay-hypothesis check at amplitude epsilon.
  const double shave = 1.0 - 8.0 * std::numeric_limits<double>::epsilon();
  const double phi = phi_norm(u, alpha);
  if (phi > 0.0) u = scale_field(u, epsilon / phi * shave);
  return u;
}

SpectralField decay_profile_field(double cutoff, double epsilon, double alpha) {
  SpectralField u(cutoff, false);
  const int b = u.box_radius();
  const double r2max = cutoff * cutoff + kShellSnap;
  for (int k1 = -b; k1 <= b; ++k1)
    for (int k2 = -b; k2 <= b; ++k2)
      for (int k3 = -b; k3 <= b; ++k3) {
        const WaveVector k{k1, k2, k3};
        if (k.is_zero()) continue;
        const double nn = static_cast<double>(k.norm2());
        if (nn > r2max) continue;
        const double mag = epsilon / std::pow(std::sqrt(nn), alpha);
        u.set(k, mag * profile_direction(k));
      }
  u.set_real_symmetric(true);
  return u;
}

SpectralField t1_hypothesis_field(double cutoff, double epsilon, long long mu_n,
                                  double k_minus1, double k_n, double big_d) {
  if (!(epsilon > 0.0) || !(k_minus1 > 0.0) || !(k_n > 0.0) || !(big_d > 0.0))
    throw std::invalid_argument("t1_hypothesis_field: parameters must be positive");
  SpectralField u(cutoff, false);
  const int b = u.box_radius();
  const double r2max = cutoff * cutoff + kShellSnap;
  const double band0 = k_minus1 * k_minus1 - kShellSnap;  // below: amplitude D
  const double band1 = k_n * k_n - kShellSnap;            // below: amplitude eps
  const double eps_mu = std::pow(epsilon, static_cast<double>(mu_n));
  for (int k1 = -b; k1 <= b; ++k1)
    for (int k2 = -b; k2 <= b; ++k2)
      for (int k3 = -b; k3 <= b; ++k3) {
        const WaveVector k{k1, k2, k3};
        if (k.is_zero()) continue;
        const double nn = static_cast<double>(k.norm2());
        if (nn > r2max) continue;
        double amp = eps_mu;
        if (nn < band0)
          amp = big_d;
        else if (nn < band1)
          amp = epsilon;
        u.set(k, (amp / nn) * profile_direction(k));
      }
  u.set_real_symmetric(true);
  return u;
}

int choose_k0_threshold(double l0, double rho, int n_max) {
  if (!(l0 > 0.0) || !(rho > 0.0))
    throw std::domain_error("choose_k0_threshold: needs l0 > 0 and rho > 0");
  if (n_max < 0 || n_max > 40)
    throw std::invalid_argument("choose_k0_threshold: n_max outside [0, 40]");
  const double half_log_l0 = 0.5 * std::log(l0);
  for (int k0 = 1; k0 <= (1 << 20); ++k0) {
    bool ok = true;
    for (int n = 1; n <= n_max && ok; ++n) {
      for (int l = n; l <= n_max; ++l) {
        const double r = static_cast<double>(k0) * std::ldexp(1.0, l);
        const double x = r * r;
        const double exp_arg = -x * rho / std::ldexp(1.0, n);
        if (!(exp_arg < half_log_l0 - std::log(x))) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return k0;
  }
  throw std::runtime_error("choose_k0_threshold: no threshold within search budget");
}

nlohmann::json constants_to_json(const ConstantsTable& t) {
  nlohmann::json j;
  j["annulus_p2"] = comparison_json(t.annulus_p2);
  j["tail_p4"] = comparison_json(t.tail_p4);
  j["annulus_p1"] = comparison_json(t.annulus_p1);
  j["ratio_p2_max"] = t.ratio_p2_max;
  j["ratio_p4_max"] = t.ratio_p4_max;
  j["ratio_p1_max"] = t.ratio_p1_max;
  j["annulus_c"] = t.annulus_c;
  j["tail_c"] = t.tail_c;
  j["big_c"] = t.big_c;
  j["lemma_c"] = t.lemma_c;
  j["r_max"] = t.r_max;
  j["tail_k_max"] = t.tail_k_max;
  j["tail_budget"] = t.tail_budget;
  return j;
}

StudyResult run_constants(const ExperimentConfig& cfg) {
  if (cfg.kind != "constants")
    throw std::invalid_argument("run_constants: config kind must be 'constants'");
  ensure_dir(cfg.out_dir);
  const ConstantsTable table = compute_constants();
  write_constants_csv(join_path(cfg.out_dir, "constants.csv"), table);

  const double checks[] = {table.ratio_p2_max, table.ratio_p4_max, table.ratio_p1_max,
                           table.annulus_c,    table.tail_c,       table.big_c,
                           table.lemma_c};
  bool pass = true;
  for (double v : checks)
    if (!(std::isfinite(v) && v > 0.0)) pass = false;

  nlohmann::json rep;
  rep["kind"] = cfg.kind;
  rep["config"] = config_to_json(cfg);
  rep["constants"] = constants_to_json(table);
  rep["unit_shell_p2"] = power_sum(2.0, 1.0, 1.0);
  rep["unit_shell_p4"] = power_sum(4.0, 1.0, 1.0);
  rep["pass"] = pass;
  write_json(join_path(cfg.out_dir, "report.json"), rep);

  StudyResult out;
  out.pass = pass;
  out.report = std::move(rep);
  return out;
}

StudyResult run_smallness_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind != "smallness")
    throw std::invalid_argument("run_smallness_experiment: config kind must be 'smallness'");
  ensure_dir(cfg.out_dir);
  const ConstantsTable table = compute_constants();
  const SpectralField psi =
      random_divfree_field(cfg.seed, cfg.epsilon, cfg.alpha, cfg.cutoff, cfg.real_data);
  write_field(join_path(cfg.out_dir, "initial_field.txt"), psi);

  GalerkinConfig gc = galerkin_from(cfg);

  struct SplitRow {
    double time = 0.0;
    WaveVector k{};
    double total = 0.0;
    double claim = 0.0;
    bool within = true;
    double tail225 = 0.0;
  };
  std::vector<SplitRow> split_rows;
  SplitParams sp;
  sp.epsilon = cfg.epsilon;
  sp.big_c = table.big_c;
  const double empty_claim = 12.0 * table.big_c * cfg.epsilon * cfg.epsilon;
  auto observer = [&](double t, const SpectralField& u) {
    SplitRow row;
    row.time = t;
    row.tail225 = tail_phi_sup(u, 2.25, cfg.cutoff / 2.0);
    const WaveVector kx = phi_norm_argmax(u, 2.0);
    if (kx.is_zero()) {
      row.claim = empty_claim;
      row.within = true;
    } else {
      const SplitBreakdown b = split_majorant(u, kx, SplitScheme::T2, sp);
      row.k = kx;
      row.total = b.total_computed;
      row.claim = b.theorem_claim;
      row.within = b.within_total;
    }
    split_rows.push_back(row);
  };

  const TrajectoryRecord tr = simulate(psi, gc, observer);
  write_norm_csv(join_path(cfg.out_dir, "trajectory.csv"), tr.norms);
  write_energy_csv(join_path(cfg.out_dir, "energy.csv"), tr.energy);
  write_field(join_path(cfg.out_dir, "final_field.txt"), tr.final_field);

  {
    const std::string path = join_path(cfg.out_dir, "smallness_split.csv");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(f, "time,k1,k2,k3,total_computed,theorem_claim,within,tail225\n");
    for (const SplitRow& r : split_rows)
      std::fprintf(f, "%.17g,%d,%d,%d,%.17g,%.17g,%d,%.17g\n", r.time, r.k.k1, r.k.k2, r.k.k3,
                   r.total, r.claim, r.within ? 1 : 0, r.tail225);
    std::fclose(f);
  }

  double max_phi = 0.0;
  for (const NormReport& n : tr.norms) max_phi = std::max(max_phi, n.phi2);
  const bool phi_within = max_phi <= cfg.epsilon * (1.0 + 1e-6);
  bool split_ok = true;
  for (const SplitRow& r : split_rows)
    if (!r.within) split_ok = false;
  const EnergyReport er = energy_report(tr);
  const bool pass = phi_within && split_ok && er.inequality_satisfied && !tr.failed;

  nlohmann::json rep;
  rep["kind"] = cfg.kind;
  rep["config"] = config_to_json(cfg);
  rep["constants"] = constants_to_json(table);
  rep["epsilon"] = cfg.epsilon;
  rep["observed_max_phi2"] = max_phi;
  rep["phi_within"] = phi_within;
  rep["split_all_within"] = split_ok;
  rep["energy"] = energy_json(er);
  rep["integration_failed"] = tr.failed;
  rep["fail_step"] = tr.fail_step;
  rep["cfl_warning"] = tr.cfl_warning;
  rep["real_data"] = tr.real_data;
  rep["pass"] = pass;
  write_json(join_path(cfg.out_dir, "report.json"), rep);

  StudyResult out;
  out.pass = pass;
  out.report = std::move(rep);
  return out;
}

StudyResult run_bootstrap_study(const ExperimentConfig& cfg) {
  if (cfg.kind != "bootstrap")
    throw std::invalid_argument("run_bootstrap_study: config kind must be 'bootstrap'");
  ensure_dir(cfg.out_dir);
  const ConstantsTable table = compute_constants();
  const BootstrapSchedule sch =
      build_schedule(cfg.rho, cfg.epsilon, cfg.k_minus1, cfg.big_d, cfg.n_max);

  const SpectralField psi =
      random_divfree_field(cfg.seed, cfg.epsilon, 2.0, cfg.cutoff, cfg.real_data);
  write_field(join_path(cfg.out_dir, "initial_field.txt"), psi);
  const DecayWitness hyp = check_decay_hypothesis(psi, DecayHypothesis{cfg.epsilon, 2.0, 0.0});

  struct Rung {
    int n = 0;
    double t = 0.0;
    double k = std::numeric_limits<double>::infinity();
    long long mu = 1;
    bool feasible = false;
    bool reached = false;
    bool checked = false;
    double tail_sup = std::numeric_limits<double>::quiet_NaN();
    double claimed = std::numeric_limits<double>::quiet_NaN();
    bool within = true;
    int snapshot_index = -1;
  };
  std::vector<Rung> rungs(static_cast<std::size_t>(cfg.n_max) + 1);
  int first_infeasible = -1;
  for (int n = 0; n <= cfg.n_max; ++n) {
    Rung& r = rungs[static_cast<std::size_t>(n)];
    r.n = n;
    r.t = sch.t[static_cast<std::size_t>(n)];
    r.mu = sch.mu[static_cast<std::size_t>(n)];
    if (sch.ladder_truncated_at < 0 || n < sch.ladder_truncated_at)
      r.k = sch.k[static_cast<std::size_t>(n)];
    r.feasible = r.k <= cfg.cutoff;
    r.reached = r.t <= cfg.t_end + 1e-12;
    if (!r.feasible && first_infeasible < 0) first_infeasible = n;
  }

  std::vector<std::pair<double, int>> snap_req;  // (time, rung index)
  for (const Rung& r : rungs)
    if (r.feasible && r.reached) snap_req.emplace_back(r.t, r.n);
  std::sort(snap_req.begin(), snap_req.end());

  const double k_fit = (cfg.n_max >= 1 && rungs[1].feasible) ? rungs[1].k : cfg.cutoff / 2.0;

  GalerkinConfig gc = galerkin_from(cfg);
  gc.tail_k_min = k_fit;
  gc.tail_k0 = k_fit;
  for (const auto& [t, n] : snap_req) gc.snapshot_times.push_back(t);

  const TrajectoryRecord tr = simulate(psi, gc);
  write_norm_csv(join_path(cfg.out_dir, "trajectory.csv"), tr.norms);
  write_energy_csv(join_path(cfg.out_dir, "energy.csv"), tr.energy);
  write_field(join_path(cfg.out_dir, "final_field.txt"), tr.final_field);

  for (std::size_t i = 0; i < snap_req.size() && i < tr.snapshots.size(); ++i)
    rungs[static_cast<std::size_t>(snap_req[i].second)].snapshot_index = static_cast<int>(i);

  bool rungs_ok = true;
  for (Rung& r : rungs) {
    if (r.n < 1 || r.snapshot_index < 0) continue;
    const SpectralField& u = tr.snapshots[static_cast<std::size_t>(r.snapshot_index)].second;
    r.tail_sup = tail_phi_sup(u, 2.0, r.k);
    r.claimed = std::pow(cfg.epsilon, static_cast<double>(r.mu));
    r.within = r.tail_sup <= r.claimed * (1.0 + 1e-9);
    r.checked = true;
    if (!r.within) rungs_ok = false;
  }

  // Consecutive-rung envelope checks: the tail witness at t_{n+1} must stay
  // under the two-term envelope seeded by the rung-n hypothesis.
  struct EnvelopeRow {
    int n = 0;
    double t_from = 0.0, t_to = 0.0;
    WaveVector k{};
    double observed = 0.0, bound = 0.0;
    bool within = true;
  };
  std::vector<EnvelopeRow> envelopes;
  bool envelopes_ok = true;
  for (int n = 0; n < cfg.n_max; ++n) {
    const Rung& lo = rungs[static_cast<std::size_t>(n)];
    const Rung& hi = rungs[static_cast<std::size_t>(n + 1)];
    if (lo.snapshot_index < 0 || hi.snapshot_index < 0) continue;
    const SpectralField& u =
        tr.snapshots[static_cast<std::size_t>(hi.snapshot_index)].second;
    const auto [val, km] = tail_weighted_max(u, 2.0, hi.k);
    if (km.is_zero()) continue;
    EnvelopeRow row;
    row.n = n;
    row.t_from = lo.t;
    row.t_to = hi.t;
    row.k = km;
    row.observed = val / static_cast<double>(km.norm2());
    const double a = std::pow(cfg.epsilon, static_cast<double>(lo.mu)) /
                     static_cast<double>(km.norm2());
    const double b = 0.5 * std::pow(cfg.epsilon, static_cast<double>(hi.mu));
    row.bound = duhamel_envelope(a, b, km, hi.t - lo.t);
    row.within = row.observed <= row.bound * (1.0 + 1e-9);
    if (!row.within) envelopes_ok = false;
    envelopes.push_back(row);
  }

  // Fitted decay exponent and 2.25-weighted tail over time.
  struct ExponentRow {
    double time = 0.0;
    double exponent = 0.0;
    double tail225 = 0.0;
  };
  std::vector<ExponentRow> exps;
  auto push_exp = [&](double t, const SpectralField& u) {
    if (!exps.empty() && std::abs(exps.back().time - t) <= 1e-12) return;
    exps.push_back({t, fitted_decay_exponent(u, k_fit), tail_phi_sup(u, 2.25, k_fit)});
  };
  push_exp(0.0, psi);
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i)
    push_exp(tr.snapshots[i].first, tr.snapshots[i].second);
  if (!tr.norms.empty()) push_exp(tr.norms.back().time, tr.final_field);

  const ExponentRow& first_row = exps.front();
  const ExponentRow& last_row = exps.back();
  const bool final_tail_zero = tail_phi_sup(tr.final_field, 2.0, k_fit) == 0.0;
  bool exponent_ok;
  if (std::isnan(last_row.exponent)) {
    exponent_ok = final_tail_zero;
  } else {
    exponent_ok = last_row.exponent >= 2.0 - 1e-6 &&
                  (std::isnan(first_row.exponent) ||
                   last_row.exponent >= first_row.exponent - 1e-6);
  }
  double tail225_first = first_row.tail225;
  for (const ExponentRow& r : exps)
    if (r.time > 0.0) {
      tail225_first = r.tail225;
      break;
    }
  const double tail225_last = last_row.tail225;
  const bool contract_ok = std::isfinite(tail225_last) &&
                           (tail225_first > 0.0 ? tail225_last <= tail225_first * (1.0 + 1e-9)
                                                : tail225_last == 0.0);

  const bool pass = hyp.pass && rungs_ok && envelopes_ok && exponent_ok && contract_ok &&
                    !tr.failed;

  {
    const std::string path = join_path(cfg.out_dir, "rungs.csv");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(f, "n,t_n,k_n,mu_n,feasible,reached,checked,tail_sup,claimed,within\n");
    for (const Rung& r : rungs)
      std::fprintf(f, "%d,%.17g,%.17g,%lld,%d,%d,%d,%.17g,%.17g,%d\n", r.n, r.t,
                   finite_or(r.k, -1.0), r.mu, r.feasible ? 1 : 0, r.reached ? 1 : 0,
                   r.checked ? 1 : 0, r.tail_sup, r.claimed, r.within ? 1 : 0);
    std::fclose(f);
  }
  {
    const std::string path = join_path(cfg.out_dir, "exponents.csv");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(f, "time,fitted_exponent,tail225\n");
    for (const ExponentRow& r : exps)
      std::fprintf(f, "%.17g,%.17g,%.17g\n", r.time, r.exponent, r.tail225);
    std::fclose(f);
  }
  {
    const std::string path = join_path(cfg.out_dir, "envelopes.csv");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(f, "n,t_from,t_to,k1,k2,k3,observed,bound,within\n");
    for (const EnvelopeRow& r : envelopes)
      std::fprintf(f, "%d,%.17g,%.17g,%d,%d,%d,%.17g,%.17g,%d\n", r.n, r.t_from, r.t_to,
                   r.k.k1, r.k.k2, r.k.k3, r.observed, r.bound, r.within ? 1 : 0);
    std::fclose(f);
  }

  nlohmann::json rep;
  rep["kind"] = cfg.kind;
  rep["config"] = config_to_json(cfg);
  rep["constants"] = constants_to_json(table);
  {
    nlohmann::json js;
    js["k0"] = sch.k0;
    js["t"] = sch.t;
    std::vector<double> kvals;
    for (const Rung& r : rungs) kvals.push_back(finite_or(r.k, -1.0));
    js["k"] = kvals;
    js["mu"] = sch.mu;
    js["gamma"] = sch.gamma;
    js["ladder_truncated_at"] = sch.ladder_truncated_at;
    js["exp_estimate_first_fail"] = sch.exp_estimate_first_fail;
    rep["schedule"] = js;
  }
  rep["hypothesis_pass"] = hyp.pass;
  rep["first_infeasible_n"] = first_infeasible;
  rep["k_fit"] = k_fit;
  rep["rungs_all_within"] = rungs_ok;
  rep["envelopes_all_within"] = envelopes_ok;
  rep["exponent_first"] = first_row.exponent;
  rep["exponent_final"] = last_row.exponent;
  rep["exponent_ok"] = exponent_ok;
  rep["tail225_first"] = tail225_first;
  rep["tail225_final"] = tail225_last;
  rep["tail225_contracting"] = contract_ok;
  rep["energy"] = energy_json(energy_report(tr));
  rep["integration_failed"] = tr.failed;
  rep["fail_step"] = tr.fail_step;
  rep["cfl_warning"] = tr.cfl_warning;
  rep["pass"] = pass;
  write_json(join_path(cfg.out_dir, "report.json"), rep);

  StudyResult out;
  out.pass = pass;
  out.report = std::move(rep);
  return out;
}

StudyResult run_h_half_study(const ExperimentConfig& cfg) {
  if (cfg.kind != "h-half")
    throw std::invalid_argument("run_h_half_study: config kind must be 'h-half'");
  ensure_dir(cfg.out_dir);
  const ConstantsTable table = compute_constants();
  const double c_used = cfg.c > 0.0 ? cfg.c : table.lemma_c;

  nlohmann::json rep;
  rep["kind"] = cfg.kind;
  rep["config"] = config_to_json(cfg);
  rep["constants"] = constants_to_json(table);
  rep["c_used"] = c_used;
  rep["l0_configured"] = cfg.l0;

  const double q_cfg = 2.0 * c_used * std::sqrt(cfg.l0);
  rep["q_configured"] = q_cfg;
  if (std::abs(q_cfg - 1.0) <= 1e-9) {
    rep["refused"] = true;
    rep["refusal_reason"] =
        "2 c sqrt(L0) = 1: the D-sequence limit (4+sqrt(2)) L0 / (1 - 2 c sqrt(L0)) is "
        "singular at this threshold";
    rep["pass"] = false;
    write_json(join_path(cfg.out_dir, "report.json"), rep);
    StudyResult out;
    out.pass = false;
    out.refused = true;
    out.report = std::move(rep);
    return out;
  }
  rep["refused"] = false;

  const SpectralField raw =
      random_divfree_field(cfg.seed, 1.0, cfg.alpha, cfg.cutoff, cfg.real_data);
  const double h_raw = sobolev_norm(raw, 0.5);
  const double scale = h_raw > 0.0 ? std::sqrt(cfg.l0) / h_raw : 0.0;
  const SpectralField psi = scale_field(raw, scale);
  write_field(join_path(cfg.out_dir, "initial_field.txt"), psi);

  std::vector<std::pair<double, int>> snap_req;
  for (int n = 1; n <= cfg.n_max; ++n) {
    const double tn = cfg.rho - cfg.rho * gamma_exponent(n);
    if (tn <= cfg.t_end + 1e-12) snap_req.emplace_back(tn, n);
  }
  std::sort(snap_req.begin(), snap_req.end());

  GalerkinConfig gc = galerkin_from(cfg);
  for (const auto& [t, n] : snap_req) gc.snapshot_times.push_back(t);

  const TrajectoryRecord tr = simulate(psi, gc);
  write_norm_csv(join_path(cfg.out_dir, "trajectory.csv"), tr.norms);
  write_energy_csv(join_path(cfg.out_dir, "energy.csv"), tr.energy);
  write_field(join_path(cfg.out_dir, "final_field.txt"), tr.final_field);

  double l0_obs = 0.0;
  for (const NormReport& n : tr.norms) l0_obs = std::max(l0_obs, n.h_half * n.h_half);
  rep["l0_observed"] = l0_obs;
  rep["integration_failed"] = tr.failed;
  rep["fail_step"] = tr.fail_step;
  rep["cfl_warning"] = tr.cfl_warning;
  rep["energy"] = energy_json(energy_report(tr));

  if (l0_obs == 0.0) {
    rep["vacuous_zero_field"] = true;
    rep["pass"] = !tr.failed;
    write_json(join_path(cfg.out_dir, "report.json"), rep);
    const std::string path = join_path(cfg.out_dir, "ladder.csv");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(f, "n,t_n,gamma_n,d_n,k_threshold,feasible,reached,checked,max_ratio,bound,within\n");
    std::fclose(f);
    StudyResult out;
    out.pass = !tr.failed;
    out.report = std::move(rep);
    return out;
  }
  rep["vacuous_zero_field"] = false;

  const double q_obs = 2.0 * c_used * std::sqrt(l0_obs);
  const DSequence ds = d_sequence(cfg.n_max, l0_obs, c_used);
  const int k0 = choose_k0_threshold(l0_obs, cfg.rho, cfg.n_max);
  rep["q_observed"] = q_obs;
  rep["d_sequence_divergent"] = ds.divergent;
  rep["d_inf"] = ds.divergent ? nlohmann::json() : nlohmann::json(ds.d_inf);
  rep["k0_threshold"] = k0;

  struct LadderRow {
    int n = 0;
    double t = 0.0, gamma = 0.0, d = 0.0, k_threshold = 0.0;
    bool feasible = false, reached = false, checked = false;
    double max_ratio = std::numeric_limits<double>::quiet_NaN();
    double bound = std::numeric_limits<double>::quiet_NaN();
    bool within = true;
    WaveVector witness{};
  };
  std::vector<LadderRow> ladder;
  bool rungs_ok = true;
  bool any_checked = false;
  int last_checked_n = -1;
  for (int n = 1; n <= cfg.n_max; ++n) {
    LadderRow row;
    row.n = n;
    row.t = cfg.rho - cfg.rho * gamma_exponent(n);
    row.gamma = gamma_exponent(n);
    row.d = ds.d[static_cast<std::size_t>(n)];
    row.k_threshold = std::ldexp(static_cast<double>(k0), n);
    row.feasible = row.k_threshold <= cfg.cutoff;
    row.reached = row.t <= cfg.t_end + 1e-12;
    int my_snapshot = -1;
    if (row.reached) {
      for (std::size_t i = 0; i < snap_req.size(); ++i)
        if (snap_req[i].second == n) my_snapshot = static_cast<int>(i);
    }
    if (row.feasible && my_snapshot >= 0 &&
        static_cast<std::size_t>(my_snapshot) < tr.snapshots.size()) {
      const SpectralField& u =
          tr.snapshots[static_cast<std::size_t>(my_snapshot)].second;
      const auto [val, km] = tail_weighted_max(u, 2.0 - row.gamma, row.k_threshold);
      row.max_ratio = val;
      row.witness = km;
      row.bound = row.d;
      row.within = val <= row.d * (1.0 + 1e-9);
      row.checked = true;
      any_checked = true;
      last_checked_n = n;
      if (!row.within) rungs_ok = false;
    }
    ladder.push_back(row);
  }

  // Closed-form final bound at the deepest checked threshold.
  bool final_checked = false;
  bool final_within = true;
  double final_ratio = std::numeric_limits<double>::quiet_NaN();
  double theorem_bound = std::numeric_limits<double>::quiet_NaN();
  double final_threshold = std::numeric_limits<double>::quiet_NaN();
  if (!ds.divergent && !tr.failed && cfg.t_end >= cfg.rho - 1e-12) {
    const int nf = last_checked_n >= 1 ? last_checked_n : 1;
    final_threshold = std::ldexp(static_cast<double>(k0), nf);
    if (final_threshold <= cfg.cutoff) {
      theorem_bound = 2.0 * (4.0 + std::sqrt(2.0)) * l0_obs / (1.0 - q_obs);
      const auto [val, km] = tail_weighted_max(tr.final_field, 2.0, final_threshold);
      final_ratio = val;
      final_within = val <= theorem_bound * (1.0 + 1e-9);
      final_checked = true;
    }
  }

  const bool pass = !tr.failed && !ds.divergent && rungs_ok &&
                    (final_checked ? final_within : true) && (any_checked || final_checked);

  {
    const std::string path = join_path(cfg.out_dir, "ladder.csv");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(f, "n,t_n,gamma_n,d_n,k_threshold,feasible,reached,checked,max_ratio,bound,within\n");
    for (const LadderRow& r : ladder)
      std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%.17g,%.17g,%d\n", r.n, r.t,
                   r.gamma, r.d, r.k_threshold, r.feasible ? 1 : 0, r.reached ? 1 : 0,
                   r.checked ? 1 : 0, r.max_ratio, r.bound, r.within ? 1 : 0);
    if (final_checked)
      std::fprintf(f, "-1,%.17g,0,%.17g,%.17g,1,1,1,%.17g,%.17g,%d\n", tr.norms.back().time,
                   ds.d_inf, final_threshold, final_ratio, theorem_bound,
                   final_within ? 1 : 0);
    std::fclose(f);
  }

  rep["rungs_all_within"] = rungs_ok;
  rep["any_rung_checked"] = any_checked;
  rep["final_check_performed"] = final_checked;
  rep["final_threshold"] = final_checked ? nlohmann::json(final_threshold) : nlohmann::json();
  rep["final_max_k2_coeff"] = final_checked ? nlohmann::json(final_ratio) : nlohmann::json();
  rep["theorem_bound"] = final_checked ? nlohmann::json(theorem_bound) : nlohmann::json();
  rep["final_within"] = final_within;
  rep["pass"] = pass;
  write_json(join_path(cfg.out_dir, "report.json"), rep);

  StudyResult out;
  out.pass = pass;
  out.report = std::move(rep);
  return out;
}

}  // namespace torus
