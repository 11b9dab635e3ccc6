// Command line front end: spectrum, sweep, validate, asymptotics, field.
//
// Exit codes: 0 success, 2 configuration error, 3 partial branch failure,
// 4 validation failure. All numeric output goes through %.17g so repeated
// runs with the same config are byte-identical.

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgres/bs_operator.hpp"
#include "wgres/geometry.hpp"
#include "wgres/greens.hpp"
#include "wgres/modes.hpp"
#include "wgres/oracle.hpp"
#include "wgres/resonance.hpp"
#include "wgres/spectrum.hpp"

namespace {

using nlohmann::ordered_json;
using namespace wgres;

constexpr double kPi = 3.141592653589793238462643383279502884;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

std::string fmt_signed(double v) {
  std::string s = fmt(v);
  if (!s.empty() && s[0] != '-') s.insert(s.begin(), '+');
  return s;
}

double to_num(const ordered_json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      throw ConfigError(what + ": not a decimal number: \"" + s + "\"");
    return v;
  }
  throw ConfigError(what + " must be a number or a decimal string");
}

double get_num(const ordered_json& j, const char* key, double dflt) {
  if (!j.contains(key) || j.at(key).is_null()) return dflt;
  return to_num(j.at(key), key);
}

int get_int(const ordered_json& j, const char* key, int dflt) {
  if (!j.contains(key) || j.at(key).is_null()) return dflt;
  if (!j.at(key).is_number_integer())
    throw ConfigError(std::string(key) + " must be an integer");
  return j.at(key).get<int>();
}

bool get_bool(const ordered_json& j, const char* key, bool dflt) {
  if (!j.contains(key) || j.at(key).is_null()) return dflt;
  if (!j.at(key).is_boolean())
    throw ConfigError(std::string(key) + " must be a boolean");
  return j.at(key).get<bool>();
}

struct RunConfig {
  Geometry g;
  std::array<int, 3> mode{1, 1, 0};
  std::vector<double> eps_grid;
  bool eps_grid_given = false;
  Truncation trunc;
  bool trunc_given = false;
  double tol = 1e-12;
  std::optional<std::pair<int, int>> fit_window;
  bool rectangle_aperture = false;
  ordered_json raw;
};

std::vector<double> parse_eps_grid(const ordered_json& spec, double d2) {
  std::vector<double> grid;
  if (spec.is_array()) {
    for (const auto& e : spec) grid.push_back(to_num(e, "eps_grid"));
  } else if (spec.is_object()) {
    const double lo = to_num(spec.at("min"), "eps_grid.min");
    const double hi = to_num(spec.at("max"), "eps_grid.max");
    const int count = get_int(spec, "count", 8);
    const bool logspaced = get_bool(spec, "log", true);
    if (count < 1) throw ConfigError("eps_grid.count must be >= 1");
    if (hi < lo) throw ConfigError("eps_grid.max must be >= eps_grid.min");
    if (count == 1) {
      grid.push_back(lo);
    } else if (logspaced) {
      if (lo <= 0.0) throw ConfigError("log eps_grid needs min > 0");
      for (int i = 0; i < count; ++i)
        grid.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) *
                                                   i / double(count - 1)));
    } else {
      for (int i = 0; i < count; ++i)
        grid.push_back(lo + (hi - lo) * i / double(count - 1));
    }
  } else {
    throw ConfigError("eps_grid must be an array or a {min,max,count} object");
  }
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0) throw ConfigError("eps_grid entries must be >= 0");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw ConfigError("eps_grid must be strictly ascending");
  }
  if (grid.empty()) throw ConfigError("eps_grid is empty");
  (void)d2;
  return grid;
}

std::vector<double> default_eps_grid(const Geometry& g) {
  std::vector<double> grid;
  const double lo = 0.01 * g.d2, hi = 0.08 * g.d2;
  for (int i = 0; i < 8; ++i)
    grid.push_back(
        std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / 7.0));
  return grid;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  if (!j.is_object() || !j.contains("spec") ||
      !j.at("spec").is_number_integer() || j.at("spec").get<int>() != 1)
    throw ConfigError("config must carry \"spec\": 1");

  RunConfig cfg;
  cfg.raw = j;

  int dim = 2;
  if (j.contains("geometry")) dim = get_int(j.at("geometry"), "dimension", 2);
  if (dim != 2 && dim != 3) throw ConfigError("dimension must be 2 or 3");
  cfg.g = dim == 2 ? default_geometry_2d() : default_geometry_3d();
  if (j.contains("geometry")) {
    const auto& gj = j.at("geometry");
    cfg.g.d1 = get_num(gj, "d1", cfg.g.d1);
    cfg.g.d2 = get_num(gj, "d2", cfg.g.d2);
    cfg.g.t = get_num(gj, "t", cfg.g.t);
    if (dim == 3) {
      cfg.g.d3 = get_num(gj, "d3", cfg.g.d3);
      cfg.g.t3 = get_num(gj, "t3", cfg.g.t3);
      cfg.g.a = get_num(gj, "a", cfg.g.a);
    }
  }

  if (j.contains("mode")) {
    const auto& m = j.at("mode");
    if (!m.is_array() || (int)m.size() != dim)
      throw ConfigError(dim == 2 ? "mode must be a pair [l, k]"
                                 : "mode must be a triple [k1, k2, k3]");
    cfg.mode = {1, 1, 0};
    for (int i = 0; i < dim; ++i) {
      if (!m[i].is_number_integer()) throw ConfigError("mode indices must be integers");
      cfg.mode[i] = m[i].get<int>();
    }
  } else if (dim == 3) {
    cfg.mode = {1, 1, 1};
  }

  cfg.trunc = dim == 2 ? Truncation{64, 256} : Truncation{24, 64};
  if (j.contains("truncation")) {
    const auto& t = j.at("truncation");
    cfg.trunc.n_basis = get_int(t, "n_basis", cfg.trunc.n_basis);
    cfg.trunc.n_sum = get_int(t, "n_sum", cfg.trunc.n_sum);
    cfg.trunc_given = true;
  }

  if (j.contains("eps_grid")) {
    cfg.eps_grid = parse_eps_grid(j.at("eps_grid"), cfg.g.d2);
    cfg.eps_grid_given = true;
  } else {
    cfg.eps_grid = default_eps_grid(cfg.g);
  }

  cfg.tol = get_num(j, "tol", 1e-12);
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");

  if (j.contains("fit_window")) {
    const auto& w = j.at("fit_window");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() ||
        !w[1].is_number_integer())
      throw ConfigError("fit_window must be an index pair [i_min, i_max]");
    cfg.fit_window = std::make_pair(w[0].get<int>(), w[1].get<int>());
  }

  cfg.rectangle_aperture = get_bool(j, "rectangle_aperture", false);
  return cfg;
}

double level_energy(const Geometry& g, const std::array<int, 3>& s) {
  double v = kPi * kPi * (double(s[0]) * s[0] / (g.d1 * g.d1) +
                          double(s[1]) * s[1] / (g.d2 * g.d2));
  if (g.dimension == 3) v += kPi * kPi * double(s[2]) * s[2] / (g.d3 * g.d3);
  return v;
}

ordered_json geometry_json(const Geometry& g) {
  ordered_json j;
  j["dimension"] = g.dimension;
  j["d1"] = fmt(g.d1);
  j["d2"] = fmt(g.d2);
  if (g.dimension == 3) j["d3"] = fmt(g.d3);
  j["t"] = fmt(g.t);
  if (g.dimension == 3) {
    j["t3"] = fmt(g.t3);
    j["a"] = fmt(g.a);
  }
  return j;
}

ordered_json fit_json(const FitResult& f) {
  ordered_json j;
  j["slope"] = fmt(f.slope);
  j["intercept"] = fmt(f.intercept);
  j["r2"] = fmt(f.r2);
  j["window"] = {f.i_min, f.i_max};
  return j;
}

ordered_json seed_json(const Geometry& g, const std::array<int, 3>& s) {
  if (g.dimension == 2) return ordered_json::array({s[0], s[1]});
  return ordered_json::array({s[0], s[1], s[2]});
}

void write_text(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << body;
}

void write_json(const std::filesystem::path& p, const ordered_json& j) {
  write_text(p, j.dump(2) + "\n");
}

std::string branch_csv(const ResonanceBranch& br, const Truncation& tr) {
  std::string s = "eps,re_z,im_z,mu,nu,residual,iterations,n_basis,n_sum\n";
  for (const SweepPoint& p : br.points) {
    s += fmt(p.eps) + "," + fmt(p.z.real()) + "," + fmt(p.z.imag()) + "," +
         fmt(p.mu) + "," + fmt(p.nu) + "," + fmt(p.residual) + "," +
         std::to_string(p.iterations) + "," + std::to_string(tr.n_basis) +
         "," + std::to_string(tr.n_sum) + "\n";
  }
  return s;
}

std::string branch_file_name(const Geometry& g, const std::array<int, 3>& s) {
  std::string name = "branch_" + std::to_string(s[0]) + "_" + std::to_string(s[1]);
  if (g.dimension == 3) name += "_" + std::to_string(s[2]);
  return name + ".csv";
}

// ---------------------------------------------------------------- spectrum

int cmd_spectrum(const RunConfig& cfg, const std::filesystem::path& out,
                 bool quiet) {
  validate_geometry(cfg.g, 0.0);
  const double e_max = get_num(cfg.raw, "e_max", 60.0 * kPi * kPi);
  const auto levels = enumerate_embedded(cfg.g, e_max);

  std::string csv = "value,multiplicity,above_threshold,indices\n";
  for (const auto& lv : levels) {
    std::string idx;
    for (size_t i = 0; i < lv.indices.size(); ++i) {
      if (i) idx += "|";
      idx += std::to_string(lv.indices[i][0]) + ":" +
             std::to_string(lv.indices[i][1]);
      if (cfg.g.dimension == 3) idx += ":" + std::to_string(lv.indices[i][2]);
    }
    csv += fmt(lv.value) + "," + std::to_string(lv.multiplicity) + "," +
           (lv.above_threshold ? "1" : "0") + "," + idx + "\n";
  }
  write_text(out / "spectrum.csv", csv);

  ordered_json j;
  j["spec"] = 1;
  j["command"] = "spectrum";
  j["geometry"] = geometry_json(cfg.g);
  j["e_max"] = fmt(e_max);
  j["count"] = (int)levels.size();
  write_json(out / "spectrum_summary.json", j);

  if (!quiet) {
    std::printf("%zu levels up to %s\n", levels.size(), fmt(e_max).c_str());
    for (const auto& lv : levels)
      std::printf("  %-22s mult %d %s\n", fmt(lv.value).c_str(),
                  lv.multiplicity, lv.above_threshold ? "embedded" : "below");
  }
  return 0;
}

// ------------------------------------------------------------------- sweep

int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out,
              bool quiet) {
  validate_geometry(cfg.g, cfg.eps_grid.back());
  const double xi = level_energy(cfg.g, cfg.mode);
  const auto levels = enumerate_embedded(cfg.g, xi * (1.0 + 1e-6));
  const EmbeddedLevel* level = nullptr;
  for (const auto& lv : levels)
    for (const auto& idx : lv.indices)
      if (idx == cfg.mode) level = &lv;
  if (!level) throw ConfigError("mode is not a cavity level of this geometry");

  const auto branches =
      sweep_level(cfg.g, *level, cfg.eps_grid, cfg.trunc, cfg.tol,
                  cfg.rectangle_aperture, cfg.fit_window);

  ordered_json j;
  j["spec"] = 1;
  j["command"] = "sweep";
  j["geometry"] = geometry_json(cfg.g);
  j["seed"] = seed_json(cfg.g, cfg.mode);
  j["xi"] = fmt(xi);
  j["multiplicity"] = level->multiplicity;
  j["truncation"] = {{"n_basis", cfg.trunc.n_basis}, {"n_sum", cfg.trunc.n_sum}};
  if (cfg.g.dimension == 3)
    j["basis_flattening"] = "row-major (m2 outer, m3 inner)";
  j["tol"] = fmt(cfg.tol);
  ordered_json grid = ordered_json::array();
  for (double e : cfg.eps_grid) grid.push_back(fmt(e));
  j["eps_grid"] = grid;

  int rc = 0;
  const ResonanceBranch* primary = nullptr;
  ordered_json jbr = ordered_json::array();
  for (const auto& br : branches) {
    if (br.failed) rc = 3;
    if (br.seed_index == cfg.mode) primary = &br;
    const std::string fname = branch_file_name(cfg.g, br.seed_index);
    write_text(out / fname, branch_csv(br, cfg.trunc));

    ordered_json b;
    b["seed"] = seed_json(cfg.g, br.seed_index);
    b["points_file"] = fname;
    b["failed"] = br.failed;
    b["fit_mu"] = fit_json(br.fit_mu);
    b["fit_nu"] = fit_json(br.fit_nu);
    std::vector<std::string> warn = br.warnings;
    double expo = 0.0;
    try {
      lifetime(br, cfg.g, &expo);
      b["lifetime_exponent"] = fmt(expo);
    } catch (const std::exception& e) {
      b["lifetime_exponent"] = nullptr;
      warn.push_back(e.what());
    }
    b["warnings"] = warn;
    jbr.push_back(b);

    if (!quiet)
      std::printf("branch %s: mu slope %s, nu slope %s%s\n", fname.c_str(),
                  fmt(br.fit_mu.slope).c_str(), fmt(br.fit_nu.slope).c_str(),
                  br.failed ? " [failed]" : "");
  }
  if (primary) {
    j["fit_mu"] = fit_json(primary->fit_mu);
    j["fit_nu"] = fit_json(primary->fit_nu);
    double expo = 0.0;
    try {
      lifetime(*primary, cfg.g, &expo);
      j["lifetime_exponent"] = fmt(expo);
    } catch (const std::exception&) {
      j["lifetime_exponent"] = nullptr;
    }
    j["warnings"] = primary->warnings;
  }
  j["branches"] = jbr;
  write_json(out / "sweep_summary.json", j);
  return rc;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const RunConfig& cfg, const std::filesystem::path& out,
                 bool quiet) {
  const double eps = get_num(cfg.raw, "eps", 0.05 * cfg.g.d2);
  validate_geometry(cfg.g, eps);
  const double xi = level_energy(cfg.g, cfg.mode);
  const double c1 = kPi * kPi / (cfg.g.d2 * cfg.g.d2);

  double tol_rel = 0.05;
  CapConfig cap{};
  bool cap_given = false;
  cplx center(xi, -0.05);
  if (cfg.raw.contains("cap")) {
    const auto& cj = cfg.raw.at("cap");
    tol_rel = get_num(cj, "tolerance", tol_rel);
    center = cplx(get_num(cj, "center_re", xi), get_num(cj, "center_im", -0.05));
    if (cj.contains("q") || cj.contains("h")) {
      cap = default_cap_config(cfg.g, eps, xi);
      if (cj.contains("q")) cap.h = cfg.g.d2 / get_int(cj, "q", 56);
      cap.h = get_num(cj, "h", cap.h);
      cap.L = get_num(cj, "L", cap.L);
      cap.L_cap = get_num(cj, "L_cap", cap.L_cap);
      cap.eta = get_num(cj, "eta", cap.eta);
      cap.cap_power = get_int(cj, "power", cap.cap_power);
      cap_given = true;
    }
  }
  if (!cap_given) cap = default_cap_config(cfg.g, eps, xi);

  ordered_json j;
  j["spec"] = 1;
  j["command"] = "validate";
  j["geometry"] = geometry_json(cfg.g);
  j["seed"] = seed_json(cfg.g, cfg.mode);
  j["eps"] = fmt(eps);
  j["first_threshold"] = fmt(c1);
  j["tolerance"] = fmt(tol_rel);
  j["cap"] = {{"h", fmt(cap.h)},     {"L", fmt(cap.L)},
              {"L_cap", fmt(cap.L_cap)}, {"eta", fmt(cap.eta)},
              {"power", cap.cap_power}};

  bool pass = false;
  try {
    ResonanceContext ctx(cfg.g, cfg.mode, cfg.trunc, cfg.rectangle_aperture);
    const SolveResult sr =
        solve_resonance(ctx, eps, xi * cplx(1.0, -1e-8), cfg.tol);
    j["solver"] = {{"re", fmt(sr.z.real())},
                   {"im", fmt(sr.z.imag())},
                   {"residual", fmt(sr.residual)},
                   {"iterations", sr.iterations}};

    const CapStabilityReport rep = cap_stability(cfg.g, eps, cap, center);
    j["cap_eigenvalue"] = {{"re", fmt(rep.base.real())},
                           {"im", fmt(rep.base.imag())}};
    j["stability"] = {{"half_eta_re", fmt(rep.half_eta.real())},
                      {"half_eta_im", fmt(rep.half_eta.imag())},
                      {"longer_box_re", fmt(rep.longer_box.real())},
                      {"longer_box_im", fmt(rep.longer_box.imag())},
                      {"max_drift", fmt(rep.max_drift)}};

    const double scale = std::abs(sr.z - c1);
    const bool stable = rep.max_drift <= 0.2 * tol_rel * scale;
    const double rel = std::abs(rep.base - sr.z) / scale;
    j["stability_pass"] = stable;
    j["relative_discrepancy"] = fmt(rel);
    pass = stable && rel <= tol_rel;
    j["pass"] = pass;
    if (!quiet)
      std::printf("solver %s%si  cap %s%si  rel %s  %s\n",
                  fmt(sr.z.real()).c_str(), fmt_signed(sr.z.imag()).c_str(),
                  fmt(rep.base.real()).c_str(),
                  fmt_signed(rep.base.imag()).c_str(), fmt(rel).c_str(),
                  pass ? "OK" : "FAIL");
  } catch (const std::exception& e) {
    j["error"] = e.what();
    j["pass"] = false;
    if (!quiet) std::printf("validation aborted: %s\n", e.what());
  }
  write_json(out / "validation.json", j);
  return pass ? 0 : 4;
}

// ------------------------------------------------------------- asymptotics

struct QuantitySeries {
  std::vector<double> eps, value;
  FitResult fit;
  ordered_json extra;
};

ordered_json series_json(const QuantitySeries& q) {
  ordered_json j;
  j["slope"] = fmt(q.fit.slope);
  j["intercept"] = fmt(q.fit.intercept);
  j["r2"] = fmt(q.fit.r2);
  ordered_json pts = ordered_json::array();
  for (size_t i = 0; i < q.eps.size(); ++i)
    pts.push_back({{"eps", fmt(q.eps[i])}, {"value", fmt(q.value[i])}});
  j["points"] = pts;
  for (auto it = q.extra.begin(); it != q.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

void fit_series(QuantitySeries& q) {
  std::vector<std::pair<double, double>> pts;
  for (size_t i = 0; i < q.eps.size(); ++i)
    if (q.eps[i] > 0.0 && q.value[i] > 0.0) pts.push_back({q.eps[i], q.value[i]});
  q.fit = fit_power_law(pts);
}

// scalar H_kk over a flat mode sum, no matrices
double hkk_scalar(const Geometry& g, double eps, double xi, int k2, int k3,
                  int n_sum, bool rect) {
  const std::vector<double> thr = transverse_thresholds(g, n_sum);
  const SheetChoice sheets = sheet_assignment(xi, thr, +1);
  cplx kkk = 0.0;
  if (g.dimension == 2) {
    for (int jm = 1; jm <= n_sum; ++jm) {
      const double w = wall_overlap(k2, jm, g.t, eps, g.d2);
      kkk += green_wall(xi, thr[jm - 1], sheets.flags[jm - 1], g.d1) * w * w;
    }
    kkk -= green_wall(xi, thr[k2 - 1], sheets.flags[k2 - 1], g.d1);
  } else {
    const double eps3 = g.a * eps;
    for (int j2 = 1; j2 <= n_sum; ++j2)
      for (int j3 = 1; j3 <= n_sum; ++j3) {
        const int flat = (j2 - 1) * n_sum + (j3 - 1);
        double w;
        if (rect) {
          w = (j2 == k2 && j3 == k3 ? 1.0 : 0.0) -
              gap_overlap(k2, j2, g.t, eps, g.d2) *
                  gap_overlap(k3, j3, g.t3, eps3, g.d3);
        } else {
          w = wall_overlap(k2, j2, g.t, eps, g.d2) *
              wall_overlap(k3, j3, g.t3, eps3, g.d3);
        }
        kkk += green_wall(xi, thr[flat], sheets.flags[flat], g.d1) * w * w;
      }
    const int kflat = (k2 - 1) * n_sum + (k3 - 1);
    kkk -= green_wall(xi, thr[kflat], sheets.flags[kflat], g.d1);
  }
  return std::abs(kkk);
}

int cmd_asymptotics(const RunConfig& cfg, const std::filesystem::path& out,
                    bool quiet) {
  const Geometry& g = cfg.g;
  const bool is3d = g.dimension == 3;
  const double xi = level_energy(g, cfg.mode);
  ResonanceContext probe(g, cfg.mode, cfg.trunc, cfg.rectangle_aperture);
  const double clearance = probe.clearance();

  std::vector<std::string> wanted;
  cplx z_offset = 0.0;
  int hkk_n_sum = is3d ? 64 : 60000;
  ordered_json acfg = ordered_json::object();
  if (cfg.raw.contains("asymptotics")) acfg = cfg.raw.at("asymptotics");
  if (acfg.contains("quantities")) {
    for (const auto& q : acfg.at("quantities")) wanted.push_back(q.get<std::string>());
  } else if (is3d) {
    wanted = {"hkk"};
  } else {
    wanted = {"h_norm", "eta_norm", "projector", "hkk", "j_form", "truncation"};
  }
  z_offset = cplx(get_num(acfg, "z_offset_re", 0.0), get_num(acfg, "z_offset_im", 0.0));
  hkk_n_sum = get_int(acfg, "hkk_n_sum", hkk_n_sum);

  const std::vector<double> grid = cfg.eps_grid;
  validate_geometry(g, grid.back());
  auto has = [&](const char* q) {
    for (const auto& w : wanted)
      if (w == q) return true;
    return false;
  };

  ordered_json j;
  j["spec"] = 1;
  j["command"] = "asymptotics";
  j["geometry"] = geometry_json(g);
  j["seed"] = seed_json(g, cfg.mode);
  j["xi"] = fmt(xi);
  ordered_json quantities = ordered_json::object();

  try {
    if (has("h_norm")) {
      const Truncation tr = cfg.trunc_given ? cfg.trunc
                            : (is3d ? Truncation{24, 64} : Truncation{64, 256});
      ResonanceContext ctx(g, cfg.mode, tr, cfg.rectangle_aperture);
      const cplx z = xi + z_offset;
      QuantitySeries q;
      for (double eps : grid) {
        q.eps.push_back(eps);
        q.value.push_back(operator_norm(ctx.assemble(z, eps).H));
      }
      fit_series(q);
      q.extra["truncation"] = {{"n_basis", tr.n_basis}, {"n_sum", tr.n_sum}};
      q.extra["z"] = {{"re", fmt(z.real())}, {"im", fmt(z.imag())}};
      quantities["h_norm"] = series_json(q);
      if (!quiet) std::printf("h_norm slope %s\n", fmt(q.fit.slope).c_str());
    }

    if (has("eta_norm") || has("projector")) {
      const Truncation tr = cfg.trunc_given ? cfg.trunc
                            : (is3d ? Truncation{24, 64} : Truncation{256, 512});
      ResonanceContext ctx(g, cfg.mode, tr, cfg.rectangle_aperture);
      const cplx z = xi + z_offset - cplx(0.0, 0.05 * clearance);
      const TruncatedBS bs0 = ctx.assemble(z, 0.0);
      QuantitySeries qe, qp;
      for (double eps : grid) {
        const TruncatedBS bs = ctx.assemble(z, eps);
        if (has("eta_norm")) {
          const EigenBranch br = branch_eigenpair(bs, ctx.seed_flat());
          qe.eps.push_back(eps);
          qe.value.push_back(br.eta_norm);
        }
        if (has("projector")) {
          qp.eps.push_back(eps);
          qp.value.push_back(projector_diff_norm(bs, bs0, ctx.seed_flat()));
        }
      }
      if (has("eta_norm")) {
        fit_series(qe);
        qe.extra["truncation"] = {{"n_basis", tr.n_basis}, {"n_sum", tr.n_sum}};
        qe.extra["z"] = {{"re", fmt(z.real())}, {"im", fmt(z.imag())}};
        quantities["eta_norm"] = series_json(qe);
        if (!quiet) std::printf("eta_norm slope %s\n", fmt(qe.fit.slope).c_str());
      }
      if (has("projector")) {
        fit_series(qp);
        qp.extra["truncation"] = {{"n_basis", tr.n_basis}, {"n_sum", tr.n_sum}};
        qp.extra["z"] = {{"re", fmt(z.real())}, {"im", fmt(z.imag())}};
        quantities["projector"] = series_json(qp);
        if (!quiet) std::printf("projector slope %s\n", fmt(qp.fit.slope).c_str());
      }
    }

    if (has("hkk")) {
      std::vector<double> hgrid;
      if (cfg.eps_grid_given) {
        hgrid = grid;
      } else {
        const double lo = 1e-4 * g.d2, hi = 1e-3 * g.d2;
        for (int i = 0; i < 8; ++i)
          hgrid.push_back(
              std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / 7.0));
      }
      QuantitySeries q;
      for (double eps : hgrid) {
        q.eps.push_back(eps);
        q.value.push_back(hkk_scalar(g, eps, xi, cfg.mode[1],
                                     is3d ? cfg.mode[2] : 0, hkk_n_sum,
                                     cfg.rectangle_aperture));
      }
      fit_series(q);
      q.extra["n_sum"] = hkk_n_sum;
      quantities["hkk"] = series_json(q);
      if (!quiet) std::printf("hkk slope %s\n", fmt(q.fit.slope).c_str());
    }

    if (has("j_form")) {
      ResonanceContext ctx(g, cfg.mode, cfg.trunc, cfg.rectangle_aperture);
      const ResonanceBranch br = sweep(ctx, grid, cfg.tol);
      QuantitySeries q;
      for (const SweepPoint& p : br.points) {
        if (p.eps <= 0.0) continue;
        const TruncatedBS bs = ctx.assemble(p.z, p.eps);
        // at a converged root the branch is the kernel of K; max-overlap
        // selection can be ambiguous once the quasi-mode hybridizes
        const EigenBranch eb = kernel_eigenpair(bs, ctx.seed_flat());
        Eigen::VectorXcd eta_vec = eb.vector;
        const cplx vk = eta_vec[ctx.seed_flat()];
        eta_vec[ctx.seed_flat()] = 0.0;
        const cplx cross = (bs.H.row(ctx.seed_flat()) * eta_vec)(0, 0);
        const cplx jval = quad_form_H(bs, ctx.seed_flat()) + cross / vk;
        q.eps.push_back(p.eps);
        q.value.push_back(std::abs(jval));
      }
      fit_series(q);
      q.extra["truncation"] = {{"n_basis", cfg.trunc.n_basis},
                               {"n_sum", cfg.trunc.n_sum}};
      quantities["j_form"] = series_json(q);
      if (!quiet) std::printf("j_form slope %s\n", fmt(q.fit.slope).c_str());
    }

    if (has("truncation")) {
      const double eps = 0.05 * g.d2;
      const cplx z(xi, 0.0);
      std::vector<int> ns = is3d ? std::vector<int>{16, 32, 64}
                                 : std::vector<int>{64, 128, 256, 512};
      const int nb = std::min(cfg.trunc.n_basis, ns.front());
      std::vector<Eigen::MatrixXcd> ks;
      for (int n : ns) {
        const Truncation tr{nb, n};
        const SheetChoice sh =
            sheet_assignment(xi, transverse_thresholds(g, n), +1);
        ks.push_back(
            assemble_K(z, eps, g, sh, tr, make_overlaps(g, eps, n),
                       cfg.rectangle_aperture)
                .K);
      }
      ordered_json pairs = ordered_json::array();
      for (size_t i = 0; i + 1 < ks.size(); ++i) {
        const double diff = (ks[i] - ks[i + 1]).cwiseAbs().maxCoeff();
        pairs.push_back({{"n_sum", ns[i]},
                         {"n_sum_doubled", ns[i + 1]},
                         {"max_diff", fmt(diff)}});
        if (!quiet)
          std::printf("|K(%d) - K(%d)|_max = %s\n", ns[i], ns[i + 1],
                      fmt(diff).c_str());
      }
      quantities["truncation_convergence"] = {
          {"n_basis", nb}, {"eps", fmt(eps)},
          {"z", {{"re", fmt(z.real())}, {"im", fmt(z.imag())}}},
          {"pairs", pairs}};
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  ordered_json egrid = ordered_json::array();
  for (double e : grid) egrid.push_back(fmt(e));
  j["eps_grid"] = egrid;
  j["quantities"] = quantities;
  write_json(out / "asymptotics.json", j);
  return 0;
}

// ------------------------------------------------------------------- field

int cmd_field(const RunConfig& cfg, const std::filesystem::path& out,
              bool quiet) {
  if (cfg.g.dimension != 2)
    throw ConfigError("field reconstruction is 2D only");
  const double eps = get_num(cfg.raw, "eps", 0.05 * cfg.g.d2);
  validate_geometry(cfg.g, eps);

  ordered_json fcfg = ordered_json::object();
  if (cfg.raw.contains("field")) fcfg = cfg.raw.at("field");
  const double x1_max = get_num(fcfg, "x1_max", cfg.g.d1 + 2.0 * cfg.g.d2);
  const int n1 = get_int(fcfg, "n1", 121);
  const int n2 = get_int(fcfg, "n2", 57);
  if (n1 < 2 || n2 < 2) throw ConfigError("field grid needs n1, n2 >= 2");

  ResonanceContext ctx(cfg.g, cfg.mode, cfg.trunc, cfg.rectangle_aperture);
  cplx z;
  Eigen::VectorXcd f;
  double residual = 0.0;
  if (eps == 0.0) {
    z = ctx.xi();
    f = Eigen::VectorXcd::Zero(cfg.trunc.n_basis);
    f[ctx.seed_flat()] = 1.0;
  } else {
    const SolveResult sr =
        solve_resonance(ctx, eps, ctx.xi() * cplx(1.0, -1e-8), cfg.tol);
    z = sr.z;
    residual = sr.residual;
    const TruncatedBS bs = ctx.assemble(z, eps);
    EigenBranch br;
    try {
      br = branch_eigenpair(bs, ctx.seed_flat());
    } catch (const std::runtime_error&) {
      br = kernel_eigenpair(bs, ctx.seed_flat());
    }
    f = br.vector;
  }

  std::vector<double> x1s(n1), x2s(n2);
  for (int i = 0; i < n1; ++i) x1s[i] = x1_max * i / double(n1 - 1);
  for (int i = 0; i < n2; ++i) x2s[i] = cfg.g.d2 * i / double(n2 - 1);
  const Eigen::MatrixXcd field = reconstruct_field(ctx, z, f, x1s, x2s);

  std::string csv = "x1,x2,re,im\n";
  for (int i = 0; i < n1; ++i)
    for (int k = 0; k < n2; ++k)
      csv += fmt(x1s[i]) + "," + fmt(x2s[k]) + "," + fmt(field(i, k).real()) +
             "," + fmt(field(i, k).imag()) + "\n";
  write_text(out / "field.csv", csv);

  ordered_json j;
  j["spec"] = 1;
  j["command"] = "field";
  j["geometry"] = geometry_json(cfg.g);
  j["seed"] = seed_json(cfg.g, cfg.mode);
  j["eps"] = fmt(eps);
  j["z"] = {{"re", fmt(z.real())}, {"im", fmt(z.imag())}};
  j["residual"] = fmt(residual);
  j["grid"] = {{"x1_max", fmt(x1_max)}, {"n1", n1}, {"n2", n2}};
  j["points_file"] = "field.csv";
  write_json(out / "field_summary.json", j);
  if (!quiet)
    std::printf("field at z = %s%si written to field.csv\n",
                fmt(z.real()).c_str(), fmt_signed(z.imag()).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"resonance poles of a waveguide coupled to a cavity through a "
               "small aperture"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  bool quiet = false;
  app.add_option("--config", config_path, "run configuration JSON")->required();
  app.add_option("--out", out_dir, "output directory (default .)");
  app.add_flag("--quiet", quiet, "suppress progress output");

  auto* c_spectrum = app.add_subcommand("spectrum", "closed cavity levels");
  auto* c_sweep = app.add_subcommand("sweep", "continue a resonance branch over eps");
  auto* c_validate = app.add_subcommand("validate", "cross-check one root against the grid oracle");
  auto* c_asym = app.add_subcommand("asymptotics", "perturbative scaling report");
  auto* c_field = app.add_subcommand("field", "resonance eigenfunction on a sample grid");
  for (auto* c : {c_spectrum, c_sweep, c_validate, c_asym, c_field})
    c->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = load_config(config_path);
    const std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    if (app.got_subcommand(c_spectrum)) return cmd_spectrum(cfg, out, quiet);
    if (app.got_subcommand(c_sweep)) return cmd_sweep(cfg, out, quiet);
    if (app.got_subcommand(c_validate)) return cmd_validate(cfg, out, quiet);
    if (app.got_subcommand(c_asym)) return cmd_asymptotics(cfg, out, quiet);
    if (app.got_subcommand(c_field)) return cmd_field(cfg, out, quiet);
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
