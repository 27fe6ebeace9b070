#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "convint/errors.hpp"
#include "convint/pipeline.hpp"
#include "convint/report.hpp"
#include "convint/scheme.hpp"
#include "convint/snapshot.hpp"
#include "convint/subsolution.hpp"
#include "convint/testbank.hpp"
#include "convint/verify.hpp"
#include "convint/viscous.hpp"
#include "convint/wavegen.hpp"

using namespace convint;

namespace {

void emit(const json& j) { std::cout << j.dump() << "\n"; }

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::invalid_input, "cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::usage, path + ":" + std::to_string(no) + ": expected key=value");
    auto trim = [](std::string s) {
      auto x = s.find_first_not_of(" \t\r");
      auto y = s.find_last_not_of(" \t\r");
      return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
    };
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    if (k.empty()) fail(ErrorKind::usage, path + ":" + std::to_string(no) + ": empty key");
    kv[k] = v;
  }
  return kv;
}

std::vector<double> numbers(const std::string& s) {
  std::istringstream in(s);
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  if (!in.eof()) fail(ErrorKind::invalid_input, "not a list of numbers: " + s);
  return v;
}

// config entries become --key=value unless the command line already sets the key
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  for (const auto& [k, v] : read_kv(path)) {
    bool given = false;
    for (const auto& a : rest)
      if (a == "--" + k || a.rfind("--" + k + "=", 0) == 0) given = true;
    if (!given) rest.push_back("--" + k + "=" + v);
  }
  return rest;
}

void require_seed(const std::optional<std::uint64_t>& seed, const std::string& cmd) {
  if (!seed) fail(ErrorKind::usage, cmd + ": --seed is required");
}

std::string sidecar_path(const std::string& p) { return p + ".json"; }

// ---------------------------------------------------------------- geometry
struct GeometryArgs {
  std::string state;
  std::optional<std::uint64_t> seed;
};

int cmd_geometry(const GeometryArgs& a) {
  auto kv = read_kv(a.state);
  for (const auto& [k, v] : kv)
    if (k != "n" && k != "V" && k != "U" && k != "R0" && k != "r")
      fail(ErrorKind::usage, "geometry state: unknown key " + k);
  if (!kv.count("n") || !kv.count("R0") || !kv.count("r")) fail(ErrorKind::usage, "geometry state needs n, R0 and r");
  int n = std::stoi(kv["n"]);
  if (n != 2 && n != 3) fail(ErrorKind::invalid_input, "geometry: n must be 2 or 3");
  int ns = SymMat::size(n);
  auto vec = [&](const std::string& k) {
    Vec v(n);
    if (!kv.count(k)) return v;
    auto x = numbers(kv[k]);
    if (int(x.size()) != n) fail(ErrorKind::invalid_input, "geometry: " + k + " needs n entries");
    for (int i = 0; i < n; ++i) v[i] = x[i];
    return v;
  };
  auto sym = [&](const std::string& k) {
    SymMat m(n);
    if (!kv.count(k)) return m;
    auto x = numbers(kv[k]);
    if (int(x.size()) != ns) fail(ErrorKind::invalid_input, "geometry: " + k + " needs n(n+1)/2 upper entries");
    for (int i = 0; i < ns; ++i) m.a[i] = x[i];
    return m;
  };
  HullQuery q{{vec("V"), sym("U")}, sym("R0"), std::stod(kv["r"])};
  HullResult h = hull_membership(q);
  json j;
  j["cmd"] = "geometry";
  j["membership"] = membership_name(h.cls);
  j["margin"] = h.margin;
  j["e"] = e_fn(q.state.V, q.state.U, q.R0);
  j["min_speed"] = min_speed(q.state.V, q.state.U, q.R0);
  j["distance_to_boundary"] = distance_to_boundary(q.state, q.R0, q.r);
  if (a.seed) {
    AdmissibleSegment seg = find_segment(q.state, q.R0, q.r, *a.seed);
    json js;
    js["lambda"] = seg.lambda;
    js["a"] = std::vector<double>(seg.a.x.begin(), seg.a.x.begin() + n);
    js["b"] = std::vector<double>(seg.b.x.begin(), seg.b.x.begin() + n);
    js["v_norm"] = seg.v_norm();
    j["segment"] = js;
  }
  emit(j);
  return 0;
}

// ---------------------------------------------------------------- wave
struct WaveArgs {
  std::optional<std::uint64_t> seed;
  int n = 2, k = 16, res = 32;
  double eps = 0.0, cutoff = 0.3;
  std::string out;
};

int cmd_wave(const WaveArgs& a) {
  require_seed(a.seed, "wave");
  if (a.n != 2 && a.n != 3) fail(ErrorKind::invalid_input, "wave: n must be 2 or 3");
  StateVU z{Vec(a.n), SymMat(a.n)};
  SymMat R0 = SymMat::identity(a.n);
  AdmissibleSegment seg = find_segment(z, R0, std::sqrt(double(a.n)), *a.seed);
  LocalizeOptions lo;
  lo.cutoff_width = a.cutoff;
  lo.sample_res = a.res;
  double eps = a.eps > 0.0 ? a.eps : std::numeric_limits<double>::infinity();
  LocalizedWave w = localize(seg, a.k, eps, lo);
  json j;
  j["cmd"] = "wave";
  j["k"] = w.k;
  j["lambda"] = w.lambda;
  j["k_min"] = a.eps > 0.0 ? k_min(seg, a.eps, a.cutoff) : 0;
  j["residual_sup"] = w.cert.residual_sup;
  j["residual_bound"] = w.cert.residual_bound;
  j["mean_V"] = w.cert.mean_V;
  j["mean_U"] = w.cert.mean_U;
  j["image_dist"] = w.cert.image_dist;
  j["image_bound"] = w.cert.image_bound;
  j["l1_V"] = w.cert.l1_V;
  if (!a.out.empty()) {
    Grid g = Grid::unit_cube(a.n, a.res, a.res);
    CubeBox box;
    for (int ax = 0; ax < a.n; ++ax) box.size[ax] = a.res;
    box.size[a.n] = a.res;
    CubeFields cf = rescale_wave(w, g, box, 1.0);
    Snapshot s;
    s.grid = g;
    s.add("V", cf.V);
    s.add("U", cf.U);
    s.add("res_mass", cf.res_mass);
    s.add("res_mom", cf.res_mom);
    write_snapshot(a.out, s);
    j["out"] = a.out;
  }
  emit(j);
  return 0;
}

// ---------------------------------------------------------------- integrate
struct IntegrateArgs {
  std::optional<std::uint64_t> seed;
  std::string in, out, csv;
  int benchmark = 0;
  double target = 0.1;
  int max_sweeps = 50;
  double ppw = 8.0;
  int fallback_cells = 16;
};

int cmd_integrate(const IntegrateArgs& a) {
  require_seed(a.seed, "integrate");
  if (a.in.empty() == (a.benchmark == 0)) fail(ErrorKind::usage, "integrate: give exactly one of --in or --benchmark");
  FieldState fs;
  double gamma = 0.0;
  if (a.benchmark > 0) {
    Grid g = Grid::unit_cube(2, a.benchmark, a.benchmark);
    Field R0 = sym_field(g);
    for (std::size_t p = 0; p < g.points(); ++p) R0.set_sym(p, SymMat::identity(2));
    fs = make_field_state(g, scalar_field(g, 1.0), vector_field(g), R0);
  } else {
    Snapshot s = read_snapshot(a.in);
    std::vector<std::uint8_t> P;
    if (s.has("P")) {
      const Field& m = s.get("P");
      for (double x : m.v) P.push_back(x != 0.0);
    }
    fs = make_field_state(s.grid, s.get("rho0"), s.get("V0"), s.get("R0"), P);
    gamma = s.gamma;
  }
  SchemeConfig cfg;
  cfg.points_per_wavelength = a.ppw;
  cfg.fallback_cells = a.fallback_cells;
  EulerCandidate c = run(fs, a.target, a.max_sweeps, *a.seed, cfg);
  for (const auto& r : c.reports) emit(to_json(r));
  json j;
  j["cmd"] = "integrate";
  j["status"] = c.status;
  j["sweeps"] = int(c.reports.size()) - 1;
  j["initial_trM"] = c.initial_trM;
  j["final_trM"] = c.final_trM;
  j["energy_identity_ratio"] = energy_identity_ratio(c);
  j["certificate_l1"] = c.certificate_l1;
  j["certificate_sup"] = c.certificate_sup;
  emit(j);
  if (!a.csv.empty()) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : c.reports)
      rows.push_back({double(r.sweep), r.int_trM, r.min_lambda_M, r.lambda_star, r.l1_dV, r.residual_l1});
    write_csv(a.csv, {"sweep", "int_trM", "min_lambda_M", "lambda_star", "l1_dV", "residual_l1"}, rows);
  }
  if (!a.out.empty()) {
    Snapshot s;
    s.grid = c.state.grid;
    s.gamma = gamma;
    s.add("rho0", c.state.rho0);
    s.add("V0", c.state.V0);
    s.add("R0", c.state.R0);
    s.add("Vnew", c.Vnew);
    s.add("Unew", c.Unew);
    write_snapshot(a.out, s);
  }
  return 0;
}

// ---------------------------------------------------------------- subsolution
struct SubArgs {
  std::string in, in2, out, op;
  double alpha = 0.0, alpha_time = 0.0, eps = 0.0, weight = 0.5;
  double E0 = 0.0, T = 0.0;
};

struct Loaded {
  bool comp = true;
  CompSubsolution c;
  IncompSubsolution i;
};

Loaded load_sub(const std::string& path, const SubArgs& a) {
  Snapshot s = read_snapshot(path);
  double E0 = a.E0, T = a.T, cert = 0.0;
  if (std::filesystem::exists(sidecar_path(path))) {
    json side = json::parse(read_file(sidecar_path(path)));
    if (!(E0 > 0.0)) E0 = side.value("E0", 0.0);
    if (!(T > 0.0)) T = side.value("T", 0.0);
    cert = side.value("certificate", 0.0);
  }
  if (!(T > 0.0)) T = s.grid.t1 - s.grid.t0;
  Loaded L;
  if (s.has("v")) {
    L.comp = false;
    L.i = make_incomp(s.grid, s.get("v"), s.get("R"), {E0 > 0.0 ? E0 : 1.0, T});
    if (!(E0 > 0.0)) L.i.budget.E0 = energy_total(L.i, 0);
    L.i.certificate = cert;
  } else {
    L.c = make_comp(s.grid, s.get("rho"), s.get("V"), s.get("calR"), s.get("r"), s.gamma, {E0 > 0.0 ? E0 : 1.0, T});
    if (!(E0 > 0.0)) L.c.budget.E0 = energy_total(L.c, 0);
    L.c.certificate = cert;
  }
  return L;
}

void save_sub(const std::string& path, const Loaded& L) {
  Snapshot s;
  json side;
  if (L.comp) {
    s.grid = L.c.grid;
    s.gamma = L.c.gamma;
    s.add("rho", L.c.rho);
    s.add("V", L.c.V);
    s.add("calR", L.c.calR);
    s.add("r", L.c.r);
    side = {{"E0", L.c.budget.E0}, {"T", L.c.budget.T}, {"gamma", L.c.gamma}, {"certificate", L.c.certificate}};
  } else {
    s.grid = L.i.grid;
    s.add("v", L.i.v);
    s.add("R", L.i.R);
    side = {{"E0", L.i.budget.E0}, {"T", L.i.budget.T}, {"certificate", L.i.certificate}};
  }
  write_snapshot(path, s);
  write_file(sidecar_path(path), side.dump(2) + "\n");
}

int cmd_subsolution(const SubArgs& a) {
  Loaded L = load_sub(a.in, a);
  json j;
  j["cmd"] = "subsolution";
  j["op"] = a.op;
  if (a.op == "energy") {
    std::vector<double> e;
    for (int k = 0; k < (L.comp ? L.c.grid.Nt : L.i.grid.Nt); ++k)
      e.push_back(L.comp ? energy_total(L.c, k) : energy_total(L.i, k));
    j["energy"] = e;
    if (L.comp) j["compatibility_excess"] = energy_compatibility_excess(L.c, 1e-3 * L.c.budget.E0);
  } else if (a.op == "potential") {
    if (!L.comp) fail(ErrorKind::invalid_input, "potential: needs a compressible subsolution");
    j["r_c"] = compensating_potential(L.c);
  } else if (a.op == "mollify") {
    double at = a.alpha_time > 0.0 ? a.alpha_time : a.alpha;
    if (L.comp) L.c = mollify_subsolution(L.c, a.alpha, at);
    else L.i = mollify_subsolution(L.i, a.alpha, at);
  } else if (a.op == "strictify") {
    StrictifyReport r;
    if (L.comp) {
      StrictifyCompOptions o;
      o.alpha = a.alpha;
      o.alpha_time = a.alpha_time;
      L.c = strictify_comp(L.c, a.eps, o, &r);
    } else {
      L.i = strictify_incomp(L.i, a.eps, &r);
    }
    j["strictify"] = to_json(r);
  } else if (a.op == "combine") {
    if (a.in2.empty()) fail(ErrorKind::usage, "combine: --in2 is required");
    Loaded M = load_sub(a.in2, a);
    if (M.comp != L.comp) fail(ErrorKind::invalid_input, "combine: inputs differ in kind");
    if (L.comp) L.c = convex_combine_comp({L.c, M.c}, {a.weight, 1.0 - a.weight});
    else L.i = convex_combine_incomp({L.i, M.i}, {a.weight, 1.0 - a.weight});
  } else {
    fail(ErrorKind::usage, "subsolution: unknown --op " + a.op);
  }
  if (!a.out.empty()) {
    if (a.op == "energy" || a.op == "potential") fail(ErrorKind::usage, "subsolution: --out is only for transforms");
    save_sub(a.out, L);
    j["out"] = a.out;
  }
  emit(j);
  return 0;
}

// ---------------------------------------------------------------- viscous
struct ViscousArgs {
  std::string datum = "shear", model = "comp", out, csv;
  int N = 48, Nt = 48;
  double horizon = 0.6, gamma = 2.0, filter_cells = 1.5;
  std::vector<double> nu{4e-3, 2e-3, 1e-3};
};

Datum datum_named(const std::string& name) {
  if (name == "shear") return shear_datum();
  if (name == "rest") return rest_datum(1.0);
  fail(ErrorKind::usage, "unknown datum " + name);
}

int cmd_viscous(const ViscousArgs& a) {
  if (a.model == "tg") {
    Grid g = Grid::torus(2, a.N, a.Nt, 0.0, a.horizon);
    Field v0 = taylor_green(g.time_slab(0, 1), a.nu.front());
    IncompRun r = solve_incomp_ns(g, v0, a.nu.front());
    Field ex = taylor_green(g, a.nu.front());
    double num = 0.0, den = 0.0;
    std::size_t S = g.spatial_points(), last = std::size_t(g.Nt - 1) * S;
    for (std::size_t s = 0; s < S; ++s)
      for (int c = 0; c < 2; ++c) {
        double d = r.v(last + s, c) - ex(last + s, c);
        num += d * d;
        den += ex(last + s, c) * ex(last + s, c);
      }
    json j{{"cmd", "viscous"}, {"model", "tg"}, {"nu", a.nu.front()}, {"steps", r.steps},
           {"relative_l2_error", std::sqrt(num / den)}, {"energy", r.energy}};
    emit(j);
    return 0;
  }
  if (a.model != "comp") fail(ErrorKind::usage, "viscous: --model is comp or tg");
  check_gamma(2, a.gamma);
  Grid g = Grid::torus(2, a.N, a.Nt, 0.0, a.horizon);
  Field rho0, V0;
  sample_datum(g, datum_named(a.datum), rho0, V0);
  std::vector<CompRun> runs;
  for (double nu : a.nu) {
    runs.push_back(solve_comp_ns(g, rho0, V0, nu, a.gamma));
    const CompRun& r = runs.back();
    double drift = 0.0;
    for (double m : r.mass) drift = std::max(drift, std::abs(m - r.mass[0]) / r.mass[0]);
    emit({{"cmd", "viscous"}, {"nu", nu}, {"steps", r.steps}, {"rejected", r.rejected},
          {"max_step_increase", r.max_step_increase}, {"mass_drift", drift}, {"energy_first", r.energy.front()},
          {"energy_last", r.energy.back()}, {"viscous_l1", r.viscous_l1}});
  }
  if (!a.csv.empty()) {
    std::vector<std::string> h{"t"};
    for (double nu : a.nu) h.push_back("energy_nu_" + json(nu).dump());
    std::vector<std::vector<double>> rows;
    for (int j = 0; j < g.Nt; ++j) {
      std::vector<double> row{g.t(j)};
      for (const auto& r : runs) row.push_back(r.energy[j]);
      rows.push_back(row);
    }
    write_csv(a.csv, h, rows);
  }
  if (runs.size() >= 2) {
    DefectExtract ex = extract_defect(runs, a.filter_cells * g.dx(0));
    json j = to_json(ex);
    j["cmd"] = "extract";
    emit(j);
    if (!a.out.empty()) {
      Loaded L;
      L.c = ex.sub;
      save_sub(a.out, L);
    }
  }
  return 0;
}

// ---------------------------------------------------------------- pipeline
struct PipelineArgs {
  std::optional<std::uint64_t> seed;
  int values = 3, solutions = 2, n = 2, N = 48, Nt = 48, max_sweeps = 8;
  double gamma = 2.0, eps = 0.5;
  std::string window = "measured", datum = "shear", out_dir, csv;
};

int cmd_pipeline(const PipelineArgs& a) {
  require_seed(a.seed, "pipeline");
  check_gamma(a.n, a.gamma);
  PipelineConfig cfg;
  cfg.n = a.n;
  cfg.N = a.N;
  cfg.Nt = a.Nt;
  cfg.gamma = a.gamma;
  cfg.eps = a.eps;
  cfg.solutions_per_value = a.solutions;
  cfg.max_sweeps = a.max_sweeps;
  cfg.window = a.window;
  cfg.seeds.clear();
  for (int i = 0; i < a.values; ++i) cfg.seeds.push_back(*a.seed + std::uint64_t(i));
  PipelineReport r = wild_data_pipeline(datum_named(a.datum), cfg);
  json j = to_json(r);
  j["cmd"] = "pipeline";
  emit(j);
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    for (std::size_t v = 0; v < r.values.size(); ++v)
      for (std::size_t k = 0; k < r.values[v].solutions.size(); ++k) {
        const Candidate& c = r.values[v].solutions[k].candidate;
        Snapshot s;
        s.grid = c.grid;
        s.gamma = c.gamma;
        s.add("rho", c.rho);
        s.add("V", c.V);
        write_snapshot(a.out_dir + "/value" + std::to_string(v) + "_solution" + std::to_string(k) + ".wfld", s);
      }
  }
  if (!a.csv.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t v = 0; v < r.values.size(); ++v)
      for (std::size_t k = 0; k < r.values[v].solutions.size(); ++k) {
        const EnergyCheck& e = r.values[v].solutions[k].energy;
        for (std::size_t i = 0; i < e.t.size(); ++i) rows.push_back({double(v), double(k), e.t[i], e.energy[i]});
      }
    write_csv(a.csv, {"value", "solution", "t", "energy"}, rows);
  }
  return 0;
}

// ---------------------------------------------------------------- verify
struct VerifyArgs {
  std::string in, csv;
  int K = 8;
  double tol = 1e-3, E0 = 0.0;
  double max_residual = 0.0;
};

int cmd_verify(const VerifyArgs& a) {
  Snapshot s = read_snapshot(a.in);
  Candidate c = candidate_from_snapshot(s);
  if (std::filesystem::exists(sidecar_path(a.in))) {
    json side = json::parse(read_file(sidecar_path(a.in)));
    if (side.contains("certificates"))
      for (auto& [k, v] : side["certificates"].items()) c.certificates[k] = v.get<double>();
  }
  TestBank bank = make_bank(c.grid.n, a.K, c.grid.t0, c.grid.t1);
  VerifyReport r = verify(c, bank, a.tol, a.E0);
  emit(to_json(r));
  if (!a.csv.empty()) {
    std::vector<std::vector<double>> rows;
    for (int j = 0; j < c.grid.Nt; ++j) rows.push_back({c.grid.t(j), r.energy[j], r.energy[j] - r.energy_ref});
    write_csv(a.csv, {"t", "energy", "excess"}, rows);
  }
  bool bad = r.violations > 0 || (a.max_residual > 0.0 && std::max(r.mass, r.momentum) > a.max_residual);
  return bad ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convint: convex integration laboratory for the Euler equations"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  GeometryArgs ga;
  auto* geo = app.add_subcommand("geometry", "hull queries for a state given in a key=value file");
  geo->add_option("--state", ga.state, "file with n, V, U, R0, r")->required();
  geo->add_option("--seed", ga.seed, "also search an admissible segment");

  WaveArgs wa;
  auto* wav = app.add_subcommand("wave", "localized wave and its certificates");
  wav->add_option("--seed", wa.seed);
  wav->add_option("--n", wa.n);
  wav->add_option("--k", wa.k);
  wav->add_option("--eps", wa.eps, "target neighbourhood; 0 means none");
  wav->add_option("--cutoff", wa.cutoff);
  wav->add_option("--res", wa.res, "samples per axis for certificates and output");
  wav->add_option("--out", wa.out);

  IntegrateArgs ia;
  auto* itg = app.add_subcommand("integrate", "run perturbation sweeps on a field state");
  itg->add_option("--seed", ia.seed);
  itg->add_option("--in", ia.in, "snapshot with rho0, V0, R0 and optional P");
  itg->add_option("--benchmark", ia.benchmark, "constant state on an N^2 x N grid instead of --in");
  itg->add_option("--target", ia.target);
  itg->add_option("--max-sweeps", ia.max_sweeps);
  itg->add_option("--ppw", ia.ppw, "points per wavelength");
  itg->add_option("--fallback-cells", ia.fallback_cells);
  itg->add_option("--out", ia.out);
  itg->add_option("--csv", ia.csv);

  SubArgs sa;
  auto* sub = app.add_subcommand("subsolution", "combine, mollify or strictify subsolutions");
  sub->add_option("--in", sa.in)->required();
  sub->add_option("--op", sa.op, "energy, potential, mollify, strictify or combine")->required();
  sub->add_option("--in2", sa.in2);
  sub->add_option("--weight", sa.weight);
  sub->add_option("--alpha", sa.alpha);
  sub->add_option("--alpha-time", sa.alpha_time);
  sub->add_option("--eps", sa.eps);
  sub->add_option("--E0", sa.E0);
  sub->add_option("--T", sa.T);
  sub->add_option("--out", sa.out);

  ViscousArgs va;
  auto* vis = app.add_subcommand("viscous", "viscous runs and defect extraction");
  vis->add_option("--datum", va.datum);
  vis->add_option("--model", va.model, "comp or tg");
  vis->add_option("--N", va.N);
  vis->add_option("--Nt", va.Nt);
  vis->add_option("--horizon", va.horizon);
  vis->add_option("--gamma", va.gamma);
  vis->add_option("--nu", va.nu)->delimiter(',');
  vis->add_option("--filter-cells", va.filter_cells);
  vis->add_option("--out", va.out);
  vis->add_option("--csv", va.csv);

  PipelineArgs pa;
  auto* pip = app.add_subcommand("pipeline", "wild initial data and their solutions");
  pip->add_option("--seed", pa.seed);
  pip->add_option("--values", pa.values);
  pip->add_option("--solutions", pa.solutions);
  pip->add_option("--n", pa.n);
  pip->add_option("--N", pa.N);
  pip->add_option("--Nt", pa.Nt);
  pip->add_option("--gamma", pa.gamma);
  pip->add_option("--eps", pa.eps);
  pip->add_option("--max-sweeps", pa.max_sweeps);
  pip->add_option("--window", pa.window);
  pip->add_option("--datum", pa.datum);
  pip->add_option("--out-dir", pa.out_dir);
  pip->add_option("--csv", pa.csv);

  VerifyArgs vfa;
  auto* ver = app.add_subcommand("verify", "weak residuals and energy inequality of a snapshot");
  ver->add_option("--in", vfa.in)->required();
  ver->add_option("--K", vfa.K);
  ver->add_option("--tol", vfa.tol);
  ver->add_option("--E0", vfa.E0, "energy scale for the tolerance; 0 uses the initial energy");
  ver->add_option("--max-residual", vfa.max_residual, "exit 4 when a residual exceeds this");
  ver->add_option("--csv", vfa.csv);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << json{{"error", kind_name(e.kind())}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    if (*geo) return cmd_geometry(ga);
    if (*wav) return cmd_wave(wa);
    if (*itg) return cmd_integrate(ia);
    if (*sub) return cmd_subsolution(sa);
    if (*vis) return cmd_viscous(va);
    if (*pip) return cmd_pipeline(pa);
    if (*ver) return cmd_verify(vfa);
  } catch (const Error& e) {
    json j{{"error", kind_name(e.kind())}, {"message", e.what()}};
    if (!e.stage().empty()) j["stage"] = e.stage();
    std::cerr << j.dump() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 3;
  }
  return 0;
}
