#include "convint/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "convint/errors.hpp"
#include "convint/filter.hpp"
#include "convint/rng.hpp"
#include "convint/spectral.hpp"
#include "convint/testbank.hpp"

namespace convint {

namespace {

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(name);
  }
}

std::array<double, 3> point_of(const Grid& g, std::size_t s) {
  auto c = g.spatial_coords(s);
  std::array<double, 3> x{};
  for (int a = 0; a < g.n; ++a) x[a] = g.x(a, c[a]);
  return x;
}

Field slab(const Field& f, const Grid& g, int j0, int j1) {
  std::size_t S = g.spatial_points();
  return f.slab(std::size_t(j0) * S, std::size_t(j1 - j0) * S);
}

std::vector<std::uint8_t> time_mask(const Grid& g, int jlo, int jhi) {
  std::vector<std::uint8_t> P(g.points(), 0);
  std::size_t S = g.spatial_points();
  for (int j = jlo; j < jhi; ++j) std::fill(P.begin() + long(j * S), P.begin() + long((j + 1) * S), 1);
  return P;
}

double slice_energy(const Grid& g, const Field& rho, const Field& V, int j, double gamma) {
  int n = g.n;
  return integrate_slice(g, j, [&](std::size_t p) {
    return 0.5 * V.vec(p, n).norm2() / rho(p) + pressure(rho(p), gamma) / (gamma - 1.0);
  });
}

int saturated_prefix(const std::vector<double>& e, double E0, double tol) {
  int j = 0;
  while (j + 1 < int(e.size()) && std::abs(e[j + 1] - E0) <= tol) ++j;
  return j;
}

double l2_spacetime(const Grid& g, const Field& a, const Field& b) {
  int n = g.n;
  return std::sqrt(integrate(g, [&](std::size_t p) { return (a.vec(p, n) - b.vec(p, n)).norm2(); }));
}

}  // namespace

Datum shear_datum() {
  Datum d;
  d.name = "shear";
  d.rho = [](const std::array<double, 3>& x) { return 1.0 + 0.2 * std::sin(2.0 * std::numbers::pi * x[0]); };
  d.V = [](const std::array<double, 3>& x) {
    return std::array<double, 3>{0.3 * std::sin(2.0 * std::numbers::pi * x[1]), 0.0, 0.0};
  };
  return d;
}

Datum rest_datum(double rho) {
  Datum d;
  d.name = "rest";
  d.rho = [rho](const std::array<double, 3>&) { return rho; };
  d.V = [](const std::array<double, 3>&) { return std::array<double, 3>{0.0, 0.0, 0.0}; };
  return d;
}

void sample_datum(const Grid& g, const Datum& d, Field& rho, Field& V) {
  std::size_t S = g.spatial_points();
  rho = Field(S, 1);
  V = Field(S, g.n);
  for (std::size_t s = 0; s < S; ++s) {
    auto x = point_of(g, s);
    rho(s) = d.rho(x);
    if (!(rho(s) > 0.0) || !std::isfinite(rho(s))) fail(ErrorKind::invalid_input, "datum: density must be positive");
    auto v = d.V(x);
    for (int a = 0; a < g.n; ++a) V(s, a) = v[a];
  }
}

double data_distance(const Grid& g, const Field& ra, const Field& Va, const Field& rb, const Field& Vb, double gamma) {
  int n = g.n;
  double tot = 0.0;
  for (std::size_t s = 0; s < g.spatial_points(); ++s) {
    Vec d = (1.0 / std::sqrt(ra(s))) * Va.vec(s, n) - (1.0 / std::sqrt(rb(s))) * Vb.vec(s, n);
    tot += std::pow(std::abs(ra(s) - rb(s)), gamma) + d.norm2();
  }
  return tot * g.cell_volume();
}

int window_bound_index(const CompSubsolution& s, double eps) {
  const Grid& g = s.grid;
  int n = g.n;
  double gm = s.gamma, E0 = s.budget.E0;
  std::size_t S = g.spatial_points();
  std::vector<int> dims;
  std::vector<double> lens;
  for (int a = 0; a < n; ++a) dims.push_back(g.N[a]), lens.push_back(g.len[a]);
  Spectral sp(dims, lens);
  std::vector<double> u(S), du(S), grad2(S, 0.0);
  for (int b = 0; b < n; ++b) {
    for (std::size_t k = 0; k < S; ++k) u[k] = s.V(k, b) / s.rho(k);
    for (int a = 0; a < n; ++a) {
      sp.derivative(u.data(), du.data(), a);
      for (std::size_t k = 0; k < S; ++k) grad2[k] += du[k] * du[k];
    }
  }
  double c = 2.0 * E0 * std::sqrt(*std::max_element(grad2.begin(), grad2.end()));
  double dt = g.dt();
  auto ddt = [&](int j, std::size_t k, const std::function<double(double)>& f) {
    int jm = std::max(0, j - 1), jp = std::min(g.Nt - 1, j + 1);
    return (f(s.rho(g.index(jp, k))) - f(s.rho(g.index(jm, k)))) / ((jp - jm) * dt);
  };
  double amax = 0.0, bmax = 0.0;
  int best = 0;
  for (int j = 0; j < g.Nt; ++j) {
    double a = 0.0, l1 = 0.0, sup = 0.0;
    for (std::size_t k = 0; k < S; ++k) {
      a += std::pow(std::abs(s.rho(g.index(j, k)) - s.rho(k)), gm);
      l1 += std::abs(ddt(j, k, [&](double r) { return pressure(r, gm); }));
      sup = std::max(sup, std::abs(ddt(j, k, [](double r) { return std::sqrt(r); })) / std::sqrt(s.rho(k)));
    }
    a *= g.cell_volume();
    l1 *= g.cell_volume();
    amax = std::max(amax, a);
    bmax = std::max(bmax, l1 / (gm - 1.0) + 4.0 * E0 * E0 * sup);
    if (amax >= 0.5 * eps || (g.t(j) - g.t0) * (bmax + c) >= 0.25 * eps) break;
    best = j;
  }
  return best;
}

int window_measured_index(const CompSubsolution& s, const Field& R0, double eps) {
  const Grid& g = s.grid;
  int n = g.n;
  double gm = s.gamma;
  std::size_t S = g.spatial_points();
  double dmax = 0.0;
  int best = 0;
  for (int j = 0; j < g.Nt; ++j) {
    double d = 0.0;
    for (std::size_t k = 0; k < S; ++k) {
      std::size_t p = g.index(j, k);
      Vec dv = (1.0 / std::sqrt(s.rho(p))) * s.V.vec(p, n) - (1.0 / std::sqrt(s.rho(k))) * s.V.vec(k, n);
      d += std::pow(std::abs(s.rho(p) - s.rho(k)), gm) + 2.0 * dv.norm2() + 2.0 * R0.sym(p, n).trace();
    }
    dmax = std::max(dmax, d * g.cell_volume());
    if (dmax >= 0.5 * eps) break;
    best = j;
  }
  return best;
}

PipelineReport wild_data_pipeline(const Datum& d, const PipelineConfig& cfg) {
  stage("gamma", [&] {
    check_gamma(cfg.n, cfg.gamma);
    return 0;
  });
  if (cfg.n != 2 && cfg.n != 3) fail(ErrorKind::invalid_input, "pipeline: n must be 2 or 3");
  if (cfg.N < 8 || cfg.Nt < 8) fail(ErrorKind::invalid_input, "pipeline: grid too small");
  if (!(cfg.eps > 0.0)) fail(ErrorKind::invalid_input, "pipeline: eps must be positive");
  if (cfg.seeds.empty() || cfg.solutions_per_value < 1) fail(ErrorKind::invalid_input, "pipeline: no seeds");
  if (cfg.nus.size() < 2) fail(ErrorKind::invalid_input, "pipeline: needs at least two viscosities");
  if (cfg.window != "measured" && cfg.window != "bound") fail(ErrorKind::invalid_input, "pipeline: unknown window mode");

  PipelineReport rep;
  int n = cfg.n;
  double gm = cfg.gamma;
  double nu_min = *std::min_element(cfg.nus.begin(), cfg.nus.end());

  Grid g0 = Grid::torus(n, cfg.N, 2, 0.0, 1.0);
  Field rho_d, V_d;
  sample_datum(g0, d, rho_d, V_d);
  Field rho_m = rho_d, V_m = V_d;
  {
    SpatialFilter f(g0.time_slab(0, 1), g0.dx(0));
    rho_m = f.apply(rho_d);
    V_m = f.apply(V_d);
  }

  stage("probe", [&] {
    Grid gp = Grid::torus(n, cfg.N, cfg.probe_Nt, 0.0, cfg.probe_horizon);
    CompRun pr = solve_comp_ns(gp, rho_m, V_m, nu_min, gm);
    int jT = saturated_prefix(pr.energy, pr.energy[0], cfg.energy_tol * pr.energy[0]);
    if (jT == 0) fail(ErrorKind::rejected_extract, "probe: energy is not saturated on any time interval");
    rep.probe_T = gp.t(jT);
    rep.horizon = cfg.horizon_factor * rep.probe_T;
    return 0;
  });

  Grid g = Grid::torus(n, cfg.N, cfg.Nt, 0.0, rep.horizon);
  std::vector<CompRun> runs = stage("viscous", [&] {
    std::vector<CompRun> r;
    for (double nu : cfg.nus) r.push_back(solve_comp_ns(g, rho_m, V_m, nu, gm));
    return r;
  });
  rep.extract = stage("extract", [&] { return extract_defect(runs, cfg.filter_cells * g.dx(0)); });
  runs.clear();
  rep.E0 = rep.extract.sub.budget.E0;
  double tol = cfg.energy_tol * rep.E0;

  CompSubsolution strict = stage("strictify", [&] {
    StrictifyCompOptions opt;
    opt.alpha = 2.0 * g.dx(0);
    opt.alpha_time = g.dt();
    if (cfg.trace_slack > 0.0) opt.trace_slack = cfg.trace_slack * tol;
    return strictify_comp(rep.extract.sub, cfg.eps / 3.0, opt, &rep.strictify);
  });
  const Grid& gs = strict.grid;
  std::vector<double> rc = stage("potential", [&] { return compensating_potential(strict); });
  rep.r_c_max = *std::max_element(rc.begin(), rc.end());
  Field R0 = sym_field(gs), R0c = sym_field(gs);
  for (int j = 0; j < gs.Nt; ++j)
    for (std::size_t k = 0; k < gs.spatial_points(); ++k) {
      std::size_t p = gs.index(j, k);
      SymMat R = strict.calR.sym(p, n) + SymMat::identity(n, strict.r(p));
      R0.set_sym(p, R);
      R0c.set_sym(p, R + SymMat::identity(n, rc[j]));
    }

  std::vector<double> es = energy_series(strict);
  rep.j_saturated = saturated_prefix(es, rep.E0, tol);
  rep.j_bound = window_bound_index(strict, 0.5 * cfg.eps);
  rep.j_measured = window_measured_index(strict, R0c, 0.5 * cfg.eps);
  int jw = cfg.window == "bound" ? rep.j_bound : rep.j_measured;
  rep.j0 = std::min({jw, rep.j_saturated / 2, gs.Nt - 1 - cfg.min_window});
  if (rep.j0 < cfg.min_window)
    throw Error(ErrorKind::construction_failed, "pipeline: time window before t0 has fewer than min_window samples",
                "window");
  rep.t0 = gs.t(rep.j0) - gs.t0;
  int j0 = rep.j0, Nts = gs.Nt;

  Grid g1 = gs.time_slab(0, j0 + 1), g2 = gs.time_slab(j0, Nts);
  FieldState fs1 = stage("run1", [&] {
    return make_field_state(g1, slab(strict.rho, gs, 0, j0 + 1), slab(strict.V, gs, 0, j0 + 1),
                            slab(R0c, gs, 0, j0 + 1), time_mask(g1, 1, j0));
  });
  FieldState fs2 = stage("run2", [&] {
    return make_field_state(g2, slab(strict.rho, gs, j0, Nts), slab(strict.V, gs, j0, Nts), slab(R0, gs, j0, Nts),
                            time_mask(g2, 1, Nts - j0));
  });

  // weak residual of the subsolution itself on each glued window, with its stress
  auto base_residual = [&](int jt) {
    Grid gc = gs.time_slab(jt, Nts);
    Candidate c;
    c.grid = gc;
    c.gamma = gm;
    c.rho = slab(strict.rho, gs, jt, Nts);
    c.V = slab(strict.V, gs, jt, Nts);
    c.stress = sym_field(gc);
    for (std::size_t p = 0; p < gc.points(); ++p) {
      int j = jt + int(p / gc.spatial_points());
      c.stress.set_sym(p, (j <= j0 ? R0c : R0).sym(gs.index(j, p % gc.spatial_points()), n));
    }
    VerifyReport r = verify_weak(c, make_bank(n, cfg.bank_K, gc.t0, gc.t1));
    return std::max(r.mass, r.momentum);
  };

  std::vector<EulerCandidate> later;
  for (int k = 0; k < cfg.solutions_per_value; ++k)
    later.push_back(stage("run2", [&] {
      return run(fs2, cfg.target, cfg.max_sweeps, mix_seed(0x5eed2, std::uint64_t(k)), cfg.scheme);
    }));
  // the same later pieces serve every initial value; the seeds of the values pick the early pieces
  for (std::uint64_t seed : cfg.seeds) {
    WildValue wv;
    wv.seed = seed;
    EulerCandidate early =
        stage("run1", [&] { return run(fs1, cfg.target, cfg.max_sweeps, mix_seed(seed, 0x5eed1), cfg.scheme); });
    std::vector<int> sat;
    int jmax = 1;
    std::vector<double> e(j0 + 1);
    for (int j = 1; j < j0; ++j) {
      e[j] = slice_energy(g1, fs1.rho0, early.Vnew, j, gm);
      if (std::abs(e[j] - rep.E0) <= tol) sat.push_back(j);
      if (e[j] > e[jmax]) jmax = j;
    }
    if (!sat.empty()) {
      Rng rng(mix_seed(seed, 0x7157));
      wv.j_tilde = sat[rng.below(sat.size())];
      wv.saturated = true;
    } else {
      wv.j_tilde = jmax;
    }
    int jt = wv.j_tilde;
    wv.t_tilde = gs.t(jt) - gs.t0;
    std::size_t S = gs.spatial_points();
    wv.rho0 = strict.rho.slab(std::size_t(jt) * S, S);
    wv.V0 = early.Vnew.slab(std::size_t(jt) * S, S);
    wv.distance = data_distance(g0, rho_d, V_d, wv.rho0, wv.V0, gm);
    double base = stage("verify", [&] { return base_residual(jt); });

    for (int k = 0; k < cfg.solutions_per_value; ++k) {
      const EulerCandidate& lt = later[k];
      WildSolution ws;
      ws.seed = mix_seed(0x5eed2, std::uint64_t(k));
      Candidate& c = ws.candidate;
      c.grid = gs.time_slab(jt, Nts);
      c.gamma = gm;
      c.rho = slab(strict.rho, gs, jt, Nts);
      c.V = Field(c.grid.points(), n);
      for (int j = jt; j < Nts; ++j)
        for (std::size_t s = 0; s < S; ++s) {
          Vec v = j <= j0 ? early.Vnew.vec(g1.index(j, s), n) : lt.Vnew.vec(g2.index(j - j0, s), n);
          c.V.set_vec(c.grid.index(j - jt, s), v);
        }
      c.certificates = {{"subsolution_residual", base},
                        {"viscous_l1", strict.certificate},
                        {"wave_l1_before_t0", early.certificate_l1},
                        {"wave_l1_after_t0", lt.certificate_l1},
                        {"defect_before_t0", early.final_trM},
                        {"defect_after_t0", lt.final_trM}};
      ws.residual_budget = base + early.certificate_l1 + lt.certificate_l1 + early.final_trM + lt.final_trM;
      ws.final_defect_fraction = lt.initial_trM > 0.0 ? lt.final_trM / lt.initial_trM : 0.0;
      ws.status1 = early.status;
      ws.status2 = lt.status;
      stage("verify", [&] {
        ws.energy = verify_energy(c, cfg.energy_tol, rep.E0);
        ws.weak = verify_weak(c, make_bank(n, cfg.bank_K, c.grid.t0, c.grid.t1));
        return 0;
      });
      wv.solutions.push_back(std::move(ws));
    }
    wv.min_solution_distance = 1e300;
    for (std::size_t a = 0; a < wv.solutions.size(); ++a)
      for (std::size_t b = a + 1; b < wv.solutions.size(); ++b)
        wv.min_solution_distance =
            std::min(wv.min_solution_distance,
                     l2_spacetime(wv.solutions[a].candidate.grid, wv.solutions[a].candidate.V, wv.solutions[b].candidate.V));
    if (wv.solutions.size() < 2) wv.min_solution_distance = 0.0;
    rep.values.push_back(std::move(wv));
  }
  rep.min_value_distance = rep.values.size() < 2 ? 0.0 : 1e300;
  for (std::size_t a = 0; a < rep.values.size(); ++a)
    for (std::size_t b = a + 1; b < rep.values.size(); ++b) {
      double s2 = 0.0;
      for (std::size_t s = 0; s < g0.spatial_points(); ++s)
        s2 += (rep.values[a].V0.vec(s, n) - rep.values[b].V0.vec(s, n)).norm2();
      rep.min_value_distance = std::min(rep.min_value_distance, std::sqrt(s2 * g0.cell_volume()));
    }
  return rep;
}

}  // namespace convint
