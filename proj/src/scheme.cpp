#include "convint/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "convint/errors.hpp"
#include "convint/rng.hpp"
#include "convint/spectral.hpp"

namespace convint {

namespace {

SymMat U_of(const Vec& V, double rho) {
  int n = V.n;
  return (1.0 / rho) * SymMat::outer(V) - SymMat::identity(n, V.norm2() / (n * rho));
}

double integrate_mask(const Grid& g, const std::vector<std::uint8_t>& mask,
                      const std::function<double(std::size_t)>& f) {
  return integrate(g, [&](std::size_t p) { return mask[p] ? f(p) : 0.0; });
}

}  // namespace

FieldState make_field_state(const Grid& g, Field rho0, Field V0, Field R0, std::vector<std::uint8_t> P,
                            double Lambda) {
  g.validate();
  FieldState fs;
  fs.grid = g;
  int n = g.n;
  std::size_t np = g.points();
  if (rho0.points() != np || V0.points() != np || R0.points() != np || V0.comps != n ||
      R0.comps != SymMat::size(n))
    fail(ErrorKind::invalid_input, "make_field_state: field shapes do not match the grid");
  fs.rho0 = std::move(rho0);
  fs.V0 = std::move(V0);
  fs.R0 = std::move(R0);
  fs.U0 = sym_field(g);
  double rmin = 1e300, rmax = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    double rho = fs.rho0(p);
    if (!(rho > 0.0)) fail(ErrorKind::invalid_input, "make_field_state: rho0 <= 0 (invalid state)");
    rmin = std::min(rmin, rho);
    rmax = std::max(rmax, rho);
    fs.U0.set_sym(p, U_of(fs.V0.vec(p, n), rho));
  }
  fs.Vtil = vector_field(g);
  fs.Util = sym_field(g);
  fs.P = P.empty() ? std::vector<std::uint8_t>(np, 1) : std::move(P);
  if (fs.P.size() != np) fail(ErrorKind::invalid_input, "make_field_state: mask size mismatch");
  double need = std::max({1.0, std::sqrt(rmax), 1.0 / std::sqrt(rmin)});
  fs.Lambda = Lambda > 0.0 ? Lambda : need;
  validate_field_state(fs);
  return fs;
}

void validate_field_state(const FieldState& fs) {
  const Grid& g = fs.grid;
  int n = g.n;
  double L2 = fs.Lambda * fs.Lambda;
  for (std::size_t p = 0; p < g.points(); ++p) {
    double rho = fs.rho0(p);
    if (!(rho > 0.0)) fail(ErrorKind::invalid_input, "field state: rho0 <= 0 (invalid state)");
    if (rho > L2 * (1 + 1e-12) || rho * L2 < 1.0 - 1e-12)
      fail(ErrorKind::invalid_input, "field state: rho0 outside [1/Lambda^2, Lambda^2]");
    SymMat U = fs.U0.sym(p, n);
    SymMat want = U_of(fs.V0.vec(p, n), rho);
    if ((U - want).max_abs_entry() > 1e-10 * (1.0 + want.max_abs_entry()))
      fail(ErrorKind::invalid_input, "field state: U0 does not match V0 (x) V0 / rho0");
    if (fs.P[p]) {
      if (lambda_min(fs.R0.sym(p, n)) <= 0.0) fail(ErrorKind::invalid_input, "field state: R0 not positive definite on P");
    } else {
      for (int c = 0; c < n; ++c)
        if (fs.Vtil(p, c) != 0.0) fail(ErrorKind::invalid_input, "field state: perturbation outside P");
      for (int c = 0; c < SymMat::size(n); ++c)
        if (fs.Util(p, c) != 0.0) fail(ErrorKind::invalid_input, "field state: perturbation outside P");
    }
  }
}

DefectField compute_defect(const FieldState& fs) {
  const Grid& g = fs.grid;
  int n = g.n;
  DefectField D;
  D.M = sym_field(g);
  D.min_lambda = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < g.points(); ++p) {
    double rho = fs.rho0(p);
    if (!(rho > 0.0)) fail(ErrorKind::invalid_input, "compute_defect: rho0 <= 0 (invalid state)");
    Vec V0 = fs.V0.vec(p, n);
    Vec W = V0 + fs.Vtil.vec(p, n);
    SymMat M = SymMat::identity(n, V0.norm2() / (n * rho)) + fs.R0.sym(p, n) - (1.0 / rho) * SymMat::outer(W) +
               fs.U0.sym(p, n) + fs.Util.sym(p, n);
    D.M.set_sym(p, M);
    if (fs.P[p]) D.min_lambda = std::min(D.min_lambda, lambda_min(M));
  }
  D.int_trM = integrate_mask(g, fs.P, [&](std::size_t p) { return D.M.sym(p, n).trace(); });
  return D;
}

double lambda_star(const FieldState& fs, const DefectField& D, const std::vector<std::uint8_t>& omega) {
  int n = fs.grid.n;
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < fs.grid.points(); ++p) {
    if (!omega[p]) continue;
    m = std::min({m, lambda_min(D.M.sym(p, n)), lambda_min(fs.R0.sym(p, n))});
  }
  return m;
}

double lambda_star(const FieldState& fs, const std::vector<std::uint8_t>& omega) {
  return lambda_star(fs, compute_defect(fs), omega);
}

std::vector<CubeBox> tile_cubes(const FieldState& fs, int cs, int ct, const std::array<int, 4>& offset) {
  const Grid& g = fs.grid;
  int n = g.n;
  std::vector<CubeBox> out;
  std::array<int, 4> ext{}, side{}, count{};
  for (int a = 0; a < n; ++a) ext[a] = g.N[a], side[a] = cs;
  ext[n] = g.Nt;
  side[n] = ct;
  for (int a = 0; a <= n; ++a) count[a] = std::max(0, (ext[a] - offset[a]) / side[a]);
  std::size_t total = 1;
  for (int a = 0; a <= n; ++a) total *= std::size_t(count[a]);
  for (std::size_t q = 0; q < total; ++q) {
    CubeBox b;
    std::size_t rem = q;
    for (int a = n; a >= 0; --a) {
      b.lo[a] = offset[a] + int(rem % count[a]) * side[a];
      b.size[a] = side[a];
      rem /= count[a];
    }
    bool inside = true;
    for (std::size_t l = 0; l < b.count(n) && inside; ++l) inside = fs.P[box_grid_point(g, b, l)] != 0;
    if (inside) out.push_back(b);
  }
  return out;
}

CubeInfo cube_stats(const FieldState& fs, const DefectField& D, const CubeBox& box, double lstar) {
  const Grid& g = fs.grid;
  int n = g.n;
  CubeInfo c;
  c.box = box;
  std::size_t cnt = box.count(n);
  c.Vbar = Vec(n);
  c.Ubar = SymMat(n);
  c.R0bar = SymMat(n);
  c.rho_min = 1e300;
  c.CQ = 1e300;
  for (std::size_t l = 0; l < cnt; ++l) {
    std::size_t p = box_grid_point(g, box, l);
    double rho = fs.rho0(p);
    Vec V0 = fs.V0.vec(p, n);
    c.Vbar += V0 + fs.Vtil.vec(p, n);
    c.Ubar += fs.U0.sym(p, n) + fs.Util.sym(p, n);
    c.R0bar += fs.R0.sym(p, n);
    c.rho_min = std::min(c.rho_min, rho);
    c.CQ = std::min(c.CQ, V0.norm2() / rho);
    c.int_trM += D.M.sym(p, n).trace() * g.time_weight(box.lo[n] + int(l / (cnt / box.size[n])));
  }
  c.int_trM *= g.cell_volume();
  double inv = 1.0 / double(cnt);
  c.Vbar *= inv;
  c.Ubar *= inv;
  c.R0bar *= inv;
  c.RQ = c.R0bar - SymMat::identity(n, lstar / (16.0 * n));
  c.MQ = SymMat::identity(n, c.CQ / n) + c.RQ - (1.0 / c.rho_min) * SymMat::outer(c.Vbar) + c.Ubar;
  for (std::size_t l = 0; l < cnt; ++l) {
    std::size_t p = box_grid_point(g, box, l);
    c.fluct_M = std::max(c.fluct_M, opnorm_inf(D.M.sym(p, n) - c.MQ));
    c.fluct_R0 = std::max(c.fluct_R0, opnorm_inf(c.R0bar - fs.R0.sym(p, n)));
    Vec V0 = fs.V0.vec(p, n);
    c.fluct_C = std::max(c.fluct_C, std::abs(c.CQ - V0.norm2() / fs.rho0(p)));
  }
  return c;
}

namespace {

bool cube_passes(const CubeInfo& c, int n, double lstar) {
  return is_positive_definite(c.RQ, 0.0) && c.fluct_M < lstar / (8.0 * n) && c.fluct_R0 < lstar / (64.0 * n) &&
         c.fluct_C <= lstar / (64.0 * n);
}

int time_side(const Grid& g, int cs) {
  int ct = int(std::lround(cs * g.dx(0) / g.dt()));
  return std::clamp(ct, 2, g.Nt);
}

}  // namespace

CubePartition choose_delta(const FieldState& fs, const DefectField& D, double lstar) {
  if (!(lstar > 0.0)) fail(ErrorKind::precondition, "choose_delta: lambda_* must be positive");
  const Grid& g = fs.grid;
  int n = g.n;
  int smax = g.N[0];
  for (int a = 1; a < n; ++a) smax = std::min(smax, g.N[a]);
  for (int cs = smax; cs >= 2; cs /= 2) {
    int ct = time_side(g, cs);
    auto boxes = tile_cubes(fs, cs, ct, {0, 0, 0, 0});
    if (boxes.empty()) continue;
    CubePartition part;
    part.cells_space = cs;
    part.cells_time = ct;
    part.delta = cs * g.dx(0);
    part.lambda_star = lstar;
    bool ok = true;
    double covered = 0.0;
    for (const auto& b : boxes) {
      CubeInfo c = cube_stats(fs, D, b, lstar);
      if (!cube_passes(c, n, lstar)) {
        ok = false;
        break;
      }
      covered += c.int_trM;
      part.cubes.push_back(c);
    }
    if (!ok) continue;
    part.omega1_fraction = D.int_trM > 0.0 ? covered / D.int_trM : 1.0;
    if (part.omega1_fraction < 0.5) continue;
    return part;
  }
  fail(ErrorKind::resolution_too_coarse, "choose_delta: no cube side above one cell meets the fluctuation bounds");
}

CubePartition choose_delta(const FieldState& fs, double lstar) { return choose_delta(fs, compute_defect(fs), lstar); }

namespace {

struct WaveGeom {
  double L;
  double spacing[4];
};

WaveGeom wave_geometry(const Grid& g, const CubeBox& box, double rho_min) {
  int n = g.n;
  double sr = std::sqrt(rho_min);
  double half_x = 1e300;
  for (int a = 0; a < n; ++a) half_x = std::min(half_x, 0.5 * box.size[a] * g.dx(a));
  double half_t = 0.5 * box.size[n] * g.dt();
  WaveGeom w;
  w.L = std::min(half_x, half_t / sr);
  for (int a = 0; a < n; ++a) w.spacing[a] = g.dx(a) / w.L;
  w.spacing[n] = g.dt() / (sr * w.L);
  return w;
}

}  // namespace

CubePerturbation perturb_cube(const CubeInfo& cube, const FieldState& fs, const DefectField& D, double lstar,
                              std::uint64_t seed, const SchemeConfig& cfg) {
  const Grid& g = fs.grid;
  int n = g.n;
  CubePerturbation out;
  out.box = cube.box;
  out.rho_min = cube.rho_min;
  if (!(cube.rho_min > 0.0)) fail(ErrorKind::precondition, "perturb_cube: rho_min must be positive");
  std::size_t cnt = cube.box.count(n);
  out.V = Field(cnt, n);
  out.U = Field(cnt, SymMat::size(n));
  out.trMQ = cube.MQ.trace();
  double vol_P = integrate_mask(g, fs.P, [](std::size_t) { return 1.0; });
  double mean_tr = vol_P > 0.0 ? D.int_trM / vol_P : 0.0;
  if (out.trMQ <= cfg.skip_fraction * mean_tr || out.trMQ <= 0.0) {
    out.skipped = true;
    out.note = "saturated";
    return out;
  }
  if (lambda_min(cube.MQ) <= 0.0) {
    out.skipped = true;
    out.note = "cube average outside the hull";
    return out;
  }
  double sr = std::sqrt(cube.rho_min);
  StateVU z{(1.0 / sr) * cube.Vbar, cube.Ubar};
  double r = std::sqrt(cube.CQ + cube.RQ.trace());
  AdmissibleSegment seg;
  try {
    seg = find_segment(z, cube.RQ, r, seed);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::precondition && e.kind() != ErrorKind::construction_failed) throw;
    out.skipped = true;
    out.note = e.what();
    return out;
  }
  // widen to the requested fraction of the symmetric reach; admissibility is enforced pointwise below
  double grow = 2.0 * cfg.amplitude_reach;
  seg.lambda *= grow;
  seg.halfdir = grow * seg.halfdir;

  PlaneWaveCoeffs pc = plane_wave_coeffs(seg.a, seg.b);
  double nrm = std::sqrt(pc.xi.norm2() + pc.c * pc.c);
  WaveGeom wg = wave_geometry(g, cube.box, cube.rho_min);
  double worst = 0.0;
  for (int a = 0; a < n; ++a) worst = std::max(worst, std::abs(pc.xi[a]) / nrm * wg.spacing[a]);
  worst = std::max(worst, std::abs(pc.c) / nrm * wg.spacing[n]);
  int k = std::max(1, int(std::floor(1.0 / (cfg.points_per_wavelength * worst))));
  out.k = k;
  out.points_per_wavelength = 1.0 / (k * worst);

  LocalizeOptions lo;
  lo.cutoff_width = cfg.cutoff_width;
  LocalizedWave w = localize(seg, k, std::numeric_limits<double>::infinity(), lo);
  CubeFields cf = rescale_wave(w, g, cube.box, cube.rho_min);

  // lambda_min of M(s) = M + s A + s^2 B is concave in s, so checking the endpoint suffices
  double margin = cfg.margin_factor * lstar / (64.0 * n);
  struct Pt {
    SymMat M, A, B;
    double rho, wt, floor;
    Vec W, dV;
  };
  std::vector<Pt> pts;
  pts.reserve(cnt);
  for (std::size_t l = 0; l < cnt; ++l) {
    Vec dV = cf.V.vec(l, n);
    SymMat dU = cf.U.sym(l, n);
    if (dV.norm2() == 0.0 && dU.max_abs_entry() == 0.0) continue;
    std::size_t p = box_grid_point(g, cube.box, l);
    Pt q;
    q.rho = fs.rho0(p);
    q.W = fs.V0.vec(p, n) + fs.Vtil.vec(p, n);
    q.dV = dV;
    q.M = D.M.sym(p, n);
    q.floor = std::max(margin, cfg.keep_fraction * lambda_min(q.M));
    q.A = dU - (2.0 / q.rho) * SymMat::outer(q.W, dV);
    q.B = (-1.0 / q.rho) * SymMat::outer(dV);
    int j = cube.box.lo[n] + int(l / (cnt / cube.box.size[n]));
    q.wt = g.time_weight(j) * g.cell_volume();
    pts.push_back(q);
  }
  auto min_eig = [&](double s) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& q : pts) m = std::min(m, lambda_min(q.M + s * q.A + (s * s) * q.B));
    return m;
  };
  // smallest excess of lambda_min over the pointwise floor
  auto slack = [&](double s) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& q : pts) m = std::min(m, lambda_min(q.M + s * q.A + (s * s) * q.B) - q.floor);
    return m;
  };
  auto max_scale = [&](double sign) {
    if (slack(sign) >= 0.0) return 1.0;
    double lo2 = 0.0, hi = 1.0;
    for (int it = 0; it < 30; ++it) {
      double mid = 0.5 * (lo2 + hi);
      if (slack(sign * mid) >= 0.0) lo2 = mid;
      else hi = mid;
    }
    return lo2;
  };
  auto decrease = [&](double s) {
    double d = 0.0;
    for (const auto& q : pts) d += (2.0 * s * q.W.dot(q.dV) + s * s * q.dV.norm2()) / q.rho * q.wt;
    return d;
  };
  double tp = max_scale(1.0), tm = max_scale(-1.0);
  double dp = decrease(tp), dm = decrease(-tm);
  double s = dp >= dm ? tp : -tm;
  double best = std::max(dp, dm);
  if (best <= 0.0 || s == 0.0) {
    out.skipped = true;
    out.note = "no admissible amplitude";
    return out;
  }
  out.tau = s;
  for (auto& x : cf.V.v) x *= s;
  for (auto& x : cf.U.v) x *= s;
  out.V = std::move(cf.V);
  out.U = std::move(cf.U);
  out.residual_l1 = std::abs(s) * cf.res_l1;
  out.residual_sup = std::abs(s) * cf.res_sup;
  out.l1_V = std::abs(s) * cf.l1_V;
  out.min_margin = min_eig(s);
  return out;
}

SweepResult sweep(const FieldState& fs, std::uint64_t seed, const SchemeConfig& cfg, int sweep_index) {
  const Grid& g = fs.grid;
  int n = g.n;
  SweepResult res;
  res.next = fs;
  DefectField D = compute_defect(fs);
  DefectReport& rep = res.report;
  rep.sweep = sweep_index;
  double before = D.int_trM;
  double trR0 = integrate_mask(g, fs.P, [&](std::size_t p) { return std::abs(fs.R0.sym(p, n).trace()); });
  if (before <= 1e-12 * trR0) {
    rep.int_trM = before;
    rep.min_lambda_M = D.min_lambda;
    rep.delta_mode = "saturated";
    return res;
  }
  double lstar = lambda_star(fs, D, fs.P);
  if (!(lstar > 0.0)) fail(ErrorKind::precondition, "sweep: lambda_* must be positive (invalid iterate)");
  rep.lambda_star = lstar;
  CubePartition part;
  try {
    part = choose_delta(fs, D, lstar);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::resolution_too_coarse) throw;
    int cs = cfg.fallback_cells;
    for (int a = 0; a < n; ++a) cs = std::min(cs, std::max(2, g.N[a] / 2));
    // time tiles start at the first active slice and fit inside the active span
    std::size_t S = g.spatial_points();
    int jlo = g.Nt, jhi = 0;
    for (int j = 0; j < g.Nt; ++j)
      for (std::size_t k = 0; k < S; ++k)
        if (fs.P[g.index(j, k)]) {
          jlo = std::min(jlo, j);
          jhi = j + 1;
          break;
        }
    int ct = std::clamp(time_side(g, cs), 1, std::max(1, jhi - jlo));
    std::array<int, 4> off{};
    for (int a = 0; a <= n; ++a) off[a] = ((sweep_index >> a) & 1) ? (a < n ? cs : ct) / 2 : 0;
    off[n] += std::min(jlo, g.Nt - 1);
    part.mode = "fallback";
    part.cells_space = cs;
    part.cells_time = ct;
    part.delta = cs * g.dx(0);
    part.lambda_star = lstar;
    for (const auto& b : tile_cubes(fs, cs, ct, off)) part.cubes.push_back(cube_stats(fs, D, b, lstar));
  }
  rep.delta_mode = part.mode;
  rep.k_min_used = 1 << 30;
  rep.min_ppw = 1e300;
  double l1 = 0.0;
  for (std::size_t ci = 0; ci < part.cubes.size(); ++ci) {
    CubePerturbation cp = perturb_cube(part.cubes[ci], fs, D, lstar, mix_seed(seed, std::uint64_t(sweep_index) * 1000003u + ci), cfg);
    ++rep.cubes;
    if (cp.skipped) {
      ++rep.cubes_skipped;
      res.cubes.push_back(std::move(cp));
      continue;
    }
    std::size_t cnt = cp.box.count(n);
    for (std::size_t l = 0; l < cnt; ++l) {
      std::size_t p = box_grid_point(g, cp.box, l);
      for (int c = 0; c < n; ++c) res.next.Vtil(p, c) += cp.V(l, c);
      for (int c = 0; c < SymMat::size(n); ++c) res.next.Util(p, c) += cp.U(l, c);
    }
    l1 += cp.l1_V;
    rep.residual_l1 += cp.residual_l1;
    rep.residual_sup = std::max(rep.residual_sup, cp.residual_sup);
    rep.k_min_used = std::min(rep.k_min_used, cp.k);
    rep.k_max_used = std::max(rep.k_max_used, cp.k);
    rep.min_ppw = std::min(rep.min_ppw, cp.points_per_wavelength);
    res.cubes.push_back(std::move(cp));
  }
  if (rep.k_max_used == 0) rep.k_min_used = 0, rep.min_ppw = 0.0;
  DefectField D2 = compute_defect(res.next);
  rep.int_trM = D2.int_trM;
  rep.min_lambda_M = D2.min_lambda;
  rep.margin = D2.min_lambda - lstar / (64.0 * n);
  rep.l1_dV = l1;
  rep.coercivity_ratio = l1 / (before / fs.Lambda);
  rep.defect_decrease = before - D2.int_trM;
  rep.budget_ok = rep.residual_l1 <= cfg.budget_fraction * std::max(0.0, rep.defect_decrease);
  rep.l2_V = std::sqrt(integrate_mask(g, fs.P, [&](std::size_t p) { return (res.next.V0.vec(p, n) + res.next.Vtil.vec(p, n)).norm2(); }));
  return res;
}

EulerCandidate run(const FieldState& fs, double target, int max_sweeps, std::uint64_t seed, const SchemeConfig& cfg) {
  validate_field_state(fs);
  EulerCandidate c;
  c.state = fs;
  DefectField D = compute_defect(fs);
  DefectReport r0;
  r0.int_trM = D.int_trM;
  r0.min_lambda_M = D.min_lambda;
  r0.lambda_star = lambda_star(fs, D, fs.P);
  r0.delta_mode = "initial";
  c.reports.push_back(r0);
  c.initial_trM = D.int_trM;
  c.status = "max_sweeps";
  std::vector<double> hist{D.int_trM};
  if (D.int_trM <= target * c.initial_trM) c.status = "target";
  for (int s = 1; s <= max_sweeps && c.status != "target"; ++s) {
    SweepResult sr = sweep(c.state, seed, cfg, s);
    c.state = std::move(sr.next);
    c.certificate_l1 += sr.report.residual_l1;
    c.certificate_sup = std::max(c.certificate_sup, sr.report.residual_sup);
    c.reports.push_back(sr.report);
    hist.push_back(sr.report.int_trM);
    if (sr.report.int_trM <= target * c.initial_trM) {
      c.status = "target";
      break;
    }
    int wdw = cfg.stagnation_window;
    if (int(hist.size()) > wdw) {
      double old = hist[hist.size() - 1 - wdw];
      if (old <= 0.0 || (old - hist.back()) / old < cfg.stagnation_tol) {
        c.status = "stagnated";
        break;
      }
    }
  }
  c.final_trM = hist.back();
  const Grid& g = c.state.grid;
  int n = g.n;
  c.Vnew = vector_field(g);
  c.Unew = sym_field(g);
  for (std::size_t p = 0; p < g.points(); ++p) {
    c.Vnew.set_vec(p, c.state.V0.vec(p, n) + c.state.Vtil.vec(p, n));
    c.Unew.set_sym(p, c.state.U0.sym(p, n) + c.state.Util.sym(p, n));
  }
  return c;
}

Field energy_identity_check(const EulerCandidate& c) {
  const FieldState& fs = c.state;
  const Grid& g = fs.grid;
  int n = g.n;
  Field out = scalar_field(g);
  for (std::size_t p = 0; p < g.points(); ++p) {
    double rho = fs.rho0(p);
    out(p) = c.Vnew.vec(p, n).norm2() / rho - fs.V0.vec(p, n).norm2() / rho - fs.R0.sym(p, n).trace();
  }
  return out;
}

double energy_identity_ratio(const EulerCandidate& c) {
  const FieldState& fs = c.state;
  const Grid& g = fs.grid;
  int n = g.n;
  Field e = energy_identity_check(c);
  double num = integrate_mask(g, fs.P, [&](std::size_t p) { return std::abs(e(p)); });
  double den = integrate_mask(g, fs.P, [&](std::size_t p) { return std::abs(fs.R0.sym(p, n).trace()); });
  return den > 0.0 ? num / den : 0.0;
}

LinearResidual linear_residual(const FieldState& fs) {
  const Grid& g = fs.grid;
  int n = g.n;
  std::vector<int> dims{g.Nt};
  std::vector<double> lens{g.Nt * g.dt()};
  for (int a = 0; a < n; ++a) dims.push_back(g.N[a]), lens.push_back(g.len[a]);
  Spectral sp(dims, lens);
  std::size_t np = g.points();
  std::vector<double> buf(np), d(np), mass(np, 0.0);
  std::vector<std::vector<double>> mom(n, std::vector<double>(np, 0.0));
  for (int i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < np; ++p) buf[p] = fs.Vtil(p, i);
    sp.derivative(buf.data(), d.data(), 1 + i);
    for (std::size_t p = 0; p < np; ++p) mass[p] += d[p];
    sp.derivative(buf.data(), d.data(), 0);
    for (std::size_t p = 0; p < np; ++p) mom[i][p] += d[p];
    for (int j = 0; j < n; ++j) {
      int c = SymMat::idx(n, i, j);
      for (std::size_t p = 0; p < np; ++p) buf[p] = fs.Util(p, c);
      sp.derivative(buf.data(), d.data(), 1 + j);
      for (std::size_t p = 0; p < np; ++p) mom[i][p] += d[p];
    }
  }
  LinearResidual r;
  for (std::size_t p = 0; p < np; ++p) {
    r.mass_sup = std::max(r.mass_sup, std::abs(mass[p]));
    double m2 = 0.0;
    for (int i = 0; i < n; ++i) m2 += mom[i][p] * mom[i][p];
    r.mom_sup = std::max(r.mom_sup, std::sqrt(m2));
  }
  r.l1 = integrate(g, [&](std::size_t p) {
    double m2 = mass[p] * mass[p];
    for (int i = 0; i < n; ++i) m2 += mom[i][p] * mom[i][p];
    return std::sqrt(m2);
  });
  return r;
}

double l2_distance_V(const FieldState& a, const FieldState& b) {
  const Grid& g = a.grid;
  int n = g.n;
  if (!g.same_shape(b.grid)) fail(ErrorKind::invalid_input, "l2_distance_V: grid mismatch");
  return std::sqrt(integrate_mask(g, a.P, [&](std::size_t p) {
    return ((a.V0.vec(p, n) + a.Vtil.vec(p, n)) - (b.V0.vec(p, n) + b.Vtil.vec(p, n))).norm2();
  }));
}

}  // namespace convint
