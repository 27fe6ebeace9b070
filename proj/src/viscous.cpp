#include "convint/viscous.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "convint/errors.hpp"
#include "convint/filter.hpp"
#include "convint/spectral.hpp"

namespace convint {

namespace {

using cvec = std::vector<std::complex<double>>;

void check_output_grid(const Grid& g) {
  g.validate();
  if (g.layout != TimeLayout::vertex) fail(ErrorKind::invalid_input, "viscous solvers sample at time vertices");
}

struct IncompSolver {
  const Grid& g;
  int n;
  double nu;
  Spectral sp;
  std::size_t S, C;
  std::vector<std::array<double, 3>> k;
  std::vector<double> k2;
  std::vector<std::uint8_t> keep;

  IncompSolver(const Grid& grid, double nu_)
      : g(grid), n(grid.n), nu(nu_), sp(dims(grid), lens(grid)), S(grid.spatial_points()), C(sp.csize()) {
    k.resize(C);
    k2.resize(C);
    keep.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
      double s = 0.0;
      bool ok = true;
      for (int a = 0; a < n; ++a) {
        k[c][a] = sp.wavenumber(c, a);
        s += k[c][a] * k[c][a];
        double kr = std::abs(sp.wavenumber_raw(c, a)) * g.len[a] / (2.0 * std::numbers::pi);
        if (kr > g.N[a] / 3.0) ok = false;
      }
      k2[c] = s;
      keep[c] = ok;
    }
  }
  static std::vector<int> dims(const Grid& g) {
    std::vector<int> d;
    for (int a = 0; a < g.n; ++a) d.push_back(g.N[a]);
    return d;
  }
  static std::vector<double> lens(const Grid& g) {
    std::vector<double> d;
    for (int a = 0; a < g.n; ++a) d.push_back(g.len[a]);
    return d;
  }

  void project(std::vector<cvec>& w) const {
    for (std::size_t c = 0; c < C; ++c) {
      if (k2[c] == 0.0) continue;
      std::complex<double> d = 0.0;
      for (int a = 0; a < n; ++a) d += k[c][a] * w[a][c];
      for (int a = 0; a < n; ++a) w[a][c] -= k[c][a] * d / k2[c];
    }
  }

  // -P[(v . grad) v], dealiased
  std::vector<cvec> nonlinear(const std::vector<cvec>& vh, double* vmax = nullptr) {
    std::vector<std::vector<double>> v(n, std::vector<double>(S));
    cvec tmp(C);
    for (int a = 0; a < n; ++a) sp.backward(vh[a].data(), v[a].data());
    if (vmax) {
      double m = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        double q = 0.0;
        for (int a = 0; a < n; ++a) q += v[a][s] * v[a][s];
        m = std::max(m, q);
      }
      *vmax = std::sqrt(m);
    }
    std::vector<double> d(S);
    std::vector<std::vector<double>> adv(n, std::vector<double>(S, 0.0));
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) {
        for (std::size_t c = 0; c < C; ++c) tmp[c] = vh[b][c] * std::complex<double>(0.0, k[c][a]);
        sp.backward(tmp.data(), d.data());
        for (std::size_t s = 0; s < S; ++s) adv[b][s] += v[a][s] * d[s];
      }
    std::vector<cvec> out(n, cvec(C));
    for (int b = 0; b < n; ++b) {
      sp.forward(adv[b].data(), out[b].data());
      for (std::size_t c = 0; c < C; ++c) out[b][c] = keep[c] ? -out[b][c] : 0.0;
    }
    project(out);
    return out;
  }

  double energy(const std::vector<cvec>& vh) {
    std::vector<double> v(S);
    double e = 0.0;
    for (int a = 0; a < n; ++a) {
      sp.backward(vh[a].data(), v.data());
      for (double x : v) e += x * x;
    }
    return 0.5 * e * g.cell_volume();
  }

  double enstrophy(const std::vector<cvec>& vh) {
    std::vector<double> d(S);
    cvec tmp(C);
    double e = 0.0;
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) {
        for (std::size_t c = 0; c < C; ++c) tmp[c] = vh[b][c] * std::complex<double>(0.0, k[c][a]);
        sp.backward(tmp.data(), d.data());
        for (double x : d) e += x * x;
      }
    return e * g.cell_volume();
  }
};

}  // namespace

IncompRun solve_incomp_ns(const Grid& g, const Field& v0, double nu, const IncompOptions& opt) {
  check_output_grid(g);
  if (!(nu > 0.0)) fail(ErrorKind::invalid_input, "solve_incomp_ns: nu must be positive");
  int n = g.n;
  std::size_t S = g.spatial_points();
  if (v0.points() != S || v0.comps != n) fail(ErrorKind::invalid_input, "solve_incomp_ns: initial field shape");
  IncompSolver so(g, nu);
  std::size_t C = so.C;
  std::vector<cvec> vh(n, cvec(C));
  std::vector<double> buf(S);
  for (int a = 0; a < n; ++a) {
    for (std::size_t s = 0; s < S; ++s) buf[s] = v0(s, a);
    so.sp.forward(buf.data(), vh[a].data());
  }
  so.project(vh);

  IncompRun run;
  run.grid = g;
  run.nu = nu;
  run.v = vector_field(g);
  auto store = [&](int j) {
    for (int a = 0; a < n; ++a) {
      so.sp.backward(vh[a].data(), buf.data());
      for (std::size_t s = 0; s < S; ++s) run.v(g.index(j, s), a) = buf[s];
    }
    run.energy.push_back(so.energy(vh));
  };
  store(0);
  run.dissipated.push_back(0.0);
  double diss = 0.0;
  double hmin = g.dx(0);
  for (int a = 1; a < n; ++a) hmin = std::min(hmin, g.dx(a));
  double e_prev = run.energy[0];
  double ens_prev = so.enstrophy(vh);
  std::vector<double> Eh(C), E2(C);
  for (int j = 1; j < g.Nt; ++j) {
    double t = g.t(j - 1), tend = g.t(j);
    while (t < tend - 1e-14 * std::max(1.0, std::abs(tend))) {
      double vmax = 0.0;
      auto a1 = so.nonlinear(vh, &vmax);
      if (!std::isfinite(vmax)) fail(ErrorKind::step_size, "solve_incomp_ns: solution is not finite");
      double dt = tend - t;
      if (vmax > 0.0) dt = std::min(dt, opt.cfl * hmin / vmax);
      if (++run.steps > opt.max_steps) fail(ErrorKind::step_size, "solve_incomp_ns: step budget exhausted (CFL)");
      for (std::size_t c = 0; c < C; ++c) {
        Eh[c] = std::exp(-nu * so.k2[c] * 0.5 * dt);
        E2[c] = Eh[c] * Eh[c];
      }
      std::vector<cvec> w(n, cvec(C));
      for (int a = 0; a < n; ++a)
        for (std::size_t c = 0; c < C; ++c) w[a][c] = Eh[c] * (vh[a][c] + 0.5 * dt * a1[a][c]);
      auto b1 = so.nonlinear(w);
      for (int a = 0; a < n; ++a)
        for (std::size_t c = 0; c < C; ++c) w[a][c] = Eh[c] * vh[a][c] + 0.5 * dt * b1[a][c];
      auto c1 = so.nonlinear(w);
      for (int a = 0; a < n; ++a)
        for (std::size_t c = 0; c < C; ++c) w[a][c] = E2[c] * vh[a][c] + dt * Eh[c] * c1[a][c];
      auto d1 = so.nonlinear(w);
      for (int a = 0; a < n; ++a)
        for (std::size_t c = 0; c < C; ++c)
          vh[a][c] = E2[c] * vh[a][c] +
                     dt / 6.0 * (E2[c] * a1[a][c] + 2.0 * Eh[c] * (b1[a][c] + c1[a][c]) + d1[a][c]);
      t += dt;
      double e = so.energy(vh);
      double ens = so.enstrophy(vh);
      diss += nu * 0.5 * (ens_prev + ens) * dt;
      run.max_step_increase = std::max(run.max_step_increase, e - e_prev);
      e_prev = e;
      ens_prev = ens;
    }
    store(j);
    run.dissipated.push_back(diss);
  }
  return run;
}

Field taylor_green(const Grid& g, double nu) {
  if (g.n != 2) fail(ErrorKind::invalid_input, "taylor_green: n must be 2");
  Field v = vector_field(g);
  double k = 2.0 * std::numbers::pi;
  for (int j = 0; j < g.Nt; ++j) {
    double f = std::exp(-2.0 * nu * k * k * (g.t(j) - g.t0));
    for (std::size_t s = 0; s < g.spatial_points(); ++s) {
      auto c = g.spatial_coords(s);
      double x = g.x(0, c[0]), y = g.x(1, c[1]);
      std::size_t p = g.index(j, s);
      v(p, 0) = f * std::sin(k * x) * std::cos(k * y);
      v(p, 1) = -f * std::cos(k * x) * std::sin(k * y);
    }
  }
  return v;
}

namespace {

struct CompSolver {
  const Grid& g;
  int n;
  double nu, gamma;
  std::size_t S;
  std::array<std::vector<std::size_t>, 3> up, dn;
  bool ec = false;
  double upwind = 1.0;

  CompSolver(const Grid& grid, double nu_, double gm) : g(grid), n(grid.n), nu(nu_), gamma(gm), S(grid.spatial_points()) {
    for (int a = 0; a < n; ++a) {
      up[a].resize(S);
      dn[a].resize(S);
      for (std::size_t s = 0; s < S; ++s) {
        auto c = g.spatial_coords(s);
        auto cu = c, cd = c;
        cu[a] = (c[a] + 1) % g.N[a];
        cd[a] = (c[a] + g.N[a] - 1) % g.N[a];
        up[a][s] = g.index(0, cu);
        dn[a][s] = g.index(0, cd);
      }
    }
  }

  // state: rho then n momentum components, each S long
  using State = std::vector<std::vector<double>>;

  double sound(double rho) const { return std::sqrt(gamma * std::pow(rho, gamma - 1.0)); }

  // central differences of velocity: grad[b][a][s] = d_a v_b
  void velocity_gradient(const State& U, std::vector<std::vector<double>>& v,
                         std::vector<std::vector<std::vector<double>>>& grad) const {
    v.assign(n, std::vector<double>(S));
    for (int b = 0; b < n; ++b)
      for (std::size_t s = 0; s < S; ++s) v[b][s] = U[1 + b][s] / U[0][s];
    grad.assign(n, std::vector<std::vector<double>>(n, std::vector<double>(S)));
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) {
        double h = 0.5 / g.dx(a);
        for (std::size_t s = 0; s < S; ++s) grad[b][a][s] = (v[b][up[a][s]] - v[b][dn[a][s]]) * h;
      }
  }

  State rhs(const State& U) const {
    State d(1 + n, std::vector<double>(S, 0.0));
    std::vector<std::vector<double>> v;
    std::vector<std::vector<std::vector<double>>> grad;
    velocity_gradient(U, v, grad);
    std::vector<double> FL(1 + n), FR(1 + n), F(1 + n);
    for (int a = 0; a < n; ++a) {
      double ih = 1.0 / g.dx(a);
      for (std::size_t s = 0; s < S; ++s) {
        std::size_t q = up[a][s];
        double rL = U[0][s], rR = U[0][q];
        double uL = v[a][s], uR = v[a][q];
        double pL = std::pow(rL, gamma), pR = std::pow(rR, gamma);
        FL[0] = U[1 + a][s];
        FR[0] = U[1 + a][q];
        for (int b = 0; b < n; ++b) {
          FL[1 + b] = U[1 + b][s] * uL + (a == b ? pL : 0.0);
          FR[1 + b] = U[1 + b][q] * uR + (a == b ? pR : 0.0);
        }
        double smax = std::max(std::abs(uL) + sound(rL), std::abs(uR) + sound(rR));
        if (ec) {
          // energy conservative average for p = rho^2
          double hb = 0.5 * (rL + rR), ua = 0.5 * (uL + uR);
          F[0] = hb * ua;
          for (int b = 0; b < n; ++b) F[1 + b] = hb * ua * 0.5 * (v[b][s] + v[b][q]) + (a == b ? 0.5 * (pL + pR) : 0.0);
        } else {
          for (int c = 0; c <= n; ++c) F[c] = 0.5 * (FL[c] + FR[c]);
        }
        for (int c = 0; c <= n; ++c) F[c] -= 0.5 * upwind * smax * (U[c][q] - U[c][s]);
        if (nu > 0.0) {
          double rf = 0.5 * (rL + rR);
          for (int b = 0; b < n; ++b) {
            double dab = (v[b][q] - v[b][s]) * ih;  // d_a v_b at the face
            double dba = (b == a) ? dab : 0.5 * (grad[a][b][s] + grad[a][b][q]);
            F[1 + b] -= nu * rf * 0.5 * (dab + dba);
          }
        }
        for (int c = 0; c <= n; ++c) {
          d[c][s] -= F[c] * ih;
          d[c][q] += F[c] * ih;
        }
      }
    }
    return d;
  }

  double energy(const State& U) const {
    double e = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      double m2 = 0.0;
      for (int b = 0; b < n; ++b) m2 += U[1 + b][s] * U[1 + b][s];
      e += 0.5 * m2 / U[0][s] + std::pow(U[0][s], gamma) / (gamma - 1.0);
    }
    return e * g.cell_volume();
  }

  double mass(const State& U) const {
    double m = 0.0;
    for (double x : U[0]) m += x;
    return m * g.cell_volume();
  }

  double max_speed(const State& U) const {
    double m = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      double u2 = 0.0;
      for (int b = 0; b < n; ++b) u2 += U[1 + b][s] * U[1 + b][s];
      m = std::max(m, std::sqrt(u2) / U[0][s] + sound(U[0][s]));
    }
    return m;
  }

  double viscous_l1(const State& U) const {
    if (nu <= 0.0) return 0.0;
    std::vector<std::vector<double>> v;
    std::vector<std::vector<std::vector<double>>> grad;
    velocity_gradient(U, v, grad);
    double tot = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      double f2 = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double dab = 0.5 * (grad[b][a][s] + grad[a][b][s]);
          f2 += dab * dab;
        }
      tot += nu * U[0][s] * std::sqrt(f2);
    }
    return tot * g.cell_volume();
  }
};

}  // namespace

CompRun solve_comp_ns(const Grid& g, const Field& rho0, const Field& V0, double nu, double gamma,
                      const CompOptions& opt) {
  check_output_grid(g);
  int n = g.n;
  check_gamma(n, gamma);
  if (!(nu >= 0.0)) fail(ErrorKind::invalid_input, "solve_comp_ns: nu must be nonnegative");
  std::size_t S = g.spatial_points();
  if (rho0.points() != S || V0.points() != S || V0.comps != n)
    fail(ErrorKind::invalid_input, "solve_comp_ns: initial field shape");
  CompSolver so(g, nu, gamma);
  so.ec = opt.entropy_flux && gamma == 2.0;
  so.upwind = so.ec ? opt.upwind : 1.0;
  CompSolver::State U(1 + n, std::vector<double>(S));
  for (std::size_t s = 0; s < S; ++s) {
    if (!(rho0(s) > opt.rho_floor)) fail(ErrorKind::vacuum, "solve_comp_ns: initial density below the vacuum floor");
    U[0][s] = rho0(s);
    for (int b = 0; b < n; ++b) U[1 + b][s] = V0(s, b);
  }
  CompRun run;
  run.grid = g;
  run.nu = nu;
  run.gamma = gamma;
  run.rho = scalar_field(g);
  run.V = vector_field(g);
  std::vector<double> visc(g.Nt);
  auto store = [&](int j) {
    for (std::size_t s = 0; s < S; ++s) {
      std::size_t p = g.index(j, s);
      run.rho(p) = U[0][s];
      for (int b = 0; b < n; ++b) run.V(p, b) = U[1 + b][s];
    }
    run.energy.push_back(so.energy(U));
    run.mass.push_back(so.mass(U));
    visc[j] = so.viscous_l1(U);
  };
  store(0);
  double E0 = run.energy[0];
  double e_prev = E0;
  double hmin = g.dx(0);
  for (int a = 1; a < n; ++a) hmin = std::min(hmin, g.dx(a));
  double dt_visc = nu > 0.0 ? 0.2 * hmin * hmin / (n * nu) : 1e300;
  for (int j = 1; j < g.Nt; ++j) {
    double t = g.t(j - 1), tend = g.t(j);
    while (t < tend - 1e-14 * std::max(1.0, std::abs(tend))) {
      double dt = std::min({tend - t, opt.cfl * hmin / so.max_speed(U), dt_visc});
      if (++run.steps > opt.max_steps) fail(ErrorKind::step_size, "solve_comp_ns: step budget exhausted");
      CompSolver::State U2;
      double e_new = 0.0;
      int h = 0;
      for (;; ++h) {
        if (h > opt.max_halvings)
          fail(ErrorKind::step_size, "solve_comp_ns: no step size keeps the energy ledger");
        auto k1 = so.rhs(U);
        CompSolver::State U1 = U;
        for (int c = 0; c <= n; ++c)
          for (std::size_t s = 0; s < S; ++s) U1[c][s] += dt * k1[c][s];
        bool ok = true;
        for (double x : U1[0])
          if (!(x > opt.rho_floor)) ok = false;
        if (ok) {
          auto k2 = so.rhs(U1);
          U2 = U;
          for (int c = 0; c <= n; ++c)
            for (std::size_t s = 0; s < S; ++s) U2[c][s] = 0.5 * U[c][s] + 0.5 * (U1[c][s] + dt * k2[c][s]);
          for (double x : U2[0])
            if (!(x > opt.rho_floor)) ok = false;
        }
        if (!ok) {
          if (h == opt.max_halvings) fail(ErrorKind::vacuum, "solve_comp_ns: density fell below the vacuum floor");
          ++run.rejected;
          dt *= 0.5;
          continue;
        }
        e_new = so.energy(U2);
        if (e_new - e_prev <= opt.energy_slack * E0) break;
        ++run.rejected;
        dt *= 0.5;
      }
      run.max_step_increase = std::max(run.max_step_increase, (e_new - e_prev) / E0);
      U = std::move(U2);
      e_prev = e_new;
      t += dt;
    }
    store(j);
  }
  for (int j = 0; j < g.Nt; ++j) run.viscous_l1 += g.time_weight(j) * visc[j];
  return run;
}

double viscous_dissipation(const Grid& g, const Field& rho, const Field& V, double nu) {
  int n = g.n;
  std::size_t S = g.spatial_points();
  if (rho.points() != S || V.points() != S) fail(ErrorKind::invalid_input, "viscous_dissipation: expects one slice");
  CompSolver so(g, nu, 2.0);
  CompSolver::State U(1 + n, std::vector<double>(S));
  for (std::size_t s = 0; s < S; ++s) {
    U[0][s] = rho(s);
    for (int b = 0; b < n; ++b) U[1 + b][s] = V(s, b);
  }
  std::vector<std::vector<double>> v;
  std::vector<std::vector<std::vector<double>>> grad;
  so.velocity_gradient(U, v, grad);
  double tot = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    double f2 = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double dab = 0.5 * (grad[b][a][s] + grad[a][b][s]);
        f2 += dab * dab;
      }
    tot += nu * U[0][s] * f2;
  }
  return tot * g.cell_volume();
}

DefectExtract extract_defect(const std::vector<CompRun>& runs, double width, const ExtractOptions& opt) {
  if (runs.size() < 2) fail(ErrorKind::invalid_input, "extract_defect: needs at least two viscosities");
  for (const auto& r : runs)
    if (!r.grid.same_shape(runs[0].grid) || r.grid.t0 != runs[0].grid.t0 || r.grid.t1 != runs[0].grid.t1 ||
        r.gamma != runs[0].gamma)
      fail(ErrorKind::invalid_input, "extract_defect: runs must share the grid and gamma");
  const CompRun* best = &runs[0];
  for (const auto& r : runs)
    if (r.nu < best->nu) best = &r;
  const Grid& g = best->grid;
  int n = g.n;
  double gm = best->gamma;
  SpatialFilter filt(g, width);
  Field rho = filt.apply(best->rho);
  Field V = filt.apply(best->V);
  Field flux(g.points(), SymMat::size(n));
  Field pr = scalar_field(g);
  for (std::size_t p = 0; p < g.points(); ++p) {
    flux.set_sym(p, (1.0 / best->rho(p)) * SymMat::outer(best->V.vec(p, n)));
    pr(p) = pressure(best->rho(p), gm);
  }
  flux = filt.apply(flux);
  pr = filt.apply(pr);

  DefectExtract ex;
  ex.filter_width = width;
  ex.nu = best->nu;
  Field calR = sym_field(g), r = scalar_field(g);
  for (std::size_t p = 0; p < g.points(); ++p) {
    double rb = rho(p);
    if (!(rb > 0.0)) fail(ErrorKind::vacuum, "extract_defect: filtered density not positive");
    SymMat R = flux.sym(p, n) - (1.0 / rb) * SymMat::outer(V.vec(p, n));
    double scale = flux.sym(p, n).trace();
    double removed = 0.0;
    SymMat Rp = project_psd(R, &removed);
    if (removed > 1e-13 * std::max(scale, 1e-300)) {
      ++ex.psd_projections;
      ex.psd_removed = std::max(ex.psd_removed, removed);
    } else if (removed > 0.0) {
      ++ex.roundoff_projections;
    }
    calR.set_sym(p, Rp);
    double rr = pr(p) - pressure(rb, gm);
    if (rr < 0.0) {
      if (-rr > 1e-13 * pr(p)) {
        ++ex.r_clips;
        ex.r_clipped = std::max(ex.r_clipped, -rr);
      } else {
        ++ex.roundoff_projections;
      }
      rr = 0.0;
    }
    r(p) = rr;
    ex.max_calR = std::max(ex.max_calR, lambda_max(Rp));
    ex.max_r = std::max(ex.max_r, rr);
  }
  EnergyBudget b{best->energy[0], g.t1 - g.t0};
  ex.sub = make_comp(g, std::move(rho), std::move(V), std::move(calR), std::move(r), gm, b);
  ex.sub.certificate = best->viscous_l1;
  double E0 = ex.sub.budget.E0;
  double tol = opt.energy_tol * E0;
  auto e = energy_series(ex.sub);
  int jT = 0;
  while (jT + 1 < g.Nt && std::abs(e[jT + 1] - E0) <= tol) ++jT;
  if (jT == 0) fail(ErrorKind::rejected_extract, "extract_defect: energy is not saturated on any time interval");
  ex.saturation_T = g.t(jT) - g.t0;
  ex.sub.budget.T = ex.saturation_T;
  for (double x : e) ex.energy_excess = std::max(ex.energy_excess, x - E0);
  if (ex.energy_excess > tol) fail(ErrorKind::rejected_extract, "extract_defect: energy exceeds the budget");
  if (ex.sub.certificate > opt.max_certificate)
    fail(ErrorKind::rejected_extract, "extract_defect: weak residual certificate above the configured bound");
  return ex;
}

double relative_entropy(const Grid& g, const Field& rho1, const Field& V1, const Field& rho2, const Field& V2,
                        double gamma) {
  int n = g.n;
  std::size_t np = rho1.points();
  if (rho2.points() != np || V1.points() != np || V2.points() != np)
    fail(ErrorKind::invalid_input, "relative_entropy: field shapes differ");
  double g1 = gamma - 1.0;
  double tot = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    double r1 = rho1(p), r2 = rho2(p);
    if (!(r1 > 0.0) || !(r2 > 0.0)) fail(ErrorKind::invalid_input, "relative_entropy: nonpositive density");
    Vec a = V1.vec(p, n), b = V2.vec(p, n);
    double E1 = 0.5 * a.norm2() / r1 + std::pow(r1, gamma) / g1;
    double E2 = 0.5 * b.norm2() / r2 + std::pow(r2, gamma) / g1;
    double dEr = -0.5 * b.norm2() / (r2 * r2) + gamma * std::pow(r2, g1) / g1;
    Vec dEV = (1.0 / r2) * b;
    tot += E1 - E2 - dEr * (r1 - r2) - dEV.dot(a - b);
  }
  return tot * g.cell_volume();
}

}  // namespace convint
