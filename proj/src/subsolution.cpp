#include "convint/subsolution.hpp"

#include <algorithm>
#include <cmath>

#include "convint/errors.hpp"
#include "convint/filter.hpp"

namespace convint {

void check_gamma(int n, double gamma) {
  if (!(gamma > 1.0) || gamma > 1.0 + 2.0 / n + 1e-15)
    fail(ErrorKind::gamma_constraint, "gamma must satisfy 1 < gamma <= 1 + 2/n (got " + std::to_string(gamma) +
                                          ", n = " + std::to_string(n) + ")");
}

IncompSubsolution make_incomp(const Grid& g, Field v, Field R, EnergyBudget b) {
  g.validate();
  if (v.points() != g.points() || v.comps != g.n || R.points() != g.points() || R.comps != SymMat::size(g.n))
    fail(ErrorKind::invalid_input, "incompressible subsolution: field shapes do not match the grid");
  if (!(b.E0 > 0.0) || !(b.T > 0.0)) fail(ErrorKind::invalid_input, "energy budget must be positive");
  return IncompSubsolution{g, std::move(v), std::move(R), b, 0.0};
}

CompSubsolution make_comp(const Grid& g, Field rho, Field V, Field calR, Field r, double gamma, EnergyBudget b) {
  g.validate();
  std::size_t np = g.points();
  if (rho.points() != np || rho.comps != 1 || V.points() != np || V.comps != g.n || calR.points() != np ||
      calR.comps != SymMat::size(g.n) || r.points() != np || r.comps != 1)
    fail(ErrorKind::invalid_input, "compressible subsolution: field shapes do not match the grid");
  if (!(b.E0 > 0.0) || !(b.T > 0.0)) fail(ErrorKind::invalid_input, "energy budget must be positive");
  if (!(gamma > 1.0)) fail(ErrorKind::gamma_constraint, "gamma must exceed 1");
  CompSubsolution s;
  s.grid = g;
  s.rho = std::move(rho);
  s.V = std::move(V);
  s.calR = std::move(calR);
  s.r = std::move(r);
  s.gamma = gamma;
  s.budget = b;
  return s;
}

double energy_total(const IncompSubsolution& s, int j) {
  int n = s.grid.n;
  return integrate_slice(s.grid, j, [&](std::size_t p) {
    return 0.5 * (s.v.vec(p, n).norm2() + s.R.sym(p, n).trace());
  });
}

double energy_total(const CompSubsolution& s, int j) {
  int n = s.grid.n;
  double g1 = s.gamma - 1.0;
  return integrate_slice(s.grid, j, [&](std::size_t p) {
    double rho = s.rho(p);
    double v2 = s.V.vec(p, n).norm2();
    if (rho < 0.0 || (rho == 0.0 && v2 > 0.0))
      fail(ErrorKind::invalid_input, "energy_total: rho = 0 with V != 0 (invalid state)");
    double kin = rho > 0.0 ? 0.5 * v2 / rho : 0.0;
    return kin + pressure(rho, s.gamma) / g1 + 0.5 * s.calR.sym(p, n).trace() + s.r(p) / g1;
  });
}

std::vector<double> energy_series(const CompSubsolution& s) {
  std::vector<double> e(s.grid.Nt);
  for (int j = 0; j < s.grid.Nt; ++j) e[j] = energy_total(s, j);
  return e;
}

double energy_compatibility_excess(const CompSubsolution& s, double tol) {
  double worst = 0.0;
  for (int j = 0; j < s.grid.Nt; ++j) {
    double e = energy_total(s, j) - s.budget.E0;
    double x = (s.grid.t(j) - s.grid.t0 <= s.budget.T + 1e-12) ? std::abs(e) : std::max(0.0, e);
    worst = std::max(worst, x - tol);
  }
  return worst;
}

namespace {

void check_weights(const std::vector<double>& w, std::size_t count) {
  if (w.size() != count || count == 0) fail(ErrorKind::invalid_input, "convex_combine: weight count mismatch");
  double s = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) fail(ErrorKind::invalid_input, "convex_combine: negative weight");
    s += x;
  }
  if (std::abs(s - 1.0) > 1e-12) fail(ErrorKind::invalid_input, "convex_combine: weights must sum to 1");
}

template <class S>
void check_family(const std::vector<S>& f) {
  for (const auto& m : f) {
    if (!m.grid.same_shape(f[0].grid)) fail(ErrorKind::invalid_input, "convex_combine: mismatched grids");
    if (std::abs(m.budget.E0 - f[0].budget.E0) > 1e-12 * f[0].budget.E0 ||
        std::abs(m.budget.T - f[0].budget.T) > 1e-12 * f[0].budget.T)
      fail(ErrorKind::invalid_input, "convex_combine: mismatched budgets");
  }
}

}  // namespace

IncompSubsolution convex_combine_incomp(const std::vector<IncompSubsolution>& f, const std::vector<double>& w) {
  check_weights(w, f.size());
  check_family(f);
  const Grid& g = f[0].grid;
  int n = g.n;
  IncompSubsolution out = f[0];
  out.certificate = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) {
    Vec vb(n);
    SymMat R(n);
    for (std::size_t k = 0; k < f.size(); ++k) {
      Vec v = f[k].v.vec(p, n);
      vb += w[k] * v;
      R += w[k] * (f[k].R.sym(p, n) + SymMat::outer(v));
    }
    out.v.set_vec(p, vb);
    out.R.set_sym(p, R - SymMat::outer(vb));
  }
  for (std::size_t k = 0; k < f.size(); ++k) out.certificate += w[k] * f[k].certificate;
  return out;
}

CompSubsolution convex_combine_comp(const std::vector<CompSubsolution>& f, const std::vector<double>& w) {
  check_weights(w, f.size());
  check_family(f);
  for (const auto& m : f)
    if (std::abs(m.gamma - f[0].gamma) > 0.0) fail(ErrorKind::invalid_input, "convex_combine: mismatched gamma");
  const Grid& g = f[0].grid;
  int n = g.n;
  double gm = f[0].gamma;
  CompSubsolution out = f[0];
  out.certificate = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) {
    double rb = 0.0, rr = 0.0;
    Vec Vb(n);
    SymMat R(n);
    for (std::size_t k = 0; k < f.size(); ++k) {
      double rho = f[k].rho(p);
      if (!(rho > 0.0)) fail(ErrorKind::invalid_input, "convex_combine: density must be positive");
      Vec V = f[k].V.vec(p, n);
      rb += w[k] * rho;
      Vb += w[k] * V;
      R += w[k] * (f[k].calR.sym(p, n) + (1.0 / rho) * SymMat::outer(V));
      rr += w[k] * (f[k].r(p) + pressure(rho, gm));
    }
    out.rho(p) = rb;
    out.V.set_vec(p, Vb);
    out.calR.set_sym(p, R - (1.0 / rb) * SymMat::outer(Vb));
    out.r(p) = rr - pressure(rb, gm);
  }
  for (std::size_t k = 0; k < f.size(); ++k) out.certificate += w[k] * f[k].certificate;
  return out;
}

namespace {

struct Mollifier {
  int m = 0;
  std::vector<double> wt;
  Grid out;
  SpatialFilter filt;

  Mollifier(const Grid& g, const EnergyBudget& b, double ax, double at)
      : filt(g, ax > 0.0 ? 0.5 * ax : 0.0) {
    if (!(ax > 0.0) || !(at > 0.0)) fail(ErrorKind::invalid_input, "mollify: alpha must be positive");
    if (at >= 0.5 * b.T) fail(ErrorKind::precondition, "mollify: alpha too large for the saturation horizon");
    m = int(std::floor(at / g.dt() + 1e-9));
    if (g.Nt - m < 2) fail(ErrorKind::precondition, "mollify: alpha too large for the time window");
    wt = time_shift_weights(m);
    out = g.time_slab(0, g.Nt - m);
  }

  // value(p) evaluated on the input grid, result on the output grid
  Field apply(const Grid& g, int comps, const std::function<void(std::size_t, double*)>& value) {
    std::size_t S = g.spatial_points();
    Field shifted(out.points(), comps);
    std::vector<double> tmp(comps);
    for (int j = 0; j < out.Nt; ++j)
      for (int i = 0; i <= m; ++i)
        for (std::size_t s = 0; s < S; ++s) {
          value(g.index(j + i, s), tmp.data());
          double* d = shifted.at(out.index(j, s));
          for (int c = 0; c < comps; ++c) d[c] += wt[i] * tmp[c];
        }
    return filt.apply(shifted);
  }
};

}  // namespace

IncompSubsolution mollify_subsolution(const IncompSubsolution& s, double alpha) { return mollify_subsolution(s, alpha, alpha); }

IncompSubsolution mollify_subsolution(const IncompSubsolution& s, double alpha_x, double alpha_t) {
  const Grid& g = s.grid;
  int n = g.n;
  int ns = SymMat::size(n);
  Mollifier mo(g, s.budget, alpha_x, alpha_t);
  Field v = mo.apply(g, n, [&](std::size_t p, double* o) {
    for (int c = 0; c < n; ++c) o[c] = s.v(p, c);
  });
  Field Rp = mo.apply(g, ns, [&](std::size_t p, double* o) {
    SymMat R = s.R.sym(p, n) + SymMat::outer(s.v.vec(p, n));
    for (int c = 0; c < ns; ++c) o[c] = R.a[c];
  });
  IncompSubsolution out;
  out.grid = mo.out;
  out.budget = {s.budget.E0, s.budget.T - mo.m * g.dt()};
  out.certificate = s.certificate;
  out.v = std::move(v);
  out.R = sym_field(out.grid);
  for (std::size_t p = 0; p < out.grid.points(); ++p)
    out.R.set_sym(p, Rp.sym(p, n) - SymMat::outer(out.v.vec(p, n)));
  return out;
}

CompSubsolution mollify_subsolution(const CompSubsolution& s, double alpha) { return mollify_subsolution(s, alpha, alpha); }

CompSubsolution mollify_subsolution(const CompSubsolution& s, double alpha_x, double alpha_t) {
  const Grid& g = s.grid;
  int n = g.n;
  int ns = SymMat::size(n);
  Mollifier mo(g, s.budget, alpha_x, alpha_t);
  Field rho = mo.apply(g, 1, [&](std::size_t p, double* o) { o[0] = s.rho(p); });
  Field V = mo.apply(g, n, [&](std::size_t p, double* o) {
    for (int c = 0; c < n; ++c) o[c] = s.V(p, c);
  });
  Field Rp = mo.apply(g, ns, [&](std::size_t p, double* o) {
    double rr = s.rho(p);
    if (!(rr > 0.0)) fail(ErrorKind::invalid_input, "mollify: density must be positive");
    SymMat R = s.calR.sym(p, n) + (1.0 / rr) * SymMat::outer(s.V.vec(p, n));
    for (int c = 0; c < ns; ++c) o[c] = R.a[c];
  });
  Field rp = mo.apply(g, 1, [&](std::size_t p, double* o) { o[0] = s.r(p) + pressure(s.rho(p), s.gamma); });
  CompSubsolution out;
  out.grid = mo.out;
  out.gamma = s.gamma;
  out.budget = {s.budget.E0, s.budget.T - mo.m * g.dt()};
  out.certificate = s.certificate;
  out.rho = std::move(rho);
  out.V = std::move(V);
  out.calR = sym_field(out.grid);
  out.r = scalar_field(out.grid);
  for (std::size_t p = 0; p < out.grid.points(); ++p) {
    double rb = out.rho(p);
    out.calR.set_sym(p, Rp.sym(p, n) - (1.0 / rb) * SymMat::outer(out.V.vec(p, n)));
    out.r(p) = rp(p) - pressure(rb, s.gamma);
  }
  return out;
}

double strictify_lambda(double eps, double E0) {
  if (!(eps > 0.0)) fail(ErrorKind::invalid_input, "strictify: eps must be positive");
  if (!(E0 > 0.0)) fail(ErrorKind::invalid_input, "strictify: E0 must be positive");
  return std::min(eps / (6.0 * E0), 0.5);
}

IncompSubsolution strictify_incomp(const IncompSubsolution& s, double eps, StrictifyReport* rep) {
  double lam = strictify_lambda(eps, s.budget.E0);
  const Grid& g = s.grid;
  int n = g.n;
  double c = 2.0 * s.budget.E0 / (n * g.domain_volume());
  IncompSubsolution partner = s;
  partner.v = vector_field(g);
  partner.certificate = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) partner.R.set_sym(p, SymMat::identity(n, c));
  IncompSubsolution out = convex_combine_incomp({s, partner}, {1.0 - lam, lam});
  StrictifyReport r;
  r.lambda = lam;
  r.floor = lam * c;
  r.min_eig = 1e300;
  for (std::size_t p = 0; p < g.points(); ++p) r.min_eig = std::min(r.min_eig, lambda_min(out.R.sym(p, n)));
  r.initial_distance = integrate_slice(g, 0, [&](std::size_t p) {
    return 0.5 * ((out.v.vec(p, n) - s.v.vec(p, n)).norm2() + out.R.sym(p, n).trace());
  });
  for (int j = 0; j < g.Nt; ++j)
    r.max_trace_integral = std::max(r.max_trace_integral,
                                    integrate_slice(g, j, [&](std::size_t p) { return out.R.sym(p, n).trace(); }));
  if (r.min_eig < r.floor - 1e-10)
    fail(ErrorKind::construction_failed, "strictify_incomp: stress floor not met");
  if (rep) *rep = r;
  return out;
}

double initial_distance(const CompSubsolution& a, const CompSubsolution& b) {
  const Grid& g = a.grid;
  int n = g.n;
  double gm = b.gamma;
  return integrate_slice(g, 0, [&](std::size_t p) {
    double ra = a.rho(p), rb = b.rho(p);
    Vec d = (1.0 / std::sqrt(rb)) * b.V.vec(p, n) - (1.0 / std::sqrt(ra)) * a.V.vec(p, n);
    return std::pow(std::abs(rb - ra), gm) + d.norm2() + b.calR.sym(p, n).trace() + b.r(p) / (gm - 1.0);
  });
}

CompSubsolution strictify_comp(const CompSubsolution& s, double eps, const StrictifyCompOptions& opt,
                               StrictifyReport* rep) {
  if (!(eps > 0.0)) fail(ErrorKind::invalid_input, "strictify: eps must be positive");
  const Grid& g = s.grid;
  int n = g.n;
  double E0 = s.budget.E0;
  double vmax = 0.0, rmin = 1e300, rmax = -1e300;
  std::size_t S = g.spatial_points();
  for (std::size_t k = 0; k < S; ++k) {
    std::size_t p = g.index(0, k);
    vmax = std::max(vmax, s.V.vec(p, n).norm());
    rmin = std::min(rmin, s.rho(p));
    rmax = std::max(rmax, s.rho(p));
  }
  if (vmax <= 1e-12 * std::max(1.0, rmax) && rmax - rmin <= 1e-12 * std::max(1.0, rmax))
    fail(ErrorKind::degenerate_input, "strictify_comp: constant density with zero momentum admits no strict subsolution");
  double tol = opt.hypothesis_tol * E0;
  double e_init = energy_total(s, 0);
  double kin_pot = e_init - integrate_slice(g, 0, [&](std::size_t p) {
                     return 0.5 * s.calR.sym(p, n).trace() + s.r(p) / (s.gamma - 1.0);
                   });
  if (std::abs(kin_pot - E0) > tol)
    fail(ErrorKind::precondition, "strictify_comp: initial energy is not saturated");
  double defect0 = integrate_slice(g, 0, [&](std::size_t p) {
    return 0.5 * s.calR.sym(p, n).trace() + s.r(p) / (s.gamma - 1.0);
  });
  if (defect0 > tol) fail(ErrorKind::precondition, "strictify_comp: initial defect is not zero");

  double alpha = opt.alpha > 0.0 ? opt.alpha : 2.0 * std::max({g.dx(0), g.dx(1), n == 3 ? g.dx(2) : 0.0});
  double alpha_t = opt.alpha_time > 0.0 ? opt.alpha_time : alpha;
  CompSubsolution m1 = mollify_subsolution(s, alpha, alpha_t);
  double rho_hat = std::pow((s.gamma - 1.0) * E0 / g.domain_volume(), 1.0 / s.gamma);
  CompSubsolution rest = m1;
  rest.rho = scalar_field(m1.grid, rho_hat);
  rest.V = vector_field(m1.grid);
  rest.calR = sym_field(m1.grid);
  rest.r = scalar_field(m1.grid);
  rest.certificate = 0.0;

  StrictifyReport r;
  double lam = 0.5;
  for (int h = 0; h <= opt.max_halvings; ++h, lam *= 0.5) {
    CompSubsolution mix = convex_combine_comp({rest, m1}, {lam, 1.0 - lam});
    CompSubsolution out = mollify_subsolution(mix, alpha, alpha_t);
    const Grid& go = out.grid;
    double dist = initial_distance(s, out);
    double tr = 0.0;
    for (int j = 0; j < go.Nt; ++j)
      tr = std::max(tr, integrate_slice(go, j, [&](std::size_t p) {
                      return out.calR.sym(p, n).trace() + n * out.r(p);
                    }));
    if (dist >= 0.5 * eps || 0.5 * tr > opt.trace_slack) continue;
    r.lambda = lam;
    r.halvings = h;
    r.initial_distance = dist;
    r.max_trace_integral = tr;
    r.min_eig = 1e300;
    r.min_r = 1e300;
    for (std::size_t p = 0; p < go.points(); ++p) {
      r.min_eig = std::min(r.min_eig, lambda_min(out.calR.sym(p, n) + SymMat::identity(n, out.r(p))));
      r.min_r = std::min(r.min_r, out.r(p));
    }
    if (!(r.min_eig > 0.0))
      fail(ErrorKind::construction_failed, "strictify_comp: mollified stress is not positive definite");
    if (rep) *rep = r;
    return out;
  }
  fail(ErrorKind::construction_failed, "strictify_comp: no mixing weight meets the closeness target");
}

std::vector<double> compensating_potential(const CompSubsolution& s) {
  int n = s.grid.n;
  check_gamma(n, s.gamma);
  double f = 2.0 / (n * (s.gamma - 1.0)) - 1.0;
  double vol = s.grid.domain_volume();
  std::vector<double> rc(s.grid.Nt);
  for (int j = 0; j < s.grid.Nt; ++j)
    rc[j] = std::max(0.0, f) * integrate_slice(s.grid, j, [&](std::size_t p) { return s.r(p); }) / vol;
  return rc;
}

}  // namespace convint
