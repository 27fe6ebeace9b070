#include "convint/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "convint/errors.hpp"
#include "convint/spectral.hpp"

namespace convint {

namespace {

using cplx = std::complex<double>;

// sum_s f(s) exp(i theta_m(s)) for every bank mode, one spatial slice
class ModeSums {
 public:
  ModeSums(const Grid& g, const TestBank& bank) : sp_(dims(g), lens(g)), buf_(sp_.csize()) {
    int n = g.n;
    for (const auto& md : bank.modes) {
      std::size_t c = 0;
      bool conj = md.m[n - 1] < 0;
      for (int a = 0; a < n; ++a) {
        int m = conj ? -md.m[a] : md.m[a];
        int ext = (a == n - 1) ? g.N[a] / 2 + 1 : g.N[a];
        int i = a == n - 1 ? m : (m % g.N[a] + g.N[a]) % g.N[a];
        c = c * std::size_t(ext) + std::size_t(i);
      }
      double ph = 0.0;
      for (int a = 0; a < n; ++a) ph += std::numbers::pi * md.m[a] / g.N[a];
      idx_.push_back(c);
      flip_.push_back(conj);
      phase_.push_back(cplx(std::cos(ph), std::sin(ph)));
    }
  }

  void compute(const double* f, cplx* out) {
    sp_.forward(f, buf_.data());
    for (std::size_t k = 0; k < idx_.size(); ++k) {
      cplx F = buf_[idx_[k]];
      // F(m) for the mode itself; conj handles the unstored half of the last axis
      cplx Fm = flip_[k] ? std::conj(F) : F;
      out[k] = phase_[k] * std::conj(Fm);
    }
  }

 private:
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
  Spectral sp_;
  std::vector<cplx> buf_;
  std::vector<std::size_t> idx_;
  std::vector<bool> flip_;
  std::vector<cplx> phase_;
};

struct ModeGeom {
  std::array<double, 3> k{};
  double knorm = 0.0;
  bool sine = false;
  bool zero = false;
};

double sumS(const ModeGeom& m, cplx I) { return m.sine ? I.imag() : I.real(); }
double sumD(const ModeGeom& m, cplx I, int a) { return m.sine ? m.k[a] * I.real() : -m.k[a] * I.imag(); }

double slice_energy(const Candidate& c, const Field& rho, const Field& V, std::size_t first) {
  const Grid& g = c.grid;
  int n = g.n;
  double e = 0.0;
  for (std::size_t s = 0; s < g.spatial_points(); ++s) {
    std::size_t p = first + s;
    double v2 = V.vec(p, n).norm2();
    if (c.incompressible) {
      e += 0.5 * v2;
    } else {
      double r = rho(p);
      if (!(r > 0.0)) fail(ErrorKind::invalid_input, "verify: density must be positive");
      e += 0.5 * v2 / r + std::pow(r, c.gamma) / (c.gamma - 1.0);
    }
  }
  return e * g.cell_volume();
}

void check_candidate(const Candidate& c) {
  const Grid& g = c.grid;
  g.validate();
  std::size_t np = g.points(), S = g.spatial_points();
  if (c.V.points() != np || c.V.comps != g.n) fail(ErrorKind::invalid_input, "verify: V does not match the grid");
  if (!c.incompressible && (c.rho.points() != np || c.rho.comps != 1))
    fail(ErrorKind::invalid_input, "verify: rho does not match the grid");
  if (!c.V_init.v.empty() && c.V_init.points() != S) fail(ErrorKind::invalid_input, "verify: initial V shape");
  if (!c.rho_init.v.empty() && c.rho_init.points() != S) fail(ErrorKind::invalid_input, "verify: initial rho shape");
  if (!c.stress.v.empty() && (c.stress.points() != np || c.stress.comps != SymMat::size(g.n)))
    fail(ErrorKind::invalid_input, "verify: stress shape");
  for (double x : c.V.v)
    if (!std::isfinite(x)) fail(ErrorKind::invalid_input, "verify: non-finite field");
}

}  // namespace

namespace {

// Time weights of tau and tau' against each sample. With vertex samples the
// fields are taken piecewise linear in time and each hat is integrated
// exactly against the bump, so data constant or linear in time is exact.
void time_weights(const Grid& g, const TimeBump& tb, std::vector<double>& Wt, std::vector<double>& Wd) {
  Wt.assign(g.Nt, 0.0);
  Wd.assign(g.Nt, 0.0);
  if (g.layout != TimeLayout::vertex || g.Nt < 2) {
    for (int j = 0; j < g.Nt; ++j) {
      Wt[j] = g.time_weight(j) * tb.value(g.t(j));
      Wd[j] = g.time_weight(j) * tb.deriv(g.t(j));
    }
    return;
  }
  static const double xi[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double om[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  double lo = tb.a, hi = tb.initial ? tb.a + tb.b : tb.b;
  double dt = g.dt();
  for (int i = 0; i + 1 < g.Nt; ++i) {
    double ta = g.t(i), tz = g.t(i + 1);
    if (tz <= lo || ta >= hi) continue;
    double cuts[4] = {ta, std::max(ta, lo), std::min(tz, hi), tz};
    for (int c = 0; c < 3; ++c) {
      double u = cuts[c], v = cuts[c + 1];
      if (!(v > u)) continue;
      double mid = 0.5 * (u + v), half = 0.5 * (v - u);
      for (int q = 0; q < 4; ++q) {
        double x = mid + half * xi[q], wq = half * om[q];
        double f = tb.value(x), df = tb.deriv(x);
        double h1 = (x - ta) / dt, h0 = 1.0 - h1;
        Wt[i] += wq * h0 * f;
        Wt[i + 1] += wq * h1 * f;
        Wd[i] += wq * h0 * df;
        Wd[i + 1] += wq * h1 * df;
      }
    }
  }
}

}  // namespace

VerifyReport verify_weak(const Candidate& c, const TestBank& bank) {
  check_candidate(c);
  const Grid& g = c.grid;
  int n = g.n;
  if (bank.n != n) fail(ErrorKind::invalid_input, "verify: bank dimension does not match the grid");
  for (int a = 0; a < n; ++a)
    if (2 * bank.K >= g.N[a]) fail(ErrorKind::invalid_input, "verify: bank wavenumber above the grid Nyquist");
  std::size_t S = g.spatial_points();
  std::size_t M = bank.modes.size();
  int ns = SymMat::size(n);

  std::vector<ModeGeom> geo(M);
  for (std::size_t k = 0; k < M; ++k) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      geo[k].k[a] = 2.0 * std::numbers::pi * bank.modes[k].m[a] / g.len[a];
      s += geo[k].k[a] * geo[k].k[a];
    }
    geo[k].knorm = std::sqrt(s);
    geo[k].sine = bank.modes[k].sine;
    geo[k].zero = s == 0.0;
  }

  // fields: [rho], V_b, flux_bd
  int nf = (c.incompressible ? 0 : 1) + n + ns;
  int oV = c.incompressible ? 0 : 1, oF = oV + n;
  ModeSums ms(g, bank);
  std::vector<std::vector<cplx>> sums(std::size_t(g.Nt) * nf, std::vector<cplx>(M));
  std::vector<double> buf(S);
  for (int j = 0; j < g.Nt; ++j) {
    std::size_t first = g.index(j, std::size_t(0));
    auto put = [&](int f, const std::function<double(std::size_t)>& val) {
      for (std::size_t s = 0; s < S; ++s) buf[s] = val(first + s);
      ms.compute(buf.data(), sums[std::size_t(j) * nf + f].data());
    };
    if (!c.incompressible) put(0, [&](std::size_t p) { return c.rho(p); });
    for (int b = 0; b < n; ++b) put(oV + b, [&](std::size_t p) { return c.V(p, b); });
    for (int b = 0; b < n; ++b)
      for (int d = b; d < n; ++d)
        put(oF + SymMat::idx(n, b, d), [&](std::size_t p) {
          double v = c.V(p, b) * c.V(p, d);
          if (!c.incompressible) {
            v /= c.rho(p);
            if (b == d) v += std::pow(c.rho(p), c.gamma);
          }
          if (!c.stress.v.empty()) v += c.stress(p, SymMat::idx(n, b, d));
          return v;
        });
  }
  // initial data
  std::vector<std::vector<cplx>> init(1 + n, std::vector<cplx>(M));
  {
    auto put = [&](int f, const std::function<double(std::size_t)>& val) {
      for (std::size_t s = 0; s < S; ++s) buf[s] = val(s);
      ms.compute(buf.data(), init[f].data());
    };
    if (!c.incompressible)
      put(0, [&](std::size_t s) { return c.rho_init.v.empty() ? c.rho(s) : c.rho_init(s); });
    for (int b = 0; b < n; ++b)
      put(1 + b, [&](std::size_t s) { return c.V_init.v.empty() ? c.V(s, b) : c.V_init(s, b); });
  }

  double dV = g.cell_volume();
  VerifyReport rep;
  rep.n = n;
  rep.K = bank.K;
  rep.bank_size = bank.size();
  rep.incompressible = c.incompressible;
  rep.gamma = c.incompressible ? 0.0 : c.gamma;
  rep.dims = {g.N[0], g.N[1], g.N[2], g.Nt};
  rep.certificates = c.certificates;
  auto note = [&](double& worst, std::string& label, double val, const std::string& name) {
    if (val > worst) {
      worst = val;
      label = name;
    }
  };

  for (const auto& tb : bank.times) {
    std::vector<double> tau, dtau;
    time_weights(g, tb, tau, dtau);
    double tau0 = tb.value(g.t0);
    double st = tb.sup(), sd = tb.sup_deriv();
    for (std::size_t k = 0; k < M; ++k) {
      const ModeGeom& mg = geo[k];
      std::string name = bank.modes[k].name(n) + "*" + tb.name();
      double kn = mg.knorm;
      double nrm = std::max(st, std::sqrt(sd * sd + st * st * kn * kn));
      // mass (compressible) or divergence constraint (incompressible)
      {
        double acc = 0.0;
        for (int j = 0; j < g.Nt; ++j) {
          const auto* row = &sums[std::size_t(j) * nf];
          double v = 0.0;
          if (!c.incompressible) v += dtau[j] * sumS(mg, row[0][k]);
          for (int a = 0; a < n; ++a) v += tau[j] * sumD(mg, row[oV + a][k], a);
          acc += v;
        }
        if (!c.incompressible) acc += tau0 * sumS(mg, init[0][k]);
        note(rep.mass, rep.worst_mass, std::abs(acc * dV) / nrm, "mass:" + name);
      }
      if (!c.incompressible) {
        for (int b = 0; b < n; ++b) {
          double acc = 0.0;
          for (int j = 0; j < g.Nt; ++j) {
            const auto* row = &sums[std::size_t(j) * nf];
            double v = dtau[j] * sumS(mg, row[oV + b][k]);
            for (int a = 0; a < n; ++a) v += tau[j] * sumD(mg, row[oF + SymMat::idx(n, b, a)][k], a);
            acc += v;
          }
          acc += tau0 * sumS(mg, init[1 + b][k]);
          note(rep.momentum, rep.worst_momentum, std::abs(acc * dV) / nrm,
               "momentum" + std::to_string(b) + ":" + name);
        }
      } else {
        if (mg.zero) continue;
        int nq = n == 2 ? 1 : 3;
        for (int q = 0; q < nq; ++q) {
          // phi_b = tau sum_c A_bc d_c S, the rotated gradient (n = 2) or curl of S e_q
          double A[3][3] = {};
          if (n == 2) {
            A[0][1] = -1.0;
            A[1][0] = 1.0;
          } else {
            // epsilon_{b c q}
            for (int b = 0; b < 3; ++b)
              for (int cc = 0; cc < 3; ++cc)
                if (b != cc && b != q && cc != q) A[b][cc] = (cc == (b + 1) % 3) ? 1.0 : -1.0;
          }
          double Ak[3] = {};
          double ak2 = 0.0;
          for (int b = 0; b < n; ++b) {
            for (int cc = 0; cc < n; ++cc) Ak[b] += A[b][cc] * mg.k[cc];
            ak2 += Ak[b] * Ak[b];
          }
          if (ak2 == 0.0) continue;
          double ak = std::sqrt(ak2);
          double nq_norm = std::max(st * ak, std::sqrt(sd * sd * ak2 + st * st * ak2 * kn * kn));
          double acc = 0.0;
          for (int j = 0; j < g.Nt; ++j) {
            const auto* row = &sums[std::size_t(j) * nf];
            double v = 0.0;
            for (int b = 0; b < n; ++b)
              for (int cc = 0; cc < n; ++cc)
                if (A[b][cc] != 0.0) v += dtau[j] * A[b][cc] * sumD(mg, row[oV + b][k], cc);
            for (int b = 0; b < n; ++b)
              for (int d = 0; d < n; ++d) v -= tau[j] * Ak[b] * mg.k[d] * sumS(mg, row[oF + SymMat::idx(n, b, d)][k]);
            acc += v;
          }
          for (int b = 0; b < n; ++b)
            for (int cc = 0; cc < n; ++cc)
              if (A[b][cc] != 0.0) acc += tau0 * A[b][cc] * sumD(mg, init[1 + b][k], cc);
          note(rep.momentum, rep.worst_momentum, std::abs(acc * dV) / nq_norm,
               "divfree" + std::to_string(q) + ":" + name);
        }
      }
    }
  }
  return rep;
}

EnergyCheck verify_energy(const Candidate& c, double tol_rel, double E0) {
  check_candidate(c);
  const Grid& g = c.grid;
  std::size_t S = g.spatial_points();
  EnergyCheck ec;
  if (!c.V_init.v.empty()) {
    Field r0 = c.rho_init.v.empty() && !c.incompressible ? c.rho.slab(0, S) : c.rho_init;
    Candidate tmp;
    tmp.grid = g;
    tmp.incompressible = c.incompressible;
    tmp.gamma = c.gamma;
    ec.reference = slice_energy(tmp, r0, c.V_init, 0);
  } else {
    ec.reference = slice_energy(c, c.rho, c.V, 0);
  }
  double scale = E0 > 0.0 ? E0 : ec.reference;
  ec.tol = tol_rel * scale;
  for (int j = 0; j < g.Nt; ++j) {
    double e = slice_energy(c, c.rho, c.V, g.index(j, std::size_t(0)));
    ec.t.push_back(g.t(j));
    ec.energy.push_back(e);
    double x = e - ec.reference;
    ec.worst_excess = std::max(ec.worst_excess, x);
    if (x > ec.tol) ++ec.violations;
  }
  return ec;
}

VerifyReport verify(const Candidate& c, const TestBank& bank, double tol_rel, double E0) {
  VerifyReport r = verify_weak(c, bank);
  EnergyCheck e = verify_energy(c, tol_rel, E0);
  r.energy = e.energy;
  r.energy_ref = e.reference;
  r.energy_tol = e.tol;
  r.violations = e.violations;
  return r;
}

Candidate candidate_from_snapshot(const Snapshot& s) {
  Candidate c;
  c.grid = s.grid;
  c.gamma = s.gamma;
  std::size_t np = s.grid.points();
  auto full = [&](const std::string& k) {
    const Field& f = s.get(k);
    if (f.points() != np) fail(ErrorKind::invalid_input, "verify: field " + k + " must cover every time sample");
    return f;
  };
  if (s.has("v")) {
    c.incompressible = true;
    c.V = full("v");
    if (s.has("v_init")) c.V_init = s.get("v_init");
  } else {
    c.rho = full("rho");
    c.V = full("V");
    if (s.has("rho_init")) c.rho_init = s.get("rho_init");
    if (s.has("V_init")) c.V_init = s.get("V_init");
    if (!(c.gamma > 1.0)) fail(ErrorKind::invalid_input, "verify: snapshot gamma must exceed 1");
  }
  if (s.has("stress")) c.stress = full("stress");
  return c;
}

}  // namespace convint
