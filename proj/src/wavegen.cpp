#include "convint/wavegen.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "convint/errors.hpp"
#include "convint/rng.hpp"

namespace convint {

PlaneWaveCoeffs plane_wave_coeffs(const Vec& a, const Vec& b) {
  if (a.n != b.n) fail(ErrorKind::invalid_input, "plane_wave_coeffs: dimension mismatch");
  double r = a.norm();
  if (r <= 0.0) fail(ErrorKind::precondition, "plane_wave_coeffs: |a| must be positive");
  if (std::abs(r - b.norm()) > 1e-10 * (1.0 + r)) fail(ErrorKind::precondition, "plane_wave_coeffs: |a| != |b|");
  if ((a - b).norm() <= 1e-8 * r || (a + b).norm() <= 1e-8 * r)
    fail(ErrorKind::degenerate_pair, "plane_wave_coeffs: b = +-a");
  PlaneWaveCoeffs w;
  w.xi = a + b;
  w.c = -(a.norm2() + a.dot(b));
  w.ampV = a - b;
  w.ampU = SymMat::outer(a) - SymMat::outer(b);
  return w;
}

double segment_length_bound(const StateVU& z, double r) {
  return (r * r - z.V.norm2()) / (4.0 * hull_dim(z.V.n) * r);
}

namespace {

bool strictly_inside(const StateVU& z, const SymMat& R0, double r) {
  return hull_membership({z, R0, r}).margin > 0.0;
}

// largest t with z +- t d inside
double symmetric_reach(const StateVU& z, const StateVU& d, const SymMat& R0, double r) {
  auto ok = [&](double t) { return strictly_inside(z + t * d, R0, r) && strictly_inside(z - t * d, R0, r); };
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (ok(hi) && guard++ < 60) lo = hi, hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (ok(mid)) lo = mid;
    else hi = mid;
  }
  return lo;
}

}  // namespace

AdmissibleSegment find_segment(const StateVU& z, const SymMat& R0, double r, std::uint64_t seed) {
  int n = z.V.n;
  HullResult h = hull_membership({z, R0, r});
  if (h.cls != Membership::interior) {
    std::ostringstream os;
    os << "find_segment: state is " << membership_name(h.cls) << " (margin " << h.margin << ")";
    fail(ErrorKind::precondition, os.str());
  }
  double c = (r * r - R0.trace()) / n;
  SymMat W = z.U + R0 + SymMat::identity(n, c);
  SymMat C = W - SymMat::outer(z.V);
  SymMat S = sqrt_psd(C);
  double gap = r * r - z.V.norm2();

  Rng rng(seed);
  auto Q = random_orthonormal(n, rng);
  std::vector<Vec> pts;
  std::vector<double> wts;
  for (int j = 0; j < n; ++j) {
    Vec cj = S.mul(Q[j]);
    double l2 = cj.norm2();
    if (l2 <= 1e-300) continue;
    Vec ch = (1.0 / std::sqrt(l2)) * cj;
    double vc = z.V.dot(ch);
    double disc = std::sqrt(vc * vc + gap);
    double tp = -vc + disc, tm = -vc - disc;
    double pj = l2 / gap;
    pts.push_back(z.V + tp * ch);
    wts.push_back(pj * (-tm / (tp - tm)));
    pts.push_back(z.V + tm * ch);
    wts.push_back(pj * (tp / (tp - tm)));
  }

  AdmissibleSegment best;
  double best_score = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t l = i + 1; l < pts.size(); ++l) {
      const Vec& a = pts[i];
      const Vec& b = pts[l];
      if ((a - b).norm() <= 1e-8 * r || (a + b).norm() <= 1e-8 * r) continue;
      StateVU d = hull_point(a, R0, r) - hull_point(b, R0, r);
      double reach = symmetric_reach(z, d, R0, r);
      double score = 0.5 * reach * (a - b).norm();
      if (score > best_score) {
        best_score = score;
        best.a = a;
        best.b = b;
        best.lambda = 0.5 * reach;
        best.halfdir = best.lambda * d;
      }
    }
  if (best_score < 0.0) fail(ErrorKind::construction_failed, "find_segment: no admissible wave pair");
  best.center = z;
  best.r = r;
  best.R0 = R0;
  double need = segment_length_bound(z, r);
  if (best.v_norm() < need) {
    std::ostringstream os;
    os << "find_segment: |v| = " << best.v_norm() << " below bound " << need;
    fail(ErrorKind::construction_failed, os.str());
  }
  return best;
}

namespace {

struct Step {
  double f, d1, d2;
};

// C-infinity step: 0 for x <= 0, 1 for x >= 1
Step smooth_step(double x) {
  if (x <= 0.0) return {0.0, 0.0, 0.0};
  if (x >= 1.0) return {1.0, 0.0, 0.0};
  double y = 1.0 - x;
  double A = std::exp(-1.0 / x), B = std::exp(-1.0 / y);
  double m = std::max(A, B);
  A /= m;
  B /= m;
  double A1 = A / (x * x), B1 = -B / (y * y);
  double A2 = A * (1.0 / (x * x * x * x) - 2.0 / (x * x * x));
  double B2 = B * (1.0 / (y * y * y * y) - 2.0 / (y * y * y));
  double D = A + B, D1 = A1 + B1;
  double Nn = A1 * B - A * B1;
  double Nn1 = A2 * B - A * B2;
  return {A / D, Nn / (D * D), Nn1 / (D * D) - 2.0 * Nn * D1 / (D * D * D)};
}

}  // namespace

double Cutoff1D::value(double s) const {
  double f, d1, d2;
  eval(s, f, d1, d2);
  return f;
}

void Cutoff1D::eval(double s, double& f, double& df, double& d2f) const {
  double as = std::abs(s);
  if (as >= 1.0) {
    f = df = d2f = 0.0;
    return;
  }
  Step st = smooth_step((1.0 - as) / w);
  double sg = s >= 0.0 ? 1.0 : -1.0;
  f = st.f;
  df = -sg * st.d1 / w;
  d2f = st.d2 / (w * w);
}

double Cutoff1D::sup_d1() const {
  double m = 0.0;
  for (int i = 1; i < 4000; ++i) m = std::max(m, std::abs(smooth_step(i / 4000.0).d1));
  return m / w;
}

double Cutoff1D::sup_d2() const {
  double m = 0.0;
  for (int i = 1; i < 4000; ++i) m = std::max(m, std::abs(smooth_step(i / 4000.0).d2));
  return m / (w * w);
}

namespace {

// A_W(zeta) = (V . zeta_x, zeta_t V + U zeta_x), zeta in R^{n+1}
void apply_A(const StateVU& W, const double* zeta, int n, double& mass, Vec& mom) {
  mass = 0.0;
  mom = Vec(n);
  for (int i = 0; i < n; ++i) mass += W.V[i] * zeta[i];
  for (int i = 0; i < n; ++i) {
    double s = zeta[n] * W.V[i];
    for (int j = 0; j < n; ++j) s += W.U(i, j) * zeta[j];
    mom[i] = s;
  }
}

// orthonormal basis of R^n x S_0^n
std::vector<StateVU> state_basis(int n) {
  std::vector<StateVU> B;
  for (int i = 0; i < n; ++i) {
    StateVU s{Vec(n), SymMat(n)};
    s.V[i] = 1.0;
    B.push_back(s);
  }
  const double r2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      StateVU s{Vec(n), SymMat(n)};
      s.U.at(i, j) = r2;
      B.push_back(s);
    }
  {
    StateVU s{Vec(n), SymMat(n)};
    s.U.at(0, 0) = r2;
    s.U.at(1, 1) = -r2;
    B.push_back(s);
  }
  if (n == 3) {
    StateVU s{Vec(n), SymMat(n)};
    double q = 1.0 / std::sqrt(6.0);
    s.U.at(0, 0) = q;
    s.U.at(1, 1) = q;
    s.U.at(2, 2) = -2.0 * q;
    B.push_back(s);
  }
  return B;
}

double state_norm_l2(double mass, const Vec& mom) { return std::sqrt(mass * mass + mom.norm2()); }

}  // namespace

double l1_alpha(int n) { return n == 2 ? 1.5 : 2.5; }

namespace {

std::array<StateVU, 4> corrector_coeffs(int n, const StateVU& p, const std::array<double, 4>& eta) {
  auto basis = state_basis(n);
  int d = int(basis.size());
  Eigen::MatrixXd B(n + 1, d);
  for (int k = 0; k < d; ++k) {
    double m;
    Vec mo;
    apply_A(basis[k], eta.data(), n, m, mo);
    B(0, k) = m;
    for (int i = 0; i < n; ++i) B(1 + i, k) = mo[i];
  }
  Eigen::MatrixXd BBt = B * B.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(BBt);
  std::array<StateVU, 4> G;
  for (int j = 0; j <= n; ++j) {
    std::array<double, 4> e{};
    e[j] = 1.0;
    double m;
    Vec mo;
    apply_A(p, e.data(), n, m, mo);
    Eigen::VectorXd rhs(n + 1);
    rhs(0) = m;
    for (int i = 0; i < n; ++i) rhs(1 + i) = mo[i];
    Eigen::VectorXd coef = B.transpose() * ldlt.solve(rhs);
    StateVU g{Vec(n), SymMat(n)};
    for (int k = 0; k < d; ++k) g = g + coef(k) * basis[k];
    G[j] = g;
  }
  return G;
}

double image_bound_coef(const std::array<StateVU, 4>& G, int n, const Cutoff1D& cut) {
  double s = 0.0;
  for (int j = 0; j <= n; ++j) s += norm(G[j]);
  return cut.sup_d1() * s / kTwoPi;
}

double residual_bound_coef(const std::array<StateVU, 4>& G, int n, const Cutoff1D& cut) {
  double d1 = cut.sup_d1(), d2 = cut.sup_d2();
  double s = 0.0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      std::array<double, 4> e{};
      e[i] = 1.0;
      double m;
      Vec mo;
      apply_A(G[j], e.data(), n, m, mo);
      s += (i == j ? d2 : d1 * d1) * state_norm_l2(m, mo);
    }
  return s / kTwoPi;
}

struct WaveSetup {
  PlaneWaveCoeffs coeffs;
  std::array<double, 4> eta{};
  std::array<StateVU, 4> G;
};

WaveSetup setup(const AdmissibleSegment& seg) {
  int n = seg.a.n;
  WaveSetup s;
  s.coeffs = plane_wave_coeffs(seg.a, seg.b);
  double nrm = std::sqrt(s.coeffs.xi.norm2() + s.coeffs.c * s.coeffs.c);
  for (int i = 0; i < n; ++i) s.eta[i] = s.coeffs.xi[i] / nrm;
  s.eta[n] = s.coeffs.c / nrm;
  s.G = corrector_coeffs(n, seg.halfdir, s.eta);
  return s;
}

}  // namespace

int k_min(const AdmissibleSegment& seg, double eps, double cutoff_width) {
  if (!(eps > 0.0)) fail(ErrorKind::invalid_input, "k_min: eps must be positive");
  WaveSetup s = setup(seg);
  Cutoff1D cut{cutoff_width};
  double coef = image_bound_coef(s.G, seg.a.n, cut);
  return std::max(1, int(std::ceil(coef / eps)));
}

StateVU LocalizedWave::eval(const double* y) const {
  double f[4], d1[4], d2[4];
  for (int i = 0; i <= n; ++i) cutoff.eval(y[i], f[i], d1[i], d2[i]);
  double chi = 1.0;
  for (int i = 0; i <= n; ++i) chi *= f[i];
  StateVU out{Vec(n), SymMat(n)};
  if (chi == 0.0) {
    bool any = false;
    for (int i = 0; i <= n; ++i) any = any || d1[i] != 0.0;
    if (!any) return out;
  }
  double psi = 0.0;
  for (int i = 0; i <= n; ++i) psi += eta[i] * y[i];
  double ph = kTwoPi * k * psi;
  double h = std::sin(ph);
  double H = -std::cos(ph) / kTwoPi;
  out = (chi * h) * p;
  // Q = - sum_j d_j chi G_j
  for (int j = 0; j <= n; ++j) {
    double dj = d1[j];
    for (int i = 0; i <= n; ++i)
      if (i != j) dj *= f[i];
    if (dj != 0.0) out = out + (-(H / k) * dj) * G[j];
  }
  return out;
}

void LocalizedWave::residual(const double* y, double& mass, Vec& mom) const {
  mass = 0.0;
  mom = Vec(n);
  double f[4], d1[4], d2[4];
  for (int i = 0; i <= n; ++i) cutoff.eval(y[i], f[i], d1[i], d2[i]);
  double psi = 0.0;
  for (int i = 0; i <= n; ++i) psi += eta[i] * y[i];
  double H = -std::cos(kTwoPi * k * psi) / kTwoPi;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      double dij = 1.0;
      for (int l = 0; l <= n; ++l) {
        if (l == i && l == j) dij *= d2[l];
        else if (l == i || l == j) dij *= d1[l];
        else dij *= f[l];
      }
      if (dij == 0.0) continue;
      std::array<double, 4> e{};
      e[i] = 1.0;
      double m;
      Vec mo;
      apply_A(G[j], e.data(), n, m, mo);
      double s = -(H / k) * dij;
      mass += s * m;
      mom += s * mo;
    }
}

WaveCertificates sample_certificates(const LocalizedWave& w, int res) {
  WaveCertificates c = w.cert;
  c.sample_res = res;
  int n = w.n;
  double h = 2.0 / res;
  double dv = std::pow(h, n + 1);
  std::size_t total = 1;
  for (int i = 0; i <= n; ++i) total *= std::size_t(res);
  Vec sumV(n);
  SymMat sumU(n);
  double rsup = 0.0, img = 0.0, l1 = 0.0;
  double pp = w.p.V.norm2() + w.p.U.dot(w.p.U);
  double y[4];
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t q = idx;
    for (int i = n; i >= 0; --i) {
      y[i] = -1.0 + (double(q % res) + 0.5) * h;
      q /= res;
    }
    StateVU s = w.eval(y);
    sumV += s.V;
    sumU += s.U;
    l1 += s.V.norm();
    double m;
    Vec mo;
    w.residual(y, m, mo);
    rsup = std::max(rsup, std::sqrt(m * m + mo.norm2()));
    double proj = 0.0;
    if (pp > 0.0) proj = std::clamp((s.V.dot(w.p.V) + s.U.dot(w.p.U)) / pp, -1.0, 1.0);
    img = std::max(img, norm(s - proj * w.p));
  }
  double vol = std::pow(2.0, n + 1);
  double denom = w.lambda > 0.0 ? w.lambda * vol : 1.0;
  c.residual_sup = rsup;
  c.mean_V = sumV.norm() * dv / denom;
  c.mean_U = sumU.frob() * dv / denom;
  c.image_dist = img;
  c.l1_V = l1 * dv;
  return c;
}

LocalizedWave localize(const AdmissibleSegment& seg, int k, double eps, const LocalizeOptions& opt) {
  if (k < 1) fail(ErrorKind::invalid_input, "localize: k must be >= 1");
  LocalizedWave w;
  w.n = seg.a.n;
  w.seg = seg;
  w.lambda = seg.lambda;
  w.k = k;
  w.cutoff = Cutoff1D{opt.cutoff_width};
  WaveSetup s = setup(seg);
  w.coeffs = s.coeffs;
  w.eta = s.eta;
  w.G = s.G;
  w.p = seg.halfdir;
  w.cert.image_bound = image_bound_coef(w.G, w.n, w.cutoff) / k;
  w.cert.residual_bound = residual_bound_coef(w.G, w.n, w.cutoff) / k;
  if (opt.sample_res > 0) w.cert = sample_certificates(w, opt.sample_res);
  if (w.cert.image_bound > eps) {
    std::ostringstream os;
    os << "localize: k = " << k << " below k_min = " << k_min(seg, eps, opt.cutoff_width)
       << " (image bound " << w.cert.image_bound << ", residual bound " << w.cert.residual_bound << ")";
    throw Error(ErrorKind::frequency_too_low, os.str());
  }
  return w;
}

std::size_t CubeBox::count(int n) const {
  std::size_t c = 1;
  for (int a = 0; a <= n; ++a) c *= std::size_t(size[a]);
  return c;
}

std::size_t box_local_index(const CubeBox& b, int n, int j, const std::array<int, 3>& i) {
  std::size_t s = std::size_t(j - b.lo[n]);
  for (int a = 0; a < n; ++a) s = s * b.size[a] + std::size_t(i[a] - b.lo[a]);
  return s;
}

std::size_t box_grid_point(const Grid& g, const CubeBox& b, std::size_t local) {
  int n = g.n;
  std::array<int, 3> i{0, 0, 0};
  for (int a = n - 1; a >= 0; --a) {
    i[a] = b.lo[a] + int(local % b.size[a]);
    local /= b.size[a];
  }
  int j = b.lo[n] + int(local);
  return g.index(j, i);
}

CubeFields rescale_wave(const LocalizedWave& w, const Grid& g, const CubeBox& cube, double rho_min) {
  if (!(rho_min > 0.0)) fail(ErrorKind::precondition, "rescale_wave: rho_min must be positive");
  int n = g.n;
  if (w.n != n) fail(ErrorKind::invalid_input, "rescale_wave: dimension mismatch");
  for (int a = 0; a < n; ++a)
    if (cube.lo[a] < 0 || cube.size[a] < 1 || cube.lo[a] + cube.size[a] > g.N[a])
      fail(ErrorKind::precondition, "rescale_wave: cube outside domain");
  if (cube.lo[n] < 0 || cube.size[n] < 1 || cube.lo[n] + cube.size[n] > g.Nt)
    fail(ErrorKind::precondition, "rescale_wave: cube outside domain");

  double sr = std::sqrt(rho_min);
  double half_x = 1e300;
  std::array<double, 3> xc{};
  for (int a = 0; a < n; ++a) {
    half_x = std::min(half_x, 0.5 * cube.size[a] * g.dx(a));
    xc[a] = g.lo[a] + (cube.lo[a] + 0.5 * cube.size[a]) * g.dx(a);
  }
  double half_t = 0.5 * cube.size[n] * g.dt();
  double tc = 0.5 * (g.t(cube.lo[n]) + g.t(cube.lo[n] + cube.size[n] - 1));
  double L = std::min(half_x, half_t / sr);

  CubeFields out;
  out.box = cube;
  out.scale = L;
  std::size_t cnt = cube.count(n);
  int ns = SymMat::size(n);
  out.V = Field(cnt, n);
  out.U = Field(cnt, ns);
  out.res_mass = Field(cnt, 1);
  out.res_mom = Field(cnt, n);
  double vol = g.cell_volume();
  double y[4];
  for (std::size_t q = 0; q < cnt; ++q) {
    std::size_t rem = q;
    std::array<int, 3> i{0, 0, 0};
    for (int a = n - 1; a >= 0; --a) {
      i[a] = cube.lo[a] + int(rem % cube.size[a]);
      rem /= cube.size[a];
    }
    int j = cube.lo[n] + int(rem);
    bool inside = true;
    for (int a = 0; a < n; ++a) {
      y[a] = (g.x(a, i[a]) - xc[a]) / L;
      inside = inside && std::abs(y[a]) < 1.0;
    }
    y[n] = (g.t(j) - tc) / (sr * L);
    inside = inside && std::abs(y[n]) < 1.0;
    if (!inside) continue;
    StateVU s = w.eval(y);
    out.V.set_vec(q, sr * s.V);
    out.U.set_sym(q, s.U);
    double m;
    Vec mo;
    w.residual(y, m, mo);
    m *= sr / L;
    mo *= 1.0 / L;
    out.res_mass(q) = m;
    out.res_mom.set_vec(q, mo);
    double rn = std::sqrt(m * m + mo.norm2());
    double wt = vol * g.time_weight(j);
    out.res_sup = std::max(out.res_sup, rn);
    out.res_l1 += rn * wt;
    out.l1_V += sr * s.V.norm() * wt;
  }
  return out;
}

}  // namespace convint
