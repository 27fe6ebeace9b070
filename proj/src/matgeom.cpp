#include "convint/matgeom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "convint/errors.hpp"
#include "convint/rng.hpp"

namespace convint {

double Vec::dot(const Vec& o) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x[i] * o.x[i];
  return s;
}
double Vec::norm() const { return std::sqrt(norm2()); }
Vec& Vec::operator+=(const Vec& o) {
  for (int i = 0; i < n; ++i) x[i] += o.x[i];
  return *this;
}
Vec& Vec::operator-=(const Vec& o) {
  for (int i = 0; i < n; ++i) x[i] -= o.x[i];
  return *this;
}
Vec& Vec::operator*=(double s) {
  for (int i = 0; i < n; ++i) x[i] *= s;
  return *this;
}
Vec operator+(Vec a, const Vec& b) { return a += b; }
Vec operator-(Vec a, const Vec& b) { return a -= b; }
Vec operator*(double s, Vec a) { return a *= s; }
Vec operator-(Vec a) { return a *= -1.0; }

SymMat SymMat::identity(int n, double s) {
  SymMat m(n);
  for (int i = 0; i < n; ++i) m.at(i, i) = s;
  return m;
}
SymMat SymMat::outer(const Vec& u) {
  SymMat m(u.n);
  for (int i = 0; i < u.n; ++i)
    for (int j = i; j < u.n; ++j) m.at(i, j) = u[i] * u[j];
  return m;
}
SymMat SymMat::outer(const Vec& u, const Vec& v) {
  SymMat m(u.n);
  for (int i = 0; i < u.n; ++i)
    for (int j = i; j < u.n; ++j) m.at(i, j) = 0.5 * (u[i] * v[j] + v[i] * u[j]);
  return m;
}
SymMat SymMat::diag(double d0, double d1) {
  SymMat m(2);
  m.at(0, 0) = d0;
  m.at(1, 1) = d1;
  return m;
}
SymMat SymMat::diag(double d0, double d1, double d2) {
  SymMat m(3);
  m.at(0, 0) = d0;
  m.at(1, 1) = d1;
  m.at(2, 2) = d2;
  return m;
}
double SymMat::trace() const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += (*this)(i, i);
  return s;
}
double SymMat::dot(const SymMat& o) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += (*this)(i, j) * o(i, j);
  return s;
}
double SymMat::frob() const { return std::sqrt(dot(*this)); }
double SymMat::max_abs_entry() const {
  double m = 0.0;
  for (int k = 0; k < size(n); ++k) m = std::max(m, std::abs(a[k]));
  return m;
}
bool SymMat::finite() const {
  for (int k = 0; k < size(n); ++k)
    if (!std::isfinite(a[k])) return false;
  return true;
}
Vec SymMat::mul(const Vec& v) const {
  Vec r(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += (*this)(i, j) * v[j];
    r[i] = s;
  }
  return r;
}
SymMat SymMat::traceless() const {
  SymMat m = *this;
  double t = trace() / n;
  for (int i = 0; i < n; ++i) m.at(i, i) -= t;
  return m;
}
SymMat& SymMat::operator+=(const SymMat& o) {
  for (int k = 0; k < size(n); ++k) a[k] += o.a[k];
  return *this;
}
SymMat& SymMat::operator-=(const SymMat& o) {
  for (int k = 0; k < size(n); ++k) a[k] -= o.a[k];
  return *this;
}
SymMat& SymMat::operator*=(double s) {
  for (int k = 0; k < size(n); ++k) a[k] *= s;
  return *this;
}
SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
SymMat operator*(double s, SymMat a) { return a *= s; }

namespace {

void sort_desc(Eig& e) {
  for (int i = 0; i < e.n; ++i)
    for (int j = i + 1; j < e.n; ++j)
      if (e.values[j] > e.values[i]) {
        std::swap(e.values[i], e.values[j]);
        std::swap(e.vectors[i], e.vectors[j]);
      }
}

Eig eig2(const SymMat& m) {
  Eig e;
  e.n = 2;
  double a = m(0, 0), b = m(0, 1), d = m(1, 1);
  double h = 0.5 * (a - d);
  double rad = std::hypot(h, b);
  double mid = 0.5 * (a + d);
  e.values = {mid + rad, mid - rad, 0.0};
  if (rad == 0.0) {
    e.vectors[0] = {1.0, 0.0, 0.0};
    e.vectors[1] = {0.0, 1.0, 0.0};
    return e;
  }
  // angle of the leading eigenvector
  double th = 0.5 * std::atan2(b, h);
  double c = std::cos(th), s = std::sin(th);
  e.vectors[0] = {c, s, 0.0};
  e.vectors[1] = {-s, c, 0.0};
  return e;
}

Eig eig3(const SymMat& m) {
  double A[3][3], Q[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A[i][j] = m(i, j);
  double scale = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) scale += A[i][j] * A[i][j];
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = A[0][1] * A[0][1] + A[0][2] * A[0][2] + A[1][2] * A[1][2];
    if (off <= 1e-34 * scale || off == 0.0) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (A[p][q] == 0.0) continue;
        double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < 3; ++k) {
          double akp = A[k][p], akq = A[k][q];
          A[k][p] = c * akp - s * akq;
          A[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          double apk = A[p][k], aqk = A[q][k];
          A[p][k] = c * apk - s * aqk;
          A[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          double qkp = Q[k][p], qkq = Q[k][q];
          Q[k][p] = c * qkp - s * qkq;
          Q[k][q] = s * qkp + c * qkq;
        }
      }
  }
  Eig e;
  e.n = 3;
  for (int k = 0; k < 3; ++k) {
    e.values[k] = A[k][k];
    e.vectors[k] = {Q[0][k], Q[1][k], Q[2][k]};
  }
  sort_desc(e);
  return e;
}

}  // namespace

Eig eig_sym(const SymMat& m) {
  if (!m.finite()) fail(ErrorKind::invalid_input, "eig_sym: non-finite entries");
  if (m.n == 2) return eig2(m);
  if (m.n == 3) return eig3(m);
  fail(ErrorKind::invalid_input, "eig_sym: dimension must be 2 or 3");
}

double lambda_max(const SymMat& m) { return eig_sym(m).values[0]; }
double lambda_min(const SymMat& m) { return eig_sym(m).values[m.n - 1]; }
double opnorm_inf(const SymMat& m) {
  Eig e = eig_sym(m);
  return std::max(std::abs(e.values[0]), std::abs(e.values[m.n - 1]));
}
bool is_positive_definite(const SymMat& m, double margin) { return lambda_min(m) > margin; }

namespace {
SymMat rebuild(const Eig& e, const std::array<double, 3>& vals) {
  SymMat r(e.n);
  for (int k = 0; k < e.n; ++k)
    for (int i = 0; i < e.n; ++i)
      for (int j = i; j < e.n; ++j) r.at(i, j) += vals[k] * e.vectors[k][i] * e.vectors[k][j];
  return r;
}
}  // namespace

SymMat sqrt_psd(const SymMat& m) {
  Eig e = eig_sym(m);
  std::array<double, 3> v{};
  for (int k = 0; k < e.n; ++k) v[k] = std::sqrt(std::max(0.0, e.values[k]));
  return rebuild(e, v);
}

SymMat project_psd(const SymMat& m, double* removed) {
  Eig e = eig_sym(m);
  if (e.values[e.n - 1] >= 0.0) {
    if (removed) *removed = 0.0;
    return m;
  }
  std::array<double, 3> v{};
  double rem = 0.0;
  for (int k = 0; k < e.n; ++k) {
    v[k] = std::max(0.0, e.values[k]);
    rem += v[k] - e.values[k];
  }
  if (removed) *removed = rem;
  return rebuild(e, v);
}

StateVU operator+(const StateVU& a, const StateVU& b) { return {a.V + b.V, a.U + b.U}; }
StateVU operator-(const StateVU& a, const StateVU& b) { return {a.V - b.V, a.U - b.U}; }
StateVU operator*(double s, const StateVU& a) { return {s * a.V, s * a.U}; }
double norm(const StateVU& s) { return std::sqrt(s.V.norm2() + s.U.dot(s.U)); }

const char* membership_name(Membership m) {
  switch (m) {
    case Membership::interior: return "interior";
    case Membership::boundary: return "boundary";
    case Membership::outside: return "outside";
  }
  return "?";
}

double e_fn(const Vec& V, const SymMat& U, const SymMat& R0) {
  if (V.n != U.n || U.n != R0.n) fail(ErrorKind::invalid_input, "e_fn: dimension mismatch");
  SymMat m = SymMat::outer(V) - U - R0;
  return 0.5 * V.n * lambda_max(m);
}

HullResult hull_membership(const HullQuery& q, double tol) {
  if (q.r < 0.0) fail(ErrorKind::invalid_input, "hull_membership: r < 0");
  if (lambda_min(q.R0) < -tol) fail(ErrorKind::invalid_input, "hull_membership: R0 not PSD");
  double e = e_fn(q.state.V, q.state.U, q.R0);
  double margin = 0.5 * (q.r * q.r - q.R0.trace()) - e;
  Membership c = std::abs(margin) <= tol ? Membership::boundary
                 : margin > 0            ? Membership::interior
                                         : Membership::outside;
  return {c, margin};
}

double min_speed(const Vec& V, const SymMat& U, const SymMat& R0) {
  return std::sqrt(std::max(0.0, 2.0 * e_fn(V, U, R0) + R0.trace()));
}

StateVU hull_point(const Vec& a, const SymMat& R0, double r) {
  int n = a.n;
  double c = (r * r - R0.trace()) / n;
  return {a, SymMat::outer(a) - R0 - SymMat::identity(n, c)};
}

namespace {

// largest value of (|al| + rho cos th)^2 + kap rho sin th over th in [0, pi/2]
double worst_push(double al, double kap, double rho) {
  auto g = [&](double th) {
    double u = al + rho * std::cos(th);
    return u * u + kap * rho * std::sin(th);
  };
  const int ns = 12;
  double best = -1e300, bth = 0.0;
  for (int i = 0; i <= ns; ++i) {
    double th = 0.5 * std::numbers::pi * i / ns;
    double v = g(th);
    if (v > best) best = v, bth = th;
  }
  double lo = std::max(0.0, bth - 0.5 * std::numbers::pi / ns);
  double hi = std::min(0.5 * std::numbers::pi, bth + 0.5 * std::numbers::pi / ns);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 30; ++it) {
    if (f1 > f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - gr * (hi - lo), f1 = g(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + gr * (hi - lo), f2 = g(x2);
    }
  }
  return std::max({best, f1, f2});
}

// smallest perturbation that breaks the constraint (u.V)^2 <= u^T W u
double directional_distance(double al, double be, double kap) {
  al = std::abs(al);
  if (al * al >= be) return 0.0;
  double lo = 0.0, hi = std::sqrt(be) + 1.0;
  while (worst_push(al, kap, hi) < be) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if (worst_push(al, kap, mid) < be) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double distance_to_boundary(const StateVU& z, const SymMat& R0, double r) {
  int n = z.V.n;
  HullResult h = hull_membership({z, R0, r});
  if (h.cls != Membership::interior) return 0.0;
  double c = (r * r - R0.trace()) / n;
  SymMat W = z.U + R0 + SymMat::identity(n, c);
  double kap = std::sqrt(1.0 - 1.0 / n);
  auto dist_u = [&](const Vec& u) { return directional_distance(u.dot(z.V), W.quad(u), kap); };
  double best = 1e300;
  if (n == 2) {
    const int ns = 180;
    double bphi = 0.0;
    for (int i = 0; i < ns; ++i) {
      double phi = std::numbers::pi * i / ns;
      double d = dist_u(Vec(std::cos(phi), std::sin(phi)));
      if (d < best) best = d, bphi = phi;
    }
    double lo = bphi - std::numbers::pi / ns, hi = bphi + std::numbers::pi / ns;
    for (int it = 0; it < 40; ++it) {
      double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      double d1 = dist_u(Vec(std::cos(m1), std::sin(m1)));
      double d2 = dist_u(Vec(std::cos(m2), std::sin(m2)));
      best = std::min({best, d1, d2});
      if (d1 < d2) hi = m2;
      else lo = m1;
    }
    return best;
  }
  // n = 3: Fibonacci hemisphere, then local pattern search
  const int ns = 600;
  Vec bu(0.0, 0.0, 1.0);
  for (int i = 0; i < ns; ++i) {
    double zc = 1.0 - (i + 0.5) / ns;
    double rad = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    double phi = i * std::numbers::pi * (3.0 - std::sqrt(5.0));
    Vec u(rad * std::cos(phi), rad * std::sin(phi), zc);
    double d = dist_u(u);
    if (d < best) best = d, bu = u;
  }
  double step = 0.1;
  while (step > 1e-7) {
    bool improved = false;
    Vec e1 = std::abs(bu[0]) < 0.9 ? Vec(1, 0, 0) : Vec(0, 1, 0);
    e1 -= e1.dot(bu) * bu;
    e1 *= 1.0 / e1.norm();
    Vec e2(bu[1] * e1[2] - bu[2] * e1[1], bu[2] * e1[0] - bu[0] * e1[2], bu[0] * e1[1] - bu[1] * e1[0]);
    for (int k = 0; k < 4 && !improved; ++k) {
      Vec dir = (k < 2 ? e1 : e2);
      Vec u = bu + ((k % 2) ? -step : step) * dir;
      u *= 1.0 / u.norm();
      double d = dist_u(u);
      if (d < best) best = d, bu = u, improved = true;
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

SymMat random_sym(int n, Rng& rng, double scale) {
  SymMat m(n);
  for (int k = 0; k < SymMat::size(n); ++k) m.a[k] = scale * rng.normal();
  return m;
}

SymMat random_psd(int n, Rng& rng, double scale) {
  SymMat m(n);
  for (int k = 0; k < n; ++k) m += SymMat::outer(random_vec(n, rng, scale / std::sqrt(double(n))));
  return m;
}

Vec random_vec(int n, Rng& rng, double scale) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

Vec random_unit(int n, Rng& rng) {
  Vec v = random_vec(n, rng);
  double l = v.norm();
  while (l < 1e-12) {
    v = random_vec(n, rng);
    l = v.norm();
  }
  return (1.0 / l) * v;
}

std::array<Vec, 3> random_orthonormal(int n, Rng& rng) {
  std::array<Vec, 3> q;
  for (int i = 0; i < n; ++i) {
    Vec v = random_vec(n, rng);
    for (int j = 0; j < i; ++j) v -= v.dot(q[j]) * q[j];
    double l = v.norm();
    if (l < 1e-10) {
      --i;
      continue;
    }
    q[i] = (1.0 / l) * v;
  }
  return q;
}

}  // namespace convint
