#include "convint/grid.hpp"

#include <string>

#include "convint/errors.hpp"

namespace convint {

Grid Grid::unit_cube(int n, int Ns, int Nt) {
  Grid g;
  g.n = n;
  g.N = {Ns, Ns, n == 3 ? Ns : 1};
  g.Nt = Nt;
  g.layout = TimeLayout::cell;
  g.validate();
  return g;
}

Grid Grid::torus(int n, int Ns, int Nt, double t0, double t1) {
  Grid g;
  g.n = n;
  g.N = {Ns, Ns, n == 3 ? Ns : 1};
  g.Nt = Nt;
  g.t0 = t0;
  g.t1 = t1;
  g.layout = TimeLayout::vertex;
  g.validate();
  return g;
}

void Grid::validate() const {
  if (n != 2 && n != 3) fail(ErrorKind::invalid_input, "grid: n must be 2 or 3");
  for (int a = 0; a < n; ++a)
    if (N[a] < 4) fail(ErrorKind::invalid_input, "grid: spatial resolution below 4");
  if (n == 2 && N[2] != 1) fail(ErrorKind::invalid_input, "grid: unused axis must have size 1");
  if (Nt < (layout == TimeLayout::vertex ? 2 : 1)) fail(ErrorKind::invalid_input, "grid: time resolution too small");
  if (!(t1 > t0)) fail(ErrorKind::invalid_input, "grid: empty time interval");
}

std::size_t Grid::spatial_points() const {
  std::size_t s = 1;
  for (int a = 0; a < n; ++a) s *= N[a];
  return s;
}

double Grid::dt() const { return layout == TimeLayout::cell ? (t1 - t0) / Nt : (t1 - t0) / (Nt - 1); }

double Grid::t(int j) const { return layout == TimeLayout::cell ? t0 + (j + 0.5) * dt() : t0 + j * dt(); }

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < n; ++a) v *= dx(a);
  return v;
}

double Grid::domain_volume() const {
  double v = 1.0;
  for (int a = 0; a < n; ++a) v *= len[a];
  return v;
}

double Grid::time_weight(int j) const {
  if (layout == TimeLayout::cell) return dt();
  return (j == 0 || j == Nt - 1) ? 0.5 * dt() : dt();
}

std::size_t Grid::index(int j, const std::array<int, 3>& i) const {
  std::size_t s = 0;
  for (int a = 0; a < n; ++a) s = s * N[a] + i[a];
  return index(j, s);
}

std::array<int, 3> Grid::spatial_coords(std::size_t s) const {
  std::array<int, 3> c{0, 0, 0};
  for (int a = n - 1; a >= 0; --a) {
    c[a] = int(s % N[a]);
    s /= N[a];
  }
  return c;
}

bool Grid::same_shape(const Grid& o) const {
  return n == o.n && N == o.N && Nt == o.Nt && layout == o.layout;
}

Grid Grid::time_slab(int j0, int j1) const {
  if (j0 < 0 || j1 > Nt || j1 - j0 < 1) fail(ErrorKind::invalid_input, "time_slab: bad range");
  Grid g = *this;
  g.Nt = j1 - j0;
  if (layout == TimeLayout::cell) {
    g.t0 = t0 + j0 * dt();
    g.t1 = t0 + j1 * dt();
  } else {
    g.t0 = t(j0);
    g.t1 = t(j1 - 1);
    if (g.Nt < 2) g.t1 = g.t0 + dt();
  }
  return g;
}

Vec Field::vec(std::size_t p, int n) const {
  Vec x(n);
  const double* d = at(p);
  for (int i = 0; i < n; ++i) x[i] = d[i];
  return x;
}

void Field::set_vec(std::size_t p, const Vec& x) {
  double* d = at(p);
  for (int i = 0; i < x.n; ++i) d[i] = x[i];
}

SymMat Field::sym(std::size_t p, int n) const {
  SymMat m(n);
  const double* d = at(p);
  for (int k = 0; k < SymMat::size(n); ++k) m.a[k] = d[k];
  return m;
}

void Field::set_sym(std::size_t p, const SymMat& m) {
  double* d = at(p);
  for (int k = 0; k < SymMat::size(m.n); ++k) d[k] = m.a[k];
}

Field Field::slab(std::size_t first_point, std::size_t count) const {
  Field f;
  f.comps = comps;
  f.v.assign(v.begin() + first_point * comps, v.begin() + (first_point + count) * comps);
  return f;
}

double integrate(const Grid& g, const std::function<double(std::size_t)>& f) {
  double total = 0.0;
  std::size_t S = g.spatial_points();
  for (int j = 0; j < g.Nt; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < S; ++k) s += f(g.index(j, k));
    total += s * g.time_weight(j);
  }
  return total * g.cell_volume();
}

double integrate_slice(const Grid& g, int j, const std::function<double(std::size_t)>& f) {
  double s = 0.0;
  std::size_t S = g.spatial_points();
  for (std::size_t k = 0; k < S; ++k) s += f(g.index(j, k));
  return s * g.cell_volume();
}

}  // namespace convint
