#pragma once
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "convint/matgeom.hpp"

namespace convint {

// cell: samples at cell centres in time, midpoint rule.
// vertex: samples at t0 + j dt including both ends, trapezoid rule.
enum class TimeLayout : std::uint8_t { cell = 0, vertex = 1 };

struct Grid {
  int n = 2;
  std::array<int, 3> N{1, 1, 1};
  int Nt = 1;
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> len{1.0, 1.0, 1.0};
  double t0 = 0.0, t1 = 1.0;
  TimeLayout layout = TimeLayout::cell;

  static Grid unit_cube(int n, int Ns, int Nt);                        // [0,1]^n x [0,1], cell
  static Grid torus(int n, int Ns, int Nt, double t0, double t1);      // vertex in time

  std::size_t spatial_points() const;
  std::size_t points() const { return spatial_points() * Nt; }
  double dx(int a) const { return len[a] / N[a]; }
  double dt() const;
  double x(int a, int i) const { return lo[a] + (i + 0.5) * dx(a); }
  double t(int j) const;
  double cell_volume() const;  // spatial
  double time_weight(int j) const;
  double domain_volume() const;  // spatial measure
  std::size_t index(int j, const std::array<int, 3>& i) const;
  std::size_t index(int j, std::size_t s) const { return std::size_t(j) * spatial_points() + s; }
  std::array<int, 3> spatial_coords(std::size_t s) const;
  bool same_shape(const Grid& o) const;
  void validate() const;
  // restrict to time samples [j0, j1)
  Grid time_slab(int j0, int j1) const;
};

// comps values per grid point, stored contiguously per point, points in
// time-major then row-major spatial order.
struct Field {
  int comps = 1;
  std::vector<double> v;

  Field() = default;
  Field(std::size_t points, int c, double fill = 0.0) : comps(c), v(points * c, fill) {}
  std::size_t points() const { return comps ? v.size() / comps : 0; }
  double* at(std::size_t p) { return v.data() + p * comps; }
  const double* at(std::size_t p) const { return v.data() + p * comps; }
  double& operator()(std::size_t p, int c = 0) { return v[p * comps + c]; }
  double operator()(std::size_t p, int c = 0) const { return v[p * comps + c]; }

  Vec vec(std::size_t p, int n) const;
  void set_vec(std::size_t p, const Vec& x);
  SymMat sym(std::size_t p, int n) const;
  void set_sym(std::size_t p, const SymMat& m);
  Field slab(std::size_t first_point, std::size_t count) const;
};

inline Field scalar_field(const Grid& g, double fill = 0.0) { return Field(g.points(), 1, fill); }
inline Field vector_field(const Grid& g, double fill = 0.0) { return Field(g.points(), g.n, fill); }
inline Field sym_field(const Grid& g) { return Field(g.points(), SymMat::size(g.n), 0.0); }

// integral over the space-time grid with the layout's rule; f(point) -> value
double integrate(const Grid& g, const std::function<double(std::size_t)>& f);
// spatial integral on slice j
double integrate_slice(const Grid& g, int j, const std::function<double(std::size_t)>& f);

}  // namespace convint
