#pragma once
#include <cmath>

#include "convint/report.hpp"
#include "convint/snapshot.hpp"
#include "convint/verify.hpp"
#include "convint/wavegen.hpp"

// rho = 1, V = (sin 2 pi (x2 - c t) + bump sin 2 pi x1, c): an exact Euler solution when bump = 0
inline convint::Candidate shear(int N, int Nt, double c, double bump = 0.0) {
  using namespace convint;
  Grid g = Grid::torus(2, N, Nt, 0.0, 1.0);
  Candidate cand;
  cand.grid = g;
  cand.gamma = 2.0;
  cand.rho = scalar_field(g, 1.0);
  cand.V = vector_field(g);
  for (int j = 0; j < Nt; ++j)
    for (std::size_t s = 0; s < g.spatial_points(); ++s) {
      auto i = g.spatial_coords(s);
      double x = g.x(0, i[0]), y = g.x(1, i[1]);
      cand.V.set_vec(g.index(j, s), Vec(std::sin(kTwoPi * (y - c * g.t(j))) + bump * std::sin(kTwoPi * x), c));
    }
  return cand;
}

inline convint::Snapshot golden_snapshot() {
  convint::Candidate c = shear(8, 5, 0.0);
  convint::Snapshot s;
  s.grid = c.grid;
  s.gamma = c.gamma;
  s.add("rho", c.rho);
  s.add("V", c.V);
  return s;
}

inline convint::json golden_report(const convint::Snapshot& snap) {
  using namespace convint;
  Candidate c = candidate_from_snapshot(snap);
  json j = to_json(verify(c, make_bank(c.grid.n, 3, c.grid.t0, c.grid.t1)));
  // which bank member is worst is decided by roundoff here
  j.erase("worst_mass");
  j.erase("worst_momentum");
  return j;
}

inline bool close_json(const convint::json& a, const convint::json& b, double tol) {
  if (a.is_number() && b.is_number()) {
    double x = a.get<double>(), y = b.get<double>();
    return std::abs(x - y) <= tol * (1.0 + std::abs(y));
  }
  if (a.type() != b.type()) return false;
  if (a.is_object()) {
    if (a.size() != b.size()) return false;
    for (auto it = b.begin(); it != b.end(); ++it)
      if (!a.contains(it.key()) || !close_json(a[it.key()], it.value(), tol)) return false;
    return true;
  }
  if (a.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!close_json(a[i], b[i], tol)) return false;
    return true;
  }
  return a == b;
}
