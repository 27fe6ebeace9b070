#include <doctest.h>

#include <cmath>

#include "convint/rng.hpp"
#include "convint/subsolution.hpp"
#include "convint/wavegen.hpp"
#include "support.hpp"

using namespace convint;

namespace {

CompSubsolution const_comp(const Grid& g, double rho, const Vec& V, double gamma, EnergyBudget b = {1.0, 1.0}) {
  Field R = scalar_field(g, rho), Vf = vector_field(g);
  for (std::size_t p = 0; p < g.points(); ++p) Vf.set_vec(p, V);
  return make_comp(g, R, Vf, sym_field(g), scalar_field(g), gamma, b);
}

IncompSubsolution const_incomp(const Grid& g, const Vec& v, const SymMat& R, EnergyBudget b = {1.0, 1.0}) {
  Field vf = vector_field(g), Rf = sym_field(g);
  for (std::size_t p = 0; p < g.points(); ++p) {
    vf.set_vec(p, v);
    Rf.set_sym(p, R);
  }
  return make_incomp(g, vf, Rf, b);
}

CompSubsolution random_comp(const Grid& g, Rng& rng, double gamma) {
  CompSubsolution s = const_comp(g, 1.0, Vec(g.n), gamma);
  for (std::size_t p = 0; p < g.points(); ++p) {
    s.rho(p) = rng.uniform(0.1, 3.0);
    s.V.set_vec(p, random_vec(g.n, rng));
    s.calR.set_sym(p, random_psd(g.n, rng, 0.3));
    s.r(p) = rng.uniform(0.0, 0.5);
  }
  s.certificate = rng.uniform();
  return s;
}

}  // namespace

TEST_CASE("energy_total examples") {
  Grid g = Grid::torus(2, 8, 4, 0.0, 1.0);
  CHECK(energy_total(const_comp(g, 1.5, Vec(0, 0), 2.0), 0) == doctest::Approx(1.5 * 1.5 / 1.0));
  CHECK(energy_total(const_comp(g, 1.5, Vec(0, 0), 1.4), 1) == doctest::Approx(std::pow(1.5, 1.4) / 0.4));
  CHECK(energy_total(const_comp(g, 1.0, Vec(1, 0), 2.0), 2) == doctest::Approx(1.5));
  // rest state at the density that carries E0
  double E0 = 1.0, gamma = 2.0;
  double rho_hat = std::pow((gamma - 1.0) * E0, 1.0 / gamma);
  CHECK(rho_hat == doctest::Approx(1.0));
  CHECK(energy_total(const_comp(g, rho_hat, Vec(0, 0), gamma), 0) == doctest::Approx(E0));

  auto bad = const_comp(g, 1.0, Vec(1, 0), 2.0);
  bad.rho(0) = 0.0;
  CHECK(thrown_kind([&] { energy_total(bad, 0); }) == ErrorKind::invalid_input);
}

TEST_CASE("convex_combine_incomp examples") {
  Grid g = Grid::torus(2, 4, 4, 0.0, 1.0);
  auto a = const_incomp(g, Vec(1, 0), SymMat::identity(2));
  auto b = const_incomp(g, Vec(-1, 0), SymMat::identity(2));
  auto one = convex_combine_incomp({a}, {1.0});
  CHECK(one.v.v == a.v.v);
  CHECK(one.R.v == a.R.v);
  auto same = convex_combine_incomp({a, a}, {0.5, 0.5});
  for (std::size_t i = 0; i < a.R.v.size(); ++i) CHECK(std::abs(same.R.v[i] - a.R.v[i]) <= 1e-12);
  auto mix = convex_combine_incomp({a, b}, {0.5, 0.5});
  for (std::size_t p = 0; p < g.points(); ++p) {
    CHECK(mix.v.vec(p, 2).norm() <= 1e-12);
    CHECK((mix.R.sym(p, 2) - SymMat::diag(2.0, 1.0)).frob() <= 1e-12);
  }
  CHECK(thrown_kind([&] { convex_combine_incomp({a, b}, {0.6, 0.6}); }) == ErrorKind::invalid_input);
  auto c = const_incomp(Grid::torus(2, 8, 4, 0.0, 1.0), Vec(1, 0), SymMat::identity(2));
  CHECK(thrown_kind([&] { convex_combine_incomp({a, c}, {0.5, 0.5}); }) == ErrorKind::invalid_input);
}

TEST_CASE("convex_combine_comp examples") {
  Grid g = Grid::torus(2, 4, 4, 0.0, 1.0);
  auto a = const_comp(g, 1.0, Vec(0, 0), 2.0);
  auto b = const_comp(g, 3.0, Vec(0, 0), 2.0);
  auto one = convex_combine_comp({a}, {1.0});
  CHECK(one.rho.v == a.rho.v);
  auto mix = convex_combine_comp({a, b}, {0.5, 0.5});
  for (std::size_t p = 0; p < g.points(); ++p) {
    CHECK(std::abs(mix.rho(p) - 2.0) <= 1e-12);
    CHECK(std::abs(mix.r(p) - 1.0) <= 1e-12);
    CHECK(mix.calR.sym(p, 2).frob() <= 1e-12);
  }
  auto same = convex_combine_comp({b, b}, {0.3, 0.7});
  for (std::size_t p = 0; p < g.points(); ++p) {
    CHECK(std::abs(same.r(p)) <= 1e-12);
    CHECK(same.calR.sym(p, 2).frob() <= 1e-12);
  }
}

TEST_CASE("combination invariants on random pairs") {
  Grid g = Grid::torus(2, 4, 4, 0.0, 1.0);
  Rng rng(51);
  for (int t = 0; t < 1000; ++t) {
    auto a = random_comp(g, rng, 2.0), b = random_comp(g, rng, 2.0);
    double w = rng.uniform();
    auto m = convex_combine_comp({a, b}, {w, 1 - w});
    CHECK(m.certificate <= w * a.certificate + (1 - w) * b.certificate + 1e-15);
    for (std::size_t p = 0; p < g.points(); ++p) {
      SymMat ER = w * a.calR.sym(p, 2) + (1 - w) * b.calR.sym(p, 2);
      CHECK(lambda_min(m.calR.sym(p, 2) - ER) >= -1e-10);
      CHECK(m.r(p) - (w * a.r(p) + (1 - w) * b.r(p)) >= -1e-10);
    }
  }
  // trace bookkeeping for the incompressible combination
  for (int t = 0; t < 50; ++t) {
    IncompSubsolution a = const_incomp(g, Vec(0, 0), SymMat(2)), b = a;
    for (std::size_t p = 0; p < g.points(); ++p) {
      a.v.set_vec(p, random_vec(2, rng));
      b.v.set_vec(p, random_vec(2, rng));
      a.R.set_sym(p, random_psd(2, rng));
      b.R.set_sym(p, random_psd(2, rng));
    }
    double w = rng.uniform();
    auto m = convex_combine_incomp({a, b}, {w, 1 - w});
    for (int j = 0; j < g.Nt; ++j)
      CHECK(energy_total(m, j) ==
            doctest::Approx(w * energy_total(a, j) + (1 - w) * energy_total(b, j)).epsilon(1e-12));
  }
}

TEST_CASE("mollify_subsolution") {
  Grid g = Grid::torus(2, 16, 17, 0.0, 1.0);
  auto c = const_comp(g, 1.3, Vec(0.2, -0.1), 2.0);
  auto m = mollify_subsolution(c, 1.0 / 16.0);
  for (std::size_t p = 0; p < m.grid.points(); ++p) {
    CHECK(std::abs(m.rho(p) - 1.3) <= 1e-12);
    CHECK(std::abs(m.r(p)) <= 1e-12);
    CHECK(m.calR.sym(p, 2).frob() <= 1e-12);
  }

  auto s = c;
  for (std::size_t p = 0; p < g.points(); ++p) {
    auto i = g.spatial_coords(p % g.spatial_points());
    s.rho(p) = 2.0 + std::sin(kTwoPi * g.x(0, i[0]));
  }
  auto ms = mollify_subsolution(s, 0.1);
  double rmax = 0;
  for (std::size_t p = 0; p < ms.grid.points(); ++p) rmax = std::max(rmax, ms.r(p));
  CHECK(rmax > 0.0);

  // forward time shifts only: increasing data never moves backward
  auto ramp = c;
  for (std::size_t p = 0; p < g.points(); ++p) ramp.rho(p) = 1.0 + g.t(int(p / g.spatial_points()));
  auto mr = mollify_subsolution(ramp, 0.1, 0.2);
  CHECK(mr.grid.Nt < g.Nt);
  for (int j = 0; j < mr.grid.Nt; ++j) CHECK(mr.rho(mr.grid.index(j, 0)) >= ramp.rho(g.index(j, 0)) - 1e-12);

  CHECK(thrown_kind([&] { mollify_subsolution(c, 0.6); }) == ErrorKind::precondition);
}

TEST_CASE("strictify_incomp") {
  CHECK(strictify_lambda(12.0, 1.0) == doctest::Approx(0.5));
  CHECK(strictify_lambda(3.0, 1.0) == doctest::Approx(0.5));
  CHECK(strictify_lambda(0.6, 1.0) == doctest::Approx(0.1));
  CHECK(thrown_kind([] { strictify_lambda(0.0, 1.0); }) == ErrorKind::invalid_input);

  Grid g = Grid::torus(2, 8, 4, 0.0, 1.0);
  Rng rng(52);
  IncompSubsolution s = const_incomp(g, Vec(0, 0), SymMat(2), {0.8, 1.0});
  for (std::size_t p = 0; p < g.points(); ++p) {
    s.v.set_vec(p, random_vec(2, rng));
    s.R.set_sym(p, random_psd(2, rng, 0.1));
  }
  for (double eps : {0.3, 1.0, 10.0}) {
    StrictifyReport rep;
    auto out = strictify_incomp(s, eps, &rep);
    double floor = 2.0 * rep.lambda * 0.8 / 2.0;
    CHECK(rep.lambda == doctest::Approx(std::min(eps / 4.8, 0.5)));
    for (std::size_t p = 0; p < g.points(); ++p) CHECK(lambda_min(out.R.sym(p, 2)) >= floor - 1e-10);
  }
}

TEST_CASE("strictify_comp") {
  Grid g = Grid::torus(2, 16, 16, 0.0, 1.0);
  auto rest = const_comp(g, 1.0, Vec(0, 0), 2.0);
  CHECK(thrown_kind([&] { strictify_comp(rest, 0.5); }) == ErrorKind::degenerate_input);

  auto s = rest;
  for (std::size_t p = 0; p < g.points(); ++p) {
    auto i = g.spatial_coords(p % g.spatial_points());
    s.rho(p) = 2.0 + std::sin(kTwoPi * g.x(0, i[0]));
  }
  s.budget.E0 = energy_total(s, 0);
  StrictifyReport rep;
  auto out = strictify_comp(s, 0.5, {}, &rep);
  CHECK(rep.min_eig > 0.0);
  CHECK(rep.min_r > 0.0);
  CHECK(rep.initial_distance < 0.5);
  double rmin = 1e300;
  for (std::size_t p = 0; p < out.grid.points(); ++p) {
    rmin = std::min(rmin, out.r(p));
    CHECK(lambda_min(out.calR.sym(p, 2) + SymMat::identity(2, out.r(p))) > 0.0);
  }
  CHECK(rmin > 0.0);
}

TEST_CASE("compensating potential identities") {
  Grid g = Grid::torus(2, 8, 5, 0.0, 1.0);
  Rng rng(53);
  for (double gamma : {2.0, 1.5, 1.2}) {
    auto s = const_comp(g, 1.0, Vec(0, 0), gamma);
    for (std::size_t p = 0; p < g.points(); ++p) s.r(p) = rng.uniform(0.0, 2.0);
    auto rc = compensating_potential(s);
    double f = 2.0 / (2 * (gamma - 1.0));
    for (int j = 0; j < g.Nt; ++j) {
      CHECK(rc[j] >= 0.0);
      double ir = integrate_slice(g, j, [&](std::size_t p) { return s.r(p); });
      double lhs = integrate_slice(g, j, [&](std::size_t p) { return s.r(p) + rc[j]; });
      CHECK(std::abs(lhs - f * ir) <= 1e-12 * (1 + ir));
    }
  }
  // r = r0 constant at gamma = 2, n = 2: the factor is 1, so no compensation is needed
  auto c = const_comp(g, 1.0, Vec(0, 0), 2.0);
  for (std::size_t p = 0; p < g.points(); ++p) c.r(p) = 0.7;
  for (double x : compensating_potential(c)) CHECK(std::abs(x) <= 1e-15);
  // r = 0
  for (std::size_t p = 0; p < g.points(); ++p) c.r(p) = 0.0;
  for (double x : compensating_potential(c)) CHECK(x == 0.0);
  // n = 3 at the edge gamma = 5/3
  Grid g3 = Grid::torus(3, 4, 4, 0.0, 1.0);
  auto c3 = const_comp(g3, 1.0, Vec(0, 0, 0), 5.0 / 3.0);
  for (std::size_t p = 0; p < g3.points(); ++p) c3.r(p) = rng.uniform();
  auto rc3 = compensating_potential(c3);
  for (int j = 0; j < g3.Nt; ++j) {
    double ir = integrate_slice(g3, j, [&](std::size_t p) { return c3.r(p); });
    double lhs = integrate_slice(g3, j, [&](std::size_t p) { return c3.r(p) + rc3[j]; });
    CHECK(std::abs(lhs - ir) <= 1e-12 * (1 + ir));
  }
}

TEST_CASE("gamma gate") {
  CHECK(thrown_kind([] { check_gamma(2, 2.01); }) == ErrorKind::gamma_constraint);
  CHECK_FALSE(thrown_kind([] { check_gamma(2, 2.0); }).has_value());
  CHECK(thrown_kind([] { check_gamma(3, 1.7); }) == ErrorKind::gamma_constraint);
  CHECK(thrown_kind([] { check_gamma(2, 1.0); }) == ErrorKind::gamma_constraint);
  Grid g = Grid::torus(2, 4, 4, 0.0, 1.0);
  auto s = const_comp(g, 1.0, Vec(0, 0), 3.0);
  CHECK(thrown_kind([&] { compensating_potential(s); }) == ErrorKind::gamma_constraint);
}
