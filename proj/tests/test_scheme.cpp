#include <doctest.h>

#include <cmath>

#include "convint/rng.hpp"
#include "convint/scheme.hpp"
#include "support.hpp"

using namespace convint;

namespace {

FieldState constant_state(int N, int Nt, double rtrace = 1.0) {
  Grid g = Grid::unit_cube(2, N, Nt);
  Field R0 = sym_field(g);
  for (std::size_t p = 0; p < g.points(); ++p) R0.set_sym(p, SymMat::identity(2, rtrace));
  return make_field_state(g, scalar_field(g, 1.0), vector_field(g), R0);
}

// gently varying state; the R0 fluctuation bound is lambda_* / 128
FieldState smooth_state(int N, int Nt) {
  Grid g = Grid::unit_cube(2, N, Nt);
  Field rho = scalar_field(g), V = vector_field(g), R0 = sym_field(g);
  for (int j = 0; j < Nt; ++j)
    for (std::size_t s = 0; s < g.spatial_points(); ++s) {
      auto i = g.spatial_coords(s);
      double x = g.x(0, i[0]), y = g.x(1, i[1]);
      std::size_t p = g.index(j, s);
      rho(p) = 1.0 + 0.005 * std::sin(kTwoPi * y);
      V.set_vec(p, Vec(0.01 * std::cos(kTwoPi * x), 0.01 * std::sin(kTwoPi * y)));
      SymMat R = SymMat::identity(2, 1.0 + 0.02 * std::sin(kTwoPi * x));
      R.at(0, 1) = 0.002 * std::cos(kTwoPi * y);
      R0.set_sym(p, R);
    }
  return make_field_state(g, rho, V, R0);
}

}  // namespace

TEST_CASE("compute_defect examples") {
  FieldState fs = smooth_state(8, 8);
  DefectField D = compute_defect(fs);
  for (std::size_t p = 0; p < fs.grid.points(); ++p) CHECK((D.M.sym(p, 2) - fs.R0.sym(p, 2)).frob() <= 1e-12);

  FieldState c = constant_state(8, 8);
  CHECK(compute_defect(c).int_trM == doctest::Approx(2.0).epsilon(1e-12));

  // saturated: V~ = (sqrt 2, 0), U~ = diag(1, -1) on rho = 1, V0 = 0, R0 = I
  for (std::size_t p = 0; p < c.grid.points(); ++p) {
    c.Vtil.set_vec(p, Vec(std::sqrt(2.0), 0.0));
    c.Util.set_sym(p, SymMat::diag(1.0, -1.0));
  }
  DefectField S = compute_defect(c);
  for (std::size_t p = 0; p < c.grid.points(); ++p) CHECK(S.M.sym(p, 2).frob() <= 1e-12);

  Grid g = Grid::unit_cube(2, 4, 4);
  Field rho = scalar_field(g, 1.0);
  rho(3) = 0.0;
  Field R0 = sym_field(g);
  for (std::size_t p = 0; p < g.points(); ++p) R0.set_sym(p, SymMat::identity(2));
  CHECK(thrown_kind([&] { make_field_state(g, rho, vector_field(g), R0); }) == ErrorKind::invalid_input);
}

TEST_CASE("lambda_star examples and grid scan") {
  FieldState fs = constant_state(4, 4, 2.0);
  // M = R0 = 2I here; shift V~ so that M = I
  CHECK(lambda_star(fs, fs.P) == doctest::Approx(2.0));
  for (std::size_t p = 0; p < fs.grid.points(); ++p) fs.Vtil.set_vec(p, Vec(1.0, 0.0));
  for (std::size_t p = 0; p < fs.grid.points(); ++p) fs.Util.set_sym(p, SymMat::diag(0.5, -0.5));
  // M = 2I - diag(1,0) + diag(0.5,-0.5) = diag(1.5, 1.5)
  CHECK(lambda_star(fs, fs.P) == doctest::Approx(1.5));

  FieldState d = constant_state(4, 4);
  for (std::size_t p = 0; p < d.grid.points(); ++p) d.R0.set_sym(p, SymMat::diag(1.0, 3.0));
  for (std::size_t p = 0; p < d.grid.points(); ++p) d.Util.set_sym(p, SymMat::diag(3.0, 1.0) - SymMat::diag(1.0, 3.0));
  // M = R0 + U~ = diag(3, 1) ... min(lambda(M), lambda(R0)) = 1
  CHECK(lambda_star(d, d.P) == doctest::Approx(1.0));

  Rng rng(41);
  FieldState r = constant_state(6, 5);
  std::vector<std::uint8_t> omega(r.grid.points(), 0);
  for (std::size_t p = 0; p < r.grid.points(); ++p) {
    r.R0.set_sym(p, random_psd(2, rng) + SymMat::identity(2, 0.1));
    omega[p] = rng.uniform() < 0.5;
  }
  double brute = 1e300;
  DefectField D = compute_defect(r);
  for (std::size_t p = 0; p < r.grid.points(); ++p)
    if (omega[p]) {
      auto e1 = eig_sym(D.M.sym(p, 2)), e2 = eig_sym(r.R0.sym(p, 2));
      brute = std::min({brute, e1.values[1], e2.values[1]});
    }
  CHECK(lambda_star(r, omega) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("choose_delta") {
  FieldState c = constant_state(16, 16);
  auto part = choose_delta(c, 1.0);
  CHECK(part.cells_space == 16);
  CHECK(part.omega1_fraction == doctest::Approx(1.0));
  CHECK(thrown_kind([&] { choose_delta(c, 0.0); }) == ErrorKind::precondition);

  FieldState s = smooth_state(64, 16);
  DefectField D = compute_defect(s);
  double ls = lambda_star(s, D, s.P);
  auto p = choose_delta(s, D, ls);
  CHECK(p.cells_space < 64);
  // independent scan of the fluctuation bounds on the returned cubes
  for (const auto& cube : p.cubes) {
    double fM = 0, fR = 0;
    for (std::size_t l = 0; l < cube.box.count(2); ++l) {
      std::size_t q = box_grid_point(s.grid, cube.box, l);
      fM = std::max(fM, opnorm_inf(D.M.sym(q, 2) - cube.MQ));
      fR = std::max(fR, opnorm_inf(cube.R0bar - s.R0.sym(q, 2)));
    }
    CHECK(fM < ls / 16.0);
    CHECK(fR < ls / 128.0);
    CHECK(is_positive_definite(cube.RQ));
  }
  // the next dyadic size up fails somewhere
  int cs = 2 * p.cells_space;
  int ct = p.cells_time * 2;
  bool any_fail = false;
  for (const auto& b : tile_cubes(s, cs, std::min(ct, s.grid.Nt), {0, 0, 0, 0})) {
    auto ci = cube_stats(s, D, b, ls);
    any_fail = any_fail || !(ci.fluct_M < ls / 16.0 && ci.fluct_R0 < ls / 128.0 && ci.fluct_C <= ls / 128.0);
  }
  CHECK(any_fail);
}

TEST_CASE("perturb_cube") {
  FieldState c = constant_state(32, 32);
  DefectField D = compute_defect(c);
  auto part = choose_delta(c, D, 1.0);
  REQUIRE(part.cubes.size() == 1);
  SchemeConfig cfg;
  auto a = perturb_cube(part.cubes[0], c, D, 1.0, 1, cfg);
  auto b = perturb_cube(part.cubes[0], c, D, 1.0, 2, cfg);
  REQUIRE_FALSE(a.skipped);
  double volQ = 1.0;
  CHECK(a.l1_V >= cfg.coercivity_c * 2.0 * volQ);
  CHECK(a.min_margin >= 1.0 / 128.0 * (1 - 1e-9));
  double diff = 0;
  for (std::size_t i = 0; i < a.V.v.size(); ++i) diff += std::pow(a.V.v[i] - b.V.v[i], 2);
  CHECK(diff > 0.0);

  // saturated cube: no perturbation
  for (std::size_t p = 0; p < c.grid.points(); ++p) {
    c.Vtil.set_vec(p, Vec(std::sqrt(2.0), 0.0));
    c.Util.set_sym(p, SymMat::diag(1.0, -1.0));
  }
  DefectField S = compute_defect(c);
  auto info = cube_stats(c, S, part.cubes[0].box, 1.0);
  auto z = perturb_cube(info, c, S, 1.0, 1, cfg);
  CHECK(z.skipped);
  for (double v : z.V.v) CHECK(v == 0.0);
}

TEST_CASE("sweep and run on a small constant benchmark") {
  FieldState c = constant_state(16, 16);
  SchemeConfig cfg;
  cfg.fallback_cells = 4;

  auto none = run(c, 1.0, 10, 1, cfg);
  CHECK(none.status == "target");
  CHECK(none.reports.size() == 1);
  for (double v : none.state.Vtil.v) CHECK(v == 0.0);

  auto zero = run(c, 0.1, 0, 1, cfg);
  CHECK(zero.reports.size() == 1);
  CHECK(zero.final_trM == zero.initial_trM);
  CHECK(energy_identity_ratio(zero) == doctest::Approx(1.0));

  auto e = run(c, 0.1, 4, 3, cfg);
  REQUIRE(e.reports.size() >= 2);
  for (std::size_t s = 1; s < e.reports.size(); ++s) {
    CHECK(e.reports[s].min_lambda_M > 0.0);
    CHECK(e.reports[s].int_trM <= e.reports[s - 1].int_trM);
  }
  CHECK(e.final_trM < e.initial_trM);
  auto lin = linear_residual(e.state);
  CHECK(lin.l1 <= e.certificate_l1 * 1.05 + 1e-9);

  auto f = run(c, 0.1, 2, 4, cfg);
  CHECK(l2_distance_V(e.state, f.state) > 1e-3 * 1.0);

  // iterate with zero defect: unchanged
  FieldState sat = c;
  for (std::size_t p = 0; p < sat.grid.points(); ++p) {
    sat.Vtil.set_vec(p, Vec(std::sqrt(2.0), 0.0));
    sat.Util.set_sym(p, SymMat::diag(1.0, -1.0));
  }
  auto sw = sweep(sat, 5, cfg, 1);
  CHECK(sw.report.delta_mode == "saturated");
  CHECK(sw.next.Vtil.v == sat.Vtil.v);
  CHECK(sw.next.Util.v == sat.Util.v);
}

TEST_CASE("energy identity residual") {
  // zero perturbation where R0 vanishes: residual 0 there
  FieldState c = constant_state(8, 8);
  auto cand = run(c, 0.1, 0, 1);
  Field r = energy_identity_check(cand);
  for (std::size_t p = 0; p < c.grid.points(); ++p) CHECK(r(p) == doctest::Approx(-2.0));

  // saturated candidate: residual bounded by twice the leftover defect
  for (std::size_t p = 0; p < c.grid.points(); ++p) {
    cand.Vnew.set_vec(p, Vec(std::sqrt(2.0), 0.0));
    cand.state.Vtil.set_vec(p, Vec(std::sqrt(2.0), 0.0));
    cand.state.Util.set_sym(p, SymMat::diag(1.0, -1.0));
  }
  double l1 = 0;
  Field r2 = energy_identity_check(cand);
  for (std::size_t p = 0; p < c.grid.points(); ++p) l1 += std::abs(r2(p));
  CHECK(l1 <= 2.0 * compute_defect(cand.state).int_trM + 1e-12);
}

TEST_CASE("each point keeps its share of lambda_min(M)") {
  FieldState fs = constant_state(16, 16);
  SchemeConfig cfg;
  cfg.fallback_cells = 4;
  for (int s = 1; s <= 3; ++s) {
    DefectField before = compute_defect(fs);
    auto sw = sweep(fs, 11, cfg, s);
    DefectField after = compute_defect(sw.next);
    int n = fs.grid.n;
    for (std::size_t p = 0; p < fs.grid.points(); ++p)
      CHECK(lambda_min(after.M.sym(p, n)) >= cfg.keep_fraction * lambda_min(before.M.sym(p, n)) - 1e-12);
    fs = sw.next;
  }
}
