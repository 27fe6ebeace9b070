#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "convint/pipeline.hpp"
#include "convint/report.hpp"
#include "convint/rng.hpp"
#include "convint/snapshot.hpp"
#include "convint/verify.hpp"
#include "convint/viscous.hpp"
#include "convint/wavegen.hpp"
#include "golden.hpp"
#include "support.hpp"

using namespace convint;

namespace {

const std::string kData = CONVINT_TEST_DATA;

}  // namespace

TEST_CASE("test bank") {
  auto b = make_bank(2, 3, 0.0, 1.0);
  CHECK(b.size() == b.times.size() * b.modes.size());
  CHECK(b.times.front().initial);
  CHECK(b.times.front().value(0.0) == 1.0);
  auto roster = b.roster();
  std::set<std::string> uniq(roster.begin(), roster.end());
  CHECK(uniq.size() == roster.size());
  for (const auto& t : b.times) {
    double hi = t.initial ? t.a + t.b : t.b;
    CHECK(t.value(hi) == doctest::Approx(0.0));
    // derivative against a centred difference
    double x = t.initial ? t.a + 0.3 * t.b : 0.5 * (t.a + t.b) + 0.1 * (t.b - t.a);
    double h = 1e-6;
    CHECK(t.deriv(x) == doctest::Approx((t.value(x + h) - t.value(x - h)) / (2 * h)).epsilon(1e-6));
  }
  // the bank must be resolved by the grid
  Candidate c = shear(8, 5, 0.0);
  CHECK(thrown_kind([&] { verify_weak(c, make_bank(2, 4, 0.0, 1.0)); }) == ErrorKind::invalid_input);
}

TEST_CASE("weak residuals of exact and perturbed states") {
  Grid g = Grid::torus(2, 8, 9, 0.0, 1.0);
  Candidate c;
  c.grid = g;
  c.gamma = 2.0;
  c.rho = scalar_field(g, 1.3);
  c.V = vector_field(g, 0.4);
  auto r = verify_weak(c, make_bank(2, 3, 0.0, 1.0));
  CHECK(r.mass <= 1e-12);
  CHECK(r.momentum <= 1e-12);

  Candidate inc = c;
  inc.incompressible = true;
  inc.rho = Field();
  auto ri = verify_weak(inc, make_bank(2, 3, 0.0, 1.0));
  CHECK(ri.mass <= 1e-12);
  CHECK(ri.momentum <= 1e-12);

  auto bad = verify_weak(shear(16, 17, 0.0, 0.1), make_bank(2, 7, 0.0, 1.0));
  CHECK(bad.momentum > 1e-3);
  CHECK(bad.worst_momentum.rfind("momentum", 0) == 0);
}

TEST_CASE("weak residuals converge at second order") {
  double prev_mass = 0, prev_mom = 0;
  for (int N : {8, 16, 32}) {
    auto r = verify_weak(shear(N, N + 1, 0.5), make_bank(2, 3, 0.0, 1.0));
    if (prev_mass > 0) {
      CHECK(prev_mom / r.momentum >= 3.0);
      CHECK(r.mass <= 1e-12);
    }
    prev_mass = std::max(r.mass, 1e-300);
    prev_mom = r.momentum;
  }
}

TEST_CASE("certificates reach the report") {
  Candidate c = shear(8, 5, 0.0);
  c.certificates["wave_l1"] = 0.25;
  c.certificates["extract"] = 1e-3;
  auto r = verify(c, make_bank(2, 3, 0.0, 1.0));
  CHECK(r.certificates.size() == 2);
  CHECK(r.certificates.at("wave_l1") == 0.25);
  json j = to_json(r);
  CHECK(j["certificates"]["extract"].get<double>() == 1e-3);
}

TEST_CASE("energy inequality checks") {
  Grid g = Grid::torus(2, 8, 6, 0.0, 1.0);
  Candidate rest;
  rest.grid = g;
  rest.gamma = 2.0;
  rest.rho = scalar_field(g, 1.2);
  rest.V = vector_field(g);
  auto e = verify_energy(rest);
  CHECK(e.violations == 0);
  CHECK(e.reference == doctest::Approx(1.44));

  // viscous run: monotone series and no violations
  Grid w = Grid::torus(2, 16, 6, 0.0, 0.2);
  Field rho0(w.spatial_points(), 1), V0(w.spatial_points(), 2);
  sample_datum(w, shear_datum(), rho0, V0);
  auto run = solve_comp_ns(w, rho0, V0, 0.01, 2.0);
  Candidate vc;
  vc.grid = w;
  vc.gamma = 2.0;
  vc.rho = run.rho;
  vc.V = run.V;
  auto ev = verify_energy(vc);
  CHECK(ev.violations == 0);
  for (std::size_t j = 1; j < ev.energy.size(); ++j) CHECK(ev.energy[j] <= ev.energy[j - 1] + 1e-12);

  // raising the kinetic energy later is flagged
  for (std::size_t p = w.index(3, std::size_t(0)); p < w.points(); ++p) vc.V(p, 0) *= 1.5;
  CHECK(verify_energy(vc).violations == 3);
}

TEST_CASE("snapshot round trip and corruption") {
  Grid g = Grid::torus(3, 4, 3, 0.25, 0.75);
  g.lo = {0.1, 0.2, 0.3};
  Rng rng(71);
  Snapshot s;
  s.grid = g;
  s.gamma = 5.0 / 3.0;
  Field a = vector_field(g), b(g.spatial_points(), 1);
  for (double& x : a.v) x = rng.normal();
  for (double& x : b.v) x = rng.uniform() * 1e-300;
  a.v[5] = -0.0;
  s.add("V", a);
  s.add("rho_init", b);
  std::string bytes = encode_snapshot(s);
  Snapshot t = decode_snapshot(bytes);
  CHECK(t.roster() == s.roster());
  CHECK(t.get("V").v == a.v);
  CHECK(t.get("rho_init").v == b.v);
  CHECK(std::signbit(t.get("V").v[5]));
  CHECK(t.gamma == s.gamma);
  CHECK(t.grid.same_shape(g));
  CHECK(t.grid.t0 == 0.25);
  CHECK(t.grid.lo[2] == 0.3);
  CHECK(encode_snapshot(t) == bytes);

  for (std::size_t cut : {std::size_t(3), std::size_t(40), bytes.size() - 1})
    CHECK(thrown_kind([&] { decode_snapshot(bytes.substr(0, cut)); }) == ErrorKind::checksum);
  std::string flip = bytes;
  flip[flip.size() / 2] ^= 0x10;
  CHECK(thrown_kind([&] { decode_snapshot(flip); }) == ErrorKind::checksum);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK(thrown_kind([&] { decode_snapshot(magic); }) == ErrorKind::checksum);
  CHECK(thrown_kind([&] { decode_snapshot(bytes + "x"); }) == ErrorKind::checksum);
  CHECK(thrown_kind([&] { s.add("V", a); }) == ErrorKind::invalid_input);
}

TEST_CASE("golden snapshot and report") {
  Snapshot s = golden_snapshot();
  std::string snap_path = kData + "/golden_shear.wfld";
  std::string json_path = kData + "/golden_verify.json";
  if (std::getenv("CONVINT_REGEN_GOLDEN")) {
    write_snapshot(snap_path, s);
    json full = to_json(verify(candidate_from_snapshot(s), make_bank(2, 3, 0.0, 1.0)));
    write_file(json_path, full.dump(2) + "\n");
  }
  REQUIRE(std::filesystem::exists(snap_path));
  CHECK(read_file(snap_path) == encode_snapshot(s));
  json got = golden_report(read_snapshot(snap_path));
  json want = json::parse(read_file(json_path));
  want.erase("worst_mass");
  want.erase("worst_momentum");
  CHECK(close_json(got, want, 1e-9));
  CHECK(got["violations"].get<int>() == 0);
}

TEST_CASE("scheme output is deterministic") {
  Grid g = Grid::unit_cube(2, 16, 16);
  Field R0 = sym_field(g);
  for (std::size_t p = 0; p < g.points(); ++p) R0.set_sym(p, SymMat::identity(2));
  FieldState fs = make_field_state(g, scalar_field(g, 1.0), vector_field(g), R0);
  SchemeConfig cfg;
  cfg.fallback_cells = 4;
  auto encode = [&](std::uint64_t seed) {
    auto c = run(fs, 0.1, 2, seed, cfg);
    Snapshot s;
    s.grid = g;
    s.add("V", c.Vnew);
    s.add("U", c.Unew);
    return encode_snapshot(s);
  };
  CHECK(encode(9) == encode(9));
  CHECK(encode(9) != encode(10));
}

TEST_CASE("pipeline input checks") {
  PipelineConfig cfg;
  cfg.gamma = 3.0;
  try {
    wild_data_pipeline(shear_datum(), cfg);
    FAIL("expected gamma-constraint");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::gamma_constraint);
    CHECK(e.stage() == "gamma");
  }

  PipelineConfig small;
  small.N = 16;
  small.Nt = 16;
  small.probe_Nt = 21;
  try {
    wild_data_pipeline(rest_datum(1.0), small);
    FAIL("expected degenerate-input");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_input);
    CHECK(e.stage() == "strictify");
  }
}
