#include <doctest.h>

#include <cmath>

#include "convint/rng.hpp"
#include "convint/wavegen.hpp"
#include "support.hpp"

using namespace convint;

namespace {

// random state strictly inside K^co_r: shrink a random hull combination toward the centre
StateVU random_interior(int n, const SymMat& R0, double r, Rng& rng) {
  StateVU z{Vec(n), SymMat(n)};
  int m = hull_dim(n) + 1;
  std::vector<double> w(m);
  double sum = 0;
  for (double& x : w) sum += (x = rng.uniform() + 0.05);
  for (int i = 0; i < m; ++i) z = z + (w[i] / sum) * hull_point(r * random_unit(n, rng), R0, r);
  StateVU centre{Vec(n), SymMat(n)};
  centre.U = (-1.0) * R0.traceless();
  double s = rng.uniform(0.1, 0.9);
  return s * z + (1 - s) * centre;
}

AdmissibleSegment sample_segment() {
  StateVU z{Vec(0.2, -0.1), SymMat::diag(0.1, -0.1)};
  return find_segment(z, SymMat::identity(2), 2.0, 7);
}

}  // namespace

TEST_CASE("hull dimension") {
  CHECK(hull_dim(2) == 4);
  CHECK(hull_dim(3) == 8);
}

TEST_CASE("plane_wave_coeffs examples") {
  auto c = plane_wave_coeffs(Vec(1, 0), Vec(0, 1));
  CHECK(c.xi[0] == 1.0);
  CHECK(c.xi[1] == 1.0);
  CHECK(c.c == -1.0);
  CHECK(c.ampV[0] == 1.0);
  CHECK(c.ampV[1] == -1.0);
  CHECK(c.ampU(0, 0) == 1.0);
  CHECK(c.ampU(1, 1) == -1.0);
  CHECK(c.ampU(0, 1) == 0.0);

  auto c3 = plane_wave_coeffs(Vec(1, 0, 0), Vec(0, 1, 0));
  CHECK(c3.xi[0] == 1.0);
  CHECK(c3.xi[1] == 1.0);
  CHECK(c3.xi[2] == 0.0);
  CHECK(c3.c == -1.0);

  CHECK(thrown_kind([] { plane_wave_coeffs(Vec(1, 0), Vec(-1, 0)); }) == ErrorKind::degenerate_pair);
  CHECK(thrown_kind([] { plane_wave_coeffs(Vec(1, 0), Vec(1, 0)); }) == ErrorKind::degenerate_pair);
}

TEST_CASE("plane wave identities on random pairs") {
  Rng rng(31);
  for (int n : {2, 3}) {
    for (int t = 0; t < 1000; ++t) {
      double r = rng.uniform(0.1, 5.0);
      Vec a = r * random_unit(n, rng), b = r * random_unit(n, rng);
      auto c = plane_wave_coeffs(a, b);
      CHECK(std::abs(c.ampV.dot(c.xi)) <= 1e-12 * (1 + r * r));
      Vec res = c.c * c.ampV + c.ampU.mul(c.xi);
      CHECK(res.norm() <= 1e-12 * (1 + r * r * r));
      CHECK(std::abs(c.ampU.trace()) <= 1e-12 * (1 + r * r));
    }
  }
}

TEST_CASE("find_segment examples") {
  for (int n : {2, 3}) {
    SymMat R0 = SymMat::identity(n);
    double r = std::sqrt(n + 1.0);
    StateVU z{Vec(n), SymMat(n)};
    auto seg = find_segment(z, R0, r);
    CHECK(seg.v_norm() >= r * r / (4.0 * hull_dim(n) * r));
  }
  // |V| = r with tr R0 = 0 is never interior
  StateVU edge{Vec(1.0, 0.0), SymMat(2)};
  CHECK(thrown_kind([&] { find_segment(edge, SymMat(2), 1.0); }) == ErrorKind::precondition);
}

TEST_CASE("find_segment bounds on random interior states") {
  Rng rng(32);
  for (int n : {2, 3}) {
    for (int t = 0; t < 500; ++t) {
      SymMat R0 = random_psd(n, rng, 0.5);
      double r = rng.uniform(0.5, 3.0);
      StateVU z = random_interior(n, R0, r, rng);
      if (hull_membership({z, R0, r}).cls != Membership::interior) continue;
      auto seg = find_segment(z, R0, r, t);
      CHECK(std::abs(seg.a.norm() - r) <= 1e-10 * (1 + r));
      CHECK(std::abs(seg.b.norm() - r) <= 1e-10 * (1 + r));
      CHECK((seg.a - seg.b).norm() > 1e-8 * r);
      CHECK((seg.a + seg.b).norm() > 1e-8 * r);
      CHECK(seg.v_norm() >= segment_length_bound(z, r) * (1 - 1e-12));
      CHECK(hull_membership({z + seg.halfdir, R0, r}).margin > 0);
      CHECK(hull_membership({z - seg.halfdir, R0, r}).margin > 0);
      CHECK(std::abs(seg.halfdir.U.trace()) <= 1e-12 * (1 + r * r));
      if (t % 10 == 0) {
        double dz = distance_to_boundary(z, R0, r);
        CHECK(distance_to_boundary(z + seg.halfdir, R0, r) >= 0.5 * dz * (1 - 1e-6) - 1e-12);
      }
    }
  }
}

TEST_CASE("zero amplitude wave") {
  auto seg = sample_segment();
  seg.lambda = 0.0;
  seg.halfdir = 0.0 * seg.halfdir;
  auto w = localize(seg, 8, 0.1, {0.3, 16});
  CHECK(w.cert.residual_sup == 0.0);
  CHECK(w.cert.image_dist == 0.0);
  CHECK(w.cert.l1_V == 0.0);
}

TEST_CASE("residual decays like 1/k") {
  auto seg = sample_segment();
  double prev = 0.0;
  for (int k : {16, 32, 64, 128}) {
    auto w = localize(seg, k, 1.0, {0.3, 64});
    CHECK(w.cert.residual_sup <= w.cert.residual_bound);
    if (prev > 0) {
      double ratio = w.cert.residual_sup / prev;
      CHECK(ratio >= 0.35);
      CHECK(ratio <= 0.65);
    }
    prev = w.cert.residual_sup;
  }
}

TEST_CASE("mean zero, image containment and L1 lower bound") {
  auto seg = sample_segment();
  auto w = localize(seg, 64, 0.05, {0.3, 64});
  CHECK(w.cert.mean_V <= 1e-8);
  CHECK(w.cert.mean_U <= 1e-8);

  Rng rng(33);
  for (int n : {2, 3}) {
    for (int t = 0; t < 6; ++t) {
      SymMat R0 = random_psd(n, rng, 0.5);
      double r = rng.uniform(0.5, 2.0);
      StateVU z = random_interior(n, R0, r, rng);
      if (hull_membership({z, R0, r}).cls != Membership::interior) continue;
      auto s = find_segment(z, R0, r, t);
      double eps = 0.05 * r;
      int k = k_min(s, eps);
      auto wk = localize(s, k, eps, {0.3, n == 2 ? 48 : 20});
      CHECK(wk.cert.image_dist <= eps);
      CHECK(wk.cert.l1_V >= l1_alpha(n) * s.v_norm());
      CHECK(thrown_kind([&] { localize(s, std::max(1, k / 2 - 1), eps); }) ==
            (k / 2 - 1 >= 1 ? std::optional(ErrorKind::frequency_too_low) : std::nullopt));
    }
  }
}

TEST_CASE("rescale_wave") {
  auto seg = sample_segment();
  auto w = localize(seg, 4, 10.0);
  Grid g = Grid::unit_cube(2, 32, 64);
  CubeBox box{{8, 8, 0, 0}, {16, 16, 64, 0}};

  auto a = rescale_wave(w, g, box, 1.0);
  auto b = rescale_wave(w, g, box, 4.0);
  CHECK(a.scale == doctest::Approx(0.25));
  CHECK(b.scale == doctest::Approx(0.25));

  // identity mapping at rho_min = 1
  double y[3];
  std::size_t q = box_local_index(box, 2, 32, {15, 13, 0});
  y[0] = (g.x(0, 15) - 0.5) / 0.25;
  y[1] = (g.x(1, 13) - 0.5) / 0.25;
  y[2] = (g.t(32) - 0.5 * (g.t(0) + g.t(63))) / 0.25;
  StateVU s = w.eval(y);
  CHECK(a.V(q, 0) == doctest::Approx(s.V[0]));
  CHECK(a.U(q, 1) == doctest::Approx(s.U(0, 1)));

  auto support = [&](const CubeFields& f, double& vmax) {
    int jmin = 1 << 30, jmax = -1;
    vmax = 0;
    for (std::size_t p = 0; p < f.V.points(); ++p) {
      double v = f.V.vec(p, 2).norm();
      vmax = std::max(vmax, v);
      if (v > 0) {
        int j = int(p / (16 * 16));
        jmin = std::min(jmin, j);
        jmax = std::max(jmax, j);
      }
    }
    return jmax - jmin + 1;
  };
  double va, vb;
  int ta = support(a, va), tb = support(b, vb);
  // t -> t sqrt(rho_min) on the reference variable: the physical time support dilates by 2
  CHECK(double(tb) / ta == doctest::Approx(2.0).epsilon(0.1));
  CHECK(vb / va == doctest::Approx(2.0).epsilon(0.05));

  CHECK(thrown_kind([&] { rescale_wave(w, g, box, 0.0); }) == ErrorKind::precondition);
  CubeBox outside{{24, 8, 0, 0}, {16, 16, 8, 0}};
  CHECK(thrown_kind([&] { rescale_wave(w, g, outside, 1.0); }) == ErrorKind::precondition);
}
