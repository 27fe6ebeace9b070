#include "convint/testbank.hpp"

#include <cmath>
#include <sstream>

#include "convint/errors.hpp"

namespace convint {

double TimeBump::value(double t) const {
  if (initial) {
    double s = (t - a) / b;
    if (s < 0.0 || s > 1.0) return 0.0;
    double u = 1.0 - s;
    return u * u * u * (1.0 + 3.0 * s);
  }
  if (t <= a || t >= b) return 0.0;
  double h = 0.5 * (b - a);
  double q = (t - a) * (b - t) / (h * h);
  return q * q;
}

double TimeBump::deriv(double t) const {
  if (initial) {
    double s = (t - a) / b;
    if (s < 0.0 || s > 1.0) return 0.0;
    double u = 1.0 - s;
    return (-3.0 * u * u * (1.0 + 3.0 * s) + 3.0 * u * u * u) / b;  // = -12 s u^2 / b
  }
  if (t <= a || t >= b) return 0.0;
  double h = 0.5 * (b - a);
  double q = (t - a) * (b - t) / (h * h);
  double dq = ((b - t) - (t - a)) / (h * h);
  return 2.0 * q * dq;
}

double TimeBump::sup_deriv() const {
  if (initial) return 16.0 / 9.0 / b;  // max of 12 s (1-s)^2 at s = 1/3
  double h = 0.5 * (b - a);
  // q^2 with q = 1 - z^2, z in [-1,1]: |d/dt| = 4 z (1 - z^2) / h, max at z = 1/sqrt(3)
  return 8.0 / (3.0 * std::sqrt(3.0)) / h;
}

std::string TimeBump::name() const {
  std::ostringstream o;
  if (initial) o << "init[" << a << "," << a + b << "]";
  else o << "bump[" << a << "," << b << "]";
  return o.str();
}

std::string TrigMode::name(int n) const {
  std::ostringstream o;
  o << (sine ? "sin(" : "cos(");
  for (int i = 0; i < n; ++i) o << (i ? "," : "") << m[i];
  o << ")";
  return o.str();
}

std::vector<std::string> TestBank::roster() const {
  std::vector<std::string> r;
  for (const auto& t : times)
    for (const auto& m : modes) r.push_back(m.name(n) + "*" + t.name());
  return r;
}

TestBank make_bank(int n, int K, double t0, double t1) {
  if (n != 2 && n != 3) fail(ErrorKind::invalid_input, "test bank: n must be 2 or 3");
  if (K < 0) fail(ErrorKind::invalid_input, "test bank: K must be nonnegative");
  if (!(t1 > t0)) fail(ErrorKind::invalid_input, "test bank: empty time interval");
  TestBank b;
  b.n = n;
  b.K = K;
  b.t0 = t0;
  b.t1 = t1;
  double L = t1 - t0;
  b.times.push_back({true, t0, 0.5 * L});
  b.times.push_back({false, t0, t0 + 0.5 * L});
  b.times.push_back({false, t0 + 0.25 * L, t0 + 0.75 * L});
  b.times.push_back({false, t0 + 0.5 * L, t1});
  int K3 = n == 3 ? K : 0;
  for (int i = -K; i <= K; ++i)
    for (int j = -K; j <= K; ++j)
      for (int k = -K3; k <= K3; ++k) {
        // half space: first nonzero component positive
        std::array<int, 3> m{i, j, k};
        int first = 0;
        for (int a = 0; a < 3 && first == 0; ++a) first = m[a];
        if (first < 0) continue;
        b.modes.push_back({m, false});
        if (first > 0) b.modes.push_back({m, true});
      }
  return b;
}

}  // namespace convint
