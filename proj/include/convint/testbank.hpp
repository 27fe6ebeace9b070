#pragma once
#include <array>
#include <string>
#include <vector>

namespace convint {

// polynomial time factor of degree 4
struct TimeBump {
  bool initial = false;  // (1 - t/b)^3 (1 + 3t/b) on [a, a+b], value 1 at t = a
  double a = 0.0, b = 1.0;
  double value(double t) const;
  double deriv(double t) const;
  double sup() const { return 1.0; }
  double sup_deriv() const;
  std::string name() const;
};

// cos or sin of 2 pi sum_a m_a (x_a - lo_a) / len_a
struct TrigMode {
  std::array<int, 3> m{0, 0, 0};
  bool sine = false;
  std::string name(int n) const;
};

struct TestBank {
  int n = 2;
  int K = 8;
  double t0 = 0.0, t1 = 1.0;
  std::vector<TimeBump> times;
  std::vector<TrigMode> modes;
  std::size_t size() const { return times.size() * modes.size(); }
  std::vector<std::string> roster() const;
};

// modes with |m|_inf <= K over a half space, cos and sin; one initial bump
// and three interior bumps over [t0, t1]
TestBank make_bank(int n, int K, double t0, double t1);

}  // namespace convint
