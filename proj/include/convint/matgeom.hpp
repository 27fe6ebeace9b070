#pragma once
#include <array>
#include <cstddef>

namespace convint {

class Rng;

struct Vec {
  int n = 0;
  std::array<double, 3> x{};

  Vec() = default;
  explicit Vec(int dim) : n(dim) {}
  Vec(double a, double b) : n(2), x{a, b, 0.0} {}
  Vec(double a, double b, double c) : n(3), x{a, b, c} {}

  double& operator[](int i) { return x[i]; }
  double operator[](int i) const { return x[i]; }
  double dot(const Vec& o) const;
  double norm2() const { return dot(*this); }
  double norm() const;
  Vec& operator+=(const Vec& o);
  Vec& operator-=(const Vec& o);
  Vec& operator*=(double s);
};

Vec operator+(Vec a, const Vec& b);
Vec operator-(Vec a, const Vec& b);
Vec operator*(double s, Vec a);
Vec operator-(Vec a);

// Upper triangle, row-major: n=2 (00,01,11); n=3 (00,01,02,11,12,22).
struct SymMat {
  int n = 0;
  std::array<double, 6> a{};

  SymMat() = default;
  explicit SymMat(int dim) : n(dim) {}

  static int size(int n) { return n * (n + 1) / 2; }
  static int idx(int n, int i, int j) {
    if (i > j) { int t = i; i = j; j = t; }
    return i * n - i * (i - 1) / 2 + (j - i);
  }
  static SymMat identity(int n, double s = 1.0);
  static SymMat outer(const Vec& u);
  static SymMat outer(const Vec& u, const Vec& v);  // (u v^T + v u^T)/2
  static SymMat diag(double d0, double d1);
  static SymMat diag(double d0, double d1, double d2);

  double operator()(int i, int j) const { return a[idx(n, i, j)]; }
  double& at(int i, int j) { return a[idx(n, i, j)]; }
  double trace() const;
  double frob() const;
  double max_abs_entry() const;
  bool finite() const;
  Vec mul(const Vec& v) const;
  double quad(const Vec& v) const { return v.dot(mul(v)); }
  double dot(const SymMat& o) const;  // Frobenius inner product
  SymMat traceless() const;

  SymMat& operator+=(const SymMat& o);
  SymMat& operator-=(const SymMat& o);
  SymMat& operator*=(double s);
};

SymMat operator+(SymMat a, const SymMat& b);
SymMat operator-(SymMat a, const SymMat& b);
SymMat operator*(double s, SymMat a);

struct Eig {
  int n = 0;
  std::array<double, 3> values{};                   // descending
  std::array<std::array<double, 3>, 3> vectors{};  // vectors[k] is the k-th eigenvector
};

Eig eig_sym(const SymMat& m);
double lambda_max(const SymMat& m);
double lambda_min(const SymMat& m);
double opnorm_inf(const SymMat& m);
bool is_positive_definite(const SymMat& m, double margin = 0.0);
SymMat sqrt_psd(const SymMat& m);
SymMat project_psd(const SymMat& m, double* removed = nullptr);

struct StateVU {
  Vec V;
  SymMat U;  // traceless
};

StateVU operator+(const StateVU& a, const StateVU& b);
StateVU operator-(const StateVU& a, const StateVU& b);
StateVU operator*(double s, const StateVU& a);
double norm(const StateVU& s);  // Euclidean in (V, U) with Frobenius on U

struct HullQuery {
  StateVU state;
  SymMat R0;
  double r = 0.0;
};

enum class Membership { interior, boundary, outside };
const char* membership_name(Membership m);

struct HullResult {
  Membership cls;
  double margin;
};

inline constexpr double kBoundaryTol = 1e-10;

double e_fn(const Vec& V, const SymMat& U, const SymMat& R0);
HullResult hull_membership(const HullQuery& q, double tol = kBoundaryTol);
double min_speed(const Vec& V, const SymMat& U, const SymMat& R0);

// Point of K_r attached to a wave state a with |a| = r.
StateVU hull_point(const Vec& a, const SymMat& R0, double r);
// Distance to the boundary of K^co_r; 0 when not interior.
double distance_to_boundary(const StateVU& z, const SymMat& R0, double r);

inline int hull_dim(int n) { return n * (n + 3) / 2 - 1; }  // N0

// helpers used by property tests and generators
SymMat random_sym(int n, Rng& rng, double scale = 1.0);
SymMat random_psd(int n, Rng& rng, double scale = 1.0);
Vec random_unit(int n, Rng& rng);
Vec random_vec(int n, Rng& rng, double scale = 1.0);
// rows form an orthonormal basis; Haar via Gram-Schmidt on gaussians
std::array<Vec, 3> random_orthonormal(int n, Rng& rng);

}  // namespace convint
