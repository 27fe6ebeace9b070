#pragma once
#include <array>
#include <cstdint>
#include <string>

#include "convint/grid.hpp"
#include "convint/matgeom.hpp"

namespace convint {

struct AdmissibleSegment {
  StateVU center;
  StateVU halfdir;  // lambda * ((a, a(x)a) - (b, b(x)b))
  Vec a, b;
  double lambda = 0.0;
  double r = 0.0;
  SymMat R0;
  double v_norm() const { return halfdir.V.norm(); }
};

struct PlaneWaveCoeffs {
  Vec xi;
  double c = 0.0;
  Vec ampV;
  SymMat ampU;
};

PlaneWaveCoeffs plane_wave_coeffs(const Vec& a, const Vec& b);

// lower bound on |v| the segment search must meet
double segment_length_bound(const StateVU& z, double r);

AdmissibleSegment find_segment(const StateVU& state, const SymMat& R0, double r, std::uint64_t seed = 0);

// smooth plateau cutoff on [-1,1]: 1 on |s| <= 1-w, 0 at |s| = 1
struct Cutoff1D {
  double w = 0.3;
  double value(double s) const;
  void eval(double s, double& f, double& df, double& d2f) const;
  double sup_d1() const;
  double sup_d2() const;
};

struct WaveCertificates {
  int sample_res = 0;
  double residual_sup = 0.0;       // sup of |(div v, d_t v + div u)| on samples
  double residual_bound = 0.0;     // analytic upper bound
  double mean_V = 0.0;             // |int v| / (lambda vol)
  double mean_U = 0.0;
  double image_dist = 0.0;         // max distance of samples to [-p, p]
  double image_bound = 0.0;        // analytic bound used for k_min
  double l1_V = 0.0;               // int |v| over the reference cube
};

struct LocalizedWave {
  int n = 2;
  AdmissibleSegment seg;
  PlaneWaveCoeffs coeffs;
  double lambda = 0.0;
  int k = 1;
  Cutoff1D cutoff;
  std::array<double, 4> eta{};     // unit space-time frequency direction
  StateVU p;                       // segment half direction
  std::array<StateVU, 4> G;        // corrector coefficients per space-time axis
  WaveCertificates cert;

  // y in [-1,1]^{n+1}, last coordinate is time
  StateVU eval(const double* y) const;
  // residual of (div v, d_t v + div u) at y
  void residual(const double* y, double& mass, Vec& mom) const;
};

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// global L1 constant: int |v| >= alpha * lambda * |b - a| over the reference cube
double l1_alpha(int n);

struct LocalizeOptions {
  double cutoff_width = 0.3;
  int sample_res = 0;  // 0: analytic certificates only
};

int k_min(const AdmissibleSegment& seg, double eps, double cutoff_width = 0.3);
LocalizedWave localize(const AdmissibleSegment& seg, int k, double eps, const LocalizeOptions& opt = {});
WaveCertificates sample_certificates(const LocalizedWave& w, int res);

// index box; axes 0..n-1 spatial, axis n time
struct CubeBox {
  std::array<int, 4> lo{};
  std::array<int, 4> size{};
  bool contains(int a, int i) const { return i >= lo[a] && i < lo[a] + size[a]; }
  std::size_t count(int n) const;
};

struct CubeFields {
  CubeBox box;
  Field V, U;           // box-local samples, time-major then spatial row-major
  Field res_mass, res_mom;
  double scale = 0.0;   // L
  double res_sup = 0.0;
  double res_l1 = 0.0;  // int |(mass, momentum)|
  double l1_V = 0.0;
};

// local index in a box <-> grid point index
std::size_t box_local_index(const CubeBox& b, int n, int j, const std::array<int, 3>& i);
std::size_t box_grid_point(const Grid& g, const CubeBox& b, std::size_t local);

CubeFields rescale_wave(const LocalizedWave& w, const Grid& g, const CubeBox& cube, double rho_min);

}  // namespace convint
