#include "convint/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace convint {

SpatialFilter::SpatialFilter(const Grid& g, double sigma) : g_(g), sigma_(sigma) {
  if (!(sigma > 0.0)) {
    sigma_ = 0.0;
    return;
  }
  int n = g.n;
  std::vector<int> dims;
  std::vector<double> lens;
  for (int a = 0; a < n; ++a) dims.push_back(g.N[a]), lens.push_back(g.len[a]);
  sp_ = std::make_unique<Spectral>(dims, lens);
  std::vector<std::vector<double>> w(n);
  for (int a = 0; a < n; ++a) {
    w[a].resize(g.N[a]);
    double s = 0.0;
    for (int i = 0; i < g.N[a]; ++i) {
      double d = std::min(i, g.N[a] - i) * g.dx(a);
      w[a][i] = std::exp(-0.5 * d * d / (sigma * sigma));
      s += w[a][i];
    }
    for (auto& x : w[a]) x /= s;
  }
  std::size_t S = g.spatial_points();
  std::vector<double> k(S);
  min_w_ = 1.0;
  for (std::size_t s = 0; s < S; ++s) {
    auto c = g.spatial_coords(s);
    double v = 1.0;
    for (int a = 0; a < n; ++a) v *= w[a][c[a]];
    k[s] = v;
    min_w_ = std::min(min_w_, v);
  }
  kh_.resize(sp_->csize());
  sp_->forward(k.data(), kh_.data());
}

void SpatialFilter::apply(const double* in, double* out) {
  if (!sp_) {
    std::copy(in, in + g_.spatial_points(), out);
    return;
  }
  sp_->convolve(in, out, kh_);
}

Field SpatialFilter::apply(const Field& f) {
  Field out = f;
  if (!sp_) return out;
  std::size_t S = g_.spatial_points();
  std::size_t slices = f.points() / S;
  std::vector<double> a(S), b(S);
  for (std::size_t j = 0; j < slices; ++j)
    for (int c = 0; c < f.comps; ++c) {
      for (std::size_t s = 0; s < S; ++s) a[s] = f((j * S + s), c);
      apply(a.data(), b.data());
      for (std::size_t s = 0; s < S; ++s) out(j * S + s, c) = b[s];
    }
  return out;
}

std::vector<double> time_shift_weights(int m) {
  std::vector<double> w(m + 1);
  double s = 0.0;
  for (int i = 0; i <= m; ++i) {
    w[i] = std::sin(std::numbers::pi * (i + 0.5) / (m + 1));
    s += w[i];
  }
  for (auto& x : w) x /= s;
  return w;
}

}  // namespace convint
