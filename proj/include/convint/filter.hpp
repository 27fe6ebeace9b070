#pragma once
#include <complex>
#include <memory>
#include <vector>

#include "convint/grid.hpp"
#include "convint/spectral.hpp"

namespace convint {

// Convolution with a normalized, strictly positive periodic Gaussian on the
// spatial torus of a grid. sigma <= 0 gives the identity.
class SpatialFilter {
 public:
  SpatialFilter(const Grid& g, double sigma);
  bool identity() const { return !sp_; }
  double sigma() const { return sigma_; }
  // one spatial slice of a scalar
  void apply(const double* in, double* out);
  // every slice and component of a field on the grid
  Field apply(const Field& f);
  // smallest kernel weight (positive unless identity)
  double min_weight() const { return min_w_; }

 private:
  Grid g_;
  double sigma_;
  double min_w_ = 1.0;
  std::unique_ptr<Spectral> sp_;
  std::vector<std::complex<double>> kh_;
};

// weights for forward time shifts 0..m, all positive, summing to 1
std::vector<double> time_shift_weights(int m);

}  // namespace convint
