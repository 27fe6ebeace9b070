#include "convint/spectral.hpp"

#include <fftw3.h>

#include <cstring>
#include <numbers>

#include "convint/errors.hpp"

namespace convint {

Spectral::Spectral(std::vector<int> dims, std::vector<double> lengths)
    : dims_(std::move(dims)), len_(std::move(lengths)) {
  if (dims_.empty() || dims_.size() != len_.size()) fail(ErrorKind::invalid_input, "spectral: bad dims");
  nreal_ = 1;
  for (int d : dims_) nreal_ *= std::size_t(d);
  ncplx_ = nreal_ / dims_.back() * (dims_.back() / 2 + 1);
  cstride_.assign(dims_.size(), 1);
  std::size_t s = 1;
  for (int a = int(dims_.size()) - 1; a >= 0; --a) {
    cstride_[a] = s;
    s *= (a == int(dims_.size()) - 1) ? std::size_t(dims_[a] / 2 + 1) : std::size_t(dims_[a]);
  }
  rbuf_ = fftw_alloc_real(nreal_);
  fftw_complex* cb = fftw_alloc_complex(ncplx_);
  cbuf_ = cb;
  fwd_ = fftw_plan_dft_r2c(int(dims_.size()), dims_.data(), rbuf_, cb, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_c2r(int(dims_.size()), dims_.data(), cb, rbuf_, FFTW_ESTIMATE);
  tmp_.resize(ncplx_);
}

Spectral::~Spectral() {
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

void Spectral::forward(const double* in, std::complex<double>* out) {
  std::memcpy(rbuf_, in, nreal_ * sizeof(double));
  fftw_execute(static_cast<fftw_plan>(fwd_));
  std::memcpy(static_cast<void*>(out), cbuf_, ncplx_ * sizeof(fftw_complex));
}

void Spectral::backward(const std::complex<double>* in, double* out) {
  std::memcpy(cbuf_, static_cast<const void*>(in), ncplx_ * sizeof(fftw_complex));
  fftw_execute(static_cast<fftw_plan>(bwd_));
  double inv = 1.0 / double(nreal_);
  for (std::size_t i = 0; i < nreal_; ++i) out[i] = rbuf_[i] * inv;
}

double Spectral::wavenumber_raw(std::size_t c, int a) const {
  int last = int(dims_.size()) - 1;
  std::size_t extent = (a == last) ? std::size_t(dims_[a] / 2 + 1) : std::size_t(dims_[a]);
  long m = long((c / cstride_[a]) % extent);
  if (a != last && m > dims_[a] / 2) m -= dims_[a];
  return 2.0 * std::numbers::pi * double(m) / len_[a];
}

bool Spectral::is_nyquist(std::size_t c, int a) const {
  if (dims_[a] % 2) return false;
  int last = int(dims_.size()) - 1;
  std::size_t extent = (a == last) ? std::size_t(dims_[a] / 2 + 1) : std::size_t(dims_[a]);
  long m = long((c / cstride_[a]) % extent);
  return m == dims_[a] / 2;
}

double Spectral::wavenumber(std::size_t c, int a) const {
  return is_nyquist(c, a) ? 0.0 : wavenumber_raw(c, a);
}

void Spectral::derivative(const double* in, double* out, int axis) {
  forward(in, tmp_.data());
  for (std::size_t c = 0; c < ncplx_; ++c) tmp_[c] *= std::complex<double>(0.0, wavenumber(c, axis));
  backward(tmp_.data(), out);
}

void Spectral::convolve(const double* in, double* out, const std::vector<std::complex<double>>& kh) {
  forward(in, tmp_.data());
  for (std::size_t c = 0; c < ncplx_; ++c) tmp_[c] *= kh[c];
  backward(tmp_.data(), out);
}

}  // namespace convint
