#pragma once
#include <complex>
#include <cstddef>
#include <vector>

namespace convint {

// Periodic FFT helper over a row-major real array (last axis contiguous).
class Spectral {
 public:
  Spectral(std::vector<int> dims, std::vector<double> lengths);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  std::size_t size() const { return nreal_; }
  std::size_t csize() const { return ncplx_; }
  int rank() const { return int(dims_.size()); }

  void forward(const double* in, std::complex<double>* out);
  void backward(const std::complex<double>* in, double* out);  // includes 1/N

  // angular wavenumber of complex coefficient c along axis a; 0 for Nyquist
  double wavenumber(std::size_t c, int a) const;
  double wavenumber_raw(std::size_t c, int a) const;  // Nyquist kept (signed)
  bool is_nyquist(std::size_t c, int a) const;

  void derivative(const double* in, double* out, int axis);
  void convolve(const double* in, double* out, const std::vector<std::complex<double>>& kernel_hat);

 private:
  std::vector<int> dims_;
  std::vector<double> len_;
  std::size_t nreal_, ncplx_;
  std::vector<std::size_t> cstride_;
  double* rbuf_;
  void* cbuf_;
  void* fwd_;
  void* bwd_;
  std::vector<std::complex<double>> tmp_;
};

}  // namespace convint
