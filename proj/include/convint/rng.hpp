#pragma once
#include <cstdint>
#include <random>

namespace convint {

// std::uniform_real_distribution and std::normal_distribution are not
// specified bit-for-bit, so the mappings are done by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform();  // [0,1)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal();
  std::uint64_t next() { return eng_(); }
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace convint
