#ifndef LORASIM_RNG_HPP
#define LORASIM_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace lorasim {

// Seeded, splittable RNG. fork() derives an independent stream from the base
// seed and a tag, so the draw order of one component cannot perturb another.
// Distribution helpers are hand-rolled: std:: distributions are not specified
// bit-exactly across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  Rng fork(std::uint64_t tag) const;
  Rng fork(std::string_view tag) const;

  std::uint64_t next_u64();
  // Uniform in [0, bound). bound must be > 0.
  std::uint32_t uniform_u32(std::uint32_t bound);
  std::uint16_t next_u16();
  // Uniform in [0, 1).
  double uniform01();
  double uniform(double lo, double hi);
  bool bernoulli(double p);
  double exponential(double mean);

  static std::uint64_t mix(std::uint64_t x); // splitmix64 finalizer

 private:
  std::uint64_t base_;
  std::mt19937_64 engine_;
};

} // namespace lorasim

#endif
