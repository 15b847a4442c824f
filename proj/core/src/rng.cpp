#include "lorasim/rng.hpp"

#include <cmath>

namespace lorasim {

std::uint64_t Rng::mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : base_(seed), engine_(mix(seed)) {}

Rng Rng::fork(std::uint64_t tag) const { return Rng(mix(base_ ^ mix(tag))); }

Rng Rng::fork(std::string_view tag) const {
  std::uint64_t h = 1469598103934665603ULL; // FNV-1a
  for (char c : tag) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ULL;
  }
  return fork(h);
}

std::uint64_t Rng::next_u64() { return engine_(); }

std::uint32_t Rng::uniform_u32(std::uint32_t bound) {
  return static_cast<std::uint32_t>(next_u64() % bound);
}

std::uint16_t Rng::next_u16() { return static_cast<std::uint16_t>(next_u64() & 0xffff); }

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

bool Rng::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return uniform01() < p;
}

double Rng::exponential(double mean) {
  double u = uniform01();
  return -mean * std::log1p(-u);
}

} // namespace lorasim
