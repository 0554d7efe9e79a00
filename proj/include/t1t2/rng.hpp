#pragma once

#include <cstdint>
#include <random>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace t1t2 {

// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based sub-seed: depends only on the coordinates, never on the
// order in which replications are executed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
  std::uint64_t s = mix64(base);
  s = mix64(s ^ a);
  s = mix64(s ^ (b + 0x632be59bd9b4e019ULL));
  s = mix64(s ^ (c + 0x8cb92ba72f3d8dd7ULL));
  return s;
}

class rng {
public:
  explicit rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  // Gamma with shape/rate parametrization (mean shape/rate).
  double gamma(double shape, double rate) {
    boost::random::gamma_distribution<double> g(shape, 1.0 / rate);
    return g(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace t1t2
