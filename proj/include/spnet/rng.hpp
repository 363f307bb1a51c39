#pragma once
#include <cmath>
#include <cstdint>
#include <random>

namespace spnet {

inline std::uint64_t mix64(std::uint64_t z) {
  // splitmix64 finalizer
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic substream: (seed, id1, id2) fully determines the sequence,
// independent of call order across streams. Samplers are hand-rolled so
// results are bit-identical across standard libraries and platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t id1 = 0,
                     std::uint64_t id2 = 0) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ mix64(id1));
    h = mix64(h ^ mix64(id2 + 0x5851F42D4C957F2DULL));
    std::seed_seq seq{h, mix64(h), mix64(mix64(h)), mix64(mix64(mix64(h)))};
    eng_.seed(seq);
    have_cached_normal_ = false;
  }

  // in [0, 1)
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // in (0, 1]
  double uniform01_open_low() { return 1.0 - uniform01(); }

  double exponential(double mean) {
    return -mean * std::log(uniform01_open_low());
  }

  double normal() {
    if (have_cached_normal_) {
      have_cached_normal_ = false;
      return cached_normal_;
    }
    double u1 = uniform01_open_low();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
  }

  double normal(double mu, double sd) { return mu + sd * normal(); }

  // Marsaglia-Tsang; shape < 1 boosted via Gamma(shape+1) * U^(1/shape).
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      double u = uniform01_open_low();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform01_open_low();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
        return d * v * scale;
      }
    }
  }

  double lognormal(double mu, double sigma) {
    return std::exp(normal(mu, sigma));
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double cached_normal_ = 0.0;
  bool have_cached_normal_;
};

}  // namespace spnet
