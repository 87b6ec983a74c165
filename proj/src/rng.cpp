#include "mixlasso/rng.hpp"

#include <cmath>

#include "mixlasso/errors.hpp"

namespace mixlasso {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer (Steele, Lea & Flood 2014).
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix64(mix64(seed) ^ mix64(stream + kGamma))) {}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t key)
    : seed_(seed), stream_(stream), key_(key) {}

RngStream RngStream::split(std::uint64_t child) const {
  return RngStream(seed_, child, mix64(key_ ^ mix64(child + kGamma)));
}

std::uint64_t RngStream::next_u64() { return mix64(key_ + (++counter_) * kGamma); }

double RngStream::uniform() {
  // 53-bit mantissa, shifted into (0, 1).
  const std::uint64_t bits = next_u64() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double RngStream::normal(double mean, double sd) { return mean + sd * normal(); }

double RngStream::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw ValidationError("RngStream::gamma: shape and rate must be positive");
  if (shape < 1.0) {
    // Boost to shape + 1 and scale back (Marsaglia & Tsang).
    const double u = uniform();
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double RngStream::exponential(double rate) {
  if (!(rate > 0.0)) throw ValidationError("RngStream::exponential: rate must be positive");
  return -std::log(uniform()) / rate;
}

double RngStream::inverse_gaussian(double mu, double shape) {
  if (!(mu > 0.0) || !(shape > 0.0))
    throw ValidationError("RngStream::inverse_gaussian: mu and shape must be positive");
  // Michael, Schucany & Haas (1976) transformation with rejection.
  const double nu = normal();
  const double y = nu * nu;
  const double x = mu + mu * mu * y / (2.0 * shape) -
                   mu / (2.0 * shape) * std::sqrt(4.0 * mu * shape * y + mu * mu * y * y);
  const double u = uniform();
  if (u <= mu / (mu + x)) return x > 0.0 ? x : mu * 1e-300;
  return mu * mu / x;
}

bool RngStream::bernoulli(double prob) { return uniform() < prob; }

}  // namespace mixlasso
