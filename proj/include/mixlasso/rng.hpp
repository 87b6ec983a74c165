#pragma once

#include <cstdint>

namespace mixlasso {

// Counter-based generator: output k is mix64(key + k * GAMMA) with the
// splitmix64 finalizer, so a (seed, stream) pair fully determines the
// sequence on every platform. Streams are derived by hashing the parent
// key with the child id (split()), never by jumping within one sequence.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Independent child stream; deterministic in (parent key, child id).
  RngStream split(std::uint64_t child) const;

  std::uint64_t next_u64();
  double uniform();                       // (0, 1)
  double uniform(double lo, double hi);   // (lo, hi)
  double normal();                        // standard normal, Box-Muller
  double normal(double mean, double sd);
  double gamma(double shape, double rate);        // mean = shape / rate
  double exponential(double rate);
  double inverse_gaussian(double mu, double shape);
  bool bernoulli(double prob);

 private:
  RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t key);

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mixlasso
