#pragma once

#include "mixlasso/errors.hpp"
#include "mixlasso/rng.hpp"

namespace mixlasso {

// GIG(c, d, f) with density p(x) ∝ x^{c-1} exp(-(d*x + f/x)/2) on x > 0.
// Only the half order c = 1/2 is used.
struct GigParams {
  double order = 0.5;
  double d = 1.0;  // rate on x
  double f = 1.0;  // rate on 1/x
};

struct GigHalfMoments {
  double mean;      // E[X]
  double inv_mean;  // E[1/X]
};

// Closed forms from half-integer Bessel-K ratios: with eta = sqrt(d*f),
// E[X] = sqrt(f/d) * (1 + 1/eta) and E[1/X] = sqrt(d/f).
GigHalfMoments gig_half_moments(const GigParams& params);

// X ~ GIG(1/2, d, f) via 1/X ~ InverseGaussian(sqrt(d/f), d).
double sample_gig_half(const GigParams& params, RngStream& rng);

inline double sample_inverse_gaussian(double mu, double shape, RngStream& rng) {
  return rng.inverse_gaussian(mu, shape);
}

inline double sample_gamma(double shape, double rate, RngStream& rng) {
  return rng.gamma(shape, rate);
}

}  // namespace mixlasso
