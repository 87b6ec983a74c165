#include "mixlasso/distributions.hpp"

#include <cmath>

namespace mixlasso {

GigHalfMoments gig_half_moments(const GigParams& params) {
  if (!(params.d > 0.0)) throw ValidationError("gig_half_moments: d must be positive");
  if (!(params.f > 0.0))
    throw ValidationError("gig_half_moments: f must be positive (E[1/X] diverges at f = 0)");
  const double eta = std::sqrt(params.d * params.f);
  const double ratio = std::sqrt(params.f / params.d);
  return GigHalfMoments{ratio * (1.0 + 1.0 / eta), 1.0 / ratio};
}

double sample_gig_half(const GigParams& params, RngStream& rng) {
  if (!(params.d > 0.0) || !(params.f > 0.0))
    throw ValidationError("sample_gig_half: d and f must be positive");
  const double mu = std::sqrt(params.d / params.f);
  return 1.0 / rng.inverse_gaussian(mu, params.d);
}

}  // namespace mixlasso
