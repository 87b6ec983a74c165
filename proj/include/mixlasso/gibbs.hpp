#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mixlasso/cavi.hpp"
#include "mixlasso/model.hpp"
#include "mixlasso/rng.hpp"
#include "mixlasso/select_metrics.hpp"

namespace mixlasso {

enum class GibbsInit { Ridge, PriorDraw };

struct GibbsConfig {
  int n_chains = 4;
  int warmup = 1000;
  int kept = 2000;
  int thinning = 1;
  std::uint64_t seed = 0;
  Hyperparams hyper;
  GibbsInit init = GibbsInit::Ridge;

  void validate() const;
};

struct ChainSamples {
  Eigen::MatrixXd beta;    // kept x p
  Eigen::VectorXd sigma2;  // kept
  Eigen::MatrixXd tau;     // kept x p
  Eigen::VectorXd lambda;  // kept
};

struct PosteriorSamples {
  std::vector<TermLabel> labels;
  std::vector<ChainSamples> chains;

  Eigen::Index n_chains() const { return static_cast<Eigen::Index>(chains.size()); }
  Eigen::Index kept() const { return chains.empty() ? 0 : chains[0].sigma2.size(); }
  Eigen::Index p() const { return chains.empty() ? 0 : chains[0].beta.cols(); }

  Eigen::VectorXd pooled_beta(Eigen::Index j) const;
  Eigen::VectorXd pooled_sigma2() const;
  Eigen::VectorXd pooled_lambda() const;
};

// Systematic-scan Gibbs (beta -> sigma^2 -> tau -> lambda) with exact
// conjugate conditionals of the hierarchical lasso; chains run on
// independent split streams of config.seed.
PosteriorSamples gibbs_fit(const DesignMatrix& design, const GibbsConfig& config);

struct GibbsState {
  Eigen::VectorXd beta;
  double sigma2 = 1.0;
  Eigen::VectorXd tau;
  double lambda = 1.0;
};

// One scan of the four conditionals, updating the state in place. The
// driver behind gibbs_fit; exposed for custom schedules and diagnostics.
void gibbs_scan(const DesignMatrix& design, const Hyperparams& hyper,
                GibbsState& state, RngStream& rng);

struct RhatReport {
  std::vector<double> beta;  // per coefficient
  double sigma2 = 0.0;
  double lambda = 0.0;

  double max_beta() const;
};

// Split-R-hat (each chain halved; between/within variance ratio).
double split_rhat(const std::vector<Eigen::VectorXd>& chains);
RhatReport split_rhat(const PosteriorSamples& samples);

// Pooled empirical summary; refuses samples whose beta R-hat exceeds 1.1
// unless force is set.
PosteriorSummary gibbs_posterior_summary(const PosteriorSamples& samples,
                                         bool force = false);

}  // namespace mixlasso
