#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mixlasso/cavi.hpp"
#include "mixlasso/model.hpp"
#include "mixlasso/rng.hpp"
#include "mixlasso/select_metrics.hpp"

namespace mixlasso {

enum class AdviMode { MeanField, FullRank };

// Gaussian family over zeta = (beta, ln sigma^2, ln tau_1..p, ln lambda),
// dimension 2p + 2.
struct GaussianVarParams {
  AdviMode mode = AdviMode::MeanField;
  Eigen::VectorXd mean;
  Eigen::VectorXd log_sd;  // mean-field scale (unconstrained logs)
  Eigen::MatrixXd chol;    // full-rank lower factor, positive diagonal

  Eigen::Index dim() const { return mean.size(); }
};

struct AdviConfig {
  int n_samples = 10;  // S
  AdviMode mode = AdviMode::MeanField;
  double base_rate = 0.1;  // eta of the adaptive schedule
  double tol = 1e-4;       // relative change of the windowed ELBO mean
  int window = 10;
  int max_iter = 10000;
};

struct AdviTrace {
  std::vector<double> elbo;       // per-iteration Monte-Carlo estimates
  std::vector<double> step_size;  // per-iteration mean coordinate step
  bool converged = false;
};

// Unconstrained-space log density: ln p(y, T^-1(zeta), X) + ln |J_{T^-1}|.
double transformed_log_joint(const DesignMatrix& design, const Hyperparams& hyper,
                             const Eigen::VectorXd& zeta);
Eigen::VectorXd transformed_log_joint_grad(const DesignMatrix& design,
                                           const Hyperparams& hyper,
                                           const Eigen::VectorXd& zeta);

// Stochastic gradient ascent on the reparametrized Monte-Carlo ELBO with a
// per-coordinate adaptive step (RMSProp-style accumulation, decaying rate).
std::pair<GaussianVarParams, AdviTrace> advi_fit(const DesignMatrix& design,
                                                 const Hyperparams& hyper,
                                                 const AdviConfig& config,
                                                 RngStream& rng);

struct ElboEstimate {
  double value;
  double std_error;
};

ElboEstimate elbo_estimate(const GaussianVarParams& params, const DesignMatrix& design,
                           const Hyperparams& hyper, int n_samples, RngStream& rng);

// Empirical beta-marginal summary from n_draws posterior draws.
PosteriorSummary advi_posterior_summary(const GaussianVarParams& params,
                                        const std::vector<TermLabel>& labels,
                                        int n_draws, RngStream& rng);

}  // namespace mixlasso
