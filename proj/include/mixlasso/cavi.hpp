#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mixlasso/model.hpp"
#include "mixlasso/select_metrics.hpp"

namespace mixlasso {

// Gamma priors on the noise precision (a0, b0) and on lambda (c0, d0).
struct Hyperparams {
  double a0 = 0.01;
  double b0 = 0.01;
  double c0 = 0.01;
  double d0 = 0.01;

  void validate() const;
};

// Mean-field state: normal-gamma factor on (beta, sigma^-2), one GIG(1/2)
// factor per tau_j, a gamma factor on lambda.
struct CaviState {
  Eigen::VectorXd m_beta;
  Eigen::MatrixXd C_beta;  // beta | sigma^2 ~ N(m_beta, sigma^2 * C_beta)
  double a_sigma = 0.0;
  double b_sigma = 0.0;
  double d_tau = 0.0;       // shared GIG rate on tau
  Eigen::VectorXd f_tau;    // per-coefficient GIG rate on 1/tau
  double a_lambda = 0.0;
  double b_lambda = 0.0;
  Eigen::VectorXd e_tau;      // E[tau_j]
  Eigen::VectorXd e_inv_tau;  // E[1/tau_j]
  std::vector<double> elbo_trace;
  bool converged = false;
  int iterations = 0;
};

// Coordinate updates in the fixed order (beta, sigma^2) -> tau -> lambda
// until the relative ELBO change drops below tol.
CaviState cavi_fit(const DesignMatrix& design, const Hyperparams& hyper,
                   double tol = 1e-8, int max_iter = 1000);

// Exact ELBO of the factorized family at the given state (no Monte Carlo).
double compute_elbo(const CaviState& state, const DesignMatrix& design,
                    const Hyperparams& hyper);

// Per-coefficient marginals are Student-t with 2 * a_sigma degrees of freedom.
PosteriorSummary cavi_posterior_summary(const CaviState& state,
                                        const std::vector<TermLabel>& labels);

}  // namespace mixlasso
