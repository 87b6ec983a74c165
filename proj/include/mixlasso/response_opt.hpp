#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mixlasso/model.hpp"

namespace mixlasso {

// Fitted response surface: coefficients keyed by term label, residual
// variance, and the noise covariance (identity by default, matching
// zero-mean unit-variance noise variables).
struct ResponseSurfaceModel {
  FactorSpec spec;
  CoefficientBlocks coefficients;
  double sigma2 = 0.0;
  Eigen::MatrixXd noise_cov;  // T x T, symmetric PSD

  void validate() const;
};

// Mean of Y at (x, w) with the noise variables at their zero mean; exact
// because the model is linear in z.
double predict_mean(const ResponseSurfaceModel& model, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& w);

// Var(Y) = g(x, w)' Sigma_z g(x, w) + sigma2, where g_t collects every
// coefficient multiplying z_t.
double predict_variance(const ResponseSurfaceModel& model, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& w);

// Per-noise-variable coefficient vector g(x, w); exposed for tests.
Eigen::VectorXd noise_loading(const ResponseSurfaceModel& model,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& w);

struct DesirabilityTarget {
  double lower = 0.0;  // below -> desirability 0
  double upper = 1.0;  // above -> desirability 1
  double exponent = 1.0;

  void validate() const;
};

// Two-sided ramp: 0 below lower, ((v - lower)/(upper - lower))^r between,
// 1 above upper.
double desirability_single(double value, const DesirabilityTarget& target);

// Geometric mean of the mean-desirability (of predicted mean) and the
// variance-desirability (of the negated predicted variance).
double overall_desirability(const ResponseSurfaceModel& model, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& w, const DesirabilityTarget& mean_target,
                            const DesirabilityTarget& neg_variance_target);

struct OptimizerConfig {
  double grid_resolution = 0.01;
  int polish_iterations = 300;
  DesirabilityTarget mean_target;
  DesirabilityTarget neg_variance_target;
  bool auto_targets = true;  // derive targets from grid percentiles (5th/95th)
};

struct OptimizationResult {
  Eigen::VectorXd x;
  Eigen::VectorXd w;
  double mean = 0.0;
  double sd = 0.0;
  double cv = 0.0;  // sd / mean
  double desirability = 0.0;
  DesirabilityTarget mean_target;
  DesirabilityTarget neg_variance_target;
  long grid_points_evaluated = 0;
  bool flat_desirability = false;  // all-zero D across the grid
};

// Dense feasibility grid followed by a Nelder-Mead polish restricted to
// feasible points; the polish never returns less than its grid seed.
OptimizationResult optimize_desirability(const ResponseSurfaceModel& model,
                                         const OptimizerConfig& config);

}  // namespace mixlasso
