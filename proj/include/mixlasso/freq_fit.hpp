#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "mixlasso/model.hpp"

namespace mixlasso {

struct OlsFit {
  CoefficientBlocks beta_hat;
  double sigma2_hat;  // RSS / (n - p)
  double rss;
};

// Normal-equation least squares; errors on rank deficiency (naming the
// dependent columns) and on n < p.
OlsFit fit_ols(const DesignMatrix& design);

struct LassoFit {
  CoefficientBlocks beta_hat;
  double lambda;
  std::vector<TermLabel> active_set;  // labels with exactly nonzero coefficients
  double objective;                   // RSS + lambda * ||beta||_1
  int sweeps;
};

// Cyclic coordinate descent on RSS + lambda * ||beta||_1 (soft threshold at
// lambda / 2 per coordinate). Stops when the max absolute coefficient change
// in a sweep drops below tol.
LassoFit fit_lasso(const DesignMatrix& design, double lambda, double tol = 1e-10,
                   int max_iter = 100000,
                   const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

// Smallest lambda at which the all-zero vector is optimal: 2 * max_j |x_j' y|.
double lasso_lambda_max(const DesignMatrix& design);

// Log-spaced path from lambda_max down to 1e-4 * lambda_max.
std::vector<double> default_lambda_grid(const DesignMatrix& design, int n_points = 100);

struct LassoCvResult {
  double lambda_star;
  LassoFit fit;  // refit on the full data at lambda_star
  std::vector<double> grid;
  std::vector<double> cv_error;  // mean held-out squared error per grid point
};

// k-fold cross-validation over the grid; ties broken toward larger lambda.
LassoCvResult lasso_cv(const DesignMatrix& design, std::vector<double> grid, int k,
                       std::uint64_t seed);

}  // namespace mixlasso
