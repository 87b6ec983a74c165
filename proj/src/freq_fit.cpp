#include "mixlasso/freq_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mixlasso/rng.hpp"

namespace mixlasso {

namespace {

double soft_threshold(double value, double threshold) {
  if (value > threshold) return value - threshold;
  if (value < -threshold) return value + threshold;
  return 0.0;
}

double lasso_objective(const DesignMatrix& design, const Eigen::VectorXd& beta,
                       double lambda) {
  return (design.y - design.X * beta).squaredNorm() + lambda * beta.lpNorm<1>();
}

}  // namespace

OlsFit fit_ols(const DesignMatrix& design) {
  const Eigen::Index n = design.n(), p = design.p();
  if (n < p) {
    std::ostringstream os;
    os << "fit_ols: under-determined system (n = " << n << " < p = " << p
       << "); use the lasso or a Bayesian backend";
    throw NumericalError(os.str());
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.X);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::ostringstream os;
    os << "fit_ols: rank-deficient design (rank " << qr.rank() << " < p = " << p
       << "); dependent columns:";
    const auto perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < p; ++k)
      os << " " << design.labels[perm(k)].name();
    throw NumericalError(os.str());
  }
  Eigen::VectorXd beta = qr.solve(design.y);
  const double rss = (design.y - design.X * beta).squaredNorm();
  const double sigma2 = n > p ? rss / static_cast<double>(n - p) : 0.0;
  return OlsFit{CoefficientBlocks{design.labels, std::move(beta)}, sigma2, rss};
}

LassoFit fit_lasso(const DesignMatrix& design, double lambda, double tol, int max_iter,
                   const std::optional<Eigen::VectorXd>& warm_start) {
  if (lambda < 0.0) throw ValidationError("fit_lasso: lambda must be >= 0");
  if (!(tol > 0.0)) throw ValidationError("fit_lasso: tol must be > 0");
  const Eigen::Index p = design.p();
  Eigen::VectorXd beta = warm_start.value_or(Eigen::VectorXd::Zero(p));
  const Eigen::VectorXd col_sq = design.X.colwise().squaredNorm();
  Eigen::VectorXd residual = design.y - design.X * beta;

  double objective = lasso_objective(design, beta, lambda);
  int sweep = 0;
  for (; sweep < max_iter; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq(j) <= 0.0) continue;
      const double old = beta(j);
      const double cj = design.X.col(j).dot(residual) + col_sq(j) * old;
      const double updated = soft_threshold(cj, 0.5 * lambda) / col_sq(j);
      if (updated != old) {
        residual += design.X.col(j) * (old - updated);
        beta(j) = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    const double new_objective = lasso_objective(design, beta, lambda);
    if (new_objective > objective + 1e-8 * (1.0 + std::abs(objective))) {
      std::ostringstream os;
      os << "fit_lasso: objective increased across sweep " << sweep << " (" << objective
         << " -> " << new_objective << ")";
      throw NumericalError(os.str());
    }
    objective = new_objective;
    if (max_change < tol) {
      std::vector<TermLabel> active;
      for (Eigen::Index j = 0; j < p; ++j)
        if (beta(j) != 0.0) active.push_back(design.labels[j]);
      return LassoFit{CoefficientBlocks{design.labels, std::move(beta)}, lambda,
                      std::move(active), objective, sweep + 1};
    }
  }
  std::ostringstream os;
  os << "fit_lasso: no convergence after " << max_iter
     << " sweeps; last objective = " << objective;
  throw NumericalError(os.str());
}

double lasso_lambda_max(const DesignMatrix& design) {
  return 2.0 * (design.X.transpose() * design.y).cwiseAbs().maxCoeff();
}

std::vector<double> default_lambda_grid(const DesignMatrix& design, int n_points) {
  const double lmax = lasso_lambda_max(design);
  std::vector<double> grid(n_points);
  if (lmax <= 0.0) return std::vector<double>{0.0};
  const double log_hi = std::log(lmax), log_lo = std::log(1e-4 * lmax);
  for (int k = 0; k < n_points; ++k)
    grid[k] = std::exp(log_hi + (log_lo - log_hi) * k / std::max(1, n_points - 1));
  return grid;
}

LassoCvResult lasso_cv(const DesignMatrix& design, std::vector<double> grid, int k,
                       std::uint64_t seed) {
  if (k < 2) throw ValidationError("lasso_cv: need at least 2 folds");
  if (grid.empty()) throw ValidationError("lasso_cv: empty lambda grid");
  for (double l : grid)
    if (l < 0.0) throw ValidationError("lasso_cv: grid values must be >= 0");
  const Eigen::Index n = design.n();
  if (n < k) throw ValidationError("lasso_cv: fewer rows than folds");

  // Descending path so warm starts carry between grid points.
  std::sort(grid.begin(), grid.end(), std::greater<>());

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  RngStream rng(seed, 0);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }

  std::vector<double> cv_sse(grid.size(), 0.0);
  for (int fold = 0; fold < k; ++fold) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < n; ++i)
      (static_cast<int>(i % k) == fold ? test : train).push_back(order[i]);
    DesignMatrix sub;
    sub.labels = design.labels;
    sub.X.resize(static_cast<Eigen::Index>(train.size()), design.p());
    sub.y.resize(static_cast<Eigen::Index>(train.size()));
    for (std::size_t r = 0; r < train.size(); ++r) {
      sub.X.row(static_cast<Eigen::Index>(r)) = design.X.row(train[r]);
      sub.y(static_cast<Eigen::Index>(r)) = design.y(train[r]);
    }
    std::optional<Eigen::VectorXd> warm;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const LassoFit fit = fit_lasso(sub, grid[g], 1e-8, 100000, warm);
      warm = fit.beta_hat.values;
      for (Eigen::Index i : test) {
        const double err = design.y(i) - design.X.row(i).dot(fit.beta_hat.values);
        cv_sse[g] += err * err;
      }
    }
  }
  std::vector<double> cv_error(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g)
    cv_error[g] = cv_sse[g] / static_cast<double>(n);

  // Grid is descending, so the first minimum is the largest such lambda.
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (cv_error[g] < cv_error[best]) best = g;
  const double lambda_star = grid[best];
  LassoFit final_fit = fit_lasso(design, lambda_star, 1e-10);
  return LassoCvResult{lambda_star, std::move(final_fit), std::move(grid),
                       std::move(cv_error)};
}

}  // namespace mixlasso
