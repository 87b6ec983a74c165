#include "mixlasso/advi.hpp"

#include <cmath>
#include <sstream>

#include "mixlasso/stats.hpp"

namespace mixlasso {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Eigen::VectorXd draw_standard_normal(Eigen::Index dim, RngStream& rng) {
  Eigen::VectorXd eps(dim);
  for (Eigen::Index i = 0; i < dim; ++i) eps(i) = rng.normal();
  return eps;
}

Eigen::VectorXd to_zeta(const GaussianVarParams& params, const Eigen::VectorXd& eps) {
  if (params.mode == AdviMode::MeanField)
    return params.mean + params.log_sd.array().exp().matrix().cwiseProduct(eps);
  return params.mean + params.chol * eps;
}

double log_q(const GaussianVarParams& params, const Eigen::VectorXd& eps) {
  const auto dim = static_cast<double>(params.dim());
  double log_det;
  if (params.mode == AdviMode::MeanField)
    log_det = params.log_sd.sum();
  else
    log_det = params.chol.diagonal().array().log().sum();
  return -0.5 * dim * kLog2Pi - log_det - 0.5 * eps.squaredNorm();
}

}  // namespace

double transformed_log_joint(const DesignMatrix& design, const Hyperparams& hyper,
                             const Eigen::VectorXd& zeta) {
  const Eigen::Index p = design.p();
  const auto n = static_cast<double>(design.n());
  const auto pd = static_cast<double>(p);
  if (zeta.size() != 2 * p + 2)
    throw ValidationError("transformed_log_joint: zeta must have dimension 2p + 2");
  const Eigen::VectorXd beta = zeta.head(p);
  const double u = zeta(p);
  const Eigen::VectorXd v = zeta.segment(p + 1, p);
  const double w = zeta(2 * p + 1);
  const double phi = std::exp(-u);
  const double lambda = std::exp(w);

  const double rss = (design.y - design.X * beta).squaredNorm();
  const double scaled_b2 = (beta.array().square() * (-v.array()).exp()).sum();
  double lp = -0.5 * n * (kLog2Pi + u) - 0.5 * phi * rss;
  lp += -0.5 * pd * kLog2Pi - 0.5 * pd * u - 0.5 * v.sum() - 0.5 * phi * scaled_b2;
  lp += pd * w - lambda * v.array().exp().sum();
  lp += hyper.a0 * std::log(hyper.b0) - std::lgamma(hyper.a0) - (hyper.a0 + 1.0) * u -
        hyper.b0 * phi;
  lp += hyper.c0 * std::log(hyper.d0) - std::lgamma(hyper.c0) + (hyper.c0 - 1.0) * w -
        hyper.d0 * lambda;
  lp += u + v.sum() + w;  // log |J| of the inverse log transforms
  return lp;
}

Eigen::VectorXd transformed_log_joint_grad(const DesignMatrix& design,
                                           const Hyperparams& hyper,
                                           const Eigen::VectorXd& zeta) {
  const Eigen::Index p = design.p();
  const auto n = static_cast<double>(design.n());
  const auto pd = static_cast<double>(p);
  const Eigen::VectorXd beta = zeta.head(p);
  const double u = zeta(p);
  const Eigen::VectorXd v = zeta.segment(p + 1, p);
  const double w = zeta(2 * p + 1);
  const double phi = std::exp(-u);
  const double lambda = std::exp(w);
  const Eigen::ArrayXd inv_tau = (-v.array()).exp();
  const Eigen::ArrayXd tau = v.array().exp();

  const Eigen::VectorXd resid = design.y - design.X * beta;
  const double rss = resid.squaredNorm();
  const double scaled_b2 = (beta.array().square() * inv_tau).sum();

  Eigen::VectorXd grad(2 * p + 2);
  grad.head(p) = phi * (design.X.transpose() * resid) -
                 phi * (beta.array() * inv_tau).matrix();
  grad(p) = -0.5 * n + 0.5 * phi * rss - 0.5 * pd + 0.5 * phi * scaled_b2 -
            (hyper.a0 + 1.0) + hyper.b0 * phi + 1.0;
  grad.segment(p + 1, p) =
      (0.5 * phi * beta.array().square() * inv_tau - lambda * tau + 0.5).matrix();
  grad(2 * p + 1) = pd + hyper.c0 - lambda * (tau.sum() + hyper.d0);
  return grad;
}

std::pair<GaussianVarParams, AdviTrace> advi_fit(const DesignMatrix& design,
                                                 const Hyperparams& hyper,
                                                 const AdviConfig& config,
                                                 RngStream& rng) {
  hyper.validate();
  if (config.n_samples < 1) throw ValidationError("advi_fit: n_samples must be >= 1");
  if (!(config.base_rate > 0.0))
    throw ValidationError("advi_fit: base_rate must be > 0");
  if (!(config.tol > 0.0)) throw ValidationError("advi_fit: tol must be > 0");
  if (config.max_iter < 1) throw ValidationError("advi_fit: max_iter must be >= 1");
  if (config.window < 1) throw ValidationError("advi_fit: window must be >= 1");
  const Eigen::Index p = design.p();
  const Eigen::Index dim = 2 * p + 2;

  GaussianVarParams params;
  params.mode = config.mode;
  params.mean = Eigen::VectorXd::Zero(dim);
  {
    Eigen::MatrixXd a = design.X.transpose() * design.X;
    a.diagonal().array() += 1.0;
    const Eigen::VectorXd ridge = a.llt().solve(design.X.transpose() * design.y);
    params.mean.head(p) = ridge;
    const double rss = (design.y - design.X * ridge).squaredNorm();
    params.mean(p) =
        std::log(std::max(rss / std::max(1.0, static_cast<double>(design.n())), 1e-3));
  }
  params.log_sd = Eigen::VectorXd::Constant(dim, -1.0);
  if (config.mode == AdviMode::FullRank)
    params.chol = std::exp(-1.0) * Eigen::MatrixXd::Identity(dim, dim);

  // Unconstrained view of the scale parameters (log diagonal for full rank).
  const Eigen::Index n_scale =
      config.mode == AdviMode::MeanField ? dim : dim * (dim + 1) / 2;
  Eigen::VectorXd accum_mean = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd accum_scale = Eigen::VectorXd::Zero(n_scale);
  bool accum_init = false;

  AdviTrace trace;
  double prev_window_mean = 0.0;
  bool have_prev_window = false;
  std::vector<Eigen::VectorXd> eps_draws(config.n_samples);

  for (int it = 0; it < config.max_iter; ++it) {
    Eigen::VectorXd grad_mean = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd grad_scale = Eigen::VectorXd::Zero(n_scale);
    double elbo_sum = 0.0;
    for (int s = 0; s < config.n_samples; ++s) {
      eps_draws[s] = draw_standard_normal(dim, rng);
      const Eigen::VectorXd zeta = to_zeta(params, eps_draws[s]);
      const Eigen::VectorXd g = transformed_log_joint_grad(design, hyper, zeta);
      for (Eigen::Index i = 0; i < dim; ++i)
        if (!std::isfinite(g(i))) {
          std::ostringstream os;
          os << "advi_fit: non-finite gradient at iteration " << it << ", coordinate "
             << i;
          throw NumericalError(os.str());
        }
      grad_mean += g;
      if (config.mode == AdviMode::MeanField) {
        grad_scale += (g.array() * params.log_sd.array().exp() * eps_draws[s].array())
                          .matrix();
      } else {
        Eigen::Index at = 0;
        for (Eigen::Index col = 0; col < dim; ++col)
          for (Eigen::Index row = col; row < dim; ++row) {
            double gval = g(row) * eps_draws[s](col);
            if (row == col) gval *= params.chol(row, col);  // log-diagonal chain rule
            grad_scale(at++) += gval;
          }
      }
      elbo_sum += transformed_log_joint(design, hyper, zeta) - log_q(params, eps_draws[s]);
    }
    grad_mean /= config.n_samples;
    grad_scale /= config.n_samples;
    // Entropy gradient: +1 per unconstrained log-scale coordinate.
    if (config.mode == AdviMode::MeanField) {
      grad_scale.array() += 1.0;
    } else {
      Eigen::Index at = 0;
      for (Eigen::Index col = 0; col < dim; ++col)
        for (Eigen::Index row = col; row < dim; ++row, ++at)
          if (row == col) grad_scale(at) += 1.0;
    }

    if (!accum_init) {
      accum_mean = grad_mean.array().square();
      accum_scale = grad_scale.array().square();
      accum_init = true;
    } else {
      accum_mean = 0.1 * grad_mean.array().square() + 0.9 * accum_mean.array();
      accum_scale = 0.1 * grad_scale.array().square() + 0.9 * accum_scale.array();
    }
    const double decay = std::pow(static_cast<double>(it + 1), -0.5 + 1e-16);
    double step_total = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double rho =
          config.base_rate * decay / (1.0 + std::sqrt(accum_mean(i)));
      params.mean(i) += rho * grad_mean(i);
      step_total += rho;
    }
    if (config.mode == AdviMode::MeanField) {
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double rho =
            config.base_rate * decay / (1.0 + std::sqrt(accum_scale(i)));
        params.log_sd(i) += rho * grad_scale(i);
      }
    } else {
      Eigen::Index at = 0;
      for (Eigen::Index col = 0; col < dim; ++col)
        for (Eigen::Index row = col; row < dim; ++row, ++at) {
          const double rho =
              config.base_rate * decay / (1.0 + std::sqrt(accum_scale(at)));
          if (row == col)
            params.chol(row, col) =
                std::exp(std::log(params.chol(row, col)) + rho * grad_scale(at));
          else
            params.chol(row, col) += rho * grad_scale(at);
        }
    }

    trace.elbo.push_back(elbo_sum / config.n_samples);
    trace.step_size.push_back(step_total / static_cast<double>(dim));

    if (static_cast<int>(trace.elbo.size()) % config.window == 0) {
      double window_mean = 0.0;
      for (int k = 0; k < config.window; ++k)
        window_mean += trace.elbo[trace.elbo.size() - 1 - k];
      window_mean /= config.window;
      if (have_prev_window &&
          std::abs(window_mean - prev_window_mean) <
              config.tol * (1.0 + std::abs(window_mean))) {
        trace.converged = true;
        break;
      }
      prev_window_mean = window_mean;
      have_prev_window = true;
    }
  }
  return {std::move(params), std::move(trace)};
}

ElboEstimate elbo_estimate(const GaussianVarParams& params, const DesignMatrix& design,
                           const Hyperparams& hyper, int n_samples, RngStream& rng) {
  if (n_samples < 1) throw ValidationError("elbo_estimate: n_samples must be >= 1");
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const Eigen::VectorXd eps = draw_standard_normal(params.dim(), rng);
    const Eigen::VectorXd zeta = to_zeta(params, eps);
    const double value = transformed_log_joint(design, hyper, zeta) - log_q(params, eps);
    sum += value;
    sum_sq += value * value;
  }
  const double m = sum / n_samples;
  const double var = n_samples > 1 ? (sum_sq - n_samples * m * m) / (n_samples - 1) : 0.0;
  return ElboEstimate{m, std::sqrt(std::max(0.0, var) / n_samples)};
}

PosteriorSummary advi_posterior_summary(const GaussianVarParams& params,
                                        const std::vector<TermLabel>& labels,
                                        int n_draws, RngStream& rng) {
  const Eigen::Index p = (params.dim() - 2) / 2;
  if (static_cast<Eigen::Index>(labels.size()) != p)
    throw ValidationError("advi_posterior_summary: label count mismatch");
  Eigen::MatrixXd draws(n_draws, p);
  for (int k = 0; k < n_draws; ++k)
    draws.row(k) = to_zeta(params, draw_standard_normal(params.dim(), rng)).head(p);
  PosteriorSummary summary{Backend::Advi, labels, {}};
  summary.coefficients.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    auto& c = summary.coefficients[j];
    const Eigen::VectorXd col = draws.col(j);
    c.mean = mean(col);
    c.variance = variance(col);
    std::vector<double> values(col.data(), col.data() + col.size());
    c.interval_low = quantile(values, 0.025);
    c.interval_high = quantile(values, 0.975);
    const double sd = std::sqrt(c.variance);
    Eigen::Index inside = 0;
    for (int k = 0; k < n_draws; ++k)
      if (std::abs(col(k)) <= sd) ++inside;
    c.sn_probability = static_cast<double>(inside) / static_cast<double>(n_draws);
  }
  return summary;
}

}  // namespace mixlasso
