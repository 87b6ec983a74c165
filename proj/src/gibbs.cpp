#include "mixlasso/gibbs.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "mixlasso/distributions.hpp"
#include "mixlasso/stats.hpp"

namespace mixlasso {

void GibbsConfig::validate() const {
  if (n_chains < 1) throw ValidationError("GibbsConfig: need at least one chain");
  if (warmup < 0) throw ValidationError("GibbsConfig: warmup must be >= 0");
  if (kept < 2) throw ValidationError("GibbsConfig: need at least 2 kept draws per chain");
  if (thinning < 1) throw ValidationError("GibbsConfig: thinning must be >= 1");
  hyper.validate();
}

namespace {

struct GibbsWorkspace {
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  Eigen::Index n, p;
};

void gibbs_scan(const DesignMatrix& design, const GibbsWorkspace& ws,
                const Hyperparams& hyper, Eigen::VectorXd& beta, double& sigma2,
                Eigen::VectorXd& tau, double& lambda, RngStream& rng) {
  const Eigen::Index p = ws.p;

  // beta | . ~ N(A^-1 X'y, sigma2 A^-1), A = X'X + D_tau^-1
  Eigen::MatrixXd a = ws.xtx;
  for (Eigen::Index j = 0; j < p; ++j) a(j, j) += 1.0 / tau(j);
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw NumericalError("gibbs_fit: Cholesky failure in the beta conditional");
  const Eigen::VectorXd mean = llt.solve(ws.xty);
  Eigen::VectorXd noise(p);
  for (Eigen::Index j = 0; j < p; ++j) noise(j) = rng.normal();
  beta = mean + std::sqrt(sigma2) *
                    llt.matrixU().solve(noise);  // U^-1 z has covariance A^-1

  // sigma^-2 | . ~ Ga(a0 + (n+p)/2, b0 + (||y - X beta||^2 + beta' D^-1 beta)/2)
  double quad = (design.y - design.X * beta).squaredNorm();
  for (Eigen::Index j = 0; j < p; ++j) quad += beta(j) * beta(j) / tau(j);
  const double precision = rng.gamma(
      hyper.a0 + 0.5 * static_cast<double>(ws.n + p), hyper.b0 + 0.5 * quad);
  sigma2 = 1.0 / precision;

  // 1/tau_j | . ~ InverseGaussian(sqrt(2 lambda sigma2 / beta_j^2), 2 lambda)
  for (Eigen::Index j = 0; j < p; ++j) {
    const double bj2 = std::max(beta(j) * beta(j), 1e-300);
    const double mu = std::sqrt(2.0 * lambda * sigma2 / bj2);
    tau(j) = 1.0 / rng.inverse_gaussian(mu, 2.0 * lambda);
  }

  // lambda | . ~ Ga(c0 + p, d0 + sum tau_j)
  lambda = rng.gamma(hyper.c0 + static_cast<double>(p), hyper.d0 + tau.sum());
}

ChainSamples run_chain(const DesignMatrix& design, const GibbsWorkspace& ws,
                       const GibbsConfig& config, RngStream rng) {
  const Eigen::Index p = ws.p;
  Eigen::VectorXd beta(p), tau(p);
  double sigma2, lambda;
  if (config.init == GibbsInit::Ridge && ws.n > 0) {
    Eigen::MatrixXd a = ws.xtx;
    a.diagonal().array() += 1.0;
    beta = a.llt().solve(ws.xty);
    const double rss = (design.y - design.X * beta).squaredNorm();
    sigma2 = std::max(rss / std::max<double>(1.0, static_cast<double>(ws.n)), 1e-6);
    tau.setOnes();
    lambda = 1.0;
  } else {
    const auto& h = config.hyper;
    sigma2 = 1.0 / rng.gamma(h.a0, h.b0);
    lambda = rng.gamma(h.c0, h.d0);
    for (Eigen::Index j = 0; j < p; ++j) tau(j) = rng.exponential(lambda);
    for (Eigen::Index j = 0; j < p; ++j)
      beta(j) = rng.normal(0.0, std::sqrt(sigma2 * tau(j)));
  }

  ChainSamples out;
  out.beta.resize(config.kept, p);
  out.sigma2.resize(config.kept);
  out.tau.resize(config.kept, p);
  out.lambda.resize(config.kept);
  for (int it = 0; it < config.warmup; ++it)
    gibbs_scan(design, ws, config.hyper, beta, sigma2, tau, lambda, rng);
  for (int k = 0; k < config.kept; ++k) {
    for (int t = 0; t < config.thinning; ++t)
      gibbs_scan(design, ws, config.hyper, beta, sigma2, tau, lambda, rng);
    out.beta.row(k) = beta;
    out.sigma2(k) = sigma2;
    out.tau.row(k) = tau;
    out.lambda(k) = lambda;
  }
  return out;
}

}  // namespace

void gibbs_scan(const DesignMatrix& design, const Hyperparams& hyper,
                GibbsState& state, RngStream& rng) {
  GibbsWorkspace ws;
  ws.n = design.n();
  ws.p = design.p();
  ws.xtx = design.X.transpose() * design.X;
  ws.xty = design.X.transpose() * design.y;
  if (state.beta.size() != ws.p || state.tau.size() != ws.p)
    throw ValidationError("gibbs_scan: state dimension mismatch");
  gibbs_scan(design, ws, hyper, state.beta, state.sigma2, state.tau, state.lambda,
             rng);
}

PosteriorSamples gibbs_fit(const DesignMatrix& design, const GibbsConfig& config) {
  config.validate();
  if (design.p() < 1) throw ValidationError("gibbs_fit: need at least one column");
  GibbsWorkspace ws;
  ws.n = design.n();
  ws.p = design.p();
  ws.xtx = design.X.transpose() * design.X;
  ws.xty = design.X.transpose() * design.y;

  RngStream root(config.seed, 0);
  PosteriorSamples samples;
  samples.labels = design.labels;
  samples.chains.resize(config.n_chains);
  std::vector<std::future<ChainSamples>> futures;
  futures.reserve(config.n_chains);
  for (int c = 0; c < config.n_chains; ++c)
    futures.push_back(std::async(std::launch::async, run_chain, std::cref(design),
                                 std::cref(ws), std::cref(config),
                                 root.split(static_cast<std::uint64_t>(c) + 1)));
  for (int c = 0; c < config.n_chains; ++c) samples.chains[c] = futures[c].get();
  return samples;
}

Eigen::VectorXd PosteriorSamples::pooled_beta(Eigen::Index j) const {
  Eigen::VectorXd pooled(n_chains() * kept());
  Eigen::Index at = 0;
  for (const auto& c : chains) {
    pooled.segment(at, c.beta.rows()) = c.beta.col(j);
    at += c.beta.rows();
  }
  return pooled;
}

Eigen::VectorXd PosteriorSamples::pooled_sigma2() const {
  Eigen::VectorXd pooled(n_chains() * kept());
  Eigen::Index at = 0;
  for (const auto& c : chains) {
    pooled.segment(at, c.sigma2.size()) = c.sigma2;
    at += c.sigma2.size();
  }
  return pooled;
}

Eigen::VectorXd PosteriorSamples::pooled_lambda() const {
  Eigen::VectorXd pooled(n_chains() * kept());
  Eigen::Index at = 0;
  for (const auto& c : chains) {
    pooled.segment(at, c.lambda.size()) = c.lambda;
    at += c.lambda.size();
  }
  return pooled;
}

double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.size() < 2) throw ValidationError("split_rhat: need at least 2 chains");
  std::vector<Eigen::VectorXd> halves;
  for (const auto& chain : chains) {
    const Eigen::Index len = chain.size() / 2;
    if (len < 2) throw ValidationError("split_rhat: need at least 4 draws per chain");
    halves.push_back(chain.head(len));
    halves.push_back(chain.segment(len, len));
  }
  const auto m = static_cast<double>(halves.size());
  const auto len = static_cast<double>(halves[0].size());
  double grand = 0.0;
  std::vector<double> means, vars;
  for (const auto& h : halves) {
    means.push_back(mean(h));
    vars.push_back(variance(h));
    grand += means.back();
  }
  grand /= m;
  double b = 0.0, w = 0.0;
  for (std::size_t k = 0; k < halves.size(); ++k) {
    b += (means[k] - grand) * (means[k] - grand);
    w += vars[k];
  }
  b *= len / (m - 1.0);
  w /= m;
  if (w <= 0.0) return std::numeric_limits<double>::infinity();  // degenerate chain
  const double var_plus = (len - 1.0) / len * w + b / len;
  return std::sqrt(var_plus / w);
}

RhatReport split_rhat(const PosteriorSamples& samples) {
  RhatReport report;
  const Eigen::Index p = samples.p();
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<Eigen::VectorXd> per_chain;
    for (const auto& c : samples.chains) per_chain.push_back(c.beta.col(j));
    report.beta.push_back(split_rhat(per_chain));
  }
  std::vector<Eigen::VectorXd> s2, lam;
  for (const auto& c : samples.chains) {
    s2.push_back(c.sigma2);
    lam.push_back(c.lambda);
  }
  report.sigma2 = split_rhat(s2);
  report.lambda = split_rhat(lam);
  return report;
}

double RhatReport::max_beta() const {
  double worst = 0.0;
  for (double r : beta) worst = std::max(worst, r);
  return worst;
}

PosteriorSummary gibbs_posterior_summary(const PosteriorSamples& samples, bool force) {
  if (!force) {
    const RhatReport report = split_rhat(samples);
    if (report.max_beta() >= 1.1) {
      std::ostringstream os;
      os << "gibbs_posterior_summary: split R-hat " << report.max_beta()
         << " >= 1.1; pass force to summarize anyway";
      throw NumericalError(os.str());
    }
  }
  const Eigen::Index p = samples.p();
  PosteriorSummary summary{Backend::Gibbs, samples.labels, {}};
  summary.coefficients.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::VectorXd pooled = samples.pooled_beta(j);
    auto& c = summary.coefficients[j];
    c.mean = mean(pooled);
    c.variance = variance(pooled);
    std::vector<double> values(pooled.data(), pooled.data() + pooled.size());
    c.interval_low = quantile(values, 0.025);
    c.interval_high = quantile(values, 0.975);
    const double sd = std::sqrt(c.variance);
    Eigen::Index inside = 0;
    for (Eigen::Index k = 0; k < pooled.size(); ++k)
      if (std::abs(pooled(k)) <= sd) ++inside;
    c.sn_probability = static_cast<double>(inside) / static_cast<double>(pooled.size());
  }
  return summary;
}

}  // namespace mixlasso
