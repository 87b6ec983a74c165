// Acceptance suite: end-to-end checks of the library and CLI, one pass/fail
// line per criterion. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixlasso/advi.hpp"
#include "mixlasso/cavi.hpp"
#include "mixlasso/distributions.hpp"
#include "mixlasso/freq_fit.hpp"
#include "mixlasso/gibbs.hpp"
#include "mixlasso/io.hpp"
#include "mixlasso/response_opt.hpp"
#include "mixlasso/rng.hpp"
#include "mixlasso/select_metrics.hpp"
#include "mixlasso/sim_study.hpp"
#include "mixlasso/stats.hpp"
#include "oracles.hpp"

using namespace mixlasso;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<TermLabel> generic_labels(int p) {
  std::vector<TermLabel> labels;
  for (int i = 1; i <= p; ++i)
    labels.push_back(TermLabel{TermGroup::Alpha, i, -1, -1, -1});
  return labels;
}

DesignMatrix random_instance(int n, int p, double noise_sd, RngStream& rng,
                             int n_signal = 2) {
  DesignMatrix d;
  d.labels = generic_labels(p);
  d.X.resize(n, p);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < p; ++c) d.X(r, c) = rng.normal();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int s = 0; s < std::min(n_signal, p); ++s) beta(s) = (s % 2 ? -1.5 : 2.0);
  d.y = d.X * beta;
  for (int r = 0; r < n; ++r) d.y(r) += noise_sd * rng.normal();
  return d;
}

// Batch-means Monte-Carlo standard error for autocorrelated draws.
double batch_se(const Eigen::VectorXd& draws, int n_batches = 50) {
  const Eigen::Index len = draws.size() / n_batches;
  Eigen::VectorXd means(n_batches);
  for (int b = 0; b < n_batches; ++b) means(b) = draws.segment(b * len, len).mean();
  return std::sqrt(variance(means) / static_cast<double>(n_batches));
}

// --------------------------------------------------------------------------

bool c1_lasso_ols_coincide() {
  RngStream rng(1001, 0);
  for (int trial = 0; trial < 50; ++trial) {
    auto d = random_instance(40 + trial % 20, 3 + trial % 6, 0.4, rng);
    const auto ols = fit_ols(d);
    const auto lasso = fit_lasso(d, 0.0, 1e-12);
    if ((lasso.beta_hat.flat() - ols.beta_hat.flat()).lpNorm<Eigen::Infinity>() >
        1e-6)
      return false;
  }
  return true;
}

bool c2_lasso_kkt() {
  RngStream rng(1002, 0);
  for (int trial = 0; trial < 50; ++trial) {
    auto d = random_instance(50, 4 + trial % 5, 0.5, rng);
    const double lmax = lasso_lambda_max(d);
    for (double frac : {0.9, 0.5, 0.2, 0.05, 0.01}) {
      const double lambda = frac * lmax;
      const auto fit = fit_lasso(d, lambda, 1e-12);
      const auto beta = fit.beta_hat.flat();
      const Eigen::VectorXd resid = d.y - d.X * beta;
      for (Eigen::Index j = 0; j < d.p(); ++j) {
        const double g = 2.0 * d.X.col(j).dot(resid);
        const double viol = beta(j) != 0.0
                                ? std::abs(g - (beta(j) > 0.0 ? lambda : -lambda))
                                : std::max(0.0, std::abs(g) - lambda);
        if (viol > 1e-6) return false;
      }
    }
  }
  return true;
}

bool c3_gig_moments() {
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      const double d = std::pow(10.0, -3.0 + 6.0 * a / 9.0);
      const double f = std::pow(10.0, -3.0 + 6.0 * b / 9.0);
      const double scale = std::sqrt(f / d), eta = std::sqrt(d * f);
      const auto moment = [&](double power) {
        const auto g = [&](double u) {
          const double x = scale * std::exp(u);
          return std::pow(x, power - 0.5) *
                 std::exp(eta - 0.5 * (d * x + f / x)) * x;
        };
        // Tolerance scaled to a rough first pass: the integrals span many
        // orders of magnitude across the (d, f) grid.
        const double rough = oracles::adaptive_simpson(g, -45.0, 45.0, 1.0, 24);
        return oracles::adaptive_simpson(
            g, -45.0, 45.0, 1e-11 * std::max(1.0, std::abs(rough)));
      };
      const double z0 = moment(0.0);
      const auto m = gig_half_moments({0.5, d, f});
      if (std::abs(m.mean - moment(1.0) / z0) / (moment(1.0) / z0) > 1e-6)
        return false;
      if (std::abs(m.inv_mean - moment(-1.0) / z0) / (moment(-1.0) / z0) > 1e-6)
        return false;
    }
  }
  return true;
}

bool c4_cavi_elbo_monotone() {
  const auto truth = SimTruth::standard();
  for (int seed = 0; seed < 100; ++seed) {
    RngStream rng(2000 + seed, 0);
    const auto data = generate_dataset(truth, 100, rng);
    const auto design = build_design_matrix(data, truth.spec, truth.formula);
    const auto state = cavi_fit(design, Hyperparams{});
    for (std::size_t k = 1; k < state.elbo_trace.size(); ++k) {
      const double slack = 1e-8 * std::max(1.0, std::abs(state.elbo_trace[k - 1]));
      if (state.elbo_trace[k] < state.elbo_trace[k - 1] - slack) return false;
    }
  }
  return true;
}

bool c5_backend_agreement() {
  for (int trial = 0; trial < 10; ++trial) {
    RngStream rng(3000 + trial, 0);
    const int p = 1 + trial % 3;
    auto d = random_instance(50, p, 0.4, rng, 1);
    const auto cavi = cavi_fit(d, Hyperparams{});

    GibbsConfig cfg;
    cfg.n_chains = 4;
    cfg.warmup = 1000;
    cfg.kept = 4000;
    cfg.seed = 4000 + trial;
    const auto samples = gibbs_fit(d, cfg);

    AdviConfig advi_cfg;
    advi_cfg.max_iter = 20000;
    RngStream advi_rng(5000 + trial, 0);
    const auto [params, trace] = advi_fit(d, Hyperparams{}, advi_cfg, advi_rng);

    for (int j = 0; j < p; ++j) {
      const auto pooled = samples.pooled_beta(j);
      const double gibbs_mean = mean(pooled);
      const double se = batch_se(pooled);
      if (std::abs(cavi.m_beta(j) - gibbs_mean) > 3.0 * se + 1e-3) return false;
      if (std::abs(params.mean(j) - gibbs_mean) > 0.05) return false;
    }
  }
  return true;
}

bool c6_gibbs_correctness() {
  // (a) successive-conditional simulation: parameter marginals stay at the
  // prior (KS p > 0.01 per parameter).
  const Hyperparams h{3.0, 3.0, 3.0, 3.0};
  const int p = 2, n = 4;
  RngStream data_rng(6001, 1), scan_rng(6001, 2), prior_rng(6001, 3);
  DesignMatrix d;
  d.labels = generic_labels(p);
  d.X.resize(n, p);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < p; ++c) d.X(r, c) = data_rng.normal();
  d.y.resize(n);
  GibbsState state;
  state.beta.resize(p);
  state.tau.resize(p);
  state.sigma2 = 1.0 / prior_rng.gamma(h.a0, h.b0);
  state.lambda = prior_rng.gamma(h.c0, h.d0);
  for (int j = 0; j < p; ++j) state.tau(j) = prior_rng.exponential(state.lambda);
  for (int j = 0; j < p; ++j)
    state.beta(j) = prior_rng.normal(0.0, std::sqrt(state.sigma2 * state.tau(j)));
  std::vector<double> phi, lam, beta, tau;
  const int iters = 60000, thin = 6;
  for (int it = 0; it < iters; ++it) {
    for (int r = 0; r < n; ++r)
      d.y(r) =
          d.X.row(r).dot(state.beta) + std::sqrt(state.sigma2) * data_rng.normal();
    gibbs_scan(d, h, state, scan_rng);
    if (it % thin == thin - 1) {
      phi.push_back(1.0 / state.sigma2);
      lam.push_back(state.lambda);
      beta.push_back(state.beta(0));
      tau.push_back(state.tau(1));
    }
  }
  const auto one_sample_p = [&](const std::vector<double>& v,
                                const std::function<double(double)>& cdf) {
    return oracles::ks_p_value(oracles::ks_statistic(v, cdf),
                               static_cast<double>(v.size()));
  };
  if (one_sample_p(phi, [&](double v) { return gamma_cdf(v, h.a0, h.b0); }) <= 0.01)
    return false;
  if (one_sample_p(lam, [&](double v) { return gamma_cdf(v, h.c0, h.d0); }) <= 0.01)
    return false;
  std::vector<double> beta_ref(beta.size()), tau_ref(tau.size());
  for (std::size_t i = 0; i < beta_ref.size(); ++i) {
    const double s2 = 1.0 / prior_rng.gamma(h.a0, h.b0);
    const double l = prior_rng.gamma(h.c0, h.d0);
    const double t = prior_rng.exponential(l);
    tau_ref[i] = prior_rng.exponential(prior_rng.gamma(h.c0, h.d0));
    beta_ref[i] = prior_rng.normal(0.0, std::sqrt(s2 * t));
  }
  const auto two_sample_p = [&](const std::vector<double>& a,
                                const std::vector<double>& b) {
    return oracles::ks_p_value(oracles::ks_statistic(a, b),
                               oracles::two_sample_ks_effective_n(a.size(), b.size()));
  };
  if (two_sample_p(beta, beta_ref) <= 0.01) return false;
  if (two_sample_p(tau, tau_ref) <= 0.01) return false;

  // (b) p = 1 quadrature oracle: the posterior mean of beta by numeric
  // integration over tau vs the sampler, within 3 batch-mean SE.
  Eigen::VectorXd x(6), y(6);
  x << 1.0, -0.4, 0.8, 0.3, -1.1, 0.6;
  y << 1.9, -0.7, 1.5, 0.8, -2.4, 1.0;
  const Hyperparams h2{2.0, 2.0, 2.0, 2.0};
  const double xx = x.squaredNorm(), xy = x.dot(y), yy = y.squaredNorm();
  const auto log_weight = [&](double tau) {
    const double quad = yy - tau * xy * xy / (1.0 + tau * xx);
    return -0.5 * std::log1p(tau * xx) - 5.0 * std::log(h2.b0 + 0.5 * quad) -
           3.0 * std::log(h2.d0 + tau);
  };
  const auto integrate = [&](const std::function<double(double)>& g) {
    return oracles::adaptive_simpson(
        [&](double u) {
          const double tau = std::exp(u);
          return g(tau) * std::exp(log_weight(tau)) * tau;
        },
        -45.0, 45.0, 1e-13);
  };
  const double ref = integrate([&](double tau) { return xy / (xx + 1.0 / tau); }) /
                     integrate([](double) { return 1.0; });
  DesignMatrix d1;
  d1.labels = generic_labels(1);
  d1.X = x;
  d1.y = y;
  GibbsConfig cfg;
  cfg.n_chains = 2;
  cfg.warmup = 2000;
  cfg.kept = 20000;
  cfg.seed = 6002;
  cfg.hyper = h2;
  const auto samples = gibbs_fit(d1, cfg);
  const auto pooled = samples.pooled_beta(0);
  return std::abs(mean(pooled) - ref) <= 3.0 * batch_se(pooled);
}

bool c7_convergence_protocol() {
  const auto truth = SimTruth::standard();
  RngStream rng(7001, 0);
  const auto data = generate_dataset(truth, 100, rng);
  const auto design = build_design_matrix(data, truth.spec, truth.formula);
  GibbsConfig cfg;
  cfg.n_chains = 4;
  cfg.warmup = 500;
  cfg.kept = 1000;
  cfg.seed = 7002;
  const auto samples = gibbs_fit(design, cfg);
  return split_rhat(samples).max_beta() < 1.1;
}

bool c8_selection_study(std::string& detail) {
  // Leg 1 — reference noisy scale (n = 100, sigma = 0.5): at this
  // signal-to-noise ratio the blend terms are not individually identifiable,
  // so only the ordering of the criteria is required here.
  StudyConfig cfg;
  cfg.n_replications = 200;
  cfg.n_obs = 100;
  cfg.methods = {StudyMethod::Cavi, StudyMethod::Gibbs};
  cfg.criteria = {SelectionCriterion::Ci, SelectionCriterion::Sn};
  cfg.seed = 8001;
  const auto report = run_study(cfg);

  const auto* cavi_sn = report.find(StudyMethod::Cavi, SelectionCriterion::Sn);
  const auto* cavi_ci = report.find(StudyMethod::Cavi, SelectionCriterion::Ci);
  const auto* gibbs_ci = report.find(StudyMethod::Gibbs, SelectionCriterion::Ci);
  if (!cavi_sn || !cavi_ci || !gibbs_ci) return false;

  // Leg 2 — high signal-to-noise regime at the same n: every true term is
  // identifiable and CAVI-SN should reproduce the reference BAI of 0.961
  // and the expected frequency pattern (linear terms retained, third-order
  // noise interactions dropped).
  StudyConfig hi = cfg;
  hi.methods = {StudyMethod::Cavi};
  hi.criteria = {SelectionCriterion::Sn};
  hi.noise_sd = 0.01;
  hi.seed = 8002;
  const auto hi_report = run_study(hi);
  const auto* hi_sn = hi_report.find(StudyMethod::Cavi, SelectionCriterion::Sn);
  if (!hi_sn) return false;

  std::ostringstream os;
  os << "noisy: CAVI-SN " << cavi_sn->bai << ", CAVI-CI " << cavi_ci->bai
     << ", Gibbs-CI " << gibbs_ci->bai << "; low-noise CAVI-SN " << hi_sn->bai;
  detail = os.str();

  if (!(cavi_sn->bai >= cavi_ci->bai)) return false;
  if (!(cavi_sn->bai > gibbs_ci->bai)) return false;
  if (std::abs(hi_sn->bai - 0.961) > 0.05) return false;

  double eta_sum = 0.0;
  int eta_count = 0;
  for (std::size_t k = 0; k < hi_report.labels.size(); ++k) {
    const auto& l = hi_report.labels[k];
    const double freq = hi_sn->selection_frequency(static_cast<Eigen::Index>(k));
    const bool is_eta = l.group == TermGroup::EtaProcNoise ||
                        l.group == TermGroup::EtaBlendProcNoise;
    if (is_eta) {
      eta_sum += freq;
      ++eta_count;
    } else if (l.group == TermGroup::Alpha || l.group == TermGroup::DeltaProc) {
      if (freq <= 0.95) return false;  // every linear main/process term
    }
  }
  return eta_sum / eta_count < 0.2;
}

bool c9_desirability_units() {
  const DesirabilityTarget t{2.0, 6.0, 1.0};
  if (desirability_single(1.0, t) != 0.0) return false;
  if (desirability_single(2.0, t) != 0.0) return false;
  if (desirability_single(4.0, t) != 0.5) return false;  // midpoint, r = 1
  if (desirability_single(6.0, t) != 1.0) return false;
  if (desirability_single(9.0, t) != 1.0) return false;
  // Geometric-mean identities: D(d, d) = d and D(d, 0) = 0.
  ResponseSurfaceModel model;
  model.spec.n_mixture = 2;
  model.spec.mixture_bounds = {{0.0, 1.0}, {0.0, 1.0}};
  model.spec.n_noise = 0;
  const auto labels = make_term_registry(model.spec, ModelFormula{});
  Eigen::VectorXd values(2);
  values << 4.0, 4.0;  // mean = 4 on the simplex
  model.coefficients = CoefficientBlocks::from_flat(labels, values);
  model.sigma2 = 1.0;
  Eigen::VectorXd x(2), w(0);
  x << 0.5, 0.5;
  const DesirabilityTarget vt{-2.0, 0.0, 1.0};  // -variance = -1 -> d = 0.5
  const double d_mean = desirability_single(4.0, t);
  const double d_var = desirability_single(-1.0, vt);
  const double overall = overall_desirability(model, x, w, t, vt);
  if (std::abs(overall - std::sqrt(d_mean * d_var)) > 1e-15) return false;
  const DesirabilityTarget zero_t{5.0, 6.0, 1.0};  // mean 4 -> d = 0
  return overall_desirability(model, x, w, zero_t, vt) == 0.0;
}

bool c10_response_moment_oracle(std::string& detail) {
  bool ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    RngStream rng(9000 + trial, 0);
    ResponseSurfaceModel model;
    model.spec.n_mixture = 3;
    model.spec.mixture_bounds = {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
    model.spec.process = {ProcessVariable{{}, {0.0, 1.0}}};
    model.spec.n_noise = 2;
    const auto labels = make_term_registry(model.spec, ModelFormula::full());
    Eigen::VectorXd values(static_cast<Eigen::Index>(labels.size()));
    for (Eigen::Index k = 0; k < values.size(); ++k) values(k) = rng.normal();
    model.coefficients = CoefficientBlocks::from_flat(labels, values);
    model.sigma2 = 0.1 + rng.uniform();
    model.noise_cov = Eigen::MatrixXd::Identity(2, 2);

    Eigen::VectorXd x(3);
    const double x1 = rng.uniform(0.1, 0.6), x2 = rng.uniform(0.1, 1.0 - x1 - 0.1);
    x << x1, x2, 1.0 - x1 - x2;
    Eigen::VectorXd w(1);
    w << rng.uniform();

    const double mean_hat = predict_mean(model, x, w);
    const double var_hat = predict_variance(model, x, w);

    const int n = 4'000'000;
    double sum = 0.0, sum2 = 0.0;
    Eigen::VectorXd z(2);
    for (int i = 0; i < n; ++i) {
      z << rng.normal(), rng.normal();
      double y = 0.0;
      for (std::size_t k = 0; k < labels.size(); ++k)
        y += values(static_cast<Eigen::Index>(k)) * term_value(labels[k], x, w, z);
      y += std::sqrt(model.sigma2) * rng.normal();
      sum += y;
      sum2 += y * y;
    }
    const double mc_mean = sum / n;
    const double mc_var = sum2 / n - mc_mean * mc_mean;
    const double se_mean = std::sqrt(mc_var / n);
    // Var of the variance estimate ~ (mu4 - var^2)/n; for a near-normal sum
    // mu4 ~ 3 var^2, so SE(var) ~ var * sqrt(2/n).
    const double se_var = mc_var * std::sqrt(2.0 / n);
    std::ostringstream os;
    os << detail << (trial ? " " : "") << "["
       << (mean_hat - mc_mean) / se_mean << ","
       << (var_hat - mc_var) / se_var << "]";
    detail = os.str();
    if (std::abs(mean_hat - mc_mean) > 3.0 * se_mean) ok = false;
    if (std::abs(var_hat - mc_var) > 4.0 * se_var) ok = false;
  }
  return ok;
}

bool c11_loo_harness() {
  // Hand-computed micro-instance.
  DesignMatrix d;
  d.labels = generic_labels(2);
  d.X.resize(5, 2);
  d.X << 1.0, 0.2, 0.8, 1.0, 0.3, 0.5, 1.2, 0.1, 0.4, 0.9;
  d.y.resize(5);
  d.y << 1.1, 2.0, 0.9, 1.3, 1.7;
  const LooFitter ols_fitter = [](const DesignMatrix& train) {
    return fit_ols(train).beta_hat.flat();
  };
  double sse = 0.0;
  for (int hold = 0; hold < 5; ++hold) {
    std::vector<std::vector<double>> a(2, std::vector<double>(2, 0.0));
    std::vector<double> b(2, 0.0);
    for (int r = 0; r < 5; ++r) {
      if (r == hold) continue;
      for (int i = 0; i < 2; ++i) {
        b[i] += d.X(r, i) * d.y(r);
        for (int j = 0; j < 2; ++j) a[i][j] += d.X(r, i) * d.X(r, j);
      }
    }
    const auto beta = oracles::gaussian_solve(a, b);
    const double pred = d.X(hold, 0) * beta[0] + d.X(hold, 1) * beta[1];
    sse += (d.y(hold) - pred) * (d.y(hold) - pred);
  }
  if (std::abs(loo_cv(ols_fitter, d) - std::sqrt(sse / 5.0)) > 1e-10) return false;

  // Noise-free linear data: exact zero.
  RngStream rng(1101, 0);
  DesignMatrix clean;
  clean.labels = generic_labels(3);
  clean.X.resize(12, 3);
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 3; ++c) clean.X(r, c) = rng.normal();
  Eigen::Vector3d beta_true(1.0, -2.0, 0.5);
  clean.y = clean.X * beta_true;
  return loo_cv(ols_fitter, clean) < 1e-8;
}

bool c12_cli_determinism() {
  const std::string cli = MIXLASSO_CLI_PATH;
  const fs::path dir = fs::temp_directory_path() / "mixlasso_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  const auto bytes = [&](const std::string& rel) {
    return read_text_file((dir / rel).string());
  };

  // Inputs shared by the commands.
  const auto truth = SimTruth::standard();
  RngStream rng(1201, 0);
  const auto data = generate_dataset(truth, 80, rng);
  write_text_file((dir / "data.csv").string(), dataset_to_csv(data, truth.spec));
  write_text_file((dir / "spec.json").string(),
                  factor_spec_to_json(truth.spec).dump(2));

  const std::string common = " --data " + (dir / "data.csv").string() + " --spec " +
                             (dir / "spec.json").string() +
                             " --formula simulation-study";

  // simulate
  const std::string sim_args =
      "simulate --reps 3 --n 60 --methods lasso,cavi --criteria ci,sn --seed 5 "
      "--grid-points 30 --out " +
      (dir / "sim").string();
  if (!run(sim_args)) return false;
  const auto sim_csv = bytes("sim/study_report.csv");
  const auto sim_json = bytes("sim/study_report.json");
  // Re-run from the echoed config alone.
  write_text_file((dir / "sim_cfg.json").string(),
                  json::parse(sim_json).at("config").dump(2));
  if (!run("simulate --config " + (dir / "sim_cfg.json").string())) return false;
  if (bytes("sim/study_report.csv") != sim_csv) return false;
  if (bytes("sim/study_report.json") != sim_json) return false;

  // fit for each method family.
  for (const std::string method : {"ols", "lasso", "cavi", "advi", "gibbs"}) {
    const std::string out = (dir / ("fit_" + method)).string();
    const std::string extra = method == "gibbs"
                                  ? " --chains 2 --warmup 100 --kept 200"
                                  : (method == "advi" ? " --advi-iters 1500" : "");
    if (!run("fit" + common + " --method " + method +
             " --criteria ci,sn --seed 9 --grid-points 30" + extra + " --out " +
             out))
      return false;
    const auto first = read_text_file(out + "/coefficients.json");
    write_text_file(out + "/cfg.json", json::parse(first).at("config").dump(2));
    if (!run("fit --config " + out + "/cfg.json")) return false;
    if (read_text_file(out + "/coefficients.json") != first) return false;
  }

  // optimize from the OLS artifact.
  const std::string opt_args = "optimize --model " +
                               (dir / "fit_ols/coefficients.json").string() +
                               " --resolution 0.02 --out " + (dir / "opt").string();
  if (!run(opt_args)) return false;
  const auto opt_json = bytes("opt/optimum.json");
  write_text_file((dir / "opt_cfg.json").string(),
                  json::parse(opt_json).at("config").dump(2));
  if (!run("optimize --config " + (dir / "opt_cfg.json").string())) return false;
  if (bytes("opt/optimum.json") != opt_json) return false;

  // loocv
  const std::string loo_args = "loocv" + common +
                               " --methods ols,lasso --seed 4 --grid-points 30 "
                               "--out " +
                               (dir / "loo").string();
  if (!run(loo_args)) return false;
  const auto loo_json = bytes("loo/loocv.json");
  const auto loo_csv = bytes("loo/loocv.csv");
  write_text_file((dir / "loo_cfg.json").string(),
                  json::parse(loo_json).at("config").dump(2));
  if (!run("loocv --config " + (dir / "loo_cfg.json").string())) return false;
  if (bytes("loo/loocv.json") != loo_json) return false;
  if (bytes("loo/loocv.csv") != loo_csv) return false;

  fs::remove_all(dir);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    std::string name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "lasso at lambda = 0 coincides with OLS",
       [](std::string&) { return c1_lasso_ols_coincide(); }},
      {2, "lasso KKT residuals below 1e-6",
       [](std::string&) { return c2_lasso_kkt(); }},
      {3, "GIG half-order moments match quadrature",
       [](std::string&) { return c3_gig_moments(); }},
      {4, "CAVI ELBO monotone across 100 seeded fits",
       [](std::string&) { return c4_cavi_elbo_monotone(); }},
      {5, "CAVI/ADVI means agree with the Gibbs sampler",
       [](std::string&) { return c5_backend_agreement(); }},
      {6, "Gibbs kernel passes prior-preservation and quadrature checks",
       [](std::string&) { return c6_gibbs_correctness(); }},
      {7, "four-chain split R-hat below 1.1 on study-sized data",
       [](std::string&) { return c7_convergence_protocol(); }},
      {8, "selection study reproduces the expected method ordering",
       [](std::string& detail) { return c8_selection_study(detail); }},
      {9, "desirability ramp and geometric-mean identities exact",
       [](std::string&) { return c9_desirability_units(); }},
      {10, "response moments match Monte-Carlo on 20 random models",
       [](std::string& detail) { return c10_response_moment_oracle(detail); }},
      {11, "LOO harness equals hand-computed refits",
       [](std::string&) { return c11_loo_harness(); }},
      {12, "CLI outputs are byte-identical across re-runs",
       [](std::string&) { return c12_cli_determinism(); }},
  };

  std::vector<int> only;
  for (int a = 1; a < argc; ++a) only.push_back(std::atoi(argv[a]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), c.id) == only.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const auto secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL",
                c.id, c.name.c_str(), secs, detail.empty() ? "" : " — ",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures == 0) std::printf("all 12 criteria passed\n");
  return failures == 0 ? 0 : 1;
}
