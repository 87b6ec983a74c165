// mixlasso: batch CLI for mixture-process-noise regression.
//
// Subcommands: simulate, fit, optimize, loocv. Every output embeds the
// fully-resolved configuration and master seed, and re-running an emitted
// config reproduces the files byte-for-byte.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mixlasso/advi.hpp"
#include "mixlasso/cavi.hpp"
#include "mixlasso/errors.hpp"
#include "mixlasso/freq_fit.hpp"
#include "mixlasso/gibbs.hpp"
#include "mixlasso/io.hpp"
#include "mixlasso/model.hpp"
#include "mixlasso/response_opt.hpp"
#include "mixlasso/rng.hpp"
#include "mixlasso/select_metrics.hpp"
#include "mixlasso/sim_study.hpp"

namespace {

using nlohmann::json;
using namespace mixlasso;

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Config resolution: defaults < JSON config file < explicit flags.
// ---------------------------------------------------------------------------

class ConfigBag {
 public:
  void set_default(const std::string& key, json value) {
    resolved_[key] = std::move(value);
  }

  // Overlay a config file; unknown keys are a validation error so typos are
  // caught instead of silently ignored.
  void overlay_file(const std::string& path) {
    json file;
    try {
      file = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
      throw IoError("config file " + path + ": " + e.what());
    }
    if (!file.is_object())
      throw ValidationError("config file " + path + " must hold a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (!resolved_.contains(key))
        throw ValidationError("config file " + path + ": unknown field '" + key +
                              "'");
      resolved_[key] = value;
    }
  }

  void overlay_flag(const CLI::Option* opt, const std::string& key, json value) {
    if (opt->count() > 0) resolved_[key] = std::move(value);
  }

  template <typename T>
  T get(const std::string& key) const {
    try {
      return resolved_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ValidationError("config field '" + key + "': " + e.what());
    }
  }

  const json& resolved() const { return resolved_; }

 private:
  json resolved_ = json::object();
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

StudyMethod parse_method(const std::string& name) {
  if (name == "lasso") return StudyMethod::Lasso;
  if (name == "cavi") return StudyMethod::Cavi;
  if (name == "advi") return StudyMethod::Advi;
  if (name == "gibbs") return StudyMethod::Gibbs;
  throw ValidationError("methods: unknown method '" + name +
                        "' (expected lasso, cavi, advi, gibbs)");
}

SelectionCriterion parse_criterion(const std::string& name) {
  if (name == "ci") return SelectionCriterion::Ci;
  if (name == "sn") return SelectionCriterion::Sn;
  throw ValidationError("criteria: unknown criterion '" + name +
                        "' (expected ci, sn)");
}

ModelFormula resolve_formula(const std::string& value) {
  if (value == "full") return ModelFormula::full();
  if (value == "simulation-study") return ModelFormula::simulation_study();
  if (value == "linear-with-noise") return ModelFormula::linear_with_noise();
  // Otherwise a path to a JSON description.
  return formula_from_json(json::parse(read_text_file(value)));
}

std::string output_dir(const ConfigBag& bag) {
  auto dir = bag.get<std::string>("out");
  if (dir.empty()) dir = ".";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

json metadata_block(const std::string& command, std::uint64_t seed) {
  return json{{"command", command},
              {"version", kVersion},
              {"seed", seed},
              {"open_questions", json::array()}};
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

Hyperparams hyper_from(const ConfigBag& bag) {
  Hyperparams h;
  h.a0 = bag.get<double>("a0");
  h.b0 = bag.get<double>("b0");
  h.c0 = bag.get<double>("c0");
  h.d0 = bag.get<double>("d0");
  h.validate();
  return h;
}

void add_hyper_options(CLI::App* cmd, std::map<std::string, double>& vals,
                       std::map<std::string, CLI::Option*>& opts) {
  for (const char* key : {"a0", "b0", "c0", "d0"}) {
    vals[key] = 0.01;
    opts[key] = cmd->add_option("--" + std::string(key), vals[key],
                                "Gamma hyperparameter " + std::string(key));
  }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

void run_simulate(const ConfigBag& bag) {
  StudyConfig cfg;
  cfg.n_replications = bag.get<int>("reps");
  cfg.n_obs = bag.get<int>("n");
  cfg.noise_sd = bag.get<double>("noise_sd");
  cfg.methods.clear();
  for (const auto& m : split_list(bag.get<std::string>("methods")))
    cfg.methods.push_back(parse_method(m));
  cfg.criteria.clear();
  for (const auto& c : split_list(bag.get<std::string>("criteria")))
    cfg.criteria.push_back(parse_criterion(c));
  cfg.seed = bag.get<std::uint64_t>("seed");
  cfg.threads = bag.get<int>("threads");
  cfg.hyper = hyper_from(bag);
  cfg.gibbs_warmup = bag.get<int>("gibbs_warmup");
  cfg.gibbs_kept = bag.get<int>("gibbs_kept");
  cfg.gibbs_chains = bag.get<int>("gibbs_chains");
  cfg.lasso_cv_folds = bag.get<int>("cv_folds");
  cfg.lasso_grid_points = bag.get<int>("grid_points");

  const auto report = run_study(cfg);

  const auto dir = output_dir(bag);
  write_text_file(dir + "/study_report.csv", study_report_to_csv(report));
  json j = study_report_to_json(report);
  j["metadata"] = metadata_block("simulate", cfg.seed);
  j["config"] = bag.resolved();
  write_json_file(dir + "/study_report.json", j);
  std::cerr << "wrote " << dir << "/study_report.csv and .json\n";
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitInputs {
  FactorSpec spec;
  ModelFormula formula;
  DesignMatrix design;
};

FitInputs load_fit_inputs(const ConfigBag& bag) {
  FitInputs in;
  in.spec = factor_spec_from_json(json::parse(read_text_file(bag.get<std::string>("spec"))));
  in.formula = resolve_formula(bag.get<std::string>("formula"));
  const auto data = read_dataset_csv(bag.get<std::string>("data"), in.spec);
  Dataset mutable_data = data;
  in.design = build_design_matrix(mutable_data, in.spec, in.formula);
  return in;
}

json coefficient_rows(const std::vector<TermLabel>& labels,
                      const Eigen::VectorXd& estimate) {
  json rows = json::array();
  for (std::size_t k = 0; k < labels.size(); ++k)
    rows.push_back({{"term", labels[k].name()},
                    {"estimate", estimate(static_cast<Eigen::Index>(k))}});
  return rows;
}

void attach_selection(json& rows, const PosteriorSummary& summary,
                      const std::vector<SelectionCriterion>& criteria) {
  for (std::size_t k = 0; k < summary.labels.size(); ++k) {
    const auto& c = summary.coefficients[k];
    rows[k]["mean"] = c.mean;
    rows[k]["variance"] = c.variance;
    rows[k]["interval_low"] = c.interval_low;
    rows[k]["interval_high"] = c.interval_high;
    rows[k]["sn_probability"] = c.sn_probability;
  }
  for (const auto crit : criteria) {
    const auto report = crit == SelectionCriterion::Ci ? select_ci(summary)
                                                       : select_sn(summary);
    const std::string key =
        crit == SelectionCriterion::Ci ? "selected_ci" : "selected_sn";
    for (std::size_t k = 0; k < report.included.size(); ++k)
      rows[k][key] = static_cast<bool>(report.included[k]);
  }
}

void run_fit(const ConfigBag& bag) {
  const auto in = load_fit_inputs(bag);
  const auto method = bag.get<std::string>("method");
  const auto seed = bag.get<std::uint64_t>("seed");
  std::vector<SelectionCriterion> criteria;
  for (const auto& c : split_list(bag.get<std::string>("criteria")))
    criteria.push_back(parse_criterion(c));

  json out;
  out["metadata"] = metadata_block("fit", seed);
  out["config"] = bag.resolved();
  out["spec"] = factor_spec_to_json(in.spec);
  out["formula"] = formula_to_json(in.formula);
  out["method"] = method;
  json diagnostics;

  const auto n = in.design.n();
  const auto p = in.design.p();

  if (method == "ols") {
    const auto fit = fit_ols(in.design);
    out["coefficients"] = coefficient_rows(in.design.labels, fit.beta_hat.flat());
    out["sigma2"] = fit.sigma2_hat;
    diagnostics["rss"] = fit.rss;
  } else if (method == "lasso") {
    const auto grid = default_lambda_grid(in.design, bag.get<int>("grid_points"));
    const auto cv = lasso_cv(in.design, grid, bag.get<int>("cv_folds"), seed);
    const auto& fit = cv.fit;
    out["coefficients"] = coefficient_rows(in.design.labels, fit.beta_hat.flat());
    for (std::size_t k = 0; k < in.design.labels.size(); ++k)
      out["coefficients"][k]["selected_lasso"] =
          fit.beta_hat.flat()(static_cast<Eigen::Index>(k)) != 0.0;
    const auto beta = fit.beta_hat.flat();
    const double rss = (in.design.y - in.design.X * beta).squaredNorm();
    const auto active = static_cast<Eigen::Index>(fit.active_set.size());
    out["sigma2"] = rss / static_cast<double>(std::max<Eigen::Index>(1, n - active));
    diagnostics["lambda_star"] = cv.lambda_star;
    diagnostics["cv_error"] = cv.cv_error;
    diagnostics["lambda_grid"] = cv.grid;
    diagnostics["sweeps"] = fit.sweeps;
    // KKT residuals: max violation of |2 x_j'(y - X beta)| <= lambda.
    double worst = 0.0;
    const Eigen::VectorXd resid = in.design.y - in.design.X * beta;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double g = 2.0 * in.design.X.col(j).dot(resid);
      if (beta(j) != 0.0)
        worst = std::max(worst,
                         std::abs(g - (beta(j) > 0.0 ? fit.lambda : -fit.lambda)));
      else
        worst = std::max(worst, std::max(0.0, std::abs(g) - fit.lambda));
    }
    diagnostics["kkt_residual"] = worst;
  } else if (method == "cavi") {
    const auto state = cavi_fit(in.design, hyper_from(bag));
    const auto summary = cavi_posterior_summary(state, in.design.labels);
    out["coefficients"] = coefficient_rows(in.design.labels, state.m_beta);
    attach_selection(out["coefficients"], summary, criteria);
    out["sigma2"] = state.b_sigma / (state.a_sigma - 1.0);
    diagnostics["elbo_trace"] = state.elbo_trace;
    diagnostics["converged"] = state.converged;
    diagnostics["iterations"] = state.iterations;
  } else if (method == "advi") {
    AdviConfig cfg;
    cfg.n_samples = bag.get<int>("advi_samples");
    cfg.max_iter = bag.get<int>("advi_iters");
    cfg.mode = bag.get<std::string>("advi_mode") == "full-rank"
                   ? AdviMode::FullRank
                   : AdviMode::MeanField;
    RngStream rng(seed, 0);
    auto fit_rng = rng.split(1);
    const auto [params, trace] = advi_fit(in.design, hyper_from(bag), cfg, fit_rng);
    auto draw_rng = rng.split(2);
    const auto summary =
        advi_posterior_summary(params, in.design.labels, 4000, draw_rng);
    Eigen::VectorXd means(p);
    for (Eigen::Index j = 0; j < p; ++j) means(j) = summary.coefficients[j].mean;
    out["coefficients"] = coefficient_rows(in.design.labels, means);
    attach_selection(out["coefficients"], summary, criteria);
    // E[sigma^2] of the lognormal factor on the log-variance coordinate.
    const double mu_u = params.mean(p);
    const double sd_u = params.mode == AdviMode::MeanField
                            ? std::exp(params.log_sd(p))
                            : params.chol.row(p).norm();
    out["sigma2"] = std::exp(mu_u + 0.5 * sd_u * sd_u);
    diagnostics["elbo_trace"] = trace.elbo;
    diagnostics["converged"] = trace.converged;
  } else if (method == "gibbs") {
    GibbsConfig cfg;
    cfg.n_chains = bag.get<int>("chains");
    cfg.warmup = bag.get<int>("warmup");
    cfg.kept = bag.get<int>("kept");
    cfg.thinning = bag.get<int>("thinning");
    cfg.seed = seed;
    cfg.hyper = hyper_from(bag);
    const auto samples = gibbs_fit(in.design, cfg);
    const auto rhat = split_rhat(samples);
    const auto summary = gibbs_posterior_summary(samples, true);
    Eigen::VectorXd means(p);
    for (Eigen::Index j = 0; j < p; ++j) means(j) = summary.coefficients[j].mean;
    out["coefficients"] = coefficient_rows(in.design.labels, means);
    attach_selection(out["coefficients"], summary, criteria);
    double sigma2_mean = 0.0;
    const auto pooled = samples.pooled_sigma2();
    for (Eigen::Index i = 0; i < pooled.size(); ++i) sigma2_mean += pooled(i);
    out["sigma2"] = sigma2_mean / static_cast<double>(pooled.size());
    diagnostics["rhat_beta"] = rhat.beta;
    diagnostics["rhat_sigma2"] = rhat.sigma2;
    diagnostics["rhat_lambda"] = rhat.lambda;
    diagnostics["rhat_max_beta"] = rhat.max_beta();
    diagnostics["converged"] = rhat.max_beta() < 1.1;

    const auto dump = bag.get<std::string>("dump_draws");
    if (!dump.empty()) {
      std::ostringstream os;
      os << "chain,draw";
      for (const auto& l : samples.labels) os << "," << l.name();
      os << ",sigma2,lambda\n";
      for (Eigen::Index c = 0; c < samples.n_chains(); ++c) {
        const auto& chain = samples.chains[static_cast<std::size_t>(c)];
        for (Eigen::Index k = 0; k < chain.sigma2.size(); ++k) {
          os << c << "," << k;
          for (Eigen::Index j = 0; j < p; ++j)
            os << "," << format_double(chain.beta(k, j));
          os << "," << format_double(chain.sigma2(k)) << ","
             << format_double(chain.lambda(k)) << "\n";
        }
      }
      write_text_file(dump, os.str());
    }
  } else {
    throw ValidationError("method: unknown method '" + method +
                          "' (expected ols, lasso, cavi, advi, gibbs)");
  }

  out["diagnostics"] = diagnostics;
  const auto dir = output_dir(bag);
  write_json_file(dir + "/coefficients.json", out);
  std::cerr << "wrote " << dir << "/coefficients.json\n";
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

void run_optimize(const ConfigBag& bag) {
  const auto model_path = bag.get<std::string>("model");
  json fit_json;
  try {
    fit_json = json::parse(read_text_file(model_path));
  } catch (const json::exception& e) {
    throw IoError("model file " + model_path + ": " + e.what());
  }

  ResponseSurfaceModel model;
  try {
    model.spec = factor_spec_from_json(fit_json.at("spec"));
    const auto formula = formula_from_json(fit_json.at("formula"));
    const auto labels = make_term_registry(model.spec, formula);
    Eigen::VectorXd values =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(labels.size()));
    std::map<std::string, Eigen::Index> by_name;
    for (std::size_t k = 0; k < labels.size(); ++k)
      by_name[labels[k].name()] = static_cast<Eigen::Index>(k);
    for (const auto& row : fit_json.at("coefficients")) {
      const auto term = row.at("term").get<std::string>();
      const auto it = by_name.find(term);
      if (it == by_name.end())
        throw ValidationError("model file: term '" + term +
                              "' is not in the registry of the embedded spec");
      values(it->second) = row.at("estimate").get<double>();
    }
    model.coefficients = CoefficientBlocks::from_flat(labels, values);
    model.sigma2 = fit_json.at("sigma2").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
  model.noise_cov = Eigen::MatrixXd::Identity(model.spec.n_noise, model.spec.n_noise);

  OptimizerConfig cfg;
  cfg.grid_resolution = bag.get<double>("resolution");
  cfg.polish_iterations = bag.get<int>("polish_iters");
  cfg.auto_targets = bag.get<bool>("auto_targets");
  if (!cfg.auto_targets) {
    cfg.mean_target = {bag.get<double>("mean_lower"), bag.get<double>("mean_upper"),
                       bag.get<double>("mean_exponent")};
    cfg.neg_variance_target = {bag.get<double>("var_lower"),
                               bag.get<double>("var_upper"),
                               bag.get<double>("var_exponent")};
    cfg.mean_target.validate();
    cfg.neg_variance_target.validate();
  }

  const auto result = optimize_desirability(model, cfg);

  json out;
  out["metadata"] = metadata_block("optimize", 0);
  out["config"] = bag.resolved();
  json xj = json::array(), wj = json::array();
  for (Eigen::Index i = 0; i < result.x.size(); ++i) xj.push_back(result.x(i));
  for (Eigen::Index k = 0; k < result.w.size(); ++k) wj.push_back(result.w(k));
  out["optimum"] = {{"x", xj},
                    {"w", wj},
                    {"mean", result.mean},
                    {"sd", result.sd},
                    {"cv", result.cv},
                    {"desirability", result.desirability}};
  out["targets"] = {
      {"mean",
       {{"lower", result.mean_target.lower},
        {"upper", result.mean_target.upper},
        {"exponent", result.mean_target.exponent}}},
      {"neg_variance",
       {{"lower", result.neg_variance_target.lower},
        {"upper", result.neg_variance_target.upper},
        {"exponent", result.neg_variance_target.exponent}}}};
  out["diagnostics"] = {{"grid_points_evaluated", result.grid_points_evaluated},
                        {"flat_desirability", result.flat_desirability}};

  const auto dir = output_dir(bag);
  write_json_file(dir + "/optimum.json", out);
  std::cerr << "wrote " << dir << "/optimum.json\n";
}

// ---------------------------------------------------------------------------
// loocv
// ---------------------------------------------------------------------------

void run_loocv(const ConfigBag& bag) {
  const auto in = load_fit_inputs(bag);
  const auto seed = bag.get<std::uint64_t>("seed");
  const auto methods = split_list(bag.get<std::string>("methods"));
  if (methods.empty()) throw ValidationError("methods: at least one method required");
  const auto hyper = hyper_from(bag);

  json rows = json::array();
  std::ostringstream csv;
  csv << "method,loo_rmse\n";
  for (const auto& method : methods) {
    LooFitter fitter;
    if (method == "ols") {
      fitter = [](const DesignMatrix& train) { return fit_ols(train).beta_hat.flat(); };
    } else if (method == "lasso") {
      // Pick lambda once on the full data, then refit per fold at that value.
      const auto grid = default_lambda_grid(in.design, bag.get<int>("grid_points"));
      const auto cv = lasso_cv(in.design, grid, bag.get<int>("cv_folds"), seed);
      const double lambda = cv.lambda_star;
      fitter = [lambda](const DesignMatrix& train) {
        return fit_lasso(train, lambda).beta_hat.flat();
      };
    } else if (method == "cavi") {
      fitter = [hyper](const DesignMatrix& train) {
        return cavi_fit(train, hyper).m_beta;
      };
    } else if (method == "advi") {
      fitter = [hyper, seed](const DesignMatrix& train) {
        AdviConfig cfg;
        RngStream rng(seed, 1);
        auto fit_rng = rng.split(static_cast<std::uint64_t>(train.n()));
        const auto [params, trace] = advi_fit(train, hyper, cfg, fit_rng);
        return Eigen::VectorXd(params.mean.head(train.p()));
      };
    } else if (method == "gibbs") {
      const int chains = bag.get<int>("chains");
      const int warmup = bag.get<int>("warmup");
      const int kept = bag.get<int>("kept");
      fitter = [hyper, seed, chains, warmup, kept](const DesignMatrix& train) {
        GibbsConfig cfg;
        cfg.n_chains = chains;
        cfg.warmup = warmup;
        cfg.kept = kept;
        cfg.seed = seed;
        cfg.hyper = hyper;
        const auto samples = gibbs_fit(train, cfg);
        const auto summary = gibbs_posterior_summary(samples, true);
        Eigen::VectorXd means(train.p());
        for (Eigen::Index j = 0; j < train.p(); ++j)
          means(j) = summary.coefficients[j].mean;
        return means;
      };
    } else {
      throw ValidationError("methods: unknown method '" + method +
                            "' (expected ols, lasso, cavi, advi, gibbs)");
    }
    const double rmse = loo_cv(fitter, in.design);
    rows.push_back({{"method", method}, {"loo_rmse", rmse}});
    csv << method << "," << format_double(rmse) << "\n";
  }

  json out;
  out["metadata"] = metadata_block("loocv", seed);
  out["config"] = bag.resolved();
  out["results"] = rows;
  const auto dir = output_dir(bag);
  write_json_file(dir + "/loocv.json", out);
  write_text_file(dir + "/loocv.csv", csv.str());
  std::cerr << "wrote " << dir << "/loocv.json and .csv\n";
}

std::string default_out_dir() {
  const char* env = std::getenv("MIXLASSO_OUT_DIR");
  return env ? env : ".";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixture-process-noise regression: fitting, selection, and "
               "response-surface optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // ---- simulate -----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Run the synthetic selection study");
  std::string sim_config;
  sim->add_option("--config", sim_config, "JSON config file (flags override)");
  int sim_reps = 1000, sim_n = 100, sim_threads = 0;
  double sim_noise_sd = 0.5;
  int sim_warmup = 500, sim_kept = 1000, sim_chains = 2, sim_folds = 10,
      sim_grid = 100;
  std::uint64_t sim_seed = 0;
  std::string sim_methods = "lasso,cavi,advi,gibbs", sim_criteria = "ci,sn";
  std::string sim_out = default_out_dir();
  auto* o_reps = sim->add_option("--reps", sim_reps, "replications");
  auto* o_n = sim->add_option("--n", sim_n, "observations per replication");
  auto* o_noise =
      sim->add_option("--noise-sd", sim_noise_sd, "truth noise sd");
  auto* o_methods = sim->add_option("--methods", sim_methods, "comma list");
  auto* o_criteria = sim->add_option("--criteria", sim_criteria, "comma list");
  auto* o_seed = sim->add_option("--seed", sim_seed, "master seed");
  auto* o_threads = sim->add_option("--threads", sim_threads, "0 = all cores");
  auto* o_warm = sim->add_option("--gibbs-warmup", sim_warmup, "");
  auto* o_kept = sim->add_option("--gibbs-kept", sim_kept, "");
  auto* o_chains = sim->add_option("--gibbs-chains", sim_chains, "");
  auto* o_folds = sim->add_option("--cv-folds", sim_folds, "");
  auto* o_grid = sim->add_option("--grid-points", sim_grid, "");
  auto* o_out = sim->add_option("--out", sim_out, "output directory");
  std::map<std::string, double> sim_hyper;
  std::map<std::string, CLI::Option*> sim_hyper_opts;
  add_hyper_options(sim, sim_hyper, sim_hyper_opts);

  // ---- fit ----------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "Fit one model to a dataset CSV");
  std::string fit_config;
  fit->add_option("--config", fit_config, "JSON config file (flags override)");
  std::string fit_data, fit_spec, fit_formula = "full", fit_method = "ols";
  std::string fit_criteria = "", fit_dump, fit_advi_mode = "mean-field";
  std::string fit_out = default_out_dir();
  std::uint64_t fit_seed = 0;
  int fit_folds = 10, fit_grid = 100, fit_chains = 4, fit_warmup = 1000,
      fit_kept = 2000, fit_thin = 1, fit_advi_samples = 10, fit_advi_iters = 10000;
  auto* f_data = fit->add_option("--data", fit_data, "dataset CSV");
  auto* f_spec = fit->add_option("--spec", fit_spec, "factor spec JSON");
  auto* f_formula = fit->add_option(
      "--formula", fit_formula,
      "full | simulation-study | linear-with-noise | path.json");
  auto* f_method =
      fit->add_option("--method", fit_method, "ols|lasso|cavi|advi|gibbs");
  auto* f_criteria = fit->add_option("--criteria", fit_criteria, "ci,sn");
  auto* f_seed = fit->add_option("--seed", fit_seed, "master seed");
  auto* f_folds = fit->add_option("--cv-folds", fit_folds, "");
  auto* f_grid = fit->add_option("--grid-points", fit_grid, "");
  auto* f_chains = fit->add_option("--chains", fit_chains, "");
  auto* f_warmup = fit->add_option("--warmup", fit_warmup, "");
  auto* f_kept = fit->add_option("--kept", fit_kept, "");
  auto* f_thin = fit->add_option("--thinning", fit_thin, "");
  auto* f_advi_s = fit->add_option("--advi-samples", fit_advi_samples, "");
  auto* f_advi_i = fit->add_option("--advi-iters", fit_advi_iters, "");
  auto* f_advi_m =
      fit->add_option("--advi-mode", fit_advi_mode, "mean-field | full-rank");
  auto* f_dump = fit->add_option("--dump-draws", fit_dump,
                                 "CSV path for per-chain posterior draws");
  auto* f_out = fit->add_option("--out", fit_out, "output directory");
  std::map<std::string, double> fit_hyper;
  std::map<std::string, CLI::Option*> fit_hyper_opts;
  add_hyper_options(fit, fit_hyper, fit_hyper_opts);

  // ---- optimize -----------------------------------------------------------
  auto* opt = app.add_subcommand("optimize",
                                 "Optimize desirability over the feasible region");
  std::string opt_config;
  opt->add_option("--config", opt_config, "JSON config file (flags override)");
  std::string opt_model, opt_out = default_out_dir();
  double opt_res = 0.01, opt_mean_lo = 0.0, opt_mean_hi = 1.0, opt_mean_r = 1.0;
  double opt_var_lo = -1.0, opt_var_hi = 0.0, opt_var_r = 1.0;
  int opt_polish = 300;
  bool opt_no_auto = false;
  auto* p_model = opt->add_option("--model", opt_model,
                                  "coefficients.json from the fit command");
  auto* p_res = opt->add_option("--resolution", opt_res, "grid resolution");
  auto* p_polish = opt->add_option("--polish-iters", opt_polish, "");
  auto* p_no_auto =
      opt->add_flag("--no-auto-targets", opt_no_auto, "use explicit targets");
  auto* p_mlo = opt->add_option("--mean-lower", opt_mean_lo, "");
  auto* p_mhi = opt->add_option("--mean-upper", opt_mean_hi, "");
  auto* p_mr = opt->add_option("--mean-exponent", opt_mean_r, "");
  auto* p_vlo = opt->add_option("--var-lower", opt_var_lo,
                                "lower target on the negated variance");
  auto* p_vhi = opt->add_option("--var-upper", opt_var_hi, "");
  auto* p_vr = opt->add_option("--var-exponent", opt_var_r, "");
  auto* p_out = opt->add_option("--out", opt_out, "output directory");

  // ---- loocv --------------------------------------------------------------
  auto* loo = app.add_subcommand("loocv", "Leave-one-out comparison of methods");
  std::string loo_config;
  loo->add_option("--config", loo_config, "JSON config file (flags override)");
  std::string loo_data, loo_spec, loo_formula = "full", loo_methods = "ols";
  std::string loo_out = default_out_dir();
  std::uint64_t loo_seed = 0;
  int loo_folds = 10, loo_grid = 100, loo_chains = 2, loo_warmup = 500,
      loo_kept = 1000;
  auto* l_data = loo->add_option("--data", loo_data, "dataset CSV");
  auto* l_spec = loo->add_option("--spec", loo_spec, "factor spec JSON");
  auto* l_formula = loo->add_option("--formula", loo_formula, "");
  auto* l_methods = loo->add_option("--methods", loo_methods, "comma list");
  auto* l_seed = loo->add_option("--seed", loo_seed, "master seed");
  auto* l_folds = loo->add_option("--cv-folds", loo_folds, "");
  auto* l_grid = loo->add_option("--grid-points", loo_grid, "");
  auto* l_chains = loo->add_option("--chains", loo_chains, "");
  auto* l_warmup = loo->add_option("--warmup", loo_warmup, "");
  auto* l_kept = loo->add_option("--kept", loo_kept, "");
  auto* l_out = loo->add_option("--out", loo_out, "output directory");
  std::map<std::string, double> loo_hyper;
  std::map<std::string, CLI::Option*> loo_hyper_opts;
  add_hyper_options(loo, loo_hyper, loo_hyper_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      ConfigBag bag;
      bag.set_default("reps", sim_reps);
      bag.set_default("n", sim_n);
      bag.set_default("noise_sd", sim_noise_sd);
      bag.set_default("methods", sim_methods);
      bag.set_default("criteria", sim_criteria);
      bag.set_default("seed", sim_seed);
      bag.set_default("threads", sim_threads);
      bag.set_default("gibbs_warmup", sim_warmup);
      bag.set_default("gibbs_kept", sim_kept);
      bag.set_default("gibbs_chains", sim_chains);
      bag.set_default("cv_folds", sim_folds);
      bag.set_default("grid_points", sim_grid);
      bag.set_default("out", sim_out);
      for (const auto& [k, v] : sim_hyper) bag.set_default(k, v);
      if (!sim_config.empty()) bag.overlay_file(sim_config);
      bag.overlay_flag(o_reps, "reps", sim_reps);
      bag.overlay_flag(o_n, "n", sim_n);
      bag.overlay_flag(o_noise, "noise_sd", sim_noise_sd);
      bag.overlay_flag(o_methods, "methods", sim_methods);
      bag.overlay_flag(o_criteria, "criteria", sim_criteria);
      bag.overlay_flag(o_seed, "seed", sim_seed);
      bag.overlay_flag(o_threads, "threads", sim_threads);
      bag.overlay_flag(o_warm, "gibbs_warmup", sim_warmup);
      bag.overlay_flag(o_kept, "gibbs_kept", sim_kept);
      bag.overlay_flag(o_chains, "gibbs_chains", sim_chains);
      bag.overlay_flag(o_folds, "cv_folds", sim_folds);
      bag.overlay_flag(o_grid, "grid_points", sim_grid);
      bag.overlay_flag(o_out, "out", sim_out);
      for (const auto& [k, v] : sim_hyper)
        bag.overlay_flag(sim_hyper_opts[k], k, v);
      run_simulate(bag);
    } else if (fit->parsed()) {
      ConfigBag bag;
      bag.set_default("data", fit_data);
      bag.set_default("spec", fit_spec);
      bag.set_default("formula", fit_formula);
      bag.set_default("method", fit_method);
      bag.set_default("criteria", fit_criteria);
      bag.set_default("seed", fit_seed);
      bag.set_default("cv_folds", fit_folds);
      bag.set_default("grid_points", fit_grid);
      bag.set_default("chains", fit_chains);
      bag.set_default("warmup", fit_warmup);
      bag.set_default("kept", fit_kept);
      bag.set_default("thinning", fit_thin);
      bag.set_default("advi_samples", fit_advi_samples);
      bag.set_default("advi_iters", fit_advi_iters);
      bag.set_default("advi_mode", fit_advi_mode);
      bag.set_default("dump_draws", fit_dump);
      bag.set_default("out", fit_out);
      for (const auto& [k, v] : fit_hyper) bag.set_default(k, v);
      if (!fit_config.empty()) bag.overlay_file(fit_config);
      bag.overlay_flag(f_data, "data", fit_data);
      bag.overlay_flag(f_spec, "spec", fit_spec);
      bag.overlay_flag(f_formula, "formula", fit_formula);
      bag.overlay_flag(f_method, "method", fit_method);
      bag.overlay_flag(f_criteria, "criteria", fit_criteria);
      bag.overlay_flag(f_seed, "seed", fit_seed);
      bag.overlay_flag(f_folds, "cv_folds", fit_folds);
      bag.overlay_flag(f_grid, "grid_points", fit_grid);
      bag.overlay_flag(f_chains, "chains", fit_chains);
      bag.overlay_flag(f_warmup, "warmup", fit_warmup);
      bag.overlay_flag(f_kept, "kept", fit_kept);
      bag.overlay_flag(f_thin, "thinning", fit_thin);
      bag.overlay_flag(f_advi_s, "advi_samples", fit_advi_samples);
      bag.overlay_flag(f_advi_i, "advi_iters", fit_advi_iters);
      bag.overlay_flag(f_advi_m, "advi_mode", fit_advi_mode);
      bag.overlay_flag(f_dump, "dump_draws", fit_dump);
      bag.overlay_flag(f_out, "out", fit_out);
      for (const auto& [k, v] : fit_hyper)
        bag.overlay_flag(fit_hyper_opts[k], k, v);
      if (bag.get<std::string>("data").empty())
        throw ValidationError("data: a dataset CSV is required");
      if (bag.get<std::string>("spec").empty())
        throw ValidationError("spec: a factor spec JSON is required");
      run_fit(bag);
    } else if (opt->parsed()) {
      ConfigBag bag;
      bag.set_default("model", opt_model);
      bag.set_default("resolution", opt_res);
      bag.set_default("polish_iters", opt_polish);
      bag.set_default("auto_targets", true);
      bag.set_default("mean_lower", opt_mean_lo);
      bag.set_default("mean_upper", opt_mean_hi);
      bag.set_default("mean_exponent", opt_mean_r);
      bag.set_default("var_lower", opt_var_lo);
      bag.set_default("var_upper", opt_var_hi);
      bag.set_default("var_exponent", opt_var_r);
      bag.set_default("out", opt_out);
      if (!opt_config.empty()) bag.overlay_file(opt_config);
      bag.overlay_flag(p_model, "model", opt_model);
      bag.overlay_flag(p_res, "resolution", opt_res);
      bag.overlay_flag(p_polish, "polish_iters", opt_polish);
      bag.overlay_flag(p_no_auto, "auto_targets", !opt_no_auto);
      bag.overlay_flag(p_mlo, "mean_lower", opt_mean_lo);
      bag.overlay_flag(p_mhi, "mean_upper", opt_mean_hi);
      bag.overlay_flag(p_mr, "mean_exponent", opt_mean_r);
      bag.overlay_flag(p_vlo, "var_lower", opt_var_lo);
      bag.overlay_flag(p_vhi, "var_upper", opt_var_hi);
      bag.overlay_flag(p_vr, "var_exponent", opt_var_r);
      bag.overlay_flag(p_out, "out", opt_out);
      if (bag.get<std::string>("model").empty())
        throw ValidationError("model: a coefficients.json path is required");
      run_optimize(bag);
    } else if (loo->parsed()) {
      ConfigBag bag;
      bag.set_default("data", loo_data);
      bag.set_default("spec", loo_spec);
      bag.set_default("formula", loo_formula);
      bag.set_default("methods", loo_methods);
      bag.set_default("seed", loo_seed);
      bag.set_default("cv_folds", loo_folds);
      bag.set_default("grid_points", loo_grid);
      bag.set_default("chains", loo_chains);
      bag.set_default("warmup", loo_warmup);
      bag.set_default("kept", loo_kept);
      bag.set_default("out", loo_out);
      for (const auto& [k, v] : loo_hyper) bag.set_default(k, v);
      if (!loo_config.empty()) bag.overlay_file(loo_config);
      bag.overlay_flag(l_data, "data", loo_data);
      bag.overlay_flag(l_spec, "spec", loo_spec);
      bag.overlay_flag(l_formula, "formula", loo_formula);
      bag.overlay_flag(l_methods, "methods", loo_methods);
      bag.overlay_flag(l_seed, "seed", loo_seed);
      bag.overlay_flag(l_folds, "cv_folds", loo_folds);
      bag.overlay_flag(l_grid, "grid_points", loo_grid);
      bag.overlay_flag(l_chains, "chains", loo_chains);
      bag.overlay_flag(l_warmup, "warmup", loo_warmup);
      bag.overlay_flag(l_kept, "kept", loo_kept);
      bag.overlay_flag(l_out, "out", loo_out);
      for (const auto& [k, v] : loo_hyper)
        bag.overlay_flag(loo_hyper_opts[k], k, v);
      if (bag.get<std::string>("data").empty())
        throw ValidationError("data: a dataset CSV is required");
      if (bag.get<std::string>("spec").empty())
        throw ValidationError("spec: a factor spec JSON is required");
      run_loocv(bag);
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
