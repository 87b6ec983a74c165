#include "mixlasso/sim_study.hpp"

#include <atomic>
#include <future>
#include <optional>
#include <sstream>
#include <thread>

#include "mixlasso/advi.hpp"
#include "mixlasso/freq_fit.hpp"
#include "mixlasso/gibbs.hpp"

namespace mixlasso {

SimTruth SimTruth::standard() {
  SimTruth truth;
  truth.spec.n_mixture = 3;
  truth.spec.mixture_bounds = {{0.2, 0.8}, {0.15, 0.5}, {0.05, 0.3}};
  truth.spec.process = {ProcessVariable{{0.5, 1.0}, {}}};
  truth.spec.n_noise = 2;
  truth.formula = ModelFormula::simulation_study();
  const auto labels = make_term_registry(truth.spec, truth.formula);
  Eigen::VectorXd values(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto g = labels[k].group;
    const bool nonzero = g == TermGroup::Alpha || g == TermGroup::AlphaBlend ||
                         g == TermGroup::DeltaProc || g == TermGroup::DeltaBlendProc;
    values(static_cast<Eigen::Index>(k)) = nonzero ? 1.0 : 0.0;
  }
  truth.coefficients = CoefficientBlocks{labels, values};
  truth.noise_sd = 0.5;
  return truth;
}

std::vector<bool> SimTruth::nonzero_mask() const {
  std::vector<bool> mask;
  mask.reserve(coefficients.labels.size());
  for (Eigen::Index k = 0; k < coefficients.values.size(); ++k)
    mask.push_back(coefficients.values(k) != 0.0);
  return mask;
}

Dataset generate_dataset(const SimTruth& truth, int n, RngStream& rng,
                         bool force_w_one, bool zero_noise) {
  if (n < 1) throw ValidationError("generate_dataset: n must be >= 1");
  Dataset data;
  data.x.resize(n, 3);
  data.w.resize(n, 1);
  data.z.resize(n, 2);
  data.y.resize(n);
  for (int r = 0; r < n; ++r) {
    double x1, x2, x3;
    do {
      x1 = rng.uniform(0.2, 0.8);
      x2 = rng.uniform(0.15, 0.5);
      x3 = 1.0 - x1 - x2;
    } while (x3 < 0.05 || x3 > 0.3);
    data.x(r, 0) = x1;
    data.x(r, 1) = x2;
    data.x(r, 2) = x3;
    data.w(r, 0) = force_w_one ? 1.0 : (rng.bernoulli(0.5) ? 0.5 : 1.0);
    data.z(r, 0) = zero_noise ? 0.0 : rng.normal();
    data.z(r, 1) = zero_noise ? 0.0 : rng.normal();
    double y = 0.0;
    const Eigen::VectorXd xr = data.x.row(r), wr = data.w.row(r), zr = data.z.row(r);
    for (std::size_t k = 0; k < truth.coefficients.labels.size(); ++k)
      y += truth.coefficients.values(static_cast<Eigen::Index>(k)) *
           term_value(truth.coefficients.labels[k], xr, wr, zr);
    if (!zero_noise) y += rng.normal(0.0, truth.noise_sd);
    data.y(r) = y;
  }
  return data;
}

std::string method_name(StudyMethod method) {
  switch (method) {
    case StudyMethod::Lasso: return "LASSO";
    case StudyMethod::Cavi: return "BL-CAVI";
    case StudyMethod::Advi: return "BL-ADVI";
    case StudyMethod::Gibbs: return "BL-MCMC (Gibbs)";
  }
  return "?";
}

void StudyConfig::validate() const {
  if (n_replications < 1)
    throw ValidationError("StudyConfig: n_replications must be >= 1 (field reps)");
  if (n_obs < 1) throw ValidationError("StudyConfig: n_obs must be >= 1 (field n)");
  if (!(noise_sd > 0.0))
    throw ValidationError("StudyConfig: noise_sd must be > 0 (field noise_sd)");
  if (methods.empty()) throw ValidationError("StudyConfig: no methods selected");
  if (criteria.empty()) throw ValidationError("StudyConfig: no criteria selected");
  hyper.validate();
}

namespace {

struct RepOutcome {
  // Keyed in the same order as the report's result slots.
  std::vector<std::vector<bool>> included;
  std::vector<bool> ok;
  std::vector<std::string> errors;
};

struct Slot {
  StudyMethod method;
  SelectionCriterion criterion;
};

std::vector<Slot> make_slots(const StudyConfig& config) {
  std::vector<Slot> slots;
  for (StudyMethod m : config.methods) {
    if (m == StudyMethod::Lasso) {
      slots.push_back({m, SelectionCriterion::LassoNonzero});
      continue;
    }
    for (SelectionCriterion c : config.criteria) slots.push_back({m, c});
  }
  return slots;
}

RepOutcome run_replication(const SimTruth& truth, const StudyConfig& config,
                           const std::vector<Slot>& slots, int rep) {
  RepOutcome outcome;
  outcome.included.resize(slots.size());
  outcome.ok.assign(slots.size(), false);
  outcome.errors.resize(slots.size());

  RngStream rep_stream = RngStream(config.seed, 0).split(static_cast<std::uint64_t>(rep) + 1);
  RngStream data_rng = rep_stream.split(1);
  const Dataset data = generate_dataset(truth, config.n_obs, data_rng);
  const DesignMatrix design = build_design_matrix(data, truth.spec, truth.formula);

  auto run_slot = [&](std::size_t s, auto&& fn) {
    try {
      outcome.included[s] = fn();
      outcome.ok[s] = true;
    } catch (const std::exception& e) {
      outcome.errors[s] = e.what();
    }
  };

  // Shared per-method artifacts so CI and SN reuse one fit.
  std::optional<PosteriorSummary> cavi_summary, advi_summary, gibbs_summary;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const Slot& slot = slots[s];
    switch (slot.method) {
      case StudyMethod::Lasso:
        run_slot(s, [&] {
          const auto cv = lasso_cv(design,
                                   default_lambda_grid(design, config.lasso_grid_points),
                                   config.lasso_cv_folds, rep_stream.split(2).next_u64());
          std::vector<bool> inc;
          for (Eigen::Index j = 0; j < design.p(); ++j)
            inc.push_back(cv.fit.beta_hat.values(j) != 0.0);
          return inc;
        });
        break;
      case StudyMethod::Cavi:
        run_slot(s, [&] {
          if (!cavi_summary) {
            const CaviState state = cavi_fit(design, config.hyper);
            cavi_summary = cavi_posterior_summary(state, design.labels);
          }
          const auto report = slot.criterion == SelectionCriterion::Ci
                                  ? select_ci(*cavi_summary)
                                  : select_sn(*cavi_summary);
          return report.included;
        });
        break;
      case StudyMethod::Advi:
        run_slot(s, [&] {
          if (!advi_summary) {
            RngStream advi_rng = rep_stream.split(3);
            AdviConfig advi_config;
            auto [params, trace] = advi_fit(design, config.hyper, advi_config, advi_rng);
            RngStream draw_rng = rep_stream.split(4);
            advi_summary = advi_posterior_summary(params, design.labels, 4000, draw_rng);
          }
          const auto report = slot.criterion == SelectionCriterion::Ci
                                  ? select_ci(*advi_summary)
                                  : select_sn(*advi_summary);
          return report.included;
        });
        break;
      case StudyMethod::Gibbs:
        run_slot(s, [&] {
          if (!gibbs_summary) {
            GibbsConfig gc;
            gc.n_chains = config.gibbs_chains;
            gc.warmup = config.gibbs_warmup;
            gc.kept = config.gibbs_kept;
            gc.seed = rep_stream.split(5).next_u64();
            gc.hyper = config.hyper;
            const PosteriorSamples samples = gibbs_fit(design, gc);
            gibbs_summary = gibbs_posterior_summary(samples, /*force=*/true);
          }
          const auto report = slot.criterion == SelectionCriterion::Ci
                                  ? select_ci(*gibbs_summary)
                                  : select_sn(*gibbs_summary);
          return report.included;
        });
        break;
    }
  }
  return outcome;
}

}  // namespace

const MethodCriterionResult* StudyReport::find(StudyMethod method,
                                               SelectionCriterion criterion) const {
  for (const auto& r : results)
    if (r.method == method && r.criterion == criterion) return &r;
  return nullptr;
}

StudyReport run_study(const StudyConfig& config) {
  config.validate();
  SimTruth truth = SimTruth::standard();
  truth.noise_sd = config.noise_sd;
  const auto slots = make_slots(config);

  std::vector<RepOutcome> outcomes(config.n_replications);
  const int n_threads =
      config.threads > 0 ? config.threads
                         : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<void>> workers;
  std::atomic<int> next_rep{0};
  for (int t = 0; t < n_threads; ++t)
    workers.push_back(std::async(std::launch::async, [&] {
      for (;;) {
        const int rep = next_rep.fetch_add(1);
        if (rep >= config.n_replications) return;
        outcomes[rep] = run_replication(truth, config, slots, rep);
      }
    }));
  for (auto& w : workers) w.get();

  StudyReport report;
  report.config = config;
  report.labels = truth.coefficients.labels;
  report.truth_mask = truth.nonzero_mask();
  const Eigen::Index p = static_cast<Eigen::Index>(report.labels.size());
  for (std::size_t s = 0; s < slots.size(); ++s) {
    MethodCriterionResult result;
    result.method = slots[s].method;
    result.criterion = slots[s].criterion;
    result.selection_frequency = Eigen::VectorXd::Zero(p);
    int successes = 0;
    for (int rep = 0; rep < config.n_replications; ++rep) {
      const RepOutcome& out = outcomes[rep];
      if (!out.ok[s]) {
        ++result.failures;
        std::ostringstream os;
        os << "replication " << rep << " [" << method_name(slots[s].method) << "/"
           << criterion_name(slots[s].criterion) << "]: " << out.errors[s];
        report.failure_log.push_back(os.str());
        continue;
      }
      ++successes;
      SelectionReport sel{slots[s].criterion, 0.0, report.labels, out.included[s]};
      result.confusion += confusion(sel, report.truth_mask);
      for (Eigen::Index j = 0; j < p; ++j)
        if (out.included[s][static_cast<std::size_t>(j)])
          result.selection_frequency(j) += 1.0;
    }
    if (successes > 0) {
      result.selection_frequency /= static_cast<double>(successes);
      result.bai = bai(result.confusion);
    }
    report.results.push_back(std::move(result));
  }
  return report;
}

}  // namespace mixlasso
