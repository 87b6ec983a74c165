#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "mixlasso/cavi.hpp"
#include "mixlasso/model.hpp"
#include "mixlasso/rng.hpp"
#include "mixlasso/select_metrics.hpp"

namespace mixlasso {

// Ground truth of the synthetic study: alpha = delta = 1, eta = 0, noise
// sd 0.5, three bounded mixture components, one binary process variable,
// two standard-normal noise variables.
struct SimTruth {
  FactorSpec spec;
  ModelFormula formula;
  CoefficientBlocks coefficients;
  double noise_sd = 0.5;

  static SimTruth standard();
  std::vector<bool> nonzero_mask() const;
};

// Rejection sampling on (x1, x2) so that x3 = 1 - x1 - x2 stays in bounds;
// optional debug hooks pin w and z for deterministic checks.
Dataset generate_dataset(const SimTruth& truth, int n, RngStream& rng,
                         bool force_w_one = false, bool zero_noise = false);

enum class StudyMethod { Lasso, Cavi, Advi, Gibbs };

std::string method_name(StudyMethod method);

struct StudyConfig {
  int n_replications = 1000;
  int n_obs = 100;
  std::vector<StudyMethod> methods = {StudyMethod::Lasso, StudyMethod::Cavi,
                                      StudyMethod::Advi, StudyMethod::Gibbs};
  std::vector<SelectionCriterion> criteria = {SelectionCriterion::Ci,
                                              SelectionCriterion::Sn};
  std::uint64_t seed = 0;
  double noise_sd = 0.5;  // truth noise sd; lower values probe the
                          // near-noiseless signal-recovery regime
  int threads = 0;  // 0 -> hardware concurrency
  Hyperparams hyper;
  int gibbs_warmup = 500;
  int gibbs_kept = 1000;
  int gibbs_chains = 2;
  int lasso_cv_folds = 10;
  int lasso_grid_points = 100;

  void validate() const;
};

struct MethodCriterionResult {
  StudyMethod method;
  SelectionCriterion criterion;
  Eigen::VectorXd selection_frequency;  // per term
  ConfusionCounts confusion;            // aggregated over replications
  double bai = 0.0;
  int failures = 0;
};

struct StudyReport {
  std::vector<TermLabel> labels;
  std::vector<bool> truth_mask;
  std::vector<MethodCriterionResult> results;
  std::vector<std::string> failure_log;  // "replication <id>: <what>"
  StudyConfig config;

  const MethodCriterionResult* find(StudyMethod method,
                                    SelectionCriterion criterion) const;
};

// Replications on split streams (stream id = replication index), aggregated
// in index order, so the report is deterministic for a fixed config.
StudyReport run_study(const StudyConfig& config);

}  // namespace mixlasso
