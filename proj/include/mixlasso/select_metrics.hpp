#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "mixlasso/model.hpp"

namespace mixlasso {

enum class Backend { Cavi, Advi, Gibbs };

std::string backend_name(Backend backend);  // "BL-CAVI", "BL-ADVI", "BL-MCMC (Gibbs)"

struct CoefficientSummary {
  double mean = 0.0;
  double variance = 0.0;
  double interval_low = 0.0;   // 95% central
  double interval_high = 0.0;
  double sn_probability = 0.0;  // P(|beta_j| <= sd(beta_j) | data)
};

struct PosteriorSummary {
  Backend backend = Backend::Cavi;
  std::vector<TermLabel> labels;
  std::vector<CoefficientSummary> coefficients;
};

enum class SelectionCriterion { Ci, Sn, LassoNonzero };

std::string criterion_name(SelectionCriterion criterion);  // "CI", "SN", "lasso"

struct SelectionReport {
  SelectionCriterion criterion = SelectionCriterion::Ci;
  double threshold = 0.0;
  std::vector<TermLabel> labels;
  std::vector<bool> included;
};

// Include iff the 95% interval excludes zero; an endpoint at exactly zero
// counts as containing it.
SelectionReport select_ci(const PosteriorSummary& summary);

// Exclude iff sn_probability strictly exceeds the threshold.
SelectionReport select_sn(const PosteriorSummary& summary, double threshold = 0.5);

struct ConfusionCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  ConfusionCounts& operator+=(const ConfusionCounts& other);
};

ConfusionCounts confusion(const SelectionReport& selected,
                          const std::vector<bool>& truly_nonzero);

// Balanced accuracy: (TPR + TNR) / 2; errors when either class is empty.
double bai(const ConfusionCounts& counts);

// Fits on n-1 rows and returns the coefficient vector used for prediction.
using LooFitter = std::function<Eigen::VectorXd(const DesignMatrix&)>;

// Root-mean-squared leave-one-out prediction error.
double loo_cv(const LooFitter& fitter, const DesignMatrix& design);

}  // namespace mixlasso
