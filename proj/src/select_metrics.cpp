#include "mixlasso/select_metrics.hpp"

#include <cmath>
#include <sstream>

namespace mixlasso {

std::string backend_name(Backend backend) {
  switch (backend) {
    case Backend::Cavi: return "BL-CAVI";
    case Backend::Advi: return "BL-ADVI";
    case Backend::Gibbs: return "BL-MCMC (Gibbs)";
  }
  return "?";
}

std::string criterion_name(SelectionCriterion criterion) {
  switch (criterion) {
    case SelectionCriterion::Ci: return "CI";
    case SelectionCriterion::Sn: return "SN";
    case SelectionCriterion::LassoNonzero: return "lasso";
  }
  return "?";
}

SelectionReport select_ci(const PosteriorSummary& summary) {
  SelectionReport report{SelectionCriterion::Ci, 0.95, summary.labels, {}};
  report.included.reserve(summary.coefficients.size());
  for (const auto& c : summary.coefficients)
    report.included.push_back(c.interval_low > 0.0 || c.interval_high < 0.0);
  return report;
}

SelectionReport select_sn(const PosteriorSummary& summary, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ValidationError("select_sn: threshold must be in (0, 1)");
  SelectionReport report{SelectionCriterion::Sn, threshold, summary.labels, {}};
  report.included.reserve(summary.coefficients.size());
  for (const auto& c : summary.coefficients)
    report.included.push_back(!(c.sn_probability > threshold));
  return report;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  tn += other.tn;
  return *this;
}

ConfusionCounts confusion(const SelectionReport& selected,
                          const std::vector<bool>& truly_nonzero) {
  if (selected.included.size() != truly_nonzero.size())
    throw ValidationError("confusion: selection and truth masks have different lengths");
  ConfusionCounts counts;
  for (std::size_t j = 0; j < truly_nonzero.size(); ++j) {
    if (truly_nonzero[j])
      (selected.included[j] ? counts.tp : counts.fn)++;
    else
      (selected.included[j] ? counts.fp : counts.tn)++;
  }
  return counts;
}

double bai(const ConfusionCounts& counts) {
  if (counts.tp + counts.fn == 0)
    throw ValidationError("bai: no truly nonzero parameters (TPR undefined)");
  if (counts.tn + counts.fp == 0)
    throw ValidationError("bai: no truly zero parameters (TNR undefined)");
  const double tpr = static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
  const double tnr = static_cast<double>(counts.tn) / static_cast<double>(counts.tn + counts.fp);
  return 0.5 * (tpr + tnr);
}

double loo_cv(const LooFitter& fitter, const DesignMatrix& design) {
  const Eigen::Index n = design.n();
  if (n < 2) throw ValidationError("loo_cv: need at least 2 rows");
  double sse = 0.0;
  DesignMatrix sub;
  sub.labels = design.labels;
  sub.X.resize(n - 1, design.p());
  sub.y.resize(n - 1);
  for (Eigen::Index hold = 0; hold < n; ++hold) {
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == hold) continue;
      sub.X.row(r) = design.X.row(i);
      sub.y(r) = design.y(i);
      ++r;
    }
    Eigen::VectorXd beta;
    try {
      beta = fitter(sub);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "loo_cv: fit failed with row " << hold << " held out: " << e.what();
      throw NumericalError(os.str());
    }
    const double err = design.y(hold) - design.X.row(hold).dot(beta);
    sse += err * err;
  }
  return std::sqrt(sse / static_cast<double>(n));
}

}  // namespace mixlasso
