#include "mixlasso/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mixlasso {

namespace {

constexpr double kSimplexTol = 1e-9;

std::vector<std::pair<int, int>> blend_pairs(int q) {
  // Ordered by gap then by first index: q=3 -> (1,2), (2,3), (1,3).
  std::vector<std::pair<int, int>> pairs;
  for (int gap = 1; gap < q; ++gap)
    for (int i = 1; i + gap <= q; ++i) pairs.emplace_back(i, i + gap);
  return pairs;
}

}  // namespace

double ProcessVariable::min_value() const {
  if (has_levels()) return *std::min_element(levels.begin(), levels.end());
  return bounds.lo;
}

double ProcessVariable::max_value() const {
  if (has_levels()) return *std::max_element(levels.begin(), levels.end());
  return bounds.hi;
}

void FactorSpec::validate() const {
  if (n_mixture < 2) throw ValidationError("FactorSpec: need at least 2 mixture components");
  if (static_cast<int>(mixture_bounds.size()) != n_mixture)
    throw ValidationError("FactorSpec: mixture_bounds size must equal n_mixture");
  double lo_sum = 0.0, hi_sum = 0.0;
  for (int i = 0; i < n_mixture; ++i) {
    const auto& b = mixture_bounds[i];
    if (!(b.lo < b.hi) || b.lo < 0.0 || b.hi > 1.0) {
      std::ostringstream os;
      os << "FactorSpec: invalid bounds [" << b.lo << ", " << b.hi
         << "] for mixture component " << (i + 1);
      throw ValidationError(os.str());
    }
    lo_sum += b.lo;
    hi_sum += b.hi;
  }
  if (lo_sum > 1.0 + kSimplexTol || hi_sum < 1.0 - kSimplexTol)
    throw ValidationError("FactorSpec: mixture bounds give an empty simplex slice");
  for (const auto& pv : process) {
    if (pv.has_levels()) {
      if (pv.levels.size() < 2)
        throw ValidationError("FactorSpec: a process level set needs at least 2 levels");
    } else if (!(pv.bounds.lo < pv.bounds.hi)) {
      throw ValidationError("FactorSpec: process interval must have lo < hi");
    }
  }
  if (n_noise < 0) throw ValidationError("FactorSpec: n_noise must be non-negative");
}

ModelFormula ModelFormula::full() {
  ModelFormula f;
  f.blend = f.mixture_process = f.blend_process = true;
  f.mixture_noise = f.blend_noise = true;
  f.mixture_process_noise = f.blend_process_noise = true;
  return f;
}

ModelFormula ModelFormula::simulation_study() {
  ModelFormula f;
  f.blend = f.mixture_process = f.blend_process = true;
  f.mixture_process_noise = f.blend_process_noise = true;
  return f;
}

ModelFormula ModelFormula::linear_with_noise() {
  ModelFormula f;
  f.mixture_process = true;
  f.mixture_noise = true;
  f.mixture_process_noise = true;
  return f;
}

void ModelFormula::validate(const FactorSpec& spec) const {
  if (!linear_mixture)
    throw ValidationError("ModelFormula: the linear mixture group must be enabled");
  const bool needs_process =
      mixture_process || blend_process || mixture_process_noise || blend_process_noise;
  const bool needs_noise =
      mixture_noise || blend_noise || mixture_process_noise || blend_process_noise;
  if (needs_process && spec.n_process() == 0)
    throw ValidationError("ModelFormula: process terms enabled but spec has no process variables");
  if (needs_noise && spec.n_noise == 0)
    throw ValidationError("ModelFormula: noise terms enabled but spec has no noise variables");
}

std::string TermLabel::name() const {
  std::ostringstream os;
  switch (group) {
    case TermGroup::Alpha:
      os << "alpha" << i;
      break;
    case TermGroup::AlphaBlend:
      os << "alpha" << i << j;
      break;
    case TermGroup::DeltaProc:
      os << "delta" << i << p;
      break;
    case TermGroup::DeltaBlendProc:
      os << "delta" << i << j << p;
      break;
    case TermGroup::GammaNoise:
      os << "gamma" << i << t;
      break;
    case TermGroup::GammaBlendNoise:
      os << "gamma" << i << j << t;
      break;
    case TermGroup::EtaProcNoise:
      os << "eta" << i << p << t;
      break;
    case TermGroup::EtaBlendProcNoise:
      os << "eta" << i << j << p << t;
      break;
  }
  return os.str();
}

std::vector<TermLabel> make_term_registry(const FactorSpec& spec,
                                          const ModelFormula& formula) {
  spec.validate();
  formula.validate(spec);
  const int q = spec.n_mixture;
  const int P = spec.n_process();
  const int T = spec.n_noise;
  const auto pairs = blend_pairs(q);
  std::vector<TermLabel> labels;

  if (formula.linear_mixture)
    for (int i = 1; i <= q; ++i) labels.push_back({TermGroup::Alpha, i});
  if (formula.blend)
    for (const auto& [i, j] : pairs) labels.push_back({TermGroup::AlphaBlend, i, j});
  if (formula.mixture_process)
    for (int p = 1; p <= P; ++p)
      for (int i = 1; i <= q; ++i) labels.push_back({TermGroup::DeltaProc, i, -1, p});
  if (formula.blend_process)
    for (int p = 1; p <= P; ++p)
      for (const auto& [i, j] : pairs)
        labels.push_back({TermGroup::DeltaBlendProc, i, j, p});
  if (formula.mixture_noise)
    for (int t = 1; t <= T; ++t)
      for (int i = 1; i <= q; ++i) labels.push_back({TermGroup::GammaNoise, i, -1, -1, t});
  if (formula.blend_noise)
    for (int t = 1; t <= T; ++t)
      for (const auto& [i, j] : pairs)
        labels.push_back({TermGroup::GammaBlendNoise, i, j, -1, t});
  if (formula.mixture_process_noise)
    for (int t = 1; t <= T; ++t)
      for (int p = 1; p <= P; ++p)
        for (int i = 1; i <= q; ++i)
          labels.push_back({TermGroup::EtaProcNoise, i, -1, p, t});
  if (formula.blend_process_noise)
    for (int t = 1; t <= T; ++t)
      for (int p = 1; p <= P; ++p)
        for (const auto& [i, j] : pairs)
          labels.push_back({TermGroup::EtaBlendProcNoise, i, j, p, t});
  return labels;
}

void Dataset::validate(const FactorSpec& spec) {
  spec.validate();
  const Eigen::Index n = y.size();
  if (n < 1) throw ValidationError("Dataset: empty dataset");
  if (x.rows() != n || x.cols() != spec.n_mixture)
    throw ValidationError("Dataset: mixture block shape mismatch");
  if (w.rows() != n && spec.n_process() > 0)
    throw ValidationError("Dataset: process block shape mismatch");
  if (w.cols() != spec.n_process())
    throw ValidationError("Dataset: process block shape mismatch");
  if (z.rows() != n && spec.n_noise > 0)
    throw ValidationError("Dataset: noise block shape mismatch");
  if (z.cols() != spec.n_noise)
    throw ValidationError("Dataset: noise block shape mismatch");
  for (Eigen::Index r = 0; r < n; ++r) {
    const double s = x.row(r).sum();
    if (std::abs(s - 1.0) > kSimplexTol) {
      std::ostringstream os;
      os << "Dataset: row " << r << " mixture proportions sum to " << s
         << " (violates sum-to-one)";
      throw ValidationError(os.str());
    }
    x.row(r) /= s;
    for (int i = 0; i < spec.n_mixture; ++i) {
      const auto& b = spec.mixture_bounds[i];
      const double v = x(r, i);
      if (v < b.lo - kSimplexTol || v > b.hi + kSimplexTol) {
        std::ostringstream os;
        os << "Dataset: row " << r << " component x" << (i + 1) << " = " << v
           << " outside [" << b.lo << ", " << b.hi << "]";
        throw ValidationError(os.str());
      }
    }
    if (!x.row(r).allFinite() ||
        (w.cols() > 0 && !w.row(r).allFinite()) ||
        (z.cols() > 0 && !z.row(r).allFinite()) || !std::isfinite(y(r))) {
      std::ostringstream os;
      os << "Dataset: row " << r << " contains non-finite values";
      throw ValidationError(os.str());
    }
  }
}

double CoefficientBlocks::operator[](const TermLabel& label) const {
  const Eigen::Index k = index_of(label);
  return k < 0 ? 0.0 : values(k);
}

Eigen::Index CoefficientBlocks::index_of(const TermLabel& label) const {
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(labels.size()); ++k)
    if (labels[k] == label) return k;
  return -1;
}

CoefficientBlocks CoefficientBlocks::from_flat(std::vector<TermLabel> labels,
                                               Eigen::VectorXd beta) {
  if (static_cast<Eigen::Index>(labels.size()) != beta.size())
    throw ValidationError("CoefficientBlocks: label/value length mismatch");
  return CoefficientBlocks{std::move(labels), std::move(beta)};
}

double term_value(const TermLabel& label, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& w, const Eigen::VectorXd& z) {
  double v = x(label.i - 1);
  if (label.j > 0) v *= x(label.j - 1);
  if (label.p > 0) v *= w(label.p - 1);
  if (label.t > 0) v *= z(label.t - 1);
  return v;
}

DesignMatrix build_design_matrix(const Dataset& dataset, const FactorSpec& spec,
                                 const ModelFormula& formula) {
  Dataset d = dataset;  // validation renormalizes in-tolerance rows
  d.validate(spec);
  const auto labels = make_term_registry(spec, formula);
  const Eigen::Index n = d.n_rows();
  const Eigen::Index p = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd wr(spec.n_process()), zr(spec.n_noise);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::VectorXd xr = d.x.row(r);
    if (spec.n_process() > 0) wr = d.w.row(r);
    if (spec.n_noise > 0) zr = d.z.row(r);
    for (Eigen::Index k = 0; k < p; ++k) X(r, k) = term_value(labels[k], xr, wr, zr);
  }
  if (!X.allFinite()) throw NumericalError("build_design_matrix: non-finite column values");
  return DesignMatrix{std::move(X), labels, d.y};
}

std::vector<std::string> validate_point(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& w,
                                        const FactorSpec& spec) {
  if (x.size() != spec.n_mixture || w.size() != spec.n_process())
    throw ValidationError("validate_point: dimension mismatch with FactorSpec");
  std::vector<std::string> violations;
  const double s = x.sum();
  if (std::abs(s - 1.0) > kSimplexTol) {
    std::ostringstream os;
    os << "sum-to-one violated: sum(x) = " << s;
    violations.push_back(os.str());
  }
  for (int i = 0; i < spec.n_mixture; ++i) {
    const auto& b = spec.mixture_bounds[i];
    if (x(i) < b.lo - kSimplexTol) {
      std::ostringstream os;
      os << "x" << (i + 1) << " = " << x(i) << " below lower bound " << b.lo;
      violations.push_back(os.str());
    } else if (x(i) > b.hi + kSimplexTol) {
      std::ostringstream os;
      os << "x" << (i + 1) << " = " << x(i) << " above upper bound " << b.hi;
      violations.push_back(os.str());
    }
  }
  for (int k = 0; k < spec.n_process(); ++k) {
    const auto& pv = spec.process[k];
    if (pv.has_levels()) {
      const bool at_level = std::any_of(
          pv.levels.begin(), pv.levels.end(),
          [&](double lv) { return std::abs(lv - w(k)) <= 1e-12; });
      if (!at_level && (w(k) < pv.min_value() - 1e-12 || w(k) > pv.max_value() + 1e-12)) {
        std::ostringstream os;
        os << "w" << (k + 1) << " = " << w(k) << " outside level range ["
           << pv.min_value() << ", " << pv.max_value() << "]";
        violations.push_back(os.str());
      }
    } else if (w(k) < pv.bounds.lo - 1e-12 || w(k) > pv.bounds.hi + 1e-12) {
      std::ostringstream os;
      os << "w" << (k + 1) << " = " << w(k) << " outside [" << pv.bounds.lo
         << ", " << pv.bounds.hi << "]";
      violations.push_back(os.str());
    }
  }
  return violations;
}

}  // namespace mixlasso
