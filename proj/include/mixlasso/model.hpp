#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mixlasso/errors.hpp"

namespace mixlasso {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// A process variable is either continuous on a closed interval or restricted
// to a finite set of numeric levels.
struct ProcessVariable {
  std::vector<double> levels;  // empty -> continuous on bounds
  Interval bounds;

  bool has_levels() const { return !levels.empty(); }
  double min_value() const;
  double max_value() const;
};

struct FactorSpec {
  int n_mixture = 0;                     // q
  std::vector<Interval> mixture_bounds;  // size q, each within [0,1]
  std::vector<ProcessVariable> process;
  int n_noise = 0;

  int n_process() const { return static_cast<int>(process.size()); }

  // q >= 2, l_i < u_i in [0,1], non-empty simplex slice.
  void validate() const;
};

// Which term groups of the mixture-process-noise expansion are present.
struct ModelFormula {
  bool linear_mixture = true;       // alpha_i
  bool blend = false;               // alpha_ij
  bool mixture_process = false;     // delta_ip
  bool blend_process = false;       // delta_ijp
  bool mixture_noise = false;       // gamma_it
  bool blend_noise = false;         // gamma_ijt
  bool mixture_process_noise = false;  // eta_ipt
  bool blend_process_noise = false;    // eta_ijpt

  static ModelFormula full();
  // alpha, alpha_ij, delta_ip, delta_ijp, eta_ipt, eta_ijpt
  static ModelFormula simulation_study();
  // alpha, delta_ip, gamma_it, eta_ipt (the linear soap-plant form)
  static ModelFormula linear_with_noise();

  void validate(const FactorSpec& spec) const;
};

enum class TermGroup {
  Alpha,
  AlphaBlend,
  DeltaProc,
  DeltaBlendProc,
  GammaNoise,
  GammaBlendNoise,
  EtaProcNoise,
  EtaBlendProcNoise,
};

// One column of the expanded design: a coefficient block tag plus the
// 1-based factor indices that apply to it (j < 0 when no blend pair).
struct TermLabel {
  TermGroup group = TermGroup::Alpha;
  int i = 0;
  int j = -1;
  int p = -1;
  int t = -1;

  std::string name() const;  // "alpha12", "delta121", "eta2311", ...
  bool operator==(const TermLabel&) const = default;
};

// Deterministic term registry for (spec, formula). Blend pairs are ordered
// by gap (j - i) then by i, so q = 3 yields (1,2), (2,3), (1,3); within a
// block the noise index varies slowest and the mixture index fastest.
std::vector<TermLabel> make_term_registry(const FactorSpec& spec,
                                          const ModelFormula& formula);

struct Dataset {
  Eigen::MatrixXd x;  // n x q mixture proportions
  Eigen::MatrixXd w;  // n x P process settings
  Eigen::MatrixXd z;  // n x T noise settings
  Eigen::VectorXd y;  // n responses

  Eigen::Index n_rows() const { return y.size(); }

  // Checks shapes against spec, the sum-to-one constraint (tolerance 1e-9,
  // renormalizing rows within tolerance) and per-component bounds.
  void validate(const FactorSpec& spec);
};

struct DesignMatrix {
  Eigen::MatrixXd X;  // n x p
  std::vector<TermLabel> labels;
  Eigen::VectorXd y;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

// Structured view of a coefficient vector: values aligned with a term
// registry; the flat view is the identity on `values`.
struct CoefficientBlocks {
  std::vector<TermLabel> labels;
  Eigen::VectorXd values;

  double operator[](const TermLabel& label) const;
  Eigen::Index index_of(const TermLabel& label) const;  // -1 if absent

  const Eigen::VectorXd& flat() const { return values; }
  static CoefficientBlocks from_flat(std::vector<TermLabel> labels,
                                     Eigen::VectorXd beta);
};

// Value of one expanded term at a single design point.
double term_value(const TermLabel& label, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& w, const Eigen::VectorXd& z);

DesignMatrix build_design_matrix(const Dataset& dataset, const FactorSpec& spec,
                                 const ModelFormula& formula);

// All violated feasibility constraints at (x, w); empty means feasible.
std::vector<std::string> validate_point(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& w,
                                        const FactorSpec& spec);

inline bool point_feasible(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                           const FactorSpec& spec) {
  return validate_point(x, w, spec).empty();
}

}  // namespace mixlasso
