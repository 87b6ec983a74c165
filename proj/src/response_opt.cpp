#include "mixlasso/response_opt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "mixlasso/stats.hpp"

namespace mixlasso {

void ResponseSurfaceModel::validate() const {
  spec.validate();
  if (coefficients.labels.size() != static_cast<std::size_t>(coefficients.values.size()))
    throw ValidationError("ResponseSurfaceModel: coefficient label/value mismatch");
  if (sigma2 < 0.0) throw ValidationError("ResponseSurfaceModel: sigma2 must be >= 0");
  if (spec.n_noise > 0) {
    if (noise_cov.rows() != spec.n_noise || noise_cov.cols() != spec.n_noise)
      throw ValidationError("ResponseSurfaceModel: noise covariance shape mismatch");
    if (!noise_cov.isApprox(noise_cov.transpose(), 1e-10))
      throw ValidationError("ResponseSurfaceModel: noise covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(noise_cov, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw ValidationError("ResponseSurfaceModel: noise covariance not PSD");
  }
}

namespace {

void require_feasible(const ResponseSurfaceModel& model, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& w) {
  const auto violations = validate_point(x, w, model.spec);
  if (!violations.empty())
    throw ValidationError("infeasible point: " + violations.front());
}

bool label_has_noise(const TermLabel& label) { return label.t > 0; }

double deterministic_part(const TermLabel& label, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& w) {
  double v = x(label.i - 1);
  if (label.j > 0) v *= x(label.j - 1);
  if (label.p > 0) v *= w(label.p - 1);
  return v;
}

}  // namespace

double predict_mean(const ResponseSurfaceModel& model, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& w) {
  require_feasible(model, x, w);
  double sum = 0.0;
  for (std::size_t k = 0; k < model.coefficients.labels.size(); ++k) {
    const auto& label = model.coefficients.labels[k];
    if (label_has_noise(label)) continue;  // E[z] = 0
    sum += model.coefficients.values(static_cast<Eigen::Index>(k)) *
           deterministic_part(label, x, w);
  }
  return sum;
}

Eigen::VectorXd noise_loading(const ResponseSurfaceModel& model,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(model.spec.n_noise);
  for (std::size_t k = 0; k < model.coefficients.labels.size(); ++k) {
    const auto& label = model.coefficients.labels[k];
    if (!label_has_noise(label)) continue;
    g(label.t - 1) += model.coefficients.values(static_cast<Eigen::Index>(k)) *
                      deterministic_part(label, x, w);
  }
  return g;
}

double predict_variance(const ResponseSurfaceModel& model, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& w) {
  require_feasible(model, x, w);
  double var = model.sigma2;
  if (model.spec.n_noise > 0) {
    const Eigen::VectorXd g = noise_loading(model, x, w);
    var += g.dot(model.noise_cov * g);
  }
  return var;
}

void DesirabilityTarget::validate() const {
  if (!(lower < upper))
    throw ValidationError("DesirabilityTarget: lower must be below upper");
  if (!(exponent > 0.0))
    throw ValidationError("DesirabilityTarget: exponent must be positive");
}

double desirability_single(double value, const DesirabilityTarget& target) {
  target.validate();
  if (value <= target.lower) return 0.0;
  if (value >= target.upper) return 1.0;
  return std::pow((value - target.lower) / (target.upper - target.lower),
                  target.exponent);
}

double overall_desirability(const ResponseSurfaceModel& model, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& w,
                            const DesirabilityTarget& mean_target,
                            const DesirabilityTarget& neg_variance_target) {
  const double d1 = desirability_single(predict_mean(model, x, w), mean_target);
  const double d2 =
      desirability_single(-predict_variance(model, x, w), neg_variance_target);
  return std::sqrt(d1 * d2);
}

namespace {

struct GridPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd w;
};

// Dense enumeration of the bounded simplex slice times the process box.
void enumerate_grid(const FactorSpec& spec, double resolution,
                    const std::function<void(const GridPoint&)>& visit) {
  const int q = spec.n_mixture;
  const int np = spec.n_process();
  GridPoint point;
  point.x.resize(q);
  point.w.resize(np);

  std::function<void(int)> loop_process = [&](int k) {
    if (k == np) {
      visit(point);
      return;
    }
    const double lo = spec.process[k].min_value();
    const double hi = spec.process[k].max_value();
    const int steps = std::max(1, static_cast<int>(std::round((hi - lo) / resolution)));
    for (int s = 0; s <= steps; ++s) {
      point.w(k) = lo + (hi - lo) * s / steps;
      loop_process(k + 1);
    }
  };

  std::function<void(int, double)> loop_mixture = [&](int i, double used) {
    if (i == q - 1) {
      const double last = 1.0 - used;
      const auto& b = spec.mixture_bounds[q - 1];
      if (last < b.lo - 1e-12 || last > b.hi + 1e-12) return;
      point.x(q - 1) = last;
      loop_process(0);
      return;
    }
    const auto& b = spec.mixture_bounds[i];
    const int steps =
        std::max(1, static_cast<int>(std::round((b.hi - b.lo) / resolution)));
    for (int s = 0; s <= steps; ++s) {
      const double v = b.lo + (b.hi - b.lo) * s / steps;
      if (used + v > 1.0 + 1e-12) break;
      point.x(i) = v;
      loop_mixture(i + 1, used + v);
    }
  };
  loop_mixture(0, 0.0);
}

// Nelder-Mead on (x_1..x_{q-1}, w) with infeasible points rejected; the best
// vertex can only improve, so the polish never falls below its seed.
class SimplexPolish {
 public:
  SimplexPolish(const ResponseSurfaceModel& model, const DesirabilityTarget& mt,
                const DesirabilityTarget& vt)
      : model_(model), mean_target_(mt), var_target_(vt) {}

  double objective(const Eigen::VectorXd& free) const {
    const int q = model_.spec.n_mixture;
    const int np = model_.spec.n_process();
    Eigen::VectorXd x(q), w(np);
    x.head(q - 1) = free.head(q - 1);
    x(q - 1) = 1.0 - free.head(q - 1).sum();
    w = free.tail(np);
    if (!point_feasible(x, w, model_.spec))
      return -std::numeric_limits<double>::infinity();
    return overall_desirability(model_, x, w, mean_target_, var_target_);
  }

  Eigen::VectorXd run(const Eigen::VectorXd& start, double step, int max_iter) const {
    const Eigen::Index d = start.size();
    std::vector<Eigen::VectorXd> verts(d + 1, start);
    std::vector<double> vals(d + 1);
    for (Eigen::Index i = 0; i < d; ++i) {
      verts[i + 1](i) += step;
      if (!std::isfinite(objective(verts[i + 1]))) verts[i + 1](i) -= 2.0 * step;
      if (!std::isfinite(objective(verts[i + 1]))) verts[i + 1](i) += step;  // degenerate
    }
    for (Eigen::Index i = 0; i <= d; ++i) vals[i] = objective(verts[i]);

    for (int it = 0; it < max_iter; ++it) {
      std::vector<std::size_t> order(verts.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
      const std::size_t best = order.front(), worst = order.back();
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
      for (std::size_t k = 0; k + 1 < order.size(); ++k) centroid += verts[order[k]];
      centroid /= static_cast<double>(d);

      const Eigen::VectorXd reflected = centroid + (centroid - verts[worst]);
      const double fr = objective(reflected);
      if (fr > vals[best]) {
        const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - verts[worst]);
        const double fe = objective(expanded);
        if (fe > fr) {
          verts[worst] = expanded;
          vals[worst] = fe;
        } else {
          verts[worst] = reflected;
          vals[worst] = fr;
        }
      } else if (fr > vals[order[order.size() - 2]]) {
        verts[worst] = reflected;
        vals[worst] = fr;
      } else {
        const Eigen::VectorXd contracted = centroid + 0.5 * (verts[worst] - centroid);
        const double fc = objective(contracted);
        if (fc > vals[worst]) {
          verts[worst] = contracted;
          vals[worst] = fc;
        } else {
          for (std::size_t k = 1; k < order.size(); ++k) {
            verts[order[k]] = verts[best] + 0.5 * (verts[order[k]] - verts[best]);
            vals[order[k]] = objective(verts[order[k]]);
          }
        }
      }
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < vals.size(); ++k)
      if (vals[k] > vals[best]) best = k;
    return verts[best];
  }

 private:
  const ResponseSurfaceModel& model_;
  DesirabilityTarget mean_target_;
  DesirabilityTarget var_target_;
};

}  // namespace

OptimizationResult optimize_desirability(const ResponseSurfaceModel& model,
                                         const OptimizerConfig& config) {
  model.validate();
  DesirabilityTarget mean_target = config.mean_target;
  DesirabilityTarget var_target = config.neg_variance_target;

  if (config.auto_targets) {
    std::vector<double> means, neg_vars;
    enumerate_grid(model.spec, config.grid_resolution, [&](const GridPoint& pt) {
      if (!point_feasible(pt.x, pt.w, model.spec)) return;
      means.push_back(predict_mean(model, pt.x, pt.w));
      neg_vars.push_back(-predict_variance(model, pt.x, pt.w));
    });
    if (means.empty())
      throw ValidationError("optimize_desirability: empty feasible region");
    mean_target.lower = quantile(means, 0.05);
    mean_target.upper = quantile(means, 0.95);
    var_target.lower = quantile(neg_vars, 0.05);
    var_target.upper = quantile(neg_vars, 0.95);
    mean_target.exponent = var_target.exponent = 1.0;
    if (!(mean_target.lower < mean_target.upper))
      mean_target.upper = mean_target.lower + 1e-9;
    if (!(var_target.lower < var_target.upper))
      var_target.upper = var_target.lower + 1e-9;
  }

  OptimizationResult result;
  result.mean_target = mean_target;
  result.neg_variance_target = var_target;
  double best = -1.0;
  bool any_feasible = false;
  enumerate_grid(model.spec, config.grid_resolution, [&](const GridPoint& pt) {
    if (!point_feasible(pt.x, pt.w, model.spec)) return;
    ++result.grid_points_evaluated;
    any_feasible = true;
    const double d = overall_desirability(model, pt.x, pt.w, mean_target, var_target);
    if (d > best) {
      best = d;
      result.x = pt.x;
      result.w = pt.w;
    }
  });
  if (!any_feasible)
    throw ValidationError("optimize_desirability: empty feasible region");
  result.flat_desirability = best <= 0.0;

  const int q = model.spec.n_mixture;
  const int np = model.spec.n_process();
  SimplexPolish polish(model, mean_target, var_target);
  Eigen::VectorXd free(q - 1 + np);
  free.head(q - 1) = result.x.head(q - 1);
  free.tail(np) = result.w;
  const Eigen::VectorXd polished =
      polish.run(free, 0.5 * config.grid_resolution, config.polish_iterations);
  const double polished_value = polish.objective(polished);
  if (polished_value >= best) {
    result.x.head(q - 1) = polished.head(q - 1);
    result.x(q - 1) = 1.0 - polished.head(q - 1).sum();
    result.w = polished.tail(np);
    best = polished_value;
  }

  result.desirability = std::max(0.0, best);
  result.mean = predict_mean(model, result.x, result.w);
  result.sd = std::sqrt(predict_variance(model, result.x, result.w));
  result.cv = result.mean != 0.0 ? result.sd / result.mean
                                 : std::numeric_limits<double>::infinity();
  return result;
}

}  // namespace mixlasso
