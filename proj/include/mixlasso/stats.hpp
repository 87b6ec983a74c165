#pragma once

#include <Eigen/Dense>
#include <vector>

namespace mixlasso {

double digamma(double x);

// Regularized incomplete beta I_x(a, b).
double incbeta(double a, double b, double x);

double normal_cdf(double z);
double student_t_cdf(double t, double dof);
double student_t_quantile(double prob, double dof);

// Lower regularized incomplete gamma P(a, x); gamma_cdf(x; shape, rate).
double gamma_p(double a, double x);
double gamma_cdf(double x, double shape, double rate);

// Empirical central quantile with linear interpolation between order
// statistics (the (k-1)/(n-1) convention).
double quantile(std::vector<double> values, double prob);

double mean(const Eigen::VectorXd& v);
double variance(const Eigen::VectorXd& v);  // unbiased

}  // namespace mixlasso
