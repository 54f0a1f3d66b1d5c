#pragma once

#include <cmath>

// Scalar log densities used by the priors, the Gibbs conditionals, and the
// joint-density evaluation. All fully normalized.

namespace btvtvar {

inline double log_normal_pdf(double x, double var) {
  return -0.5 * std::log(2.0 * M_PI * var) - x * x / (2.0 * var);
}

// Gamma(shape, rate)
inline double log_gamma_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

// InvGamma(shape, scale)
inline double log_inv_gamma_pdf(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

inline double log_beta_pdf(double x, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

inline double log_exponential_pdf(double x, double rate) { return std::log(rate) - rate * x; }

// Student t with nu degrees of freedom and squared scale s2.
inline double log_student_t_pdf(double x, double nu, double s2) {
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * M_PI * s2) -
         0.5 * (nu + 1.0) * std::log1p(x * x / (nu * s2));
}

// Unnormalized giG: log of x^{p-1} exp(-(ax + b/x)/2).
inline double log_gig_unnorm(double x, double p, double a, double b) {
  return (p - 1.0) * std::log(x) - 0.5 * (a * x + b / x);
}

// Normalized giG with order 1/2, where K_{1/2} has a closed form:
// the normalizer is sqrt(2 pi / a) exp(-sqrt(ab)).
inline double log_gig_half_pdf(double x, double a, double b) {
  return log_gig_unnorm(x, 0.5, a, b) - 0.5 * std::log(2.0 * M_PI / a) + std::sqrt(a * b);
}

}  // namespace btvtvar
