#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "btvtvar/types.hpp"

namespace btvtvar {

// Deterministic RNG handle. All variate algorithms are implemented here
// (not delegated to std:: distributions, whose algorithms are
// implementation-defined), so a (seed, stream) pair pins the entire draw
// sequence. Streams let chains/replicates run concurrently without sharing
// state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // U(0,1), strictly inside (0,1).
  double uniform();
  double uniform(double lo, double hi);
  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via the Marsaglia polar method (second variate discarded).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Gamma(shape, rate) via Marsaglia-Tsang, with the U^{1/a} boost for shape < 1.
  double gamma(double shape, double rate);
  // InvGamma(shape, scale): X with 1/X ~ Gamma(shape, rate=scale).
  double inv_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }
  double beta(double a, double b);
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Generalized inverse Gaussian, density ∝ x^{p-1} exp(-(a x + b/x)/2).
  // Valid for a>0, b>=0 with p>0 when b==0 (Gamma limit), and a==0, p<0
  // (inverse-Gamma limit). Log-concave rejection in t = log x.
  double gig(double p, double a, double b);

  // Symmetric Dirichlet(alpha, ..., alpha) of the given size.
  Vec dirichlet(double alpha, int size);

  // Index draw from unnormalized log-weights (fixed-order inverse CDF).
  int discrete_from_log_weights(const std::vector<double>& logw);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// log(sum(exp(x))) over a small vector, guarded against empty/-inf inputs.
double log_sum_exp(const std::vector<double>& x);

}  // namespace btvtvar
