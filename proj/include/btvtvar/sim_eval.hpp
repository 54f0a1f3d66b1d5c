#pragma once

#include <optional>
#include <vector>

#include "btvtvar/gibbs.hpp"
#include "btvtvar/ising.hpp"
#include "btvtvar/tensor_var.hpp"

namespace btvtvar {

// Study-1-style design: margins from a spike-and-slab (slab standard normal),
// activation paths from NDARMA with (p1,p2) ~ U(0,1)^2, every subset of
// components required to give a stationary VAR.
struct SimDesign {
  int n = 10;
  int t_len = 100;
  int p_true = 3;
  int h_true = 3;
  Vec noise_sd;                 // empty: (1..N)/5
  double inclusion_prob = 0.5;  // probability of a non-zero margin entry
  std::uint64_t seed = 0;

  void finalize();
};

struct SimTruth {
  std::vector<TensorComponent> components;
  std::vector<ActivationPath> paths;
  Vec noise_sd;
};

constexpr int kMaxStationarityRejects = 10000;

std::pair<TimeSeries, SimTruth> generate_study1_dataset(const SimDesign& design, Rng& rng);

// N=40, T=300, H=3, P=3: components {1,2} on t in [P+1,100], {1,3} on
// [101,200], {3} on [201,300]; noise sd_i = sqrt(i/5) for i <= 25 and
// sqrt((51-i)/5) above.
std::pair<TimeSeries, SimTruth> generate_study2_dataset(Rng& rng);

// Coefficient-path error: sqrt( sum_t sum_j ||Ahat - A||_F / ((T-P) N^2 P) ),
// with unsquared Frobenius norms as printed. `rms` variant squares them.
double err_coefficients(const std::vector<CoefMatrixSet>& estimated,
                        const std::vector<CoefMatrixSet>& truth);
double err_coefficients_rms(const std::vector<CoefMatrixSet>& estimated,
                            const std::vector<CoefMatrixSet>& truth);

struct ComponentErr {
  double all = 0.0;      // mean over matched components of the per-component value
  double nonzero = 0.0;  // mean abs error over truly non-zero entries
  double zero = 0.0;     // mean abs error over truly zero entries
  std::vector<double> per_component;
};

// `matching[e]` gives the true index matched to estimate e (or -1).
ComponentErr err_components(const std::vector<CoefMatrixSet>& estimated,
                            const std::vector<CoefMatrixSet>& truth,
                            const std::vector<int>& matching);

// Component h is empty iff max_j ||A*_{j,h}||_max < threshold.
std::vector<int> detect_empty_components(const std::vector<CoefMatrixSet>& estimated,
                                         double threshold);

// Greedy minimum-Frobenius-distance assignment from estimates to truths;
// empty estimates get -1. Optimal brute-force assignment also provided.
std::vector<int> match_components(const std::vector<CoefMatrixSet>& estimated,
                                  const std::vector<CoefMatrixSet>& truth,
                                  const std::vector<int>& empty_estimates);
std::vector<int> match_components_optimal(const std::vector<CoefMatrixSet>& estimated,
                                          const std::vector<CoefMatrixSet>& truth,
                                          const std::vector<int>& empty_estimates);

struct GammaMetrics {
  std::optional<double> accuracy, sensitivity, specificity, precision;
  long tp = 0, tn = 0, fp = 0, fn = 0;
};

// Pooled confusion metrics over matched components; paths are compared on
// their overlapping tail (both are aligned to end at t = T).
GammaMetrics gamma_classification(const std::vector<ActivationPath>& estimated,
                                  const std::vector<ActivationPath>& truth,
                                  const std::vector<int>& matching);

struct EvalReport {
  double err_a = 0.0;
  ComponentErr err_comp;
  GammaMetrics gamma;
  std::vector<int> matching;
  std::vector<int> empty_components;
  double lag_p_frobenius_mean = 0.0;  // mean over t of ||Ahat_{P,t}||_F (top fitted lag)
};

// Full scoring pipeline: pad lag orders, detect empties, match, score.
EvalReport evaluate_fit(const FitResult& fit, const SimTruth& truth, double empty_threshold);

}  // namespace btvtvar
