#pragma once

#include <utility>
#include <vector>

#include "btvtvar/rng.hpp"
#include "btvtvar/types.hpp"

namespace btvtvar {

// Model dimensions plus every prior hyperparameter. Defaults are the values
// used in the simulation studies; finalize() fills the H-dependent ones.
struct HyperParams {
  int n = 0;      // observation dimension N
  int t_len = 0;  // series length T
  int p = 0;      // fitted VAR order
  int h = 0;      // fitted tensor rank

  double a_lambda = 3.0;
  double b_lambda = 1.2009369551760027;  // 3^(1/6)
  double a_tau = 1.0;                    // base value; the griddy step resets it to H*alpha
  double b_tau = 0.0;                    // 0 = use the H^4 default
  double beta1 = 1.0;
  double beta2 = 5.0;
  double a_w = 2.0;
  double b_w = 2.0;
  double w_inf = 0.01;
  double a_sigma = 1.0;
  double b_sigma = 1.0;
  double theta_min = -4.0;
  double theta_max = 4.0;
  double kappa_max = 4.0;
  int alpha_grid_size = 10;
  std::vector<double> alpha_grid;  // evenly spaced in [H^-3, H^-0.1]

  void finalize();  // fills b_tau default and alpha_grid from H
};

// Latent state of the global-local shrinkage hierarchy. The double-Pareto
// rate lambda_{m,h} is shared across the N entries of margin m of component h
// (that is what makes the Ga(a_lambda + N, ...) conditional exact).
// z stores the spike assignments in 1..P; the spike applies at lag j iff
// z <= j. The categorical weights are the truncated sticks (the last category
// absorbs the remainder, so the top lag always sits in the spike — the top
// fitted lag is sacrificial by construction).
struct ShrinkageState {
  double tau = 1.0;
  Vec phi;       // H, on the simplex
  Vec lambda1;   // H
  Vec lambda2;   // H
  Mat w1;        // H x N
  Mat w2;        // H x N
  Mat w3;        // H x P
  Eigen::MatrixXi z;  // H x P, values in 1..P+1
  Mat v;         // H x P, sticks in (0,1)
};

// Throws std::domain_error if any invariant is violated.
void check_shrinkage_state(const ShrinkageState& s, const HyperParams& hp);

// w_j = v_j prod_{l<j} (1 - v_l); sums to at most 1.
Vec stick_break_weights(const Vec& v);

// Categorical weights of the spike assignment z: the truncated sticks, with
// the final category holding prod_{l<P}(1 - v_l). Sums to 1 exactly.
Vec z_category_weights(const Vec& v);

// Draw (z row, W3 row) from the prior given categorical weights over 1..P.
std::pair<std::vector<int>, Vec> sample_w3_prior(const HyperParams& hp, const Vec& w, Rng& rng);

// Draw the margins of component h from N(0, phi_h tau W).
TensorComponent sample_prior_component(const HyperParams& hp, const ShrinkageState& s, int h,
                                       Rng& rng);

// Full prior draw of the shrinkage hierarchy at concentration alpha_conc.
ShrinkageState sample_prior_shrinkage(const HyperParams& hp, double alpha_conc, Rng& rng);

// Joint log density of (tau, phi, lambda, W, z, v, alpha-margins) under the
// hierarchy with concentration alpha_conc (and a_tau = H * alpha_conc).
// Fully normalized in every factor that depends on the state.
double log_prior_density(const ShrinkageState& s, const std::vector<TensorComponent>& components,
                         const HyperParams& hp, double alpha_conc);

}  // namespace btvtvar
