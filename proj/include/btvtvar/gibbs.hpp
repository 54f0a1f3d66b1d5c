#pragma once

#include <cstdint>
#include <vector>

#include "btvtvar/ising.hpp"
#include "btvtvar/rng.hpp"
#include "btvtvar/shrinkage.hpp"
#include "btvtvar/tensor_var.hpp"
#include "btvtvar/types.hpp"

namespace btvtvar {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full latent state of one Gibbs iteration.
struct ModelState {
  std::vector<TensorComponent> components;  // H
  std::vector<ActivationPath> paths;        // H, each length T-P
  ShrinkageState shrink;
  std::vector<IsingParams> ising;  // H
  Vec sigma2;                      // N noise variances
  double alpha_conc = 0.0;         // current Dirichlet concentration (grid point)
};

struct ChainConfig {
  int n_iter = 5000;
  int burn_in = -1;  // -1: one third of n_iter
  int thin = 3;
  std::uint64_t seed = 0;
  int n_chains = 1;
  int griddy_inner_draws = 10;  // M
  int progress_every = 0;       // progress line to stderr every k iterations; 0 = off

  int effective_burn_in() const { return burn_in >= 0 ? burn_in : n_iter / 3; }
  void validate() const;
};

// One stored post-burn-in snapshot.
struct Draw {
  std::vector<TensorComponent> components;
  std::vector<ActivationPath> paths;
  std::vector<IsingParams> ising;
  double tau = 0.0;
  Vec phi;
  Vec sigma2;
  double alpha_conc = 0.0;
};

struct FitResult {
  int n_dim = 0, t_len = 0, p = 0, h = 0;
  std::vector<Draw> draws;
  // posterior means of the identifiable products, accumulated streaming
  std::vector<CoefMatrixSet> posterior_mean_a;      // index i <-> t = P+1+i (1-based)
  std::vector<CoefMatrixSet> posterior_mean_bases;  // per component h
  Mat gamma_prob;                                   // H x (T-P)
  Vec accept_rate;                                  // per-component (theta,kappa) MH rate
};

// Gaussian full conditional in precision form.
struct GaussianConditional {
  Vec mean;
  Mat precision;
};

// --- full-conditional parameter builders (exposed for the ratio tests) ---

// C_h = sum_modes alpha' W^{-1} alpha, floored at 1e-300 for annihilated components.
double component_scale_quadratic(const ModelState& state, int h);

// Conditional for margin `mode` (1,2,3) of component h given everything else.
GaussianConditional margin_full_conditional(const ModelState& state, const HyperParams& hp,
                                            const TimeSeries& data, int h, int mode);

// Site fields psi_{h,t} + prior field for the gamma update of component h.
ChainField path_full_conditional_field(const ModelState& state, const HyperParams& hp,
                                       const TimeSeries& data, int h);

// --- Gibbs blocks (sweep order 1..5) ---
void update_concentration_griddy(ModelState& state, const HyperParams& hp, int inner_draws,
                                 Rng& rng);
void update_phi_tau(ModelState& state, const HyperParams& hp, Rng& rng);
void update_lambda_w12(ModelState& state, const HyperParams& hp, Rng& rng);
void update_lag_shrinkage(ModelState& state, const HyperParams& hp, Rng& rng);
void update_margins(ModelState& state, const HyperParams& hp, const TimeSeries& data, Rng& rng);
// Metropolis move along the rescaling ridge (nu a1, nu a2, a3/nu^2) with the
// local variances rescaled in step; the likelihood is invariant.
void update_scale_transfer(ModelState& state, const HyperParams& hp, Rng& rng);
void update_paths(ModelState& state, const HyperParams& hp, const TimeSeries& data, Rng& rng);
// Returns the number of accepted proposals (0..H); optionally bumps a
// per-component counter.
int update_ising_params(ModelState& state, const HyperParams& hp, Rng& rng,
                        std::vector<int>* per_component = nullptr);
void update_sigma2(ModelState& state, const HyperParams& hp, const TimeSeries& data, Rng& rng);

void gibbs_sweep(ModelState& state, const HyperParams& hp, const TimeSeries& data,
                 const ChainConfig& cfg, Rng& rng, std::vector<int>* accepted = nullptr);

// Deterministic initialization: ridge fit of the static VAR, SVD split into H
// rank-1 components, all paths active.
ModelState init_state(const TimeSeries& data, const HyperParams& hp, Rng& rng);

// Draw a full state from the prior (used by the joint-distribution test and
// the study generators' activation layer).
ModelState sample_prior_state(const HyperParams& hp, double alpha_conc, Rng& rng);

// Log joint density log p(y, state) up to additive constants that do not
// depend on any state variable. Includes the Ising normalizing constants.
double log_joint_density(const ModelState& state, const HyperParams& hp,
                         const TimeSeries& data);

FitResult run_chain(const TimeSeries& data, const HyperParams& hp, const ChainConfig& cfg);

// gamma_tilde = 1 iff posterior activation probability exceeds `threshold` (strict).
std::vector<ActivationPath> summarize_gamma(const FitResult& result, double threshold);

// (T-P) x N matrix of residuals y_t - sum_h gamma s alpha1 under `state`.
Mat model_residuals(const ModelState& state, const TimeSeries& data);

}  // namespace btvtvar
