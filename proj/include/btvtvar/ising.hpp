#pragma once

#include <vector>

#include "btvtvar/rng.hpp"
#include "btvtvar/types.hpp"

namespace btvtvar {

// Ising chain prior parameters. theta is the endpoint field; the interior
// field theta_star is a deterministic function of (theta, kappa) and is never
// set independently.
struct IsingParams {
  double theta = 0.0;
  double kappa = 0.0;  // >= 0 (attractive coupling)

  double theta_star() const;
};

struct NdarmaParams {
  double p1 = 0.0;  // copy probability, in [0,1)
  double p2 = 0.5;  // innovation mean, in (0,1)
};

// A binary chain with per-site linear fields and a homogeneous nearest-neighbor
// coupling: score(gamma) = sum_t field_t gamma_t + coupling sum_t gamma_t gamma_{t+1}.
struct ChainField {
  std::vector<double> site_fields;
  double coupling = 0.0;  // >= 0

  int length() const { return static_cast<int>(site_fields.size()); }
};

// The prior's field: theta at both endpoints, theta_star inside.
ChainField ising_prior_field(const IsingParams& params, int length);

double ising_log_pmf_unnorm(const std::vector<int>& gamma, const ChainField& f);

// Proposition-1 bijection between (theta, kappa) and (p1, p2).
NdarmaParams theta_kappa_to_p(const IsingParams& params);
IsingParams p_to_theta_kappa(const NdarmaParams& params);

// Markov-product joint pmf of the NDARMA(1) chain (standard Bernoulli
// exponents; summing over all 2^L configurations gives 1).
double ndarma_joint_pmf(const std::vector<int>& gamma, const NdarmaParams& params);

// log of the partition function of the chain, via 2x2 transfer matrices in
// log space. Exact; used both inside joint-density evaluation and as the
// test oracle for the samplers.
double transfer_matrix_normalizer(const ChainField& f);

// Exact draw proportional to exp(ising_log_pmf_unnorm) via a backward
// message pass and forward sampling.
std::vector<int> exact_chain_sample(const ChainField& f, Rng& rng);

// Propp-Wilson coupling from the past with monotone single-site heat-bath
// sweeps (valid because coupling >= 0). Throws if the backward horizon
// exceeds the cap; that is a bug signal, not an approximation point.
constexpr std::uint64_t kCftpHorizonCap = 1u << 20;
std::vector<int> cftp_chain_sample(const ChainField& f, Rng& rng);
std::vector<int> cftp_ising_sample(const IsingParams& params, int length, Rng& rng);

// gamma_1 ~ Bern(p2); each next site copies with prob p1, else Bern(p2).
std::vector<int> ndarma_sample_path(const NdarmaParams& params, int length, Rng& rng);

}  // namespace btvtvar
