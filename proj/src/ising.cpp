#include "btvtvar/ising.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace btvtvar {

namespace {

// log(1 + e^x), overflow-safe.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double lse2(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

double IsingParams::theta_star() const {
  // exp(theta*) = e^theta (e^theta + 1) / (e^{theta+kappa} + 1)
  return theta + softplus(theta) - softplus(theta + kappa);
}

ChainField ising_prior_field(const IsingParams& params, int length) {
  if (length < 1) throw std::invalid_argument("ising_prior_field: length must be >= 1");
  if (params.kappa < 0.0) throw std::domain_error("ising_prior_field: kappa must be >= 0");
  ChainField f;
  f.coupling = params.kappa;
  f.site_fields.assign(length, params.theta_star());
  f.site_fields.front() = params.theta;
  f.site_fields.back() = params.theta;
  return f;
}

double ising_log_pmf_unnorm(const std::vector<int>& gamma, const ChainField& f) {
  const int len = f.length();
  if (static_cast<int>(gamma.size()) != len)
    throw std::invalid_argument("ising_log_pmf_unnorm: length mismatch");
  double s = 0.0;
  for (int t = 0; t < len; ++t)
    if (gamma[t]) s += f.site_fields[t];
  for (int t = 0; t + 1 < len; ++t)
    if (gamma[t] && gamma[t + 1]) s += f.coupling;
  return s;
}

NdarmaParams theta_kappa_to_p(const IsingParams& params) {
  if (params.kappa < 0.0) throw std::domain_error("theta_kappa_to_p: kappa must be >= 0");
  const double et = std::exp(params.theta);
  const double etk = std::exp(params.theta + params.kappa);
  NdarmaParams out;
  out.p1 = et * std::expm1(params.kappa) / ((etk + 1.0) * (et + 1.0));
  out.p2 = et * (etk + 1.0) / (std::exp(2.0 * params.theta + params.kappa) + 2.0 * et + 1.0);
  return out;
}

IsingParams p_to_theta_kappa(const NdarmaParams& params) {
  const double p1 = params.p1;
  const double p2 = params.p2;
  if (!(p1 >= 0.0 && p1 < 1.0) || !(p2 > 0.0 && p2 < 1.0))
    throw std::domain_error("p_to_theta_kappa: need 0 <= p1 < 1 and 0 < p2 < 1");
  IsingParams out;
  out.theta = std::log(p2 * (1.0 - p1)) - std::log(p1 + (1.0 - p2) * (1.0 - p1));
  const double denom = p2 * (1.0 - p2) * (1.0 - p1) * (1.0 - p1);
  out.kappa = std::log(p1 + p2 * (1.0 - p2) * (1.0 - p1) * (1.0 - p1)) - std::log(denom);
  return out;
}

double ndarma_joint_pmf(const std::vector<int>& gamma, const NdarmaParams& params) {
  if (gamma.empty()) throw std::invalid_argument("ndarma_joint_pmf: empty configuration");
  const double p1 = params.p1;
  const double p2 = params.p2;
  double prob = gamma[0] ? p2 : (1.0 - p2);
  for (std::size_t t = 1; t < gamma.size(); ++t) {
    const double innov = gamma[t] ? p2 : (1.0 - p2);
    prob *= (gamma[t] == gamma[t - 1] ? p1 : 0.0) + (1.0 - p1) * innov;
  }
  return prob;
}

// Backward messages: b[t][g] = log sum over gamma_{t+1..L-1} of the chain score
// given gamma_t = g, excluding site t's own field.
static std::vector<std::array<double, 2>> backward_messages(const ChainField& f) {
  const int len = f.length();
  std::vector<std::array<double, 2>> b(len);
  b[len - 1] = {0.0, 0.0};
  for (int t = len - 2; t >= 0; --t) {
    for (int g = 0; g < 2; ++g) {
      const double z0 = b[t + 1][0];
      const double z1 = f.site_fields[t + 1] + f.coupling * g + b[t + 1][1];
      b[t][g] = lse2(z0, z1);
    }
  }
  return b;
}

double transfer_matrix_normalizer(const ChainField& f) {
  if (f.length() < 1) throw std::invalid_argument("transfer_matrix_normalizer: empty chain");
  const auto b = backward_messages(f);
  return lse2(b[0][0], f.site_fields[0] + b[0][1]);
}

std::vector<int> exact_chain_sample(const ChainField& f, Rng& rng) {
  const int len = f.length();
  if (len < 1) throw std::invalid_argument("exact_chain_sample: empty chain");
  const auto b = backward_messages(f);
  std::vector<int> gamma(len);
  // P(gamma_0 = 1) from the two root weights.
  double log1 = f.site_fields[0] + b[0][1];
  double log0 = b[0][0];
  gamma[0] = rng.bernoulli(sigmoid(log1 - log0)) ? 1 : 0;
  for (int t = 1; t < len; ++t) {
    log1 = f.site_fields[t] + f.coupling * gamma[t - 1] + b[t][1];
    log0 = b[t][0];
    gamma[t] = rng.bernoulli(sigmoid(log1 - log0)) ? 1 : 0;
  }
  return gamma;
}

namespace {

// One monotone heat-bath sweep, sites left to right, shared uniforms.
void heat_bath_sweep(std::vector<int>& state, const ChainField& f,
                     const std::vector<double>& u) {
  const int len = f.length();
  for (int i = 0; i < len; ++i) {
    double field = f.site_fields[i];
    if (i > 0) field += f.coupling * state[i - 1];
    if (i + 1 < len) field += f.coupling * state[i + 1];
    state[i] = (u[i] < sigmoid(field)) ? 1 : 0;
  }
}

}  // namespace

std::vector<int> cftp_chain_sample(const ChainField& f, Rng& rng) {
  if (f.coupling < 0.0) throw std::domain_error("cftp: coupling must be >= 0");
  const int len = f.length();
  // uniforms[k] drives the sweep at backward time -(k+1); reused across
  // horizon doublings so the coupling from the past is genuine.
  std::vector<std::vector<double>> uniforms;
  std::uint64_t horizon = 1;
  for (;;) {
    while (uniforms.size() < horizon) {
      std::vector<double> u(len);
      for (int i = 0; i < len; ++i) u[i] = rng.uniform();
      uniforms.push_back(std::move(u));
    }
    std::vector<int> upper(len, 1), lower(len, 0);
    for (std::uint64_t k = horizon; k-- > 0;) {
      heat_bath_sweep(upper, f, uniforms[k]);
      heat_bath_sweep(lower, f, uniforms[k]);
    }
    if (upper == lower) return upper;
    if (horizon >= kCftpHorizonCap)
      throw std::runtime_error("cftp: no coalescence within the horizon cap");
    horizon *= 2;
  }
}

std::vector<int> cftp_ising_sample(const IsingParams& params, int length, Rng& rng) {
  return cftp_chain_sample(ising_prior_field(params, length), rng);
}

std::vector<int> ndarma_sample_path(const NdarmaParams& params, int length, Rng& rng) {
  if (length < 1) throw std::invalid_argument("ndarma_sample_path: length must be >= 1");
  std::vector<int> gamma(length);
  gamma[0] = rng.bernoulli(params.p2) ? 1 : 0;
  for (int t = 1; t < length; ++t) {
    if (rng.bernoulli(params.p1))
      gamma[t] = gamma[t - 1];
    else
      gamma[t] = rng.bernoulli(params.p2) ? 1 : 0;
  }
  return gamma;
}

}  // namespace btvtvar
