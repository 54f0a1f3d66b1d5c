#include "btvtvar/shrinkage.hpp"

#include <cmath>
#include <stdexcept>

#include "btvtvar/densities.hpp"

namespace btvtvar {

void HyperParams::finalize() {
  if (h < 1 || p < 1 || n < 1) throw std::domain_error("HyperParams: dimensions must be set");
  if (b_tau <= 0.0) b_tau = std::pow(static_cast<double>(h), 4.0);
  if (alpha_grid.empty()) {
    const double lo = std::pow(static_cast<double>(h), -3.0);
    const double hi = std::pow(static_cast<double>(h), -0.1);
    alpha_grid.resize(alpha_grid_size);
    if (alpha_grid_size == 1) {
      alpha_grid[0] = lo;
    } else {
      for (int i = 0; i < alpha_grid_size; ++i)
        alpha_grid[i] = lo + (hi - lo) * i / (alpha_grid_size - 1.0);
    }
  }
}

void check_shrinkage_state(const ShrinkageState& s, const HyperParams& hp) {
  const int h = hp.h, n = hp.n, p = hp.p;
  if (s.phi.size() != h || s.lambda1.size() != h || s.lambda2.size() != h ||
      s.w1.rows() != h || s.w1.cols() != n || s.w2.rows() != h || s.w2.cols() != n ||
      s.w3.rows() != h || s.w3.cols() != p || s.z.rows() != h || s.z.cols() != p ||
      s.v.rows() != h || s.v.cols() != p)
    throw std::domain_error("ShrinkageState: dimension mismatch");
  if (!(s.tau > 0.0)) throw std::domain_error("ShrinkageState: tau must be positive");
  if (std::fabs(s.phi.sum() - 1.0) > 1e-12) throw std::domain_error("ShrinkageState: phi off simplex");
  for (int i = 0; i < h; ++i) {
    if (!(s.phi[i] > 0.0)) throw std::domain_error("ShrinkageState: phi entries must be positive");
    if (!(s.lambda1[i] > 0.0) || !(s.lambda2[i] > 0.0))
      throw std::domain_error("ShrinkageState: lambda entries must be positive");
  }
  if ((s.w1.array() <= 0.0).any() || (s.w2.array() <= 0.0).any() || (s.w3.array() <= 0.0).any())
    throw std::domain_error("ShrinkageState: W entries must be positive");
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < p; ++j) {
      const int z = s.z(i, j);
      if (z < 1 || z > p) throw std::domain_error("ShrinkageState: z outside 1..P");
      if (z <= j + 1 && s.w3(i, j) != hp.w_inf)
        throw std::domain_error("ShrinkageState: spike assignment without W_inf value");
      if (!(s.v(i, j) > 0.0 && s.v(i, j) < 1.0))
        throw std::domain_error("ShrinkageState: sticks must lie in (0,1)");
    }
}

Vec stick_break_weights(const Vec& v) {
  const int p = static_cast<int>(v.size());
  Vec w(p);
  double remaining = 1.0;
  for (int j = 0; j < p; ++j) {
    if (!(v[j] >= 0.0 && v[j] <= 1.0))
      throw std::domain_error("stick_break_weights: sticks must lie in [0,1]");
    w[j] = v[j] * remaining;
    remaining *= 1.0 - v[j];
  }
  return w;
}

Vec z_category_weights(const Vec& v) {
  const int p = static_cast<int>(v.size());
  Vec w = stick_break_weights(v);
  double head = 1.0;
  for (int l = 0; l + 1 < p; ++l) head *= 1.0 - v[l];
  w[p - 1] = head;  // last category absorbs the remainder (truncated sticks)
  return w;
}

std::pair<std::vector<int>, Vec> sample_w3_prior(const HyperParams& hp, const Vec& w, Rng& rng) {
  const int p = static_cast<int>(w.size());
  std::vector<int> z(p);
  Vec w3(p);
  for (int k = 0; k < p; ++k) {
    const double u = rng.uniform();
    double acc = 0.0;
    int pick = p;
    for (int l = 0; l < p; ++l) {
      acc += w[l];
      if (u < acc) {
        pick = l + 1;
        break;
      }
    }
    z[k] = pick;
    w3[k] = (pick <= k + 1) ? hp.w_inf : rng.inv_gamma(hp.a_w, hp.b_w);
  }
  return {z, w3};
}

TensorComponent sample_prior_component(const HyperParams& hp, const ShrinkageState& s, int h,
                                       Rng& rng) {
  const double scale = s.phi[h] * s.tau;
  TensorComponent c;
  c.alpha1 = Vec(hp.n);
  c.alpha2 = Vec(hp.n);
  c.alpha3 = Vec(hp.p);
  for (int k = 0; k < hp.n; ++k) c.alpha1[k] = std::sqrt(scale * s.w1(h, k)) * rng.normal();
  for (int k = 0; k < hp.n; ++k) c.alpha2[k] = std::sqrt(scale * s.w2(h, k)) * rng.normal();
  for (int j = 0; j < hp.p; ++j) c.alpha3[j] = std::sqrt(scale * s.w3(h, j)) * rng.normal();
  return c;
}

ShrinkageState sample_prior_shrinkage(const HyperParams& hp, double alpha_conc, Rng& rng) {
  ShrinkageState s;
  const int h = hp.h, n = hp.n, p = hp.p;
  s.tau = rng.gamma(h * alpha_conc, hp.b_tau);
  s.phi = h == 1 ? Vec::Ones(1) : rng.dirichlet(alpha_conc, h);
  s.lambda1 = Vec(h);
  s.lambda2 = Vec(h);
  s.w1 = Mat(h, n);
  s.w2 = Mat(h, n);
  s.w3 = Mat(h, p);
  s.z = Eigen::MatrixXi(h, p);
  s.v = Mat(h, p);
  for (int i = 0; i < h; ++i) {
    s.lambda1[i] = rng.gamma(hp.a_lambda, hp.b_lambda);
    s.lambda2[i] = rng.gamma(hp.a_lambda, hp.b_lambda);
    for (int k = 0; k < n; ++k) {
      s.w1(i, k) = rng.exponential(s.lambda1[i] * s.lambda1[i] / 2.0);
      s.w2(i, k) = rng.exponential(s.lambda2[i] * s.lambda2[i] / 2.0);
    }
    for (int j = 0; j < p; ++j) s.v(i, j) = rng.beta(hp.beta1, hp.beta2);
    const auto [z, w3] = sample_w3_prior(hp, z_category_weights(s.v.row(i).transpose()), rng);
    for (int j = 0; j < p; ++j) {
      s.z(i, j) = z[j];
      s.w3(i, j) = w3[j];
    }
  }
  return s;
}

double log_prior_density(const ShrinkageState& s, const std::vector<TensorComponent>& components,
                         const HyperParams& hp, double alpha_conc) {
  check_shrinkage_state(s, hp);
  if (static_cast<int>(components.size()) != hp.h)
    throw std::domain_error("log_prior_density: wrong number of components");
  const int h = hp.h, n = hp.n, p = hp.p;

  double lp = 0.0;
  // tau ~ Ga(H alpha, b_tau); phi ~ Dirichlet(alpha)
  lp += log_gamma_pdf(s.tau, h * alpha_conc, hp.b_tau);
  lp += std::lgamma(h * alpha_conc) - h * std::lgamma(alpha_conc);
  for (int i = 0; i < h; ++i) lp += (alpha_conc - 1.0) * std::log(s.phi[i]);

  for (int i = 0; i < h; ++i) {
    const double scale = s.phi[i] * s.tau;
    lp += log_gamma_pdf(s.lambda1[i], hp.a_lambda, hp.b_lambda);
    lp += log_gamma_pdf(s.lambda2[i], hp.a_lambda, hp.b_lambda);
    for (int k = 0; k < n; ++k) {
      lp += log_exponential_pdf(s.w1(i, k), s.lambda1[i] * s.lambda1[i] / 2.0);
      lp += log_exponential_pdf(s.w2(i, k), s.lambda2[i] * s.lambda2[i] / 2.0);
      lp += log_normal_pdf(components[i].alpha1[k], scale * s.w1(i, k));
      lp += log_normal_pdf(components[i].alpha2[k], scale * s.w2(i, k));
    }
    const Vec w = z_category_weights(s.v.row(i).transpose());
    for (int j = 0; j < p; ++j) {
      lp += log_beta_pdf(s.v(i, j), hp.beta1, hp.beta2);
      lp += std::log(w[s.z(i, j) - 1]);
      if (s.z(i, j) > j + 1) lp += log_inv_gamma_pdf(s.w3(i, j), hp.a_w, hp.b_w);
      // spike: point mass at w_inf contributes log 1
      lp += log_normal_pdf(components[i].alpha3[j], scale * s.w3(i, j));
    }
  }
  return lp;
}

}  // namespace btvtvar
