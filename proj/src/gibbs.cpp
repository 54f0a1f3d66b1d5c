#include "btvtvar/gibbs.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <limits>

#include "btvtvar/densities.hpp"

namespace btvtvar {

namespace {

constexpr double kScaleFloor = 1e-300;  // keeps giG draws defined for annihilated components
constexpr double kMhStepTheta = 0.5;    // (theta,kappa) random-walk steps, fixed by design
constexpr double kMhStepKappa = 0.5;

// s(h, i) = sum_j alpha3[j] <alpha2, y_{t-j}>, the scalar multiplying alpha1
// in component h's contribution to the prediction of row t0 = P + i.
Mat compute_s(const ModelState& state, const HyperParams& hp, const TimeSeries& data) {
  const int len = hp.t_len - hp.p;
  Mat s(hp.h, len);
  for (int h = 0; h < hp.h; ++h) {
    const auto& c = state.components[h];
    for (int i = 0; i < len; ++i) {
      const int t0 = hp.p + i;
      double acc = 0.0;
      for (int j = 0; j < hp.p; ++j)
        acc += c.alpha3[j] * c.alpha2.dot(data.values.row(t0 - 1 - j));
      s(h, i) = acc;
    }
  }
  return s;
}

// Residuals excluding component h (pass h = -1 for the full residual).
Mat residuals_excluding(const ModelState& state, const HyperParams& hp, const TimeSeries& data,
                        const Mat& s, int excl) {
  const int len = hp.t_len - hp.p;
  Mat r(len, hp.n);
  for (int i = 0; i < len; ++i) {
    Vec row = data.values.row(hp.p + i).transpose();
    for (int h = 0; h < hp.h; ++h) {
      if (h == excl || state.paths[h].gamma[i] == 0) continue;
      row -= s(h, i) * state.components[h].alpha1;
    }
    r.row(i) = row.transpose();
  }
  return r;
}

// Draw from N(mean, precision^{-1}); jitter once if the Cholesky fails.
Vec sample_gaussian_precision(const GaussianConditional& cond, Rng& rng) {
  Mat prec = cond.precision;
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) {
    prec += 1e-10 * Mat::Identity(prec.rows(), prec.cols());
    llt.compute(prec);
    if (llt.info() != Eigen::Success)
      throw NumericalError("margin update: conditional precision not positive definite");
  }
  Vec z(cond.mean.size());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  // x = mean + L^{-T} z
  return cond.mean + llt.matrixU().solve(z);
}

}  // namespace

void ChainConfig::validate() const {
  if (n_iter < 1) throw std::invalid_argument("ChainConfig: n_iter must be >= 1");
  if (effective_burn_in() >= n_iter)
    throw std::invalid_argument("ChainConfig: burn_in must be < n_iter");
  if (thin < 1) throw std::invalid_argument("ChainConfig: thin must be >= 1");
  if (n_chains < 1) throw std::invalid_argument("ChainConfig: n_chains must be >= 1");
  if (griddy_inner_draws < 1)
    throw std::invalid_argument("ChainConfig: griddy_inner_draws must be >= 1");
}

double component_scale_quadratic(const ModelState& state, int h) {
  const auto& c = state.components[h];
  const auto& s = state.shrink;
  double acc = 0.0;
  for (int k = 0; k < c.alpha1.size(); ++k) {
    acc += c.alpha1[k] * c.alpha1[k] / s.w1(h, k);
    acc += c.alpha2[k] * c.alpha2[k] / s.w2(h, k);
  }
  for (int j = 0; j < c.alpha3.size(); ++j) acc += c.alpha3[j] * c.alpha3[j] / s.w3(h, j);
  return std::max(acc, kScaleFloor);
}

GaussianConditional margin_full_conditional(const ModelState& state, const HyperParams& hp,
                                            const TimeSeries& data, int h, int mode) {
  const int len = hp.t_len - hp.p;
  const double scale = state.shrink.phi[h] * state.shrink.tau;
  const Mat s = compute_s(state, hp, data);
  const Mat resid = residuals_excluding(state, hp, data, s, h);
  const auto& c = state.components[h];
  const Vec inv_sigma2 = state.sigma2.cwiseInverse();

  GaussianConditional cond;
  if (mode == 1) {
    // y_t = d_t alpha1 + rest, d_t = gamma s; diagonal precision
    Vec prec =
        (state.shrink.w1.row(h).transpose().cwiseProduct(Vec::Constant(hp.n, scale))).cwiseInverse();
    Vec rhs = Vec::Zero(hp.n);
    double d2 = 0.0;
    for (int i = 0; i < len; ++i) {
      if (state.paths[h].gamma[i] == 0) continue;
      const double d = s(h, i);
      d2 += d * d;
      rhs += d * resid.row(i).transpose();
    }
    cond.precision = Mat::Zero(hp.n, hp.n);
    cond.mean = Vec(hp.n);
    for (int k = 0; k < hp.n; ++k) {
      const double pk = prec[k] + d2 * inv_sigma2[k];
      cond.precision(k, k) = pk;
      cond.mean[k] = rhs[k] * inv_sigma2[k] / pk;
    }
    return cond;
  }

  const double c1 = c.alpha1.cwiseProduct(c.alpha1).dot(inv_sigma2);
  if (mode == 2) {
    // contribution alpha1 (u' alpha2), u = sum_j alpha3[j] y_{t-j}
    cond.precision = Mat::Zero(hp.n, hp.n);
    for (int k = 0; k < hp.n; ++k) cond.precision(k, k) = 1.0 / (scale * state.shrink.w2(h, k));
    Vec rhs = Vec::Zero(hp.n);
    for (int i = 0; i < len; ++i) {
      if (state.paths[h].gamma[i] == 0) continue;
      const int t0 = hp.p + i;
      Vec u = Vec::Zero(hp.n);
      for (int j = 0; j < hp.p; ++j) u += c.alpha3[j] * data.values.row(t0 - 1 - j).transpose();
      cond.precision += c1 * (u * u.transpose());
      rhs += u * c.alpha1.cwiseProduct(inv_sigma2).dot(resid.row(i));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(Mat(cond.precision));
    if (llt.info() != Eigen::Success)
      throw NumericalError("margin conditional: precision not positive definite");
    cond.mean = llt.solve(rhs);
    return cond;
  }

  if (mode != 3) throw std::invalid_argument("margin_full_conditional: mode must be 1, 2 or 3");
  cond.precision = Mat::Zero(hp.p, hp.p);
  for (int j = 0; j < hp.p; ++j) cond.precision(j, j) = 1.0 / (scale * state.shrink.w3(h, j));
  Vec rhs = Vec::Zero(hp.p);
  Vec g(hp.p);
  for (int i = 0; i < len; ++i) {
    if (state.paths[h].gamma[i] == 0) continue;
    const int t0 = hp.p + i;
    for (int j = 0; j < hp.p; ++j) g[j] = c.alpha2.dot(data.values.row(t0 - 1 - j));
    cond.precision += c1 * (g * g.transpose());
    rhs += g * c.alpha1.cwiseProduct(inv_sigma2).dot(resid.row(i));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(Mat(cond.precision));
  if (llt.info() != Eigen::Success)
    throw NumericalError("margin conditional: precision not positive definite");
  cond.mean = llt.solve(rhs);
  return cond;
}

ChainField path_full_conditional_field(const ModelState& state, const HyperParams& hp,
                                       const TimeSeries& data, int h) {
  const int len = hp.t_len - hp.p;
  const Mat s = compute_s(state, hp, data);
  const Mat resid = residuals_excluding(state, hp, data, s, h);
  const auto& c = state.components[h];
  const Vec inv_sigma2 = state.sigma2.cwiseInverse();
  const double c1 = c.alpha1.cwiseProduct(c.alpha1).dot(inv_sigma2);

  ChainField field = ising_prior_field(state.ising[h], len);
  for (int i = 0; i < len; ++i) {
    const double sc = s(h, i);
    const double psi =
        sc * c.alpha1.cwiseProduct(inv_sigma2).dot(resid.row(i)) - 0.5 * sc * sc * c1;
    field.site_fields[i] += psi;
  }
  return field;
}

void update_concentration_griddy(ModelState& state, const HyperParams& hp, int inner_draws,
                                 Rng& rng) {
  const auto& grid = hp.alpha_grid;
  if (grid.empty()) throw std::invalid_argument("griddy update: empty alpha grid");
  if (grid.size() == 1) {
    state.alpha_conc = grid[0];
    return;
  }
  const int hh = hp.h;
  const double q = (2.0 * hp.n + hp.p) / 2.0;
  std::vector<double> c(hh);
  for (int h = 0; h < hh; ++h) c[h] = component_scale_quadratic(state, h);

  // log pr(A | phi, tau, W) as a function of the scales phi tau
  auto log_pr_a = [&](const Vec& phi, double tau) {
    double lp = 0.0;
    for (int h = 0; h < hh; ++h) {
      const double sc = phi[h] * tau;
      lp += -q * std::log(sc) - 0.5 * c[h] / sc;
      for (int k = 0; k < hp.n; ++k)
        lp += -0.5 * std::log(2.0 * M_PI * state.shrink.w1(h, k)) -
              0.5 * std::log(2.0 * M_PI * state.shrink.w2(h, k));
      for (int j = 0; j < hp.p; ++j) lp += -0.5 * std::log(2.0 * M_PI * state.shrink.w3(h, j));
    }
    return lp;
  };

  std::vector<double> log_scores(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double alpha = grid[g];
    std::vector<double> inner(inner_draws);
    for (int m = 0; m < inner_draws; ++m) {
      // fresh (phi, tau) from their full conditionals at this grid point
      Vec psi(hh);
      for (int h = 0; h < hh; ++h) psi[h] = rng.gig(alpha - q, 2.0 * hp.b_tau, c[h]);
      const Vec phi = psi / psi.sum();
      double bsum = 0.0;
      for (int h = 0; h < hh; ++h) bsum += c[h] / phi[h];
      const double tau = rng.gig(hh * (alpha - q), 2.0 * hp.b_tau, bsum);
      // score: pr(A | phi, tau, W) * pr(phi, tau | alpha)
      double lp = log_pr_a(phi, tau);
      lp += log_gamma_pdf(tau, hh * alpha, hp.b_tau);
      lp += std::lgamma(hh * alpha) - hh * std::lgamma(alpha);
      for (int h = 0; h < hh; ++h) lp += (alpha - 1.0) * std::log(phi[h]);
      inner[m] = lp;
    }
    log_scores[g] = log_sum_exp(inner) - std::log(static_cast<double>(inner_draws));
  }
  state.alpha_conc = grid[rng.discrete_from_log_weights(log_scores)];
}

void update_phi_tau(ModelState& state, const HyperParams& hp, Rng& rng) {
  const int hh = hp.h;
  const double q = (2.0 * hp.n + hp.p) / 2.0;
  std::vector<double> c(hh);
  for (int h = 0; h < hh; ++h) c[h] = component_scale_quadratic(state, h);

  Vec psi(hh);
  for (int h = 0; h < hh; ++h) psi[h] = rng.gig(state.alpha_conc - q, 2.0 * hp.b_tau, c[h]);
  state.shrink.phi = psi / psi.sum();

  double bsum = 0.0;
  for (int h = 0; h < hh; ++h) bsum += c[h] / state.shrink.phi[h];
  state.shrink.tau = rng.gig(hh * (state.alpha_conc - q), 2.0 * hp.b_tau, bsum);
}

void update_lambda_w12(ModelState& state, const HyperParams& hp, Rng& rng) {
  for (int h = 0; h < hp.h; ++h) {
    const auto& c = state.components[h];
    const double root_scale = std::sqrt(state.shrink.phi[h] * state.shrink.tau);
    state.shrink.lambda1[h] =
        rng.gamma(hp.a_lambda + hp.n, hp.b_lambda + c.alpha1.lpNorm<1>() / root_scale);
    state.shrink.lambda2[h] =
        rng.gamma(hp.a_lambda + hp.n, hp.b_lambda + c.alpha2.lpNorm<1>() / root_scale);
    const double scale = root_scale * root_scale;
    for (int k = 0; k < hp.n; ++k) {
      state.shrink.w1(h, k) = rng.gig(0.5, state.shrink.lambda1[h] * state.shrink.lambda1[h],
                                      c.alpha1[k] * c.alpha1[k] / scale);
      state.shrink.w2(h, k) = rng.gig(0.5, state.shrink.lambda2[h] * state.shrink.lambda2[h],
                                      c.alpha2[k] * c.alpha2[k] / scale);
    }
  }
}

void update_lag_shrinkage(ModelState& state, const HyperParams& hp, Rng& rng) {
  const int p = hp.p;
  for (int h = 0; h < hp.h; ++h) {
    // sticks given assignments; the last stick never enters the truncated
    // categorical weights, so its exact conditional is the prior
    for (int k = 0; k + 1 < p; ++k) {
      int eq = 0, gt = 0;
      for (int j = 0; j < p; ++j) {
        if (state.shrink.z(h, j) == k + 1) ++eq;
        if (state.shrink.z(h, j) > k + 1) ++gt;
      }
      state.shrink.v(h, k) = rng.beta(hp.beta1 + eq, hp.beta2 + gt);
    }
    state.shrink.v(h, p - 1) = rng.beta(hp.beta1, hp.beta2);
    const Vec w = z_category_weights(state.shrink.v.row(h).transpose());
    const double scale = state.shrink.phi[h] * state.shrink.tau;
    // assignments given sticks, with W3 marginalized: spike -> Normal at W_inf,
    // slab -> Student t with 2 a_w dof
    for (int k = 0; k < p; ++k) {
      const double x = state.components[h].alpha3[k];
      const double log_spike = log_normal_pdf(x, scale * hp.w_inf);
      const double log_slab = log_student_t_pdf(x, 2.0 * hp.a_w, hp.b_w * scale / hp.a_w);
      std::vector<double> logw(p);
      for (int l = 0; l < p; ++l)
        logw[l] = std::log(std::max(w[l], 1e-300)) + (l + 1 <= k + 1 ? log_spike : log_slab);
      const int z = rng.discrete_from_log_weights(logw) + 1;
      state.shrink.z(h, k) = z;
      state.shrink.w3(h, k) = (z <= k + 1)
                                  ? hp.w_inf
                                  : rng.inv_gamma(hp.a_w + 0.5, hp.b_w + x * x / (2.0 * scale));
    }
  }
}

void update_margins(ModelState& state, const HyperParams& hp, const TimeSeries& data, Rng& rng) {
  for (int h = 0; h < hp.h; ++h) {
    state.components[h].alpha1 =
        sample_gaussian_precision(margin_full_conditional(state, hp, data, h, 1), rng);
    state.components[h].alpha2 =
        sample_gaussian_precision(margin_full_conditional(state, hp, data, h, 2), rng);
    state.components[h].alpha3 =
        sample_gaussian_precision(margin_full_conditional(state, hp, data, h, 3), rng);
  }
}

void update_paths(ModelState& state, const HyperParams& hp, const TimeSeries& data, Rng& rng) {
  for (int h = 0; h < hp.h; ++h) {
    const ChainField field = path_full_conditional_field(state, hp, data, h);
    state.paths[h].gamma = exact_chain_sample(field, rng);
  }
}

void update_scale_transfer(ModelState& state, const HyperParams& hp, Rng& rng) {
  // The PARAFAC product is invariant under (a1,a2,a3) -> (nu a1, nu a2,
  // a3/nu^2); the one-coordinate conditionals cannot travel along this ridge,
  // so the margins can wander into a gauge where the spiked lag variances stop
  // regularizing the products. This Metropolis move rescales the margins and
  // their local variances jointly (Jacobian-corrected, likelihood-invariant).
  constexpr double kLogStep = 0.5;
  for (int h = 0; h < hp.h; ++h) {
    const double log_nu = rng.uniform(-kLogStep, kLogStep);
    const double nu = std::exp(log_nu);
    const double nu2 = nu * nu;
    const double scale = state.shrink.phi[h] * state.shrink.tau;
    const auto& c = state.components[h];

    double log_ratio = 0.0;
    int slab_count = 0;
    // Gaussian margin terms: the alpha1/alpha2 exponents are invariant, the
    // log-determinants contribute -2N log nu; spiked alpha3 entries keep their
    // variance so their exponents change.
    log_ratio += -2.0 * hp.n * log_nu;
    for (int j = 0; j < hp.p; ++j) {
      const double a3 = c.alpha3[j];
      if (state.shrink.z(h, j) <= j + 1) {
        const double v = scale * hp.w_inf;
        log_ratio += -(a3 * a3 / nu2 / nu2 - a3 * a3) / (2.0 * v);
      } else {
        ++slab_count;
        log_ratio += 2.0 * log_nu;  // -1/2 log(W3/nu^4) term
        const double w3 = state.shrink.w3(h, j);
        // Exp/InvGamma prior on the rescaled local variances
        log_ratio += -(hp.a_w + 1.0) * (-4.0 * log_nu) - hp.b_w * (nu2 * nu2 - 1.0) / w3;
      }
    }
    const double lam1 = state.shrink.lambda1[h], lam2 = state.shrink.lambda2[h];
    for (int k = 0; k < hp.n; ++k) {
      log_ratio += -0.5 * lam1 * lam1 * (nu2 - 1.0) * state.shrink.w1(h, k);
      log_ratio += -0.5 * lam2 * lam2 * (nu2 - 1.0) * state.shrink.w2(h, k);
    }
    // Jacobian of the joint rescaling
    log_ratio += (6.0 * hp.n - 2.0 * hp.p - 4.0 * slab_count) * log_nu;

    if (std::log(rng.uniform()) < log_ratio) {
      state.components[h].alpha1 *= nu;
      state.components[h].alpha2 *= nu;
      state.components[h].alpha3 /= nu2;
      state.shrink.w1.row(h) *= nu2;
      state.shrink.w2.row(h) *= nu2;
      for (int j = 0; j < hp.p; ++j)
        if (state.shrink.z(h, j) > j + 1) state.shrink.w3(h, j) /= nu2 * nu2;
    }
  }
}

namespace {

double reflect_into(double x, double lo, double hi) {
  if (hi <= lo) return lo;
  for (int guard = 0; guard < 64 && (x < lo || x > hi); ++guard) {
    if (x < lo) x = 2.0 * lo - x;
    if (x > hi) x = 2.0 * hi - x;
  }
  return std::min(std::max(x, lo), hi);
}

}  // namespace

int update_ising_params(ModelState& state, const HyperParams& hp, Rng& rng,
                        std::vector<int>* per_component) {
  const int len = hp.t_len - hp.p;
  int accepted = 0;
  for (int h = 0; h < hp.h; ++h) {
    const IsingParams cur = state.ising[h];
    IsingParams prop;
    prop.theta = reflect_into(cur.theta + rng.uniform(-kMhStepTheta, kMhStepTheta),
                              hp.theta_min, hp.theta_max);
    prop.kappa =
        reflect_into(cur.kappa + rng.uniform(-kMhStepKappa, kMhStepKappa), 0.0, hp.kappa_max);

    const ChainField field_cur = ising_prior_field(cur, len);
    const ChainField field_prop = ising_prior_field(prop, len);
    // single-auxiliary-variable construction with the auxiliary law pinned at
    // the current parameters; the intractable normalizers cancel
    const std::vector<int> aux = exact_chain_sample(field_prop, rng);
    const double log_ratio =
        ising_log_pmf_unnorm(state.paths[h].gamma, field_prop) -
        ising_log_pmf_unnorm(state.paths[h].gamma, field_cur) +
        ising_log_pmf_unnorm(aux, field_cur) - ising_log_pmf_unnorm(aux, field_prop);
    if (std::log(rng.uniform()) < log_ratio) {
      state.ising[h] = prop;
      ++accepted;
      if (per_component) (*per_component)[h]++;
    }
  }
  return accepted;
}

void update_sigma2(ModelState& state, const HyperParams& hp, const TimeSeries& data, Rng& rng) {
  const Mat resid = model_residuals(state, data);
  const double shape = hp.a_sigma + 0.5 * (hp.t_len - hp.p);
  for (int k = 0; k < hp.n; ++k) {
    const double rss = resid.col(k).squaredNorm();
    state.sigma2[k] = rng.inv_gamma(shape, hp.b_sigma + 0.5 * rss);
  }
}

Mat model_residuals(const ModelState& state, const TimeSeries& data) {
  const int p = state.components.empty() ? 0 : state.components[0].p();
  HyperParams dims;
  dims.n = data.n_dim();
  dims.t_len = data.t_len();
  dims.p = p;
  dims.h = static_cast<int>(state.components.size());
  const Mat s = compute_s(state, dims, data);
  return residuals_excluding(state, dims, data, s, -1);
}

void gibbs_sweep(ModelState& state, const HyperParams& hp, const TimeSeries& data,
                 const ChainConfig& cfg, Rng& rng, std::vector<int>* accepted) {
  update_concentration_griddy(state, hp, cfg.griddy_inner_draws, rng);
  update_phi_tau(state, hp, rng);
  update_lambda_w12(state, hp, rng);
  update_lag_shrinkage(state, hp, rng);
  update_margins(state, hp, data, rng);
  update_paths(state, hp, data, rng);
  update_ising_params(state, hp, rng, accepted);
  update_sigma2(state, hp, data, rng);
}

ModelState init_state(const TimeSeries& data, const HyperParams& hp, Rng& rng) {
  const int n = hp.n, p = hp.p, len = hp.t_len - hp.p;
  ModelState state;

  // ridge-regularized least squares on the static VAR
  Mat x(len, n * p);
  Mat y(len, n);
  for (int i = 0; i < len; ++i) {
    const int t0 = p + i;
    y.row(i) = data.values.row(t0);
    for (int j = 0; j < p; ++j) x.block(i, j * n, 1, n) = data.values.row(t0 - 1 - j);
  }
  Mat xtx = x.transpose() * x;
  const double ridge = 0.1 * xtx.trace() / (n * p) + 1e-3;
  xtx += ridge * Mat::Identity(n * p, n * p);
  const Mat beta = Eigen::LLT<Eigen::MatrixXd>(xtx).solve(Mat(x.transpose() * y));  // NP x N

  std::vector<Mat> a(p);
  Mat a_sum = Mat::Zero(n, n);
  for (int j = 0; j < p; ++j) {
    a[j] = beta.block(j * n, 0, n, n).transpose();
    a_sum += a[j];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_sum, Eigen::ComputeThinU | Eigen::ComputeThinV);

  for (int h = 0; h < hp.h; ++h) {
    TensorComponent c;
    if (h < svd.singularValues().size()) {
      c.alpha1 = svd.matrixU().col(h);
      c.alpha2 = svd.matrixV().col(h);
      c.alpha3 = Vec(p);
      for (int j = 0; j < p; ++j) c.alpha3[j] = c.alpha1.dot(a[j] * c.alpha2);
    } else {
      c.alpha1 = Vec::Zero(n);
      c.alpha2 = Vec::Zero(n);
      c.alpha3 = Vec::Zero(p);
      c.alpha1[h % n] = 1e-3;
      c.alpha2[(h + 1) % n] = 1e-3;
      c.alpha3[0] = 1e-3;
    }
    state.components.push_back(std::move(c));
    state.paths.push_back({std::vector<int>(len, 1)});
    state.ising.push_back({0.0, 1.0});
  }

  // Start at the sparse end of the concentration grid, with tau at its prior
  // mean and the local variances matched to the ridge margins. The (alpha,
  // tau, W) hierarchy has two self-consistent regimes; only the small-tau one
  // lets the fixed spike variance regularize the top-lag products, and the
  // chain stays in the regime it starts in.
  state.alpha_conc = *std::min_element(hp.alpha_grid.begin(), hp.alpha_grid.end());
  auto& s = state.shrink;
  s.tau = hp.h * state.alpha_conc / hp.b_tau;
  s.phi = Vec::Constant(hp.h, 1.0 / hp.h);
  const double scale0 = s.tau / hp.h;
  s.lambda1 = Vec::Constant(hp.h, hp.a_lambda / hp.b_lambda);
  s.lambda2 = s.lambda1;
  s.w1 = Mat(hp.h, n);
  s.w2 = Mat(hp.h, n);
  s.w3 = Mat(hp.h, p);
  for (int h = 0; h < hp.h; ++h) {
    const auto& c = state.components[h];
    for (int k = 0; k < n; ++k) {
      s.w1(h, k) = (c.alpha1[k] * c.alpha1[k] + 1e-6) / scale0;
      s.w2(h, k) = (c.alpha2[k] * c.alpha2[k] + 1e-6) / scale0;
    }
    for (int j = 0; j < p; ++j) s.w3(h, j) = (c.alpha3[j] * c.alpha3[j] + 1e-6) / scale0;
  }
  s.z = Eigen::MatrixXi::Constant(hp.h, p, p + 1);  // all lags start in the slab
  s.v = Mat::Constant(hp.h, p, hp.beta1 / (hp.beta1 + hp.beta2));

  const Mat resid = y - x * beta;
  state.sigma2 = Vec(n);
  for (int k = 0; k < n; ++k)
    state.sigma2[k] = std::max(resid.col(k).squaredNorm() / len, 1e-6);
  (void)rng;
  return state;
}

ModelState sample_prior_state(const HyperParams& hp, double alpha_conc, Rng& rng) {
  ModelState state;
  state.alpha_conc = alpha_conc;
  state.shrink = sample_prior_shrinkage(hp, alpha_conc, rng);
  const int len = hp.t_len - hp.p;
  for (int h = 0; h < hp.h; ++h) {
    state.components.push_back(sample_prior_component(hp, state.shrink, h, rng));
    IsingParams ip;
    ip.theta = rng.uniform(hp.theta_min, hp.theta_max);
    ip.kappa = rng.uniform(0.0, hp.kappa_max);
    state.ising.push_back(ip);
    state.paths.push_back({cftp_ising_sample(ip, len, rng)});
  }
  state.sigma2 = Vec(hp.n);
  for (int k = 0; k < hp.n; ++k) state.sigma2[k] = rng.inv_gamma(hp.a_sigma, hp.b_sigma);
  return state;
}

double log_joint_density(const ModelState& state, const HyperParams& hp,
                         const TimeSeries& data) {
  const int len = hp.t_len - hp.p;
  double lp = log_prior_density(state.shrink, state.components, hp, state.alpha_conc);

  for (int h = 0; h < hp.h; ++h) {
    const auto& ip = state.ising[h];
    if (ip.theta < hp.theta_min || ip.theta > hp.theta_max || ip.kappa < 0.0 ||
        ip.kappa > hp.kappa_max)
      throw std::domain_error("log_joint_density: (theta,kappa) outside the prior box");
    const ChainField field = ising_prior_field(ip, len);
    lp += ising_log_pmf_unnorm(state.paths[h].gamma, field) - transfer_matrix_normalizer(field);
  }

  for (int k = 0; k < hp.n; ++k)
    lp += log_inv_gamma_pdf(state.sigma2[k], hp.a_sigma, hp.b_sigma);

  const Mat resid = model_residuals(state, data);
  for (int i = 0; i < len; ++i)
    for (int k = 0; k < hp.n; ++k) lp += log_normal_pdf(resid(i, k), state.sigma2[k]);
  return lp;
}

namespace {

void check_finite_state(const ModelState& state, int iter) {
  auto fail = [iter](const char* block) {
    throw NumericalError("non-finite state in block " + std::string(block) + " at iteration " +
                         std::to_string(iter));
  };
  if (!std::isfinite(state.shrink.tau)) fail("phi_tau");
  if (!state.shrink.phi.allFinite()) fail("phi_tau");
  if (!state.shrink.w1.allFinite() || !state.shrink.w2.allFinite()) fail("lambda_w12");
  if (!state.shrink.w3.allFinite()) fail("lag_shrinkage");
  for (const auto& c : state.components)
    if (!c.alpha1.allFinite() || !c.alpha2.allFinite() || !c.alpha3.allFinite()) fail("margins");
  if (!state.sigma2.allFinite()) fail("sigma2");
}

}  // namespace

FitResult run_chain(const TimeSeries& data, const HyperParams& hp, const ChainConfig& cfg) {
  cfg.validate();
  if (data.t_len() != hp.t_len || data.n_dim() != hp.n)
    throw std::invalid_argument("run_chain: data dimensions do not match HyperParams");
  if (hp.t_len <= hp.p) throw std::invalid_argument("run_chain: need T > P");

  Rng rng(cfg.seed);
  ModelState state = init_state(data, hp, rng);

  const int len = hp.t_len - hp.p;
  FitResult result;
  result.n_dim = hp.n;
  result.t_len = hp.t_len;
  result.p = hp.p;
  result.h = hp.h;
  result.posterior_mean_a.assign(len, CoefMatrixSet{std::vector<Mat>(hp.p, Mat::Zero(hp.n, hp.n))});
  result.posterior_mean_bases.assign(hp.h,
                                     CoefMatrixSet{std::vector<Mat>(hp.p, Mat::Zero(hp.n, hp.n))});
  result.gamma_prob = Mat::Zero(hp.h, len);
  result.accept_rate = Vec::Zero(hp.h);

  const int burn = cfg.effective_burn_in();
  int kept = 0;
  std::vector<int> accepted(hp.h, 0);
  std::vector<Mat> bases(hp.h * hp.p);
  std::vector<Mat> at(hp.p);
  for (int iter = 1; iter <= cfg.n_iter; ++iter) {
    gibbs_sweep(state, hp, data, cfg, rng, &accepted);
    check_finite_state(state, iter);

    if (cfg.progress_every > 0 && iter % cfg.progress_every == 0)
      std::fprintf(stderr, "[btvtvar] iteration %d/%d (tau=%.3g)\n", iter, cfg.n_iter,
                   state.shrink.tau);

    if (iter <= burn || (iter - burn - 1) % cfg.thin != 0) continue;
    ++kept;

    Draw draw;
    draw.components = state.components;
    draw.paths = state.paths;
    draw.ising = state.ising;
    draw.tau = state.shrink.tau;
    draw.phi = state.shrink.phi;
    draw.sigma2 = state.sigma2;
    draw.alpha_conc = state.alpha_conc;
    result.draws.push_back(std::move(draw));

    // streaming means of the identifiable products
    for (int h = 0; h < hp.h; ++h) {
      const Mat outer = state.components[h].alpha1 * state.components[h].alpha2.transpose();
      for (int j = 0; j < hp.p; ++j) {
        bases[h * hp.p + j] = state.components[h].alpha3[j] * outer;
        result.posterior_mean_bases[h].matrices[j] +=
            (bases[h * hp.p + j] - result.posterior_mean_bases[h].matrices[j]) / kept;
      }
      for (int i = 0; i < len; ++i)
        result.gamma_prob(h, i) += (state.paths[h].gamma[i] - result.gamma_prob(h, i)) / kept;
    }
    for (int i = 0; i < len; ++i) {
      for (int j = 0; j < hp.p; ++j) at[j].setZero(hp.n, hp.n);
      for (int h = 0; h < hp.h; ++h) {
        if (state.paths[h].gamma[i] == 0) continue;
        for (int j = 0; j < hp.p; ++j) at[j].noalias() += bases[h * hp.p + j];
      }
      for (int j = 0; j < hp.p; ++j)
        result.posterior_mean_a[i].matrices[j] +=
            (at[j] - result.posterior_mean_a[i].matrices[j]) / kept;
    }
  }
  for (int h = 0; h < hp.h; ++h) result.accept_rate[h] = accepted[h] / (double)cfg.n_iter;
  return result;
}

std::vector<ActivationPath> summarize_gamma(const FitResult& result, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::domain_error("summarize_gamma: threshold must lie in (0,1)");
  std::vector<ActivationPath> out(result.h);
  for (int h = 0; h < result.h; ++h) {
    out[h].gamma.resize(result.gamma_prob.cols());
    for (int i = 0; i < result.gamma_prob.cols(); ++i)
      out[h].gamma[i] = result.gamma_prob(h, i) > threshold ? 1 : 0;
  }
  return out;
}

}  // namespace btvtvar
