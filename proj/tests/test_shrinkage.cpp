#include <cmath>
#include <vector>

#include "btvtvar/densities.hpp"
#include "btvtvar/shrinkage.hpp"
#include "doctest.h"
#include "test_stats.hpp"

using namespace btvtvar;

namespace {

HyperParams small_hp(int n = 3, int p = 4, int h = 3) {
  HyperParams hp;
  hp.n = n;
  hp.t_len = 30;
  hp.p = p;
  hp.h = h;
  hp.finalize();
  return hp;
}

}  // namespace

TEST_CASE("hyperparameter finalize fills the paper defaults") {
  auto hp = small_hp(3, 4, 4);
  CHECK(hp.b_tau == doctest::Approx(256.0));
  REQUIRE(hp.alpha_grid.size() == 10);
  CHECK(hp.alpha_grid.front() == doctest::Approx(std::pow(4.0, -3.0)));
  CHECK(hp.alpha_grid.back() == doctest::Approx(std::pow(4.0, -0.1)));
  CHECK(hp.b_lambda == doctest::Approx(std::pow(3.0, 1.0 / 6.0)).epsilon(1e-14));
}

TEST_CASE("stick_break_weights closed forms and monotone spike probability") {
  Vec full(3);
  full << 1.0, 0.5, 0.5;
  const Vec w_full = stick_break_weights(full);
  CHECK(w_full[0] == 1.0);
  CHECK(w_full[1] == 0.0);
  CHECK(w_full[2] == 0.0);

  Vec half = Vec::Constant(3, 0.5);
  const Vec w_half = stick_break_weights(half);
  CHECK(w_half[0] == doctest::Approx(0.5));
  CHECK(w_half[1] == doctest::Approx(0.25));
  CHECK(w_half[2] == doctest::Approx(0.125));

  Rng rng(3);
  for (int rep = 0; rep < 1000; ++rep) {
    Vec v(6);
    for (int i = 0; i < 6; ++i) v[i] = rng.uniform();
    const Vec w = stick_break_weights(v);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w.sum() <= 1.0 + 1e-15);
    double cum = 0.0, prev = 0.0;
    for (int j = 0; j < 6; ++j) {
      cum += w[j];
      CHECK(cum >= prev);
      prev = cum;
    }
  }
}

TEST_CASE("sample_w3_prior spike layout") {
  auto hp = small_hp(3, 5, 2);
  Rng rng(5);

  Vec w_all_first = Vec::Zero(5);
  w_all_first[0] = 1.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto [z, w3] = sample_w3_prior(hp, w_all_first, rng);
    for (int j = 0; j < 5; ++j) {
      CHECK(z[j] == 1);
      CHECK(w3[j] == hp.w_inf);
    }
  }

  // mass concentrated on the last weight: early lags mostly slab
  Vec v(5);
  v << 1e-9, 1e-9, 1e-9, 1e-9, 0.5;
  const Vec w_late = z_category_weights(v);
  CHECK(w_late[4] == doctest::Approx(1.0).epsilon(1e-6));
  long slab_at_1 = 0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    const auto [z, w3] = sample_w3_prior(hp, w_late, rng);
    if (z[0] > 1) ++slab_at_1;
  }
  CHECK(slab_at_1 == n);

  // spike frequency at lag j matches the cumulative weights (3 sigma)
  Rng rng2(7);
  Vec sticks(5);
  for (int i = 0; i < 5; ++i) sticks[i] = rng2.beta(1.0, 5.0);
  const Vec w = z_category_weights(sticks);
  const int draws = 100000;
  std::vector<long> spike(5, 0);
  for (int i = 0; i < draws; ++i) {
    const auto [z, w3] = sample_w3_prior(hp, w, rng2);
    for (int j = 0; j < 5; ++j)
      if (z[j] <= j + 1) ++spike[j];
  }
  for (int j = 0; j < 5; ++j) {
    double cum = 0.0;
    for (int l = 0; l <= j; ++l) cum += w[l];
    const double se = std::sqrt(cum * (1.0 - cum) / draws);
    CHECK(std::fabs(spike[j] / (double)draws - cum) < 3.0 * se + 1e-12);
  }
}

TEST_CASE("sample_prior_component: shrinkage limit, variance, reproducibility") {
  auto hp = small_hp(4, 3, 2);
  Rng rng(11);
  auto s = sample_prior_shrinkage(hp, 0.5, rng);

  auto tiny = s;
  tiny.tau = 1e-16;
  tiny.phi = Vec::Constant(2, 0.5);
  auto c = sample_prior_component(hp, tiny, 0, rng);
  CHECK(c.alpha1.lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK(c.alpha2.lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK(c.alpha3.lpNorm<Eigen::Infinity>() < 1e-6);

  // empirical variance of alpha1_{h,k} over many draws ~ phi_h tau W1_{h,k}
  const int n = 100000;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto d = sample_prior_component(hp, s, 1, rng);
    s2 += d.alpha1[2] * d.alpha1[2];
  }
  const double want = s.phi[1] * s.tau * s.w1(1, 2);
  CHECK(s2 / n == doctest::Approx(want).epsilon(0.05));

  Rng ra(99), rb(99);
  const auto da = sample_prior_component(hp, s, 0, ra);
  const auto db = sample_prior_component(hp, s, 0, rb);
  CHECK((da.alpha1 - db.alpha1).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((da.alpha3 - db.alpha3).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("phi_h tau products are independent Gamma(alpha, b_tau) under a_tau = H alpha") {
  auto hp = small_hp(2, 2, 4);
  const double alpha = 0.4;
  Rng rng(13);
  const int n = 100000;
  std::vector<double> hierarchy(n), direct(n);
  for (int i = 0; i < n; ++i) {
    const double tau = rng.gamma(hp.h * alpha, hp.b_tau);
    const Vec phi = rng.dirichlet(alpha, hp.h);
    hierarchy[i] = phi[1] * tau;
    direct[i] = rng.gamma(alpha, hp.b_tau);
  }
  CHECK(teststats::ks_two_sample_p(hierarchy, direct) > 0.001);
}

TEST_CASE("log_prior_density: tau doubling, factorization, invariant violations") {
  auto hp = small_hp(3, 4, 2);
  Rng rng(17);
  auto s = sample_prior_shrinkage(hp, 0.5, rng);
  std::vector<TensorComponent> cs;
  for (int i = 0; i < hp.h; ++i) cs.push_back(sample_prior_component(hp, s, i, rng));

  const double base = log_prior_density(s, cs, hp, 0.5);
  CHECK(std::isfinite(base));

  // doubling tau: Gamma term + one -log(tau)/2 and alpha^2/(2 phi tau W) term per margin entry
  auto s2 = s;
  s2.tau = 2.0 * s.tau;
  double analytic = (hp.h * 0.5 - 1.0) * std::log(2.0) - hp.b_tau * s.tau;
  const int entries = hp.h * (2 * hp.n + hp.p);
  analytic += -0.5 * std::log(2.0) * entries;
  for (int i = 0; i < hp.h; ++i) {
    const double sc = s.phi[i] * s.tau;
    for (int k = 0; k < hp.n; ++k) {
      analytic += cs[i].alpha1[k] * cs[i].alpha1[k] / (2.0 * sc * s.w1(i, k)) * 0.5;
      analytic += cs[i].alpha2[k] * cs[i].alpha2[k] / (2.0 * sc * s.w2(i, k)) * 0.5;
    }
    for (int j = 0; j < hp.p; ++j)
      analytic += cs[i].alpha3[j] * cs[i].alpha3[j] / (2.0 * sc * s.w3(i, j)) * 0.5;
  }
  CHECK(log_prior_density(s2, cs, hp, 0.5) - base == doctest::Approx(analytic).epsilon(1e-10));

  // changing a single alpha1 entry changes the density by the Gaussian ratio only
  auto cs2 = cs;
  cs2[0].alpha1[1] += 0.7;
  const double got = log_prior_density(s, cs2, hp, 0.5) - base;
  const double var = s.phi[0] * s.tau * s.w1(0, 1);
  const double want =
      log_normal_pdf(cs2[0].alpha1[1], var) - log_normal_pdf(cs[0].alpha1[1], var);
  CHECK(got == doctest::Approx(want).epsilon(1e-12));

  auto bad = s;
  bad.phi[0] += 0.1;
  CHECK_THROWS_AS(log_prior_density(bad, cs, hp, 0.5), std::domain_error);
}

TEST_CASE("increasing shrinkage: prior spike probability nondecreasing in lag") {
  auto hp = small_hp(2, 6, 1);
  Rng rng(19);
  const int n = 60000;
  std::vector<long> spike(6, 0);
  for (int i = 0; i < n; ++i) {
    const auto s = sample_prior_shrinkage(hp, 0.5, rng);
    for (int j = 0; j < 6; ++j)
      if (s.z(0, j) <= j + 1) ++spike[j];
  }
  for (int j = 1; j < 6; ++j) CHECK(spike[j] + 3 * std::sqrt((double)n) / 2 >= spike[j - 1]);
}

// The scalar densities against independently coded oracles (different
// arithmetic route: tgamma / change of variables / beta function).
TEST_CASE("scalar density helpers agree with independent oracles") {
  Rng rng(23);
  for (int rep = 0; rep < 200; ++rep) {
    const double x = 0.05 + 3.0 * rng.uniform();
    const double a = 0.5 + 4.0 * rng.uniform();
    const double b = 0.2 + 2.0 * rng.uniform();

    const double gamma_oracle =
        std::log(std::pow(b, a) * std::pow(x, a - 1.0) * std::exp(-b * x) / std::tgamma(a));
    CHECK(log_gamma_pdf(x, a, b) == doctest::Approx(gamma_oracle).epsilon(1e-10));

    // InvGamma via change of variables from the Gamma oracle: f_X(x) = f_Y(1/x)/x^2
    const double ig_oracle =
        std::log(std::pow(b, a) * std::pow(1.0 / x, a - 1.0) * std::exp(-b / x) /
                 std::tgamma(a) / (x * x));
    CHECK(log_inv_gamma_pdf(x, a, b) == doctest::Approx(ig_oracle).epsilon(1e-10));

    const double u = x / 4.0;  // in (0, 0.8)
    const double beta_fn = std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b);
    const double beta_oracle =
        std::log(std::pow(u, a - 1.0) * std::pow(1.0 - u, b - 1.0) / beta_fn);
    CHECK(log_beta_pdf(u, a, b) == doctest::Approx(beta_oracle).epsilon(1e-10));

    const double normal_oracle =
        std::log(std::exp(-x * x / (2.0 * b)) / std::sqrt(2.0 * M_PI * b));
    CHECK(log_normal_pdf(x, b) == doctest::Approx(normal_oracle).epsilon(1e-10));
  }

  // giG order-1/2 normalizer against quadrature
  const double a = 1.7, b = 0.9;
  const double mass = teststats::integrate(
      [&](double x) { return x <= 0.0 ? 0.0 : std::exp(log_gig_half_pdf(x, a, b)); }, 1e-9,
      120.0);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));

  // Student t against quadrature of its own normalization plus a moment
  const double nu = 4.0, s2 = 1.3;
  const double t_mass = teststats::integrate(
      [&](double x) { return std::exp(log_student_t_pdf(x, nu, s2)); }, -400.0, 400.0, 400001);
  CHECK(t_mass == doctest::Approx(1.0).epsilon(1e-6));
}
