#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "btvtvar/tensor_var.hpp"
#include "doctest.h"

using namespace btvtvar;

namespace {

TensorComponent random_component(Rng& rng, int n, int p, double scale = 1.0) {
  TensorComponent c;
  c.alpha1 = Vec::NullaryExpr(n, [&](Eigen::Index) { return scale * rng.normal(); });
  c.alpha2 = Vec::NullaryExpr(n, [&](Eigen::Index) { return scale * rng.normal(); });
  c.alpha3 = Vec::NullaryExpr(p, [&](Eigen::Index) { return scale * rng.normal(); });
  return c;
}

// Independent triple-loop oracle for the matricization.
std::vector<Mat> matricize_oracle(const TensorComponent& c) {
  const int n = c.n(), p = c.p();
  std::vector<Mat> out(p, Mat::Zero(n, n));
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) out[j](i, k) = c.alpha3[j] * c.alpha1[i] * c.alpha2[k];
  return out;
}

}  // namespace

TEST_CASE("matricize: unit vectors give a single 1 at (1,1)") {
  TensorComponent c;
  c.alpha1 = Vec::Zero(3);
  c.alpha1[0] = 1.0;
  c.alpha2 = c.alpha1;
  c.alpha3 = Vec::Zero(2);
  c.alpha3[0] = 1.0;
  const auto set = matricize_component(c);
  CHECK(set.matrices[0](0, 0) == 1.0);
  CHECK(set.matrices[0].sum() == 1.0);
  CHECK(set.matrices[1].isZero(0.0));
}

TEST_CASE("matricize: zero lag mode zeroes every matrix") {
  Rng rng(1);
  auto c = random_component(rng, 4, 3);
  c.alpha3.setZero();
  for (const auto& m : matricize_component(c).matrices) CHECK(m.isZero(0.0));
}

TEST_CASE("matricize matches triple-loop oracle; ratio of consecutive lag matrices") {
  Rng rng(2);
  const auto c = random_component(rng, 3, 2);
  const auto got = matricize_component(c);
  const auto want = matricize_oracle(c);
  for (int j = 0; j < 2; ++j) CHECK((got.matrices[j] - want[j]).lpNorm<Eigen::Infinity>() < 1e-15);
  // element-by-element ratio of A*_1 to A*_2 equals alpha3[0]/alpha3[1]
  const double r = c.alpha3[0] / c.alpha3[1];
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      if (got.matrices[1](i, k) != 0.0)
        CHECK(got.matrices[0](i, k) / got.matrices[1](i, k) == doctest::Approx(r).epsilon(1e-12));
}

TEST_CASE("matricize linearity and rescaling invariance") {
  Rng rng(3);
  const auto c = random_component(rng, 5, 3);
  auto scaled = c;
  scaled.alpha3 *= 2.5;
  const auto a = matricize_component(c), b = matricize_component(scaled);
  for (int j = 0; j < 3; ++j)
    CHECK((b.matrices[j] - 2.5 * a.matrices[j]).lpNorm<Eigen::Infinity>() < 1e-14);

  // nu1*nu2*nu3 = 1 leaves the product unchanged to 1e-12 relative tolerance
  auto re = c;
  const double nu1 = 3.0, nu2 = -0.25, nu3 = 1.0 / (nu1 * nu2);
  re.alpha1 *= nu1;
  re.alpha2 *= nu2;
  re.alpha3 *= nu3;
  const auto d = matricize_component(re);
  for (int j = 0; j < 3; ++j) {
    const double denom = a.matrices[j].lpNorm<Eigen::Infinity>();
    CHECK((d.matrices[j] - a.matrices[j]).lpNorm<Eigen::Infinity>() / denom < 1e-12);
  }
}

TEST_CASE("compose: zero paths, single active component, oracle sum") {
  Rng rng(4);
  const int n = 3, p = 2, t_len = 10;
  std::vector<TensorComponent> cs;
  for (int h = 0; h < 3; ++h) cs.push_back(random_component(rng, n, p));
  std::vector<ActivationPath> zero(3, ActivationPath{std::vector<int>(t_len - p, 0)});

  auto set = compose_time_coefficients(cs, zero, p + 1, t_len);
  for (const auto& m : set.matrices) CHECK(m.isZero(0.0));

  // H=1 with gamma=1 equals the matricization
  std::vector<ActivationPath> ones(1, ActivationPath{std::vector<int>(t_len - p, 1)});
  auto single = compose_time_coefficients({cs[0]}, ones, t_len, t_len);
  const auto want = matricize_component(cs[0]);
  for (int j = 0; j < p; ++j)
    CHECK((single.matrices[j] - want.matrices[j]).lpNorm<Eigen::Infinity>() == 0.0);

  // random gammas equal a naive oracle sum
  std::vector<ActivationPath> paths;
  for (int h = 0; h < 3; ++h) {
    std::vector<int> g(t_len - p);
    for (auto& v : g) v = rng.bernoulli(0.5);
    paths.push_back({g});
  }
  const int t = 6;
  auto got = compose_time_coefficients(cs, paths, t, t_len);
  std::vector<Mat> oracle(p, Mat::Zero(n, n));
  for (int h = 0; h < 3; ++h)
    if (paths[h].gamma[t - p - 1])
      for (int j = 0; j < p; ++j) oracle[j] += matricize_oracle(cs[h])[j];
  for (int j = 0; j < p; ++j)
    CHECK((got.matrices[j] - oracle[j]).lpNorm<Eigen::Infinity>() < 1e-14);

  CHECK_THROWS_AS(compose_time_coefficients(cs, paths, p, t_len), std::out_of_range);
  CHECK_THROWS_AS(compose_time_coefficients(cs, paths, t_len + 1, t_len), std::out_of_range);
}

TEST_CASE("compose additive over paths with disjoint support") {
  Rng rng(5);
  const int n = 2, p = 2, t_len = 8;
  std::vector<TensorComponent> cs = {random_component(rng, n, p), random_component(rng, n, p)};
  std::vector<int> ga = {1, 0, 1, 0, 0, 0}, gb = {0, 1, 0, 0, 1, 0};
  std::vector<int> gsum(ga.size());
  for (std::size_t i = 0; i < ga.size(); ++i) gsum[i] = ga[i] + gb[i];
  for (int t = p + 1; t <= t_len; ++t) {
    auto both = compose_time_coefficients(cs, {{gsum}, {gsum}}, t, t_len);
    auto a = compose_time_coefficients(cs, {{ga}, {ga}}, t, t_len);
    auto b = compose_time_coefficients(cs, {{gb}, {gb}}, t, t_len);
    for (int j = 0; j < p; ++j)
      CHECK((both.matrices[j] - a.matrices[j] - b.matrices[j]).lpNorm<Eigen::Infinity>() < 1e-14);
  }
}

TEST_CASE("var_predict trivial and oracle cases") {
  CoefMatrixSet zero;
  zero.matrices = {Mat::Zero(2, 2), Mat::Zero(2, 2)};
  Mat hist(2, 2);
  hist << 1.0, 2.0, 3.0, 4.0;
  CHECK(var_predict(hist, zero).isZero(0.0));

  CoefMatrixSet ident;
  ident.matrices = {Mat::Identity(2, 2)};
  Mat one(1, 2);
  one << 5.0, -1.0;
  const Vec got = var_predict(one, ident);
  CHECK(got[0] == 5.0);
  CHECK(got[1] == -1.0);

  Rng rng(6);
  CoefMatrixSet rnd;
  rnd.matrices = {Mat::NullaryExpr(2, 2, [&](Eigen::Index, Eigen::Index) { return rng.normal(); }),
                  Mat::NullaryExpr(2, 2, [&](Eigen::Index, Eigen::Index) { return rng.normal(); })};
  Mat h2(2, 2);
  h2 << 0.3, -0.7, 1.1, 0.2;
  Vec oracle = Vec::Zero(2);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) oracle[i] += rnd.matrices[j](i, k) * h2(j, k);
  CHECK((var_predict(h2, rnd) - oracle).lpNorm<Eigen::Infinity>() < 1e-14);

  Mat bad(1, 2);
  CHECK_THROWS_AS(var_predict(bad, rnd), std::invalid_argument);
}

TEST_CASE("simulate_var determinism, zero-noise limit, domain errors") {
  Rng rng(7);
  const int n = 2, p = 1, t_len = 30;
  auto c = random_component(rng, n, p, 0.3);
  std::vector<ActivationPath> paths = {{std::vector<int>(t_len - p, 1)}};
  Vec sigma = Vec::Constant(n, 0.5);
  Mat init = Mat::Zero(p, n);

  const auto a = simulate_var({c}, paths, sigma, init, t_len, 99);
  const auto b = simulate_var({c}, paths, sigma, init, t_len, 99);
  CHECK((a.values - b.values).lpNorm<Eigen::Infinity>() == 0.0);

  Vec tiny = Vec::Constant(n, 1e-300);
  auto zc = c;
  zc.alpha3.setZero();
  const auto z = simulate_var({zc}, paths, tiny, init, t_len, 1);
  CHECK(z.values.lpNorm<Eigen::Infinity>() < 1e-250);

  Vec badsigma = Vec::Zero(n);
  CHECK_THROWS_AS(simulate_var({c}, paths, badsigma, init, t_len, 1), std::domain_error);
}

TEST_CASE("simulate_var long-run lag-1 autocovariance matches A Var(y)") {
  // N=2, P=1, path all ones: Cov(y_t, y_{t-1}) = A Var(y).
  TensorComponent c;
  c.alpha1 = Vec(2);
  c.alpha1 << 0.8, 0.3;
  c.alpha2 = Vec(2);
  c.alpha2 << 0.5, -0.4;
  c.alpha3 = Vec::Constant(1, 0.9);
  const Mat a_mat = matricize_component(c).matrices[0];
  const int t_len = 100000;
  std::vector<ActivationPath> paths = {{std::vector<int>(t_len - 1, 1)}};
  Vec sigma(2);
  sigma << 1.0, 0.7;
  const auto ts = simulate_var({c}, paths, sigma, Mat::Zero(1, 2), t_len, 4242);

  Mat v = Mat::Zero(2, 2), c1 = Mat::Zero(2, 2);
  const int burn = 100;
  for (int t = burn; t < t_len; ++t) v += ts.values.row(t).transpose() * ts.values.row(t);
  for (int t = burn; t < t_len; ++t)
    c1 += ts.values.row(t).transpose() * ts.values.row(t - 1);
  v /= (t_len - burn);
  c1 /= (t_len - burn);
  const Mat want = a_mat * v;
  CHECK((c1 - want).norm() / want.norm() < 0.05);
}

TEST_CASE("is_stationary boundary cases and eigen oracle") {
  CoefMatrixSet zero;
  zero.matrices = {Mat::Zero(3, 3), Mat::Zero(3, 3)};
  CHECK(is_stationary(zero));

  CoefMatrixSet expl;
  expl.matrices = {1.5 * Mat::Identity(2, 2)};
  CHECK_FALSE(is_stationary(expl));

  CoefMatrixSet ar1;
  ar1.matrices = {Mat::Constant(1, 1, 0.9)};
  CHECK(is_stationary(ar1));
  ar1.matrices[0](0, 0) = 1.0;
  CHECK_FALSE(is_stationary(ar1));

  // independent companion construction + eigensolver as oracle
  Rng rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + (int)(rng.uniform() * 4), p = 1 + (int)(rng.uniform() * 3);
    CoefMatrixSet set;
    for (int j = 0; j < p; ++j)
      set.matrices.push_back(Mat::NullaryExpr(
          n, n, [&](Eigen::Index, Eigen::Index) { return 0.6 * rng.normal(); }));
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n * p, n * p);
    for (int j = 0; j < p; ++j)
      for (int r = 0; r < n; ++r)
        for (int k = 0; k < n; ++k) comp(r, j * n + k) = set.matrices[j](r, k);
    for (int i = 0; i < n * (p - 1); ++i) comp(n + i, i) = 1.0;
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(comp);
    double rho = 0.0;
    for (const auto& ev : solver.eigenvalues()) rho = std::max(rho, std::abs(ev));
    CHECK(is_stationary(set) == (rho < 1.0 - 1e-8));
  }
}
