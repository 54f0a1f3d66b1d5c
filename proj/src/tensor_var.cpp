#include "btvtvar/tensor_var.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace btvtvar {

CoefMatrixSet matricize_component(const TensorComponent& c) {
  const int n = c.n();
  const int p = c.p();
  CoefMatrixSet out;
  out.matrices.reserve(p);
  const Mat outer = c.alpha1 * c.alpha2.transpose();
  for (int j = 0; j < p; ++j) out.matrices.push_back(c.alpha3[j] * outer);
  (void)n;
  return out;
}

CoefMatrixSet compose_time_coefficients(const std::vector<TensorComponent>& components,
                                        const std::vector<ActivationPath>& paths, int t,
                                        int t_len) {
  if (components.empty()) throw std::invalid_argument("compose: no components");
  const int n = components[0].n();
  const int p = components[0].p();
  if (t < p + 1 || t > t_len) throw std::out_of_range("compose: t outside P+1..T");
  for (const auto& c : components) check_component(c, n, p);

  CoefMatrixSet out;
  out.matrices.assign(p, Mat::Zero(n, n));
  const int idx = t - p - 1;  // 0-based position in the path
  for (std::size_t h = 0; h < components.size(); ++h) {
    if (idx >= paths[h].length()) throw std::out_of_range("compose: path too short for t");
    if (paths[h].gamma[idx] == 0) continue;
    const Mat outer = components[h].alpha1 * components[h].alpha2.transpose();
    for (int j = 0; j < p; ++j) out.matrices[j] += components[h].alpha3[j] * outer;
  }
  return out;
}

Vec var_predict(const Mat& y_history, const CoefMatrixSet& coefs) {
  const int p = coefs.p();
  const int n = coefs.n();
  if (y_history.rows() != p || y_history.cols() != n)
    throw std::invalid_argument("var_predict: history must be P x N, most-recent-first");
  Vec out = Vec::Zero(n);
  for (int j = 0; j < p; ++j) out += coefs.matrices[j] * y_history.row(j).transpose();
  return out;
}

namespace {

TimeSeries simulate_core(const std::vector<TensorComponent>& components,
                         const std::vector<ActivationPath>& paths, const Vec& sigma,
                         const Mat& y_init, int t_len, Rng& rng) {
  const int n = static_cast<int>(sigma.size());
  const int p = components.empty() ? static_cast<int>(y_init.rows()) : components[0].p();
  for (int i = 0; i < n; ++i)
    if (!(sigma[i] > 0.0)) throw std::domain_error("simulate_var: sigma must be positive");
  if (y_init.rows() != p || y_init.cols() != n)
    throw std::invalid_argument("simulate_var: y_init must be P x N");
  if (t_len <= p) throw std::invalid_argument("simulate_var: need T > P");
  for (const auto& path : paths)
    if (path.length() != t_len - p)
      throw std::invalid_argument("simulate_var: paths must cover t = P+1..T");

  TimeSeries ts;
  ts.values.resize(t_len, n);
  for (int t = 0; t < p; ++t) ts.values.row(t) = y_init.row(t);

  for (int t = p; t < t_len; ++t) {
    const CoefMatrixSet coefs =
        compose_time_coefficients(components, paths, t + 1, t_len);
    Vec mean = Vec::Zero(n);
    for (int j = 0; j < p; ++j)
      mean += coefs.matrices[j] * ts.values.row(t - 1 - j).transpose();
    for (int i = 0; i < n; ++i) ts.values(t, i) = mean[i] + sigma[i] * rng.normal();
  }
  return ts;
}

}  // namespace

TimeSeries simulate_var(const std::vector<TensorComponent>& components,
                        const std::vector<ActivationPath>& paths, const Vec& sigma,
                        const Mat& y_init, int t_len, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_core(components, paths, sigma, y_init, t_len, rng);
}

TimeSeries simulate_var_rng(const std::vector<TensorComponent>& components,
                            const std::vector<ActivationPath>& paths, const Vec& sigma,
                            int t_len, Rng& rng) {
  const int n = static_cast<int>(sigma.size());
  const int p = components[0].p();
  Mat y_init(p, n);
  for (int t = 0; t < p; ++t)
    for (int i = 0; i < n; ++i) y_init(t, i) = sigma[i] * rng.normal();
  return simulate_core(components, paths, sigma, y_init, t_len, rng);
}

double companion_spectral_radius(const CoefMatrixSet& coefs) {
  const int n = coefs.n();
  const int p = coefs.p();
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n * p, n * p);
  for (int j = 0; j < p; ++j) comp.block(0, j * n, n, n) = coefs.matrices[j];
  if (p > 1) comp.block(n, 0, n * (p - 1), n * (p - 1)).setIdentity();
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(comp, false).eigenvalues();
  double rho = 0.0;
  for (int i = 0; i < ev.size(); ++i) rho = std::max(rho, std::abs(ev[i]));
  return rho;
}

bool is_stationary(const CoefMatrixSet& coefs) {
  return companion_spectral_radius(coefs) < 1.0 - kStationarityMargin;
}

}  // namespace btvtvar
