#include "btvtvar/sim_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace btvtvar {

void SimDesign::finalize() {
  if (noise_sd.size() == 0) {
    noise_sd = Vec(n);
    for (int i = 0; i < n; ++i) noise_sd[i] = (i + 1) / 5.0;
  }
  if (noise_sd.size() != n) throw std::invalid_argument("SimDesign: noise_sd length != N");
  for (int i = 0; i < n; ++i)
    if (!(noise_sd[i] > 0.0)) throw std::invalid_argument("SimDesign: noise_sd must be positive");
}

namespace {

// Every subset of components (including all of them) must give a stationary
// composition.
bool all_subsets_stationary(const std::vector<TensorComponent>& components) {
  const int h = static_cast<int>(components.size());
  const int n = components[0].n(), p = components[0].p();
  std::vector<CoefMatrixSet> bases;
  bases.reserve(h);
  for (const auto& c : components) bases.push_back(matricize_component(c));
  for (unsigned mask = 1; mask < (1u << h); ++mask) {
    CoefMatrixSet sum{std::vector<Mat>(p, Mat::Zero(n, n))};
    for (int i = 0; i < h; ++i)
      if (mask & (1u << i))
        for (int j = 0; j < p; ++j) sum.matrices[j] += bases[i].matrices[j];
    if (!is_stationary(sum)) return false;
  }
  return true;
}

TensorComponent spike_slab_component(int n, int p, double inclusion, Rng& rng) {
  TensorComponent c;
  c.alpha1 = Vec(n);
  c.alpha2 = Vec(n);
  c.alpha3 = Vec(p);
  for (int k = 0; k < n; ++k) c.alpha1[k] = rng.bernoulli(inclusion) ? rng.normal() : 0.0;
  for (int k = 0; k < n; ++k) c.alpha2[k] = rng.bernoulli(inclusion) ? rng.normal() : 0.0;
  for (int j = 0; j < p; ++j) c.alpha3[j] = rng.bernoulli(inclusion) ? rng.normal() : 0.0;
  return c;
}

std::vector<TensorComponent> draw_stationary_components(int n, int p, int h, double inclusion,
                                                        Rng& rng) {
  for (int attempt = 0; attempt < kMaxStationarityRejects; ++attempt) {
    std::vector<TensorComponent> components;
    components.reserve(h);
    for (int i = 0; i < h; ++i) components.push_back(spike_slab_component(n, p, inclusion, rng));
    if (all_subsets_stationary(components)) return components;
  }
  throw std::runtime_error("stationarity rejection cap reached; check the design");
}

}  // namespace

std::pair<TimeSeries, SimTruth> generate_study1_dataset(const SimDesign& design, Rng& rng) {
  SimDesign d = design;
  d.finalize();
  SimTruth truth;
  truth.components = draw_stationary_components(d.n, d.p_true, d.h_true, d.inclusion_prob, rng);
  truth.noise_sd = d.noise_sd;
  const int len = d.t_len - d.p_true;
  for (int h = 0; h < d.h_true; ++h) {
    const NdarmaParams np{rng.uniform(), rng.uniform()};
    truth.paths.push_back({ndarma_sample_path(np, len, rng)});
  }
  TimeSeries data = simulate_var_rng(truth.components, truth.paths, d.noise_sd, d.t_len, rng);
  return {std::move(data), std::move(truth)};
}

std::pair<TimeSeries, SimTruth> generate_study2_dataset(Rng& rng) {
  const int n = 40, t_len = 300, p = 3, h = 3;
  SimTruth truth;
  truth.components = draw_stationary_components(n, p, h, 0.5, rng);
  truth.noise_sd = Vec(n);
  for (int i = 0; i < n; ++i) {
    const double var = (i + 1 <= 25) ? (i + 1) / 5.0 : (51.0 - (i + 1)) / 5.0;
    truth.noise_sd[i] = std::sqrt(var);
  }
  // fixed activation blocks (1-based t): {1,2} on [P+1,100], {1,3} on
  // [101,200], {3} on [201,300]
  const int len = t_len - p;
  std::vector<std::vector<int>> gamma(h, std::vector<int>(len, 0));
  for (int i = 0; i < len; ++i) {
    const int t = p + 1 + i;
    if (t <= 100) {
      gamma[0][i] = 1;
      gamma[1][i] = 1;
    } else if (t <= 200) {
      gamma[0][i] = 1;
      gamma[2][i] = 1;
    } else {
      gamma[2][i] = 1;
    }
  }
  for (int i = 0; i < h; ++i) truth.paths.push_back({gamma[i]});
  TimeSeries data = simulate_var_rng(truth.components, truth.paths, truth.noise_sd, t_len, rng);
  return {std::move(data), std::move(truth)};
}

namespace {

double sum_frobenius(const std::vector<CoefMatrixSet>& a, const std::vector<CoefMatrixSet>& b,
                     bool squared) {
  if (a.size() != b.size()) throw std::invalid_argument("err: per-t list length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].p() != b[i].p() || a[i].n() != b[i].n())
      throw std::invalid_argument("err: matrix dimensions mismatch");
    for (int j = 0; j < a[i].p(); ++j) {
      const double f = (a[i].matrices[j] - b[i].matrices[j]).norm();
      acc += squared ? f * f : f;
    }
  }
  return acc;
}

}  // namespace

double err_coefficients(const std::vector<CoefMatrixSet>& estimated,
                        const std::vector<CoefMatrixSet>& truth) {
  if (estimated.empty()) throw std::invalid_argument("err_coefficients: empty input");
  const double n = estimated[0].n(), p = estimated[0].p();
  const double denom = static_cast<double>(estimated.size()) * n * n * p;
  return std::sqrt(sum_frobenius(estimated, truth, false) / denom);
}

double err_coefficients_rms(const std::vector<CoefMatrixSet>& estimated,
                            const std::vector<CoefMatrixSet>& truth) {
  if (estimated.empty()) throw std::invalid_argument("err_coefficients_rms: empty input");
  const double n = estimated[0].n(), p = estimated[0].p();
  const double denom = static_cast<double>(estimated.size()) * n * n * p;
  return std::sqrt(sum_frobenius(estimated, truth, true) / denom);
}

ComponentErr err_components(const std::vector<CoefMatrixSet>& estimated,
                            const std::vector<CoefMatrixSet>& truth,
                            const std::vector<int>& matching) {
  if (truth.empty()) throw std::invalid_argument("err_components: no true components");
  const int n = truth[0].n(), p = truth[0].p();
  std::vector<int> est_of_truth(truth.size(), -1);
  for (std::size_t e = 0; e < matching.size(); ++e)
    if (matching[e] >= 0) est_of_truth[matching[e]] = static_cast<int>(e);

  ComponentErr out;
  double nz_sum = 0.0, z_sum = 0.0;
  long nz_cnt = 0, z_cnt = 0;
  for (std::size_t m = 0; m < truth.size(); ++m) {
    const Mat zero = Mat::Zero(n, n);
    double acc = 0.0;
    for (int j = 0; j < p; ++j) {
      const Mat& est = est_of_truth[m] >= 0 ? estimated[est_of_truth[m]].matrices[j] : zero;
      const Mat diff = est - truth[m].matrices[j];
      acc += diff.norm();
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          if (truth[m].matrices[j](r, c) != 0.0) {
            nz_sum += std::fabs(diff(r, c));
            ++nz_cnt;
          } else {
            z_sum += std::fabs(diff(r, c));
            ++z_cnt;
          }
        }
    }
    out.per_component.push_back(std::sqrt(acc / (n * n * p)));
  }
  out.all = std::accumulate(out.per_component.begin(), out.per_component.end(), 0.0) /
            out.per_component.size();
  out.nonzero = nz_cnt > 0 ? nz_sum / nz_cnt : 0.0;
  out.zero = z_cnt > 0 ? z_sum / z_cnt : 0.0;
  return out;
}

std::vector<int> detect_empty_components(const std::vector<CoefMatrixSet>& estimated,
                                         double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("detect_empty_components: threshold <= 0");
  std::vector<int> empty;
  for (std::size_t h = 0; h < estimated.size(); ++h) {
    double max_norm = 0.0;
    for (const auto& m : estimated[h].matrices)
      max_norm = std::max(max_norm, m.template lpNorm<Eigen::Infinity>());
    if (max_norm < threshold) empty.push_back(static_cast<int>(h));
  }
  return empty;
}

namespace {

double component_distance(const CoefMatrixSet& a, const CoefMatrixSet& b) {
  double acc = 0.0;
  for (int j = 0; j < a.p(); ++j) acc += (a.matrices[j] - b.matrices[j]).squaredNorm();
  return std::sqrt(acc);
}

}  // namespace

std::vector<int> match_components(const std::vector<CoefMatrixSet>& estimated,
                                  const std::vector<CoefMatrixSet>& truth,
                                  const std::vector<int>& empty_estimates) {
  std::vector<int> matching(estimated.size(), -1);
  std::vector<bool> est_used(estimated.size(), false), truth_used(truth.size(), false);
  for (int e : empty_estimates) est_used[e] = true;
  for (;;) {
    double best = std::numeric_limits<double>::infinity();
    int be = -1, bt = -1;
    for (std::size_t e = 0; e < estimated.size(); ++e) {
      if (est_used[e]) continue;
      for (std::size_t t = 0; t < truth.size(); ++t) {
        if (truth_used[t]) continue;
        const double d = component_distance(estimated[e], truth[t]);
        if (d < best) {
          best = d;
          be = static_cast<int>(e);
          bt = static_cast<int>(t);
        }
      }
    }
    if (be < 0) break;
    matching[be] = bt;
    est_used[be] = true;
    truth_used[bt] = true;
  }
  return matching;
}

std::vector<int> match_components_optimal(const std::vector<CoefMatrixSet>& estimated,
                                          const std::vector<CoefMatrixSet>& truth,
                                          const std::vector<int>& empty_estimates) {
  std::vector<int> live;
  for (std::size_t e = 0; e < estimated.size(); ++e)
    if (std::find(empty_estimates.begin(), empty_estimates.end(), (int)e) ==
        empty_estimates.end())
      live.push_back(static_cast<int>(e));

  std::vector<int> truth_idx(truth.size());
  std::iota(truth_idx.begin(), truth_idx.end(), 0);
  std::vector<int> best_matching(estimated.size(), -1);
  double best_cost = std::numeric_limits<double>::infinity();

  // enumerate injective assignments over the smaller side
  std::vector<int> perm(truth_idx);
  std::sort(perm.begin(), perm.end());
  do {
    double cost = 0.0;
    std::vector<int> matching(estimated.size(), -1);
    const std::size_t k = std::min(live.size(), perm.size());
    for (std::size_t i = 0; i < k; ++i) {
      matching[live[i]] = perm[i];
      cost += component_distance(estimated[live[i]], truth[perm[i]]);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_matching = matching;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best_matching;
}

GammaMetrics gamma_classification(const std::vector<ActivationPath>& estimated,
                                  const std::vector<ActivationPath>& truth,
                                  const std::vector<int>& matching) {
  GammaMetrics m;
  for (std::size_t e = 0; e < matching.size(); ++e) {
    if (matching[e] < 0) continue;
    const auto& est = estimated[e].gamma;
    const auto& tru = truth[matching[e]].gamma;
    const int len = static_cast<int>(std::min(est.size(), tru.size()));
    const int oe = static_cast<int>(est.size()) - len;
    const int ot = static_cast<int>(tru.size()) - len;
    for (int i = 0; i < len; ++i) {
      const int a = est[oe + i], b = tru[ot + i];
      if (a == 1 && b == 1) ++m.tp;
      if (a == 0 && b == 0) ++m.tn;
      if (a == 1 && b == 0) ++m.fp;
      if (a == 0 && b == 1) ++m.fn;
    }
  }
  const long total = m.tp + m.tn + m.fp + m.fn;
  if (total > 0) m.accuracy = (m.tp + m.tn) / static_cast<double>(total);
  if (m.tp + m.fn > 0) m.sensitivity = m.tp / static_cast<double>(m.tp + m.fn);
  if (m.tn + m.fp > 0) m.specificity = m.tn / static_cast<double>(m.tn + m.fp);
  if (m.tp + m.fp > 0) m.precision = m.tp / static_cast<double>(m.tp + m.fp);
  return m;
}

namespace {

// Pad a coefficient set with zero matrices up to order p.
CoefMatrixSet pad_to(const CoefMatrixSet& set, int p, int n) {
  CoefMatrixSet out = set;
  while (out.p() < p) out.matrices.push_back(Mat::Zero(n, n));
  return out;
}

}  // namespace

EvalReport evaluate_fit(const FitResult& fit, const SimTruth& truth, double empty_threshold) {
  EvalReport report;
  const int n = fit.n_dim;
  const int p_true = truth.components[0].p();
  const int p_eval = std::max(fit.p, p_true);
  const int t_len = fit.t_len;
  const int first_t = std::max(fit.p, p_true) + 1;  // 1-based

  // per-t coefficient error over the overlapping range
  std::vector<CoefMatrixSet> est_a, true_a;
  for (int t = first_t; t <= t_len; ++t) {
    est_a.push_back(pad_to(fit.posterior_mean_a[t - fit.p - 1], p_eval, n));
    true_a.push_back(
        pad_to(compose_time_coefficients(truth.components, truth.paths, t, t_len), p_eval, n));
  }
  report.err_a = err_coefficients(est_a, true_a);

  // component bases, padded, matched after removing empty estimates
  std::vector<CoefMatrixSet> est_bases, true_bases;
  for (const auto& b : fit.posterior_mean_bases) est_bases.push_back(pad_to(b, p_eval, n));
  for (const auto& c : truth.components)
    true_bases.push_back(pad_to(matricize_component(c), p_eval, n));
  report.empty_components = detect_empty_components(est_bases, empty_threshold);
  report.matching = match_components(est_bases, true_bases, report.empty_components);
  report.err_comp = err_components(est_bases, true_bases, report.matching);

  report.gamma = gamma_classification(summarize_gamma(fit, 0.5), truth.paths, report.matching);

  double lag_norm = 0.0;
  for (const auto& at : fit.posterior_mean_a) lag_norm += at.matrices[fit.p - 1].norm();
  report.lag_p_frobenius_mean = lag_norm / fit.posterior_mean_a.size();
  return report;
}

}  // namespace btvtvar
