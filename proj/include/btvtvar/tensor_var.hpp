#pragma once

#include <vector>

#include "btvtvar/rng.hpp"
#include "btvtvar/types.hpp"

namespace btvtvar {

// Margin below 1 on the companion spectral radius; strict inequality is
// numerically meaningless at machine precision.
constexpr double kStationarityMargin = 1e-8;

// Matricize one rank-1 base: matrix j has entry (i,k) = alpha3[j]*alpha1[i]*alpha2[k].
CoefMatrixSet matricize_component(const TensorComponent& c);

// A_{j,t} = sum_h gamma_{h,t} A*_{j,h}. `t` is the 1-based time index used in
// the interfaces (P+1 <= t <= T_len); paths are indexed from t = P+1.
CoefMatrixSet compose_time_coefficients(const std::vector<TensorComponent>& components,
                                        const std::vector<ActivationPath>& paths, int t,
                                        int t_len);

// One-step prediction sum_j A_j y_{t-j}; history rows ordered most-recent-first.
Vec var_predict(const Mat& y_history, const CoefMatrixSet& coefs);

// Forward simulation with eps_t ~ N(0, diag(sigma^2)); rows 1..P equal y_init.
TimeSeries simulate_var(const std::vector<TensorComponent>& components,
                        const std::vector<ActivationPath>& paths, const Vec& sigma,
                        const Mat& y_init, int t_len, std::uint64_t seed);

// Same recursion, but the first P rows are drawn i.i.d. N(0, sigma_i^2) from rng
// (the initialization used by the simulation studies).
TimeSeries simulate_var_rng(const std::vector<TensorComponent>& components,
                            const std::vector<ActivationPath>& paths, const Vec& sigma,
                            int t_len, Rng& rng);

// Companion-matrix stationarity: spectral radius < 1 - kStationarityMargin.
bool is_stationary(const CoefMatrixSet& coefs);

double companion_spectral_radius(const CoefMatrixSet& coefs);

}  // namespace btvtvar
