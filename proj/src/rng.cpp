#include "btvtvar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace btvtvar {

namespace {

constexpr double kLog2 = 0.6931471805599453;

// log(cosh(t)) without overflow for large |t|.
double log_cosh(double t) {
  const double a = std::fabs(t);
  return a + std::log1p(std::exp(-2.0 * a)) - kLog2;
}

// log(sinh(t)) for t > 0.
double log_sinh(double t) { return t + std::log1p(-std::exp(-2.0 * t)) - kLog2; }

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  // seed_seq's generate() is fully specified by the standard, so this is
  // reproducible across implementations.
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream & 0xffffffffu),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double Rng::uniform() {
  // 53-bit mantissa; offset keeps the value strictly inside (0,1).
  return (static_cast<double>(engine_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::domain_error("gamma: shape and rate must be positive");
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0, rate);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

double Rng::gig(double p, double a, double b) {
  if (b < 0.0 || a < 0.0) throw std::domain_error("gig: a, b must be nonnegative");
  if (b == 0.0) {
    if (!(p > 0.0)) throw std::domain_error("gig: b == 0 requires p > 0");
    return gamma(p, a / 2.0);
  }
  if (a == 0.0) {
    if (!(p < 0.0)) throw std::domain_error("gig: a == 0 requires p < 0");
    return inv_gamma(-p, b / 2.0);
  }

  // Scale out: X = sqrt(b/a) * Y with Y ~ ∝ y^{p-1} exp(-omega (y + 1/y)/2),
  // omega = sqrt(ab). In t = log y the density ∝ exp(phi(t)) with
  // phi(t) = q t - omega cosh t, strictly log-concave. Handle q < 0 by t -> -t.
  const double omega = std::sqrt(a) * std::sqrt(b);
  const double scale = std::sqrt(b / a);
  const double q = std::fabs(p);
  const double flip = (p < 0.0) ? -1.0 : 1.0;

  const double log_omega = std::log(omega);
  auto phi = [&](double t) {
    const double lc = log_omega + log_cosh(t);
    if (lc > 700.0) return -std::numeric_limits<double>::infinity();
    return q * t - std::exp(lc);
  };
  auto dphi = [&](double t) {
    // q - omega sinh t, stable for large |t|.
    const double at = std::fabs(t);
    double os;
    if (at < 1e-12) {
      os = omega * t;
    } else {
      const double ls = log_omega + log_sinh(at);
      os = (ls > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(ls));
      if (t < 0.0) os = -os;
    }
    return q - os;
  };

  const double t_mode = std::asinh(q / omega);
  const double phi_max = phi(t_mode);

  // Points one log-unit below the mode on each side, by bisection.
  auto drop_point = [&](double dir) {
    double step = 1.0;
    double hi = t_mode + dir * step;
    while (phi_max - phi(hi) < 1.0) {
      step *= 2.0;
      hi = t_mode + dir * step;
    }
    double lo = t_mode;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (phi_max - phi(mid) < 1.0)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double t_r = drop_point(+1.0);
  const double t_l = drop_point(-1.0);
  const double s_r = dphi(t_r);  // < 0
  const double s_l = dphi(t_l);  // > 0

  const double area_mid = t_r - t_l;
  const double area_r = std::exp(-1.0) / (-s_r);
  const double area_l = std::exp(-1.0) / s_l;
  const double total = area_mid + area_r + area_l;

  for (;;) {
    const double u = uniform() * total;
    double t, env;  // env = envelope log-height relative to phi_max
    if (u < area_mid) {
      t = t_l + uniform() * (t_r - t_l);
      env = 0.0;
    } else if (u < area_mid + area_r) {
      t = t_r - std::log(uniform()) / (-s_r);
      env = -1.0 + s_r * (t - t_r);
    } else {
      t = t_l + std::log(uniform()) / s_l;
      env = -1.0 + s_l * (t - t_l);
    }
    if (std::log(uniform()) < (phi(t) - phi_max) - env) return scale * std::exp(flip * t);
  }
}

Vec Rng::dirichlet(double alpha, int size) {
  Vec g(size);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    g[i] = gamma(alpha, 1.0);
    sum += g[i];
  }
  return g / sum;
}

int Rng::discrete_from_log_weights(const std::vector<double>& logw) {
  const double lse = log_sum_exp(logw);
  if (!std::isfinite(lse))
    throw std::runtime_error("discrete_from_log_weights: all weights underflow");
  const double u = uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    acc += std::exp(logw[i] - lse);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(logw.size()) - 1;
}

double log_sum_exp(const std::vector<double>& x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace btvtvar
