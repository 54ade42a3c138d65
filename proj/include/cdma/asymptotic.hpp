#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cdma/errors.hpp"
#include "cdma/finite_bounds.hpp"
#include "cdma/noise.hpp"
#include "cdma/numerics.hpp"

/// Large-system limits (n, m -> infinity) of the finite bounds, plus the
/// replica-symmetric capacity formula used as a reference curve.
namespace cdma {

/// Either beta = n/m (noisy regime) or zeta = n/(m log2 n) (noiseless regime).
class LoadPoint {
 public:
  static LoadPoint from_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("LoadPoint: beta must be > 0");
    return LoadPoint(beta, false);
  }
  static LoadPoint from_zeta(double zeta) {
    if (!(zeta > 0.0) || !std::isfinite(zeta)) throw DomainError("LoadPoint: zeta must be > 0");
    return LoadPoint(zeta, true);
  }

  bool has_beta() const { return !is_zeta_; }
  double beta() const {
    if (is_zeta_) throw DomainError("LoadPoint: beta requested from a zeta load point");
    return value_;
  }
  double zeta() const {
    if (!is_zeta_) throw DomainError("LoadPoint: zeta requested from a beta load point");
    return value_;
  }

 private:
  LoadPoint(double v, bool is_zeta) : value_(v), is_zeta_(is_zeta) {}
  double value_;
  bool is_zeta_;
};

struct SaddleSearch {
  int t_grid_size = 2049;
  GammaSearch gamma;
  int refine_iters = 40;

  void validate() const {
    if (t_grid_size < 3) throw DomainError("SaddleSearch: t_grid_size must be >= 3");
    if (refine_iters < 0) throw DomainError("SaddleSearch: refine_iters must be >= 0");
    gamma.validate();
  }
};

/// Per-user asymptotic bound with the optimizer's location.
struct AsymptoticBound {
  double bits_per_user = 0.0;
  double raw = 0.0;  // before clamping to [0, 1]
  std::optional<double> gamma;
  std::optional<double> t;
};

/// min(1, 1/(2 zeta)); lower and upper limits coincide in the zeta regime.
inline double noiseless_limit(double zeta) {
  if (!(zeta > 0.0)) throw DomainError("noiseless_limit: zeta must be > 0");
  return std::min(1.0, 1.0 / (2.0 * zeta));
}

inline double noiseless_limit(const LoadPoint& load) { return noiseless_limit(load.zeta()); }

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be > 0");
}

/// sup over t in [0,1]: uniform grid including both endpoints, then golden
/// refinement around every grid-local maximum and inside both end cells,
/// where H'(t) blows up and a narrow peak can hide between grid points.
template <class F>
ScalarOptimum sup_over_unit_interval(F&& bracket, int grid_size, int refine_iters) {
  std::vector<double> v(grid_size);
  const double step = 1.0 / (grid_size - 1);
  ScalarOptimum best{0.0, kNegInf};
  for (int i = 0; i < grid_size; ++i) {
    v[i] = bracket(i * step);
    if (v[i] > best.value) best = {i * step, v[i]};
  }
  if (refine_iters <= 0) return best;
  auto refine = [&](int lo_i, int hi_i) {
    const double hi = hi_i == grid_size - 1 ? 1.0 : hi_i * step;
    const auto r = golden_maximize(bracket, lo_i * step, hi, refine_iters);
    if (r.value > best.value) best = r;
  };
  refine(0, 1);
  refine(grid_size - 2, grid_size - 1);
  for (int i = 1; i + 1 < grid_size; ++i)
    if (v[i] >= v[i - 1] && v[i] >= v[i + 1]) refine(i - 1, i + 1);
  return best;
}

// H(t) + (1/2beta)(gamma log2 e - log2(1 + gamma (sigma^2 + 4 t beta)/sigma^2))
inline double gaussian_saddle_bracket(double t, double gamma, double beta, double sigma2) {
  const double load = gamma * (sigma2 + 4.0 * t * beta) / sigma2;
  return binary_entropy(t) + (gamma * kLog2E - std::log1p(load) * kLog2E) / (2.0 * beta);
}

}  // namespace detail

/// 1 - inf_gamma sup_t of the Gaussian-noise exponent; clamped to [0, 1].
inline AsymptoticBound asympt_lower_gaussian(const LoadPoint& load, double sigma2, const SaddleSearch& search = {}) {
  const double beta = load.beta();
  detail::require_positive(sigma2, "asympt_lower_gaussian: sigma2");
  search.validate();
  auto sup_t = [&](double gamma) {
    return detail::sup_over_unit_interval(
        [&](double t) { return detail::gaussian_saddle_bracket(t, gamma, beta, sigma2); }, search.t_grid_size,
        search.refine_iters);
  };

  const auto& grid = search.gamma.log_grid;
  std::size_t best_i = 0;
  ScalarOptimum best_sup{0.0, std::numeric_limits<double>::infinity()};
  double best_gamma = grid.front();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto s = sup_t(grid[i]);
    if (s.value < best_sup.value) {
      best_sup = s;
      best_i = i;
      best_gamma = grid[i];
    }
  }
  if (grid.size() > 1 && search.gamma.refine_iters > 0) {
    const double lo = std::log(grid[best_i == 0 ? 0 : best_i - 1]);
    const double hi = std::log(grid[std::min(best_i + 1, grid.size() - 1)]);
    const auto refined =
        golden_maximize([&](double lg) { return -sup_t(std::exp(lg)).value; }, lo, hi, search.gamma.refine_iters);
    if (-refined.value < best_sup.value) {
      best_gamma = std::exp(refined.x);
      best_sup = sup_t(best_gamma);
    }
  }
  const double raw = 1.0 - best_sup.value;
  return {std::clamp(raw, 0.0, 1.0), raw, best_gamma, best_sup.x};
}

/// Single-sup approximation obtained by optimizing gamma inside the bracket
/// for each t; never below asympt_lower_gaussian.
inline AsymptoticBound d1_approx(const LoadPoint& load, double sigma2, const SaddleSearch& search = {}) {
  const double beta = load.beta();
  detail::require_positive(sigma2, "d1_approx: sigma2");
  search.validate();
  auto bracket = [&](double t) {
    const double x = 4.0 * t * beta;
    return binary_entropy(t) + kLog2E / (2.0 * beta) * (x / (sigma2 + x) - std::log1p(x / sigma2));
  };
  const auto s = detail::sup_over_unit_interval(bracket, search.t_grid_size, search.refine_iters);
  const double raw = 1.0 - s.value;
  return {std::clamp(raw, 0.0, 1.0), raw, std::nullopt, s.x};
}

/// Density of N + sqrt(beta) Z for N uniform on [-a, a].
inline double uniform_plus_gaussian_density(double x, double a, double beta) {
  const double s = std::sqrt(beta);
  return (q_function((x - a) / s) - q_function((x + a) / s)) / (2.0 * a);
}

/// min(1, (h(N + sqrt(beta) Z) - h(N)) / beta). Gaussian in closed form.
inline AsymptoticBound asympt_upper(const LoadPoint& load, const NoiseModel& model, const QuadratureConfig& cfg = {}) {
  const double beta = load.beta();
  if (model.is_noiseless()) throw UnsupportedOperation("asympt_upper: use noiseless_limit for the noiseless channel");
  double raw = 0.0;
  if (model.kind() == NoiseKind::gaussian) {
    raw = std::log1p(beta / model.sigma2()) * kLog2E / (2.0 * beta);
  } else {
    const double a = model.half_width();
    const double s = std::sqrt(beta);
    auto integrand = [&](double x) {
      const double p = uniform_plus_gaussian_density(x, a, beta);
      return p > 0.0 ? -p * std::log(p) : 0.0;
    };
    const double reach = a + 12.0 * s;
    std::vector<double> edges;
    constexpr int kPanels = 64;
    for (int i = 0; i <= kPanels; ++i) edges.push_back(-reach + 2.0 * reach * i / kPanels);
    edges.push_back(-a);
    edges.push_back(a);
    std::sort(edges.begin(), edges.end());
    const double h_sum = adaptive_quad_panels(integrand, edges, cfg);
    raw = nats_to_bits(h_sum - diff_entropy_nats(model)) / beta;
  }
  return {std::clamp(raw, 0.0, 1.0), raw, std::nullopt, std::nullopt};
}

inline AsymptoticBound asympt_upper(const LoadPoint& load, double sigma2) {
  return asympt_upper(load, NoiseModel::gaussian(sigma2));
}

/// One fixed point of the replica-symmetric equations.
struct TanakaBranch {
  double lambda = 0.0;
  double m_rep = 0.0;  // replica overlap, 0 <= m_rep < 1
  double c_per_user = 0.0;
  int iterations = 0;
  bool converged = false;
  double start = 0.0;
};

struct TanakaSolution {
  double lambda = 0.0;
  double m_rep = 0.0;
  double c_per_user = 0.0;
  int iterations = 0;
  bool converged = false;
  double start = 0.0;  // m_0 of the branch reported here
  std::optional<TanakaBranch> second_branch;
};

struct TanakaStep {
  double lambda;
  double next;  // E tanh(sqrt(lambda) Z + lambda)
};

/// lambda = 1/(sigma^2 + beta (1 - m)) and the overlap it induces.
inline TanakaStep tanaka_map(double beta, double sigma2, double m_rep, const GaussHermiteRule& rule) {
  const double lambda = 1.0 / (sigma2 + beta * (1.0 - m_rep));
  const double root = std::sqrt(lambda);
  const double next = rule.expectation([&](double z) { return std::tanh(root * z + lambda); });
  return {lambda, next};
}

namespace detail {

inline double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - kLn2;
}

inline TanakaBranch tanaka_iterate(double beta, double sigma2, double m0, const GaussHermiteRule& rule) {
  constexpr double kDamping = 0.5;
  constexpr double kTol = 1e-12;
  constexpr int kMaxIter = 10000;
  TanakaBranch b;
  b.start = m0;
  double m = m0;
  for (int it = 1; it <= kMaxIter; ++it) {
    const double next = (1.0 - kDamping) * m + kDamping * tanaka_map(beta, sigma2, m, rule).next;
    b.iterations = it;
    const bool done = std::abs(next - m) < kTol;
    m = next;
    if (done) {
      b.converged = true;
      break;
    }
  }
  b.m_rep = m;
  b.lambda = 1.0 / (sigma2 + beta * (1.0 - m));
  const double lambda = b.lambda;
  const double root = std::sqrt(lambda);
  const double g = 0.5 * lambda * (1.0 + m) - rule.expectation([&](double z) { return log_cosh(root * z + lambda); });
  b.c_per_user = nats_to_bits(std::log1p(beta * (1.0 - m) / sigma2) / (2.0 * beta) + g);
  return b;
}

}  // namespace detail

/// Replica-symmetric per-user capacity for Gaussian noise. Damped iteration
/// from m = 0 and from m = 1 - 1e-6. When they settle on different fixed
/// points both are reported; the headline is the one with the smaller value
/// of the free energy (equivalently of C), the other goes in second_branch.
inline TanakaSolution tanaka_capacity(const LoadPoint& load, double sigma2, const QuadratureConfig& cfg = {}) {
  const double beta = load.beta();
  detail::require_positive(sigma2, "tanaka_capacity: sigma2");
  cfg.validate();
  const GaussHermiteRule rule(cfg.hermite_order);
  const auto low = detail::tanaka_iterate(beta, sigma2, 0.0, rule);
  const auto high = detail::tanaka_iterate(beta, sigma2, 1.0 - 1e-6, rule);
  if (!low.converged && !high.converged) {
    throw ConvergenceError("tanaka_capacity: no convergence from either start (beta=" + format_double(beta) +
                           ", sigma2=" + format_double(sigma2) + ", last m=" + format_double(low.m_rep) + ")");
  }
  const bool pick_high = !low.converged || (high.converged && high.c_per_user < low.c_per_user - 1e-12);
  const TanakaBranch& head = pick_high ? high : low;
  const TanakaBranch& other = pick_high ? low : high;
  TanakaSolution sol{head.lambda, head.m_rep,  head.c_per_user, head.iterations,
                     head.converged, head.start, std::nullopt};
  if (other.converged && std::abs(other.m_rep - head.m_rep) > 1e-6) sol.second_branch = other;
  return sol;
}

}  // namespace cdma
