#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cdma/errors.hpp"

/// Scalar kernels shared by all bounds: log-space combinatorics, entropies,
/// the Gaussian tail and two quadrature engines. Everything is computed in
/// nats; the conversion to bits happens where a result leaves the library.
namespace cdma {

inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kLog2E = std::numbers::log2e;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double nats_to_bits(double nats) { return nats * kLog2E; }

/// Nonnegative real stored by its natural logarithm; -inf encodes zero.
struct LogNum {
  double log_value = kNegInf;

  static constexpr LogNum zero() { return {kNegInf}; }
  static constexpr LogNum one() { return {0.0}; }
  static LogNum from_value(double v) {
    if (v < 0.0) throw DomainError("LogNum: negative value");
    return {v == 0.0 ? kNegInf : std::log(v)};
  }

  double value() const { return std::exp(log_value); }
  bool is_zero() const { return log_value == kNegInf; }

  friend LogNum operator*(LogNum a, LogNum b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return {a.log_value + b.log_value};
  }
  friend LogNum operator/(LogNum a, LogNum b) {
    if (b.is_zero()) throw DomainError("LogNum: division by zero");
    if (a.is_zero()) return zero();
    return {a.log_value - b.log_value};
  }
  LogNum pow(double p) const {
    if (is_zero()) return p == 0.0 ? one() : zero();
    return {log_value * p};
  }
  friend bool operator==(LogNum, LogNum) = default;
};

namespace detail {

// ln k! - (k ln k - k + 0.5 ln(2 pi k)) for small k, exact via summed logs.
inline double stirling_error(std::uint64_t k) {
  constexpr std::uint64_t kTable = 16;
  static const std::array<double, kTable> table = [] {
    std::array<double, kTable> t{};
    long double log_fact = 0.0L;
    for (std::uint64_t i = 1; i < kTable; ++i) {
      log_fact += std::log(static_cast<long double>(i));
      const long double x = static_cast<long double>(i);
      t[i] = static_cast<double>(log_fact -
                                 (x * std::log(x) - x + 0.5L * std::log(2.0L * std::numbers::pi_v<long double> * x)));
    }
    return t;
  }();
  if (k < kTable) return table[k];
  const double x = static_cast<double>(k);
  const double x2 = x * x;
  return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x;
}

}  // namespace detail

/// ln C(n, k). Stirling form with exact small-argument corrections: the
/// leading term k ln(n/k) - (n-k) ln(1 - k/n) has no cancellation, so the
/// relative error stays near machine precision for large n.
inline LogNum log_binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) {
    throw DomainError("log_binomial: need 0 <= k <= n, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
  k = std::min(k, n - k);
  if (k == 0) return LogNum::one();
  const auto un = static_cast<std::uint64_t>(n);
  const auto uk = static_cast<std::uint64_t>(k);
  const double dn = static_cast<double>(n);
  const double dk = static_cast<double>(k);
  const double dr = dn - dk;
  const double lead = dk * std::log(dn / dk) - dr * std::log1p(-dk / dn);
  const double prefactor = 0.5 * std::log(dn / (2.0 * std::numbers::pi * dk * dr));
  const double corr =
      detail::stirling_error(un) - detail::stirling_error(uk) - detail::stirling_error(un - uk);
  return {lead + prefactor + corr};
}

/// ln sum exp(terms), shifted by the maximum. Zero terms (-inf) are skipped.
inline LogNum log_sum_exp(std::span<const LogNum> terms) {
  if (terms.empty()) throw DomainError("log_sum_exp: empty sequence");
  if (terms.size() == 1) return terms.front();
  double peak = kNegInf;
  for (const auto& t : terms) peak = std::max(peak, t.log_value);
  if (peak == kNegInf) return LogNum::zero();
  if (peak == std::numeric_limits<double>::infinity()) return {peak};
  double acc = 0.0;
  for (const auto& t : terms) acc += std::exp(t.log_value - peak);
  return {peak + std::log(acc)};
}

inline LogNum log_sum_exp(std::initializer_list<LogNum> terms) {
  return log_sum_exp(std::span<const LogNum>(terms.begin(), terms.size()));
}

/// Binary entropy in bits with 0 log 0 = 0.
inline double binary_entropy(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("binary_entropy: t outside [0,1]");
  if (t == 0.0 || t == 1.0) return 0.0;
  return -(t * std::log2(t) + (1.0 - t) * std::log2(1.0 - t));
}

/// Gaussian tail P(Z > x).
inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

struct QuadratureConfig {
  int hermite_order = 61;
  double adaptive_tol = 1e-10;
  int max_depth = 50;

  void validate() const {
    if (hermite_order < 2) throw DomainError("QuadratureConfig: hermite_order must be >= 2");
    if (!(adaptive_tol > 0.0)) throw DomainError("QuadratureConfig: adaptive_tol must be > 0");
    if (max_depth < 1) throw DomainError("QuadratureConfig: max_depth must be >= 1");
  }
};

/// Gauss-Hermite rule for the weight exp(-x^2). Positive roots of the
/// orthonormal Hermite recurrence are bracketed by sign changes on a grid
/// finer than the smallest root gap, then polished by safeguarded Newton.
/// The recurrence is rescaled as it grows so large orders do not overflow.
/// The rule is exactly symmetric.
class GaussHermiteRule {
 public:
  explicit GaussHermiteRule(int order) {
    if (order < 2) throw DomainError("GaussHermiteRule: order must be >= 2");
    const int n = order;
    nodes_.assign(n, 0.0);
    weights_.assign(n, 0.0);
    const int half = n / 2;

    std::vector<double> roots;
    roots.reserve(half);
    const double h = 0.05 * std::numbers::pi / std::sqrt(2.0 * n + 1.0);
    const double z_max = std::sqrt(2.0 * n + 1.0) + 1.0;
    // Odd orders have a root at zero; start just past it.
    double a = n % 2 == 1 ? 0.5 * h : 0.0;
    double fa = eval(n, a).p;
    while (a < z_max && static_cast<int>(roots.size()) < half) {
      const double b = a + h;
      const double fb = eval(n, b).p;
      if ((fa < 0.0) != (fb < 0.0)) roots.push_back(polish(n, a, b, fa));
      a = b;
      fa = fb;
    }
    if (static_cast<int>(roots.size()) != half)
      throw AccuracyError("GaussHermiteRule: located " + std::to_string(roots.size()) + " of " + std::to_string(half) +
                              " positive roots",
                          0.0);

    // Largest first, mirrored below.
    for (int i = 0; i < half; ++i) {
      const double z = roots[half - 1 - i];
      nodes_[i] = z;
      nodes_[n - 1 - i] = -z;
      weights_[i] = weight_at(n, z);
      weights_[n - 1 - i] = weights_[i];
    }
    if (n % 2 == 1) weights_[half] = weight_at(n, 0.0);
  }

  int order() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  /// E[g(Z)] for Z ~ N(0,1). Mirror-image nodes are summed in pairs so odd
  /// integrands cancel exactly.
  template <class G>
  double expectation(G&& g) const {
    const int n = order();
    double acc = 0.0;
    for (int i = 0; i < n / 2; ++i) {
      const double x = std::numbers::sqrt2 * nodes_[i];
      acc += weights_[i] * (g(x) + g(-x));
    }
    if (n % 2 == 1) acc += weights_[n / 2] * g(0.0);
    return acc / std::sqrt(std::numbers::pi);
  }

 private:
  // Orthonormal p_n(z) and sqrt(2n) p_{n-1}(z), both divided by exp(log_scale).
  struct Eval {
    double p;
    double dp;
    double log_scale;
  };

  static Eval eval(int n, double z) {
    constexpr double kBig = 1e150;
    double p1 = std::pow(std::numbers::pi, -0.25);
    double p2 = 0.0;
    double log_scale = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      if (std::abs(p1) > kBig) {
        p1 /= kBig;
        p2 /= kBig;
        log_scale += std::log(kBig);
      }
    }
    return {p1, std::sqrt(2.0 * n) * p2, log_scale};
  }

  static double polish(int n, double lo, double hi, double f_lo) {
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const Eval e = eval(n, z);
      if (e.p == 0.0) return z;
      if ((e.p < 0.0) == (f_lo < 0.0)) {
        lo = z;
        f_lo = e.p;
      } else {
        hi = z;
      }
      double next = z - e.p / e.dp;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const bool done = std::abs(next - z) <= 1e-15 * std::max(1.0, std::abs(z));
      z = next;
      if (done || hi - lo <= 4e-16 * std::max(1.0, std::abs(z))) break;
    }
    return z;
  }

  // 2 / (sqrt(2n) p_{n-1}(z))^2 at a root z.
  static double weight_at(int n, double z) {
    const Eval e = eval(n, z);
    return 2.0 * std::exp(-2.0 * (std::log(std::abs(e.dp)) + e.log_scale));
  }

  std::vector<double> nodes_;
  std::vector<double> weights_;
};

template <class G>
double hermite_expectation(G&& g, const QuadratureConfig& cfg = {}) {
  cfg.validate();
  return GaussHermiteRule(cfg.hermite_order).expectation(std::forward<G>(g));
}

namespace detail {

struct SimpsonState {
  int max_depth;
  bool exceeded = false;
};

template <class F>
double simpson_recurse(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth,
                       SimpsonState& st) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= st.max_depth) {
    st.exceeded = true;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, st) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, st);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance
/// cfg.adaptive_tol. Throws AccuracyError (carrying the partial sum) when the
/// recursion cap is hit anywhere.
template <class F>
double adaptive_quad(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
  cfg.validate();
  if (!(a < b)) throw DomainError("adaptive_quad: need a < b");
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::SimpsonState st{cfg.max_depth};
  const double result = detail::simpson_recurse(f, a, b, fa, fm, fb, whole, cfg.adaptive_tol, 0, st);
  if (st.exceeded) throw AccuracyError("adaptive_quad: max_depth exceeded", result);
  return result;
}

/// Integrates over consecutive panels [edges[i], edges[i+1]], splitting the
/// tolerance evenly. Degenerate panels are skipped.
template <class F>
double adaptive_quad_panels(F&& f, std::span<const double> edges, const QuadratureConfig& cfg = {}) {
  if (edges.size() < 2) throw DomainError("adaptive_quad_panels: need at least two edges");
  QuadratureConfig panel_cfg = cfg;
  panel_cfg.adaptive_tol = cfg.adaptive_tol / static_cast<double>(edges.size() - 1);
  double total = 0.0;
  bool failed = false;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) continue;
    try {
      total += adaptive_quad(f, edges[i], edges[i + 1], panel_cfg);
    } catch (const AccuracyError& e) {
      total += e.partial();
      failed = true;
    }
  }
  if (failed) throw AccuracyError("adaptive_quad_panels: max_depth exceeded", total);
  return total;
}

struct ScalarOptimum {
  double x;
  double value;
};

/// Golden-section search for a maximum of f on [lo, hi]. Returns the best
/// interior point evaluated; callers compare against their own grid values.
template <class F>
ScalarOptimum golden_maximize(F&& f, double lo, double hi, int iters) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  ScalarOptimum best = f1 >= f2 ? ScalarOptimum{x1, f1} : ScalarOptimum{x2, f2};
  for (int i = 0; i < iters; ++i) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
      if (f1 > best.value) best = {x1, f1};
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
      if (f2 > best.value) best = {x2, f2};
    }
  }
  return best;
}

}  // namespace cdma
