#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cdma/errors.hpp"
#include "cdma/noise.hpp"
#include "cdma/numerics.hpp"

namespace cdma {

/// Spreading gain m (chips per symbol) and number of users n.
struct SystemSize {
  int m = 1;
  int n = 1;

  void validate() const {
    if (m < 1 || n < 1) throw DomainError("SystemSize: need m >= 1 and n >= 1");
  }
};

enum class BoundKind { lower, conjectured_upper, true_upper, exact, estimate };

inline const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::lower: return "lower";
    case BoundKind::conjectured_upper: return "conjectured_upper";
    case BoundKind::true_upper: return "true_upper";
    case BoundKind::exact: return "exact";
    case BoundKind::estimate: return "estimate";
  }
  return "?";
}

/// How the uniform-noise overlap function is scaled. `derived` evaluates the
/// triangle psi at (4j-2k)/(2a sqrt(m)), which is what direct integration of
/// g_gamma gives; `printed` uses (4j-2k)/(a sqrt(m)).
enum class Eq6Mode { derived, printed };

inline const char* to_string(Eq6Mode mode) { return mode == Eq6Mode::derived ? "derived" : "printed"; }

struct BoundMeta {
  std::string noise = "none";
  std::optional<double> gamma;
  std::optional<Eq6Mode> eq6_mode;
  double raw_bits_total = 0.0;  // before clamping to [0, n]
};

struct BoundValue {
  double bits_total = 0.0;
  double bits_per_user = 0.0;
  BoundKind kind = BoundKind::lower;
  BoundMeta meta;

  /// Clamps to the physical range: 0 <= bits_total <= n.
  static BoundValue make(double raw_bits, int n, BoundKind kind, BoundMeta meta) {
    meta.raw_bits_total = raw_bits;
    const double total = std::clamp(raw_bits, 0.0, static_cast<double>(n));
    return {total, total / n, kind, std::move(meta)};
  }
};

/// Log-spaced grid over gamma followed by golden-section refinement.
struct GammaSearch {
  std::vector<double> log_grid = log_spaced(1e-4, 1e3, 64);
  int refine_iters = 40;

  static std::vector<double> log_spaced(double lo, double hi, int count) {
    if (!(lo > 0.0 && hi > lo) || count < 1) throw DomainError("GammaSearch: need 0 < lo < hi and count >= 1");
    std::vector<double> g(count);
    if (count == 1) {
      g[0] = lo;
      return g;
    }
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    for (int i = 0; i < count; ++i) g[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
  }

  void validate() const {
    if (log_grid.empty()) throw DomainError("GammaSearch: empty grid");
    for (std::size_t i = 0; i < log_grid.size(); ++i) {
      if (!(log_grid[i] > 0.0)) throw DomainError("GammaSearch: grid must be positive");
      if (i > 0 && !(log_grid[i] > log_grid[i - 1])) throw DomainError("GammaSearch: grid must be increasing");
    }
    if (refine_iters < 0) throw DomainError("GammaSearch: refine_iters must be >= 0");
  }
};

/// Random-matrix lower bound for the noiseless channel:
/// n - log2 sum_j C(n,2j) (C(2j,j)/4^j)^m.
inline BoundValue noiseless_lower(SystemSize size) {
  size.validate();
  std::vector<LogNum> terms;
  terms.reserve(size.n / 2 + 1);
  for (int j = 0; 2 * j <= size.n; ++j) {
    const LogNum collision = log_binomial(2 * j, j) / LogNum{2.0 * j * kLn2};
    terms.push_back(log_binomial(size.n, 2 * j) * collision.pow(size.m));
  }
  const double raw = size.n - nats_to_bits(log_sum_exp(terms).log_value);
  return BoundValue::make(raw, size.n, BoundKind::lower, {});
}

namespace detail {

inline void require_noisy(const NoiseModel& model, const char* op) {
  if (model.is_noiseless()) throw UnsupportedOperation(std::string(op) + ": requires Gaussian or uniform noise");
}

inline void require_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("lower bound family: gamma must be > 0");
}

// ln C(k, j) for 0 <= j <= k <= n, shared by every member of the family.
class BinomialRows {
 public:
  explicit BinomialRows(int n) : rows_(n + 1) {
    for (int k = 0; k <= n; ++k) {
      rows_[k].resize(k + 1);
      for (int j = 0; j <= k; ++j) rows_[k][j] = log_binomial(k, j).log_value;
    }
  }
  double operator()(int k, int j) const { return rows_[k][j]; }

 private:
  std::vector<std::vector<double>> rows_;
};

// n - h_bits - log2 sum_k C(n,k) (sum_j C(k,j)/2^k g(d))^m with d = 2j - k.
// log_g(d) returns ln g_gamma(2d/sqrt(m)); h_bits is m*gamma*h(f) in bits.
template <class LogG>
double assemble_family_member(SystemSize size, const BinomialRows& binom, double h_bits, LogG&& log_g) {
  std::vector<LogNum> outer;
  outer.reserve(size.n + 1);
  std::vector<LogNum> inner;
  for (int k = 0; k <= size.n; ++k) {
    inner.clear();
    for (int j = 0; j <= k; ++j) inner.push_back({binom(k, j) - k * kLn2 + log_g(2 * j - k)});
    outer.push_back(LogNum{binom(size.n, k)} * log_sum_exp(inner).pow(size.m));
  }
  return size.n - h_bits - nats_to_bits(log_sum_exp(outer).log_value);
}

inline double noisy_lower_raw(SystemSize size, const BinomialRows& binom, const NoiseModel& model, double gamma,
                              Eq6Mode mode) {
  const double root_m = std::sqrt(static_cast<double>(size.m));
  if (model.kind() == NoiseKind::gaussian) {
    const double s2 = model.sigma2();
    const double shrink = gamma / (1.0 + gamma);
    const double half_log = 0.5 * std::log1p(gamma);
    auto log_g = [&](int d) {
      const double r = d / (std::sqrt(s2) * root_m);
      return -2.0 * r * r * shrink - half_log;
    };
    return assemble_family_member(size, binom, size.m * gamma * 0.5 * kLog2E, log_g);
  }
  const double a = model.half_width();
  const double scale = mode == Eq6Mode::derived ? 2.0 * a * root_m : a * root_m;
  auto log_psi = [&](int d) {
    const double u = std::abs(2.0 * d) / scale;
    return u <= 1.0 ? std::log1p(-u) : kNegInf;
  };
  return assemble_family_member(size, binom, 0.0, log_psi);
}

}  // namespace detail

/// One member of the gamma-indexed lower-bound family (q = -gamma log f).
/// Gaussian and uniform use their closed forms; uniform is independent of gamma.
inline BoundValue noisy_lower_gamma(SystemSize size, const NoiseModel& model, double gamma,
                                    Eq6Mode mode = Eq6Mode::derived) {
  size.validate();
  detail::require_noisy(model, "noisy_lower_gamma");
  detail::require_gamma(gamma);
  BoundMeta meta{model.describe(), gamma, std::nullopt, 0.0};
  if (model.kind() == NoiseKind::uniform) meta.eq6_mode = mode;
  const detail::BinomialRows binom(size.n);
  return BoundValue::make(detail::noisy_lower_raw(size, binom, model, gamma, mode), size.n, BoundKind::lower, meta);
}

/// The same family member assembled from h(f) and a quadrature evaluation of
/// g_gamma, with no closed forms. Used to cross-check noisy_lower_gamma.
inline BoundValue noisy_lower_generic(SystemSize size, const NoiseModel& model, double gamma,
                                      const QuadratureConfig& cfg = {}) {
  size.validate();
  detail::require_noisy(model, "noisy_lower_generic");
  detail::require_gamma(gamma);
  const double root_m = std::sqrt(static_cast<double>(size.m));
  // g depends on (j, k) only through d = 2j - k in [-n, n].
  std::vector<double> log_g(2 * size.n + 1);
  for (int d = -size.n; d <= size.n; ++d) {
    const double g = g_gamma_quadrature(model, 2.0 * d / root_m, gamma, cfg);
    log_g[d + size.n] = g > 0.0 ? std::log(g) : kNegInf;
  }
  const double h_bits = size.m * gamma * diff_entropy(model);
  const detail::BinomialRows binom(size.n);
  const double raw =
      detail::assemble_family_member(size, binom, h_bits, [&](int d) { return log_g[d + size.n]; });
  BoundMeta meta{model.describe(), gamma, std::nullopt, 0.0};
  return BoundValue::make(raw, size.n, BoundKind::lower, meta);
}

/// Supremum of the family over gamma: grid scan, then golden-section
/// refinement in log(gamma) between the neighbours of the best grid point.
inline BoundValue noisy_lower_envelope(SystemSize size, const NoiseModel& model, const GammaSearch& search = {},
                                       Eq6Mode mode = Eq6Mode::derived) {
  size.validate();
  detail::require_noisy(model, "noisy_lower_envelope");
  search.validate();
  if (model.kind() == NoiseKind::uniform) return noisy_lower_gamma(size, model, 1.0, mode);

  const detail::BinomialRows binom(size.n);
  const auto& grid = search.log_grid;
  std::size_t best_i = 0;
  double best = kNegInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = detail::noisy_lower_raw(size, binom, model, grid[i], mode);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  double best_gamma = grid[best_i];
  if (grid.size() > 1 && search.refine_iters > 0) {
    const double lo = std::log(grid[best_i == 0 ? 0 : best_i - 1]);
    const double hi = std::log(grid[std::min(best_i + 1, grid.size() - 1)]);
    const auto refined = golden_maximize(
        [&](double lg) { return detail::noisy_lower_raw(size, binom, model, std::exp(lg), mode); }, lo, hi,
        search.refine_iters);
    if (refined.value > best) {
      best = refined.value;
      best_gamma = std::exp(refined.x);
    }
  }
  BoundMeta meta{model.describe(), best_gamma, std::nullopt, 0.0};
  return BoundValue::make(best, size.n, BoundKind::lower, meta);
}

/// min(n, m (h(f~) - h(f))). A proven bound for the noiseless channel, where
/// h(f~) is the Shannon entropy of Binomial(n, 1/2); conditional on the
/// uniform-input conjecture otherwise.
inline BoundValue conjectured_upper(SystemSize size, const NoiseModel& model, const QuadratureConfig& cfg = {}) {
  size.validate();
  BoundMeta meta{model.describe(), std::nullopt, std::nullopt, 0.0};
  if (model.is_noiseless()) {
    const double raw = std::min<double>(size.n, size.m * mixture_entropy(model, size.m, size.n, cfg));
    return BoundValue::make(raw, size.n, BoundKind::true_upper, meta);
  }
  const double per_chip = mixture_entropy(model, size.m, size.n, cfg) - diff_entropy(model);
  const double raw = std::min<double>(size.n, size.m * per_chip);
  return BoundValue::make(raw, size.n, BoundKind::conjectured_upper, meta);
}

}  // namespace cdma
