#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cdma/errors.hpp"
#include "cdma/format.hpp"
#include "cdma/numerics.hpp"

namespace cdma {

struct Noiseless {};

struct GaussianNoise {
  double sigma2;
};

/// Uniform on [-half_width, half_width].
struct UniformNoise {
  double half_width;
};

/// Per-user SNR in dB; with +-1 inputs and 1/sqrt(m) spreading it maps to
/// the per-chip noise variance as sigma^2 = 1 / (2 * 10^(dB/10)).
struct EbN0 {
  double db;

  double sigma2() const { return 1.0 / (2.0 * std::pow(10.0, db / 10.0)); }
  static EbN0 from_sigma2(double sigma2) { return {10.0 * std::log10(1.0 / (2.0 * sigma2))}; }
};

enum class NoiseKind { noiseless, gaussian, uniform };

/// i.i.d. per-chip additive noise. Gaussian and uniform densities are symmetric.
class NoiseModel {
 public:
  using Variant = std::variant<Noiseless, GaussianNoise, UniformNoise>;

  NoiseModel() = default;

  static NoiseModel noiseless() { return NoiseModel(Noiseless{}); }
  static NoiseModel gaussian(double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("gaussian noise: sigma2 must be > 0");
    return NoiseModel(GaussianNoise{sigma2});
  }
  static NoiseModel gaussian(EbN0 snr) { return gaussian(snr.sigma2()); }
  static NoiseModel uniform(double half_width) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw DomainError("uniform noise: a must be > 0");
    return NoiseModel(UniformNoise{half_width});
  }

  NoiseKind kind() const { return static_cast<NoiseKind>(v_.index()); }
  bool is_noiseless() const { return kind() == NoiseKind::noiseless; }
  const Variant& variant() const { return v_; }

  double sigma2() const {
    if (auto* g = std::get_if<GaussianNoise>(&v_)) return g->sigma2;
    throw UnsupportedOperation("sigma2 requested from non-Gaussian noise model");
  }
  double half_width() const {
    if (auto* u = std::get_if<UniformNoise>(&v_)) return u->half_width;
    throw UnsupportedOperation("half-width requested from non-uniform noise model");
  }

  /// Canonical flag spelling: none | gaussian:<sigma2> | uniform:<a>.
  std::string describe() const {
    switch (kind()) {
      case NoiseKind::noiseless: return "none";
      case NoiseKind::gaussian: return "gaussian:" + format_double(sigma2());
      case NoiseKind::uniform: return "uniform:" + format_double(half_width());
    }
    return "?";
  }

  friend bool operator==(const NoiseModel& a, const NoiseModel& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case NoiseKind::noiseless: return true;
      case NoiseKind::gaussian: return a.sigma2() == b.sigma2();
      case NoiseKind::uniform: return a.half_width() == b.half_width();
    }
    return false;
  }

 private:
  explicit NoiseModel(Variant v) : v_(v) {}
  Variant v_{Noiseless{}};
};

/// Parses the --noise flag grammar.
inline NoiseModel parse_noise(std::string_view spec) {
  if (spec == "none" || spec == "noiseless") return NoiseModel::noiseless();
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw DomainError("noise spec must be none, gaussian:<sigma2> or uniform:<a>");
  const auto family = spec.substr(0, colon);
  const auto value = parse_double(spec.substr(colon + 1));
  if (!value) throw DomainError("noise spec: cannot parse number in '" + std::string(spec) + "'");
  if (family == "gaussian") return NoiseModel::gaussian(*value);
  if (family == "uniform") return NoiseModel::uniform(*value);
  throw DomainError("noise spec: unknown family '" + std::string(family) + "'");
}

namespace detail {

inline void require_density(const NoiseModel& model, const char* op) {
  if (model.is_noiseless()) throw UnsupportedOperation(std::string(op) + ": noiseless channel has no density");
}

}  // namespace detail

inline double density(const NoiseModel& model, double x) {
  detail::require_density(model, "density");
  if (model.kind() == NoiseKind::gaussian) {
    const double s2 = model.sigma2();
    return std::exp(-x * x / (2.0 * s2)) / std::sqrt(2.0 * std::numbers::pi * s2);
  }
  const double a = model.half_width();
  return std::abs(x) <= a ? 1.0 / (2.0 * a) : 0.0;
}

/// ln f(x); -inf outside the support.
inline double log_density(const NoiseModel& model, double x) {
  detail::require_density(model, "log_density");
  if (model.kind() == NoiseKind::gaussian) {
    const double s2 = model.sigma2();
    return -x * x / (2.0 * s2) - 0.5 * std::log(2.0 * std::numbers::pi * s2);
  }
  const double a = model.half_width();
  return std::abs(x) <= a ? -std::log(2.0 * a) : kNegInf;
}

inline double diff_entropy_nats(const NoiseModel& model) {
  detail::require_density(model, "diff_entropy");
  if (model.kind() == NoiseKind::gaussian) {
    return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * model.sigma2());
  }
  return std::log(2.0 * model.half_width());
}

/// Differential entropy h(f) in bits.
inline double diff_entropy(const NoiseModel& model) { return nats_to_bits(diff_entropy_nats(model)); }

/// ln g_gamma(t), g_gamma(t) = int f(t+x) f(x)^gamma dx, in closed form.
inline double log_g_gamma(const NoiseModel& model, double t, double gamma) {
  detail::require_density(model, "g_gamma");
  if (!(gamma >= 0.0)) throw DomainError("g_gamma: gamma must be >= 0");
  if (gamma == 0.0) return 0.0;
  if (model.kind() == NoiseKind::gaussian) {
    const double s2 = model.sigma2();
    return -0.5 * gamma * std::log(2.0 * std::numbers::pi * s2) - 0.5 * std::log1p(gamma) -
           gamma * t * t / (2.0 * s2 * (1.0 + gamma));
  }
  const double width = 2.0 * model.half_width();
  const double overlap = 1.0 - std::abs(t) / width;
  if (overlap <= 0.0) return kNegInf;
  return -gamma * std::log(width) + std::log(overlap);
}

inline double g_gamma(const NoiseModel& model, double t, double gamma) {
  return std::exp(log_g_gamma(model, t, gamma));
}

/// g_gamma by direct adaptive quadrature of f(t+x) f(x)^gamma; cross-checks the
/// closed forms and backs the generic lower-bound assembly. The tolerance is
/// tightened relative to the integral's magnitude on a second pass.
inline double g_gamma_quadrature(const NoiseModel& model, double t, double gamma, const QuadratureConfig& cfg = {}) {
  detail::require_density(model, "g_gamma");
  if (!(gamma >= 0.0)) throw DomainError("g_gamma: gamma must be >= 0");
  // Uniform panel edges sit on the support boundary; clamping keeps rounding in t + x from leaving it.
  const bool uniform = model.kind() == NoiseKind::uniform;
  const double edge = uniform ? model.half_width() : INFINITY;
  auto integrand = [&](double x) {
    const double shifted = density(model, uniform ? std::clamp(t + x, -edge, edge) : t + x);
    if (shifted == 0.0) return 0.0;
    return gamma == 0.0 ? shifted : shifted * std::pow(density(model, uniform ? std::clamp(x, -edge, edge) : x), gamma);
  };

  double lo = 0.0;
  double hi = 0.0;
  int panels = 1;
  if (model.kind() == NoiseKind::gaussian) {
    constexpr double kReach = 20.0;
    const double sigma = std::sqrt(model.sigma2());
    lo = -t - kReach * sigma;
    hi = -t + kReach * sigma;
    if (gamma > 0.0) {
      const double reach = kReach * sigma / std::sqrt(gamma);
      lo = std::max(lo, -reach);
      hi = std::min(hi, reach);
    }
    panels = 64;
  } else {
    const double a = model.half_width();
    lo = -t - a;
    hi = -t + a;
    if (gamma > 0.0) {
      lo = std::max(lo, -a);
      hi = std::min(hi, a);
    }
  }
  if (!(lo < hi)) return 0.0;

  std::vector<double> edges(panels + 1);
  for (int i = 0; i <= panels; ++i) edges[i] = lo + (hi - lo) * i / panels;
  edges.back() = hi;
  const double coarse = adaptive_quad_panels(integrand, edges, cfg);
  if (coarse <= 0.0 || coarse >= 1.0) return coarse;
  QuadratureConfig fine = cfg;
  fine.adaptive_tol = cfg.adaptive_tol * coarse;
  return adaptive_quad_panels(integrand, edges, fine);
}

namespace detail {

// Output-mixture geometry: component j sits at (2j - n)/sqrt(m) with weight C(n,j)/2^n.
struct MixtureLayout {
  int n;
  double spacing;
  std::vector<double> means;
  std::vector<double> log_weights;

  MixtureLayout(int m, int n_users) : n(n_users), spacing(2.0 / std::sqrt(static_cast<double>(m))) {
    means.resize(n + 1);
    log_weights.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
      means[j] = (2.0 * j - n) / std::sqrt(static_cast<double>(m));
      log_weights[j] = log_binomial(n, j).log_value - n * kLn2;
    }
  }

  // Index range of components whose mean lies in [x - reach, x + reach].
  std::pair<int, int> near(double x, double reach) const {
    const double base = means.front();
    const int lo = std::max(0, static_cast<int>(std::ceil((x - reach - base) / spacing - 1e-9)));
    const int hi = std::min(n, static_cast<int>(std::floor((x + reach - base) / spacing + 1e-9)));
    return {lo, hi};
  }
};

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline void check_sizes(int m, int n) {
  if (m < 1 || n < 1) throw DomainError("mixture_entropy: need m >= 1 and n >= 1");
}

}  // namespace detail

/// Density of the per-chip output sum_j C(n,j)/2^n f(x - (2j-n)/sqrt(m)).
inline double mixture_density(const NoiseModel& model, int m, int n, double x) {
  detail::require_density(model, "mixture_density");
  detail::check_sizes(m, n);
  const detail::MixtureLayout layout(m, n);
  double acc = 0.0;
  for (int j = 0; j <= n; ++j) acc += std::exp(layout.log_weights[j]) * density(model, x - layout.means[j]);
  return acc;
}

/// h(f~) in bits by adaptive quadrature of -f~ ln f~. Panels break at every
/// mixture mean (Gaussian) or support edge (uniform).
inline double mixture_entropy_quadrature(const NoiseModel& model, int m, int n, const QuadratureConfig& cfg = {}) {
  detail::require_density(model, "mixture_entropy_quadrature");
  detail::check_sizes(m, n);
  const detail::MixtureLayout layout(m, n);
  auto neg_f_log_f = [](double f) { return f > 0.0 ? -f * std::log(f) : 0.0; };

  if (model.kind() == NoiseKind::gaussian) {
    const double s2 = model.sigma2();
    const double sigma = std::sqrt(s2);
    const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * s2);
    const double reach = 40.0 * sigma;
    auto f_tilde = [&](double x) {
      const auto [lo, hi] = layout.near(x, reach);
      double acc = 0.0;
      for (int j = lo; j <= hi; ++j) {
        const double d = x - layout.means[j];
        acc += std::exp(layout.log_weights[j] + log_norm - d * d / (2.0 * s2));
      }
      return acc;
    };
    const double lo = layout.means.front() - 10.0 * sigma;
    const double hi = layout.means.back() + 10.0 * sigma;
    std::vector<double> edges{lo, hi};
    for (double mu : layout.means) {
      for (double off : {-3.0 * sigma, 0.0, 3.0 * sigma}) {
        const double e = mu + off;
        if (e > lo && e < hi) edges.push_back(e);
      }
    }
    edges = detail::sorted_unique(std::move(edges));
    return nats_to_bits(adaptive_quad_panels([&](double x) { return neg_f_log_f(f_tilde(x)); }, edges, cfg));
  }

  const double a = model.half_width();
  const double inv_width = 1.0 / (2.0 * a);
  std::vector<double> edges;
  edges.reserve(2 * (n + 1));
  for (double mu : layout.means) {
    edges.push_back(mu - a);
    edges.push_back(mu + a);
  }
  edges = detail::sorted_unique(std::move(edges));
  // The density is constant inside each panel; evaluate it strictly inside so
  // the panel endpoints take the interior value rather than a jump side.
  double total = 0.0;
  QuadratureConfig panel_cfg = cfg;
  panel_cfg.adaptive_tol = cfg.adaptive_tol / static_cast<double>(edges.size());
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double plo = edges[i];
    const double phi = edges[i + 1];
    if (!(phi - plo > 1e-14 * std::max(1.0, std::abs(plo)))) continue;
    const double inset = 1e-9 * (phi - plo);
    auto integrand = [&](double x) {
      const double xi = std::clamp(x, plo + inset, phi - inset);
      double acc = 0.0;
      for (int j = 0; j <= n; ++j) {
        if (std::abs(xi - layout.means[j]) <= a) acc += std::exp(layout.log_weights[j]);
      }
      return neg_f_log_f(acc * inv_width);
    };
    total += adaptive_quad(integrand, plo, phi, panel_cfg);
  }
  return nats_to_bits(total);
}

/// Entropy of the per-chip output for uniform inputs, in bits. Noiseless:
/// Shannon entropy of Binomial(n, 1/2). Gaussian: adaptive quadrature.
/// Uniform: exact, since f~ is piecewise constant between support edges.
inline double mixture_entropy(const NoiseModel& model, int m, int n, const QuadratureConfig& cfg = {}) {
  detail::check_sizes(m, n);
  switch (model.kind()) {
    case NoiseKind::noiseless: {
      double h = 0.0;
      for (int j = 0; j <= n; ++j) {
        const double lp = log_binomial(n, j).log_value - n * kLn2;
        h -= std::exp(lp) * lp;
      }
      return nats_to_bits(h);
    }
    case NoiseKind::gaussian:
      return mixture_entropy_quadrature(model, m, n, cfg);
    case NoiseKind::uniform:
      break;
  }

  const detail::MixtureLayout layout(m, n);
  const double a = model.half_width();
  std::vector<double> edges;
  edges.reserve(2 * (n + 1));
  for (double mu : layout.means) {
    edges.push_back(mu - a);
    edges.push_back(mu + a);
  }
  edges = detail::sorted_unique(std::move(edges));
  double h = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double len = edges[i + 1] - edges[i];
    if (len <= 0.0) continue;
    const double mid = 0.5 * (edges[i] + edges[i + 1]);
    // Active components: means strictly within a of the segment midpoint.
    const auto [lo, hi] = layout.near(mid, a);
    std::vector<LogNum> active;
    for (int j = lo; j <= hi; ++j) {
      if (std::abs(mid - layout.means[j]) < a) active.push_back({layout.log_weights[j]});
    }
    if (active.empty()) continue;
    const double log_p = log_sum_exp(active).log_value - std::log(2.0 * a);
    h -= len * std::exp(log_p) * log_p;
  }
  return nats_to_bits(h);
}

}  // namespace cdma
