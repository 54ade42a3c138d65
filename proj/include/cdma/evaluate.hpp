#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdma/asymptotic.hpp"
#include "cdma/errors.hpp"
#include "cdma/finite_bounds.hpp"
#include "cdma/noise.hpp"

namespace cdma {

enum class Side { lower, upper, both };

inline Side parse_side(std::string_view s) {
  if (s == "lower") return Side::lower;
  if (s == "upper") return Side::upper;
  if (s == "both") return Side::both;
  throw DomainError("side must be lower, upper or both (got '" + std::string(s) + "')");
}

inline Eq6Mode parse_eq6_mode(std::string_view s) {
  if (s == "derived") return Eq6Mode::derived;
  if (s == "printed" || s == "as-printed") return Eq6Mode::printed;
  throw DomainError("eq6 mode must be derived or printed (got '" + std::string(s) + "')");
}

/// One point evaluation. Finite mode uses (m, n); asymptotic mode uses beta,
/// or zeta for the noiseless limit. An unset gamma selects the envelope.
struct BoundRequest {
  std::optional<int> m;
  std::optional<int> n;
  std::optional<double> beta;
  std::optional<double> zeta;
  NoiseModel noise = NoiseModel::noiseless();
  Side side = Side::lower;
  bool asymptotic = false;
  std::optional<double> gamma;
  Eq6Mode eq6_mode = Eq6Mode::derived;
  bool tanaka = false;
  QuadratureConfig quad;
  GammaSearch gamma_search;
  SaddleSearch saddle;
};

struct BoundRecord {
  std::string side;  // "lower", "upper" or "tanaka"
  std::string kind;
  std::optional<double> bits_total;
  double bits_per_user = 0.0;
  nlohmann::json meta = nlohmann::json::object();
};

namespace detail {

inline nlohmann::json to_json(const BoundMeta& meta) {
  nlohmann::json j{{"noise", meta.noise}, {"raw_bits_total", meta.raw_bits_total}};
  if (meta.gamma) j["gamma"] = *meta.gamma;
  if (meta.eq6_mode) j["eq6_mode"] = to_string(*meta.eq6_mode);
  return j;
}

inline BoundRecord finite_record(const char* side, const BoundValue& v) {
  return {side, to_string(v.kind), v.bits_total, v.bits_per_user, to_json(v.meta)};
}

inline BoundRecord finite_lower(const BoundRequest& req, SystemSize size) {
  if (req.noise.is_noiseless()) return finite_record("lower", noiseless_lower(size));
  if (req.gamma) return finite_record("lower", noisy_lower_gamma(size, req.noise, *req.gamma, req.eq6_mode));
  auto rec = finite_record("lower", noisy_lower_envelope(size, req.noise, req.gamma_search, req.eq6_mode));
  if (req.noise.kind() == NoiseKind::uniform) rec.meta["eq6_mode"] = to_string(req.eq6_mode);
  return rec;
}

inline BoundRecord asymptotic_record(const char* side, const char* kind, const AsymptoticBound& b,
                                     const NoiseModel& noise) {
  BoundRecord rec{side, kind, std::nullopt, b.bits_per_user, {{"noise", noise.describe()}, {"raw", b.raw}}};
  if (b.gamma) rec.meta["gamma"] = *b.gamma;
  if (b.t) rec.meta["t"] = *b.t;
  return rec;
}

inline BoundRecord tanaka_record(double beta, const NoiseModel& noise, const QuadratureConfig& cfg) {
  const auto sol = tanaka_capacity(LoadPoint::from_beta(beta), noise.sigma2(), cfg);
  BoundRecord rec{"tanaka", "estimate", std::nullopt, sol.c_per_user, nlohmann::json::object()};
  rec.meta = {{"noise", noise.describe()},
              {"lambda", sol.lambda},
              {"m_rep", sol.m_rep},
              {"iterations", sol.iterations},
              {"converged", sol.converged},
              {"start", sol.start}};
  if (sol.second_branch) {
    const auto& b = *sol.second_branch;
    rec.meta["second_branch"] = {{"lambda", b.lambda}, {"m_rep", b.m_rep}, {"c_per_user", b.c_per_user},
                                 {"iterations", b.iterations}, {"start", b.start}};
  }
  return rec;
}

inline void check_request(const BoundRequest& req) {
  if (req.asymptotic) {
    if (req.beta.has_value() == req.zeta.has_value())
      throw DomainError("asymptotic mode needs exactly one of --beta or --zeta");
    if (req.m || req.n) throw DomainError("asymptotic mode does not take --m or --n");
    if (req.zeta && !req.noise.is_noiseless()) throw DomainError("--zeta applies to the noiseless channel only");
    if (req.beta && req.noise.is_noiseless())
      throw DomainError("noiseless asymptotic limit is indexed by --zeta, not --beta");
    if (req.gamma) throw DomainError("--gamma applies to finite bounds only");
  } else {
    if (!req.m || !req.n) throw DomainError("finite mode needs --m and --n (or pass --asymptotic)");
    if (req.beta || req.zeta) throw DomainError("--beta/--zeta require --asymptotic");
  }
  if (req.tanaka) {
    if (!req.asymptotic || !req.beta || req.noise.kind() != NoiseKind::gaussian)
      throw DomainError("--tanaka needs --asymptotic, --beta and Gaussian noise");
  }
}

}  // namespace detail

/// Evaluates the requested sides in the order lower, upper, then Tanaka.
inline std::vector<BoundRecord> evaluate(const BoundRequest& req) {
  detail::check_request(req);
  const bool want_lower = req.side != Side::upper;
  const bool want_upper = req.side != Side::lower;
  std::vector<BoundRecord> out;

  if (!req.asymptotic) {
    const SystemSize size{*req.m, *req.n};
    if (want_lower) out.push_back(detail::finite_lower(req, size));
    if (want_upper) out.push_back(detail::finite_record("upper", conjectured_upper(size, req.noise, req.quad)));
    return out;
  }

  if (req.zeta) {
    const double v = noiseless_limit(*req.zeta);
    const nlohmann::json meta{{"noise", "none"}, {"zeta", *req.zeta}};
    if (want_lower) out.push_back({"lower", "lower", std::nullopt, v, meta});
    if (want_upper) out.push_back({"upper", "true_upper", std::nullopt, v, meta});
    return out;
  }

  const auto load = LoadPoint::from_beta(*req.beta);
  if (want_lower) {
    if (req.noise.kind() != NoiseKind::gaussian)
      throw UnsupportedOperation("asymptotic lower bound is available for Gaussian noise only");
    out.push_back(
        detail::asymptotic_record("lower", "lower", asympt_lower_gaussian(load, req.noise.sigma2(), req.saddle),
                                  req.noise));
  }
  if (want_upper) {
    // Gaussian inputs make the Gaussian-noise limit a proven bound.
    const char* kind = req.noise.kind() == NoiseKind::gaussian ? "true_upper" : "conjectured_upper";
    out.push_back(detail::asymptotic_record("upper", kind, asympt_upper(load, req.noise, req.quad), req.noise));
  }
  if (req.tanaka) out.push_back(detail::tanaka_record(*req.beta, req.noise, req.quad));
  return out;
}

}  // namespace cdma
