#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cdma/asymptotic.hpp"
#include "cdma/errors.hpp"
#include "cdma/evaluate.hpp"
#include "cdma/finite_bounds.hpp"
#include "cdma/format.hpp"
#include "cdma/noise.hpp"
#include "cdma/oracle.hpp"
#include "cdma/parallel.hpp"

namespace cdma {

/// One CSV record. y is bits/user throughout.
struct CsvRow {
  std::string figure;
  std::string series;
  std::string x_name;
  double x = 0.0;
  std::string y_name = "bits_per_user";
  double y = 0.0;
  std::string params;  // canonical JSON of the fixed parameters
};

inline constexpr std::string_view kCsvHeader = "figure,series,x_name,x,y_name,y,params";

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << csv_field(r.figure) << ',' << csv_field(r.series) << ',' << csv_field(r.x_name) << ','
       << format_double(r.x) << ',' << csv_field(r.y_name) << ',' << format_double(r.y) << ','
       << csv_field(r.params) << '\n';
  }
}

/// start, start + step, ... up to stop inclusive (with a small tolerance).
struct Range {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  std::vector<double> values() const {
    if (!(step > 0.0) || !(stop >= start) || !std::isfinite(start) || !std::isfinite(stop))
      throw DomainError("range needs start <= stop and step > 0");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = start + step * static_cast<double>(i);
    return v;
  }
};

/// Parses "start:stop:step" or a comma-separated list; the result must be
/// nonempty and strictly monotone.
inline std::vector<double> parse_values(std::string_view text) {
  std::vector<double> out;
  auto num = [&](std::string_view tok) {
    auto v = parse_double(tok);
    if (!v) throw DomainError("not a number: '" + std::string(tok) + "'");
    return *v;
  };
  if (text.find(':') != std::string_view::npos) {
    std::vector<double> parts;
    std::size_t pos = 0;
    while (true) {
      const auto colon = text.find(':', pos);
      parts.push_back(num(text.substr(pos, colon - pos)));
      if (colon == std::string_view::npos) break;
      pos = colon + 1;
    }
    if (parts.size() != 3) throw DomainError("range must be start:stop:step");
    out = Range{parts[0], parts[1], parts[2]}.values();
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      out.push_back(num(text.substr(pos, comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  if (out.empty()) throw DomainError("empty value list");
  const bool up = out.size() < 2 || out[1] > out[0];
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (up ? !(out[i] > out[i - 1]) : !(out[i] < out[i - 1]))
      throw DomainError("values must be strictly monotone");
  }
  return out;
}

enum class XAxis { n, ebn0_db };

/// Series that share a set of fixed parameters. Each nonempty list is one
/// panel dimension; the cartesian product gives the panels.
struct SeriesGroup {
  std::vector<std::string> series;
  std::vector<int> ms;
  std::vector<int> ns;
  std::vector<double> betas;
  std::vector<double> ebn0_dbs;
  std::vector<double> gammas;
  bool noiseless = false;
};

struct FigureSpec {
  int id = 0;
  std::string title;
  XAxis x_axis = XAxis::n;
  Range x;
  bool x_in_units_of_m = false;  // x values are n/m; rows report n
  std::vector<SeriesGroup> groups;
};

/// Defaults for the ten figure analogues.
inline const std::vector<FigureSpec>& figure_table() {
  using S = std::vector<std::string>;
  static const std::vector<FigureSpec> table = {
      {1, "noiseless lower and upper bounds vs n", XAxis::n, {1, 400, 1}, false,
       {{S{"lower", "upper"}, {16, 32, 64}, {}, {}, {}, {}, true}}},
      {2, "gamma family and envelope vs n", XAxis::n, {4, 256, 4}, false,
       {{S{"lower_gamma"}, {64}, {}, {}, {8}, {0.01, 0.1, 1, 10}, false},
        {S{"lower_envelope"}, {64}, {}, {}, {8}, {}, false}}},
      {3, "envelope and conjectured upper vs n", XAxis::n, {4, 256, 4}, false,
       {{S{"lower_envelope", "conjectured_upper"}, {64}, {}, {}, {4, 16}, {}, false}}},
      {4, "envelope and conjectured upper vs Eb/N0", XAxis::ebn0_db, {-2, 20, 1}, false,
       {{S{"lower_envelope", "conjectured_upper"}, {64}, {64, 128, 192, 256}, {}, {}, {}, false}}},
      {5, "asymptotic bounds, beta = 0.5", XAxis::ebn0_db, {-2, 16, 0.5}, false,
       {{S{"asympt_lower", "asympt_upper", "tanaka"}, {}, {}, {0.5}, {}, {}, false},
        {S{"bpsk"}, {}, {}, {}, {}, {}, false}}},
      {6, "asymptotic bounds, beta = 1", XAxis::ebn0_db, {-2, 16, 0.5}, false,
       {{S{"asympt_lower", "asympt_upper", "tanaka"}, {}, {}, {1}, {}, {}, false},
        {S{"bpsk"}, {}, {}, {}, {}, {}, false}}},
      {7, "asymptotic bounds, beta = 2, 4, 8", XAxis::ebn0_db, {-2, 20, 0.5}, false,
       {{S{"asympt_lower", "asympt_upper", "tanaka"}, {}, {}, {2, 4, 8}, {}, {}, false}}},
      {8, "finite vs asymptotic, beta = 2", XAxis::ebn0_db, {-2, 16, 1}, false,
       {{S{"finite_lower", "finite_upper"}, {8, 16, 32, 64}, {}, {2}, {}, {}, false},
        {S{"asympt_lower", "asympt_upper"}, {}, {}, {2}, {}, {}, false}}},
      {9, "finite vs extrapolated asymptotic vs n, 16 dB", XAxis::n, {0.125, 5, 0.125}, true,
       {{S{"finite_lower", "finite_upper", "asympt_lower", "asympt_upper", "tanaka"}, {8, 64}, {}, {}, {16}, {},
         false}}},
      {10, "finite vs extrapolated asymptotic vs n, 4 dB", XAxis::n, {0.125, 5, 0.125}, true,
       {{S{"finite_lower", "finite_upper", "asympt_lower", "asympt_upper", "tanaka"}, {8, 64}, {}, {}, {4}, {},
         false}}},
  };
  return table;
}

inline const FigureSpec& figure_spec(int id) {
  for (const auto& f : figure_table()) {
    if (f.id == id) return f;
  }
  throw DomainError("figure id must be in 1..10 (got " + std::to_string(id) + ")");
}

/// Replaces a panel dimension in every group that has it.
struct FigureOverrides {
  std::optional<std::vector<int>> ms;
  std::optional<std::vector<int>> ns;
  std::optional<std::vector<double>> betas;
  std::optional<std::vector<double>> ebn0_dbs;
  std::optional<std::vector<double>> gammas;
  std::optional<Range> x;
};

namespace detail {

template <class T>
void apply_override(std::vector<SeriesGroup>& groups, std::vector<T> SeriesGroup::*field,
                    const std::optional<std::vector<T>>& value, const char* name, int id) {
  if (!value) return;
  if (value->empty()) throw DomainError(std::string("empty override for ") + name);
  bool used = false;
  for (auto& g : groups) {
    if (!(g.*field).empty()) {
      g.*field = *value;
      used = true;
    }
  }
  if (!used) throw DomainError("figure " + std::to_string(id) + " has no " + name + " parameter");
}

struct FigurePoint {
  std::optional<int> m;
  std::optional<int> n;
  std::optional<double> beta;
  std::optional<double> ebn0_db;
  std::optional<double> gamma;
  bool noiseless = false;
};

inline int to_users(double v, const char* what) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9 || r < 1) throw DomainError(std::string(what) + " must be a positive integer");
  return static_cast<int>(r);
}

inline double series_value(const std::string& series, const FigurePoint& p, const QuadratureConfig& quad) {
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw DomainError("series " + series + " needs " + what);
  };
  auto size = [&] {
    need(p.m && p.n, "m and n");
    return SystemSize{*p.m, *p.n};
  };
  auto beta = [&] {
    if (p.beta) return *p.beta;
    need(p.m && p.n, "beta or (m, n)");
    return static_cast<double>(*p.n) / *p.m;
  };
  auto sigma2 = [&] {
    need(p.ebn0_db.has_value(), "Eb/N0");
    return EbN0{*p.ebn0_db}.sigma2();
  };
  auto gauss = [&] { return NoiseModel::gaussian(sigma2()); };

  if (series == "lower") return noiseless_lower(size()).bits_per_user;
  if (series == "upper") return conjectured_upper(size(), NoiseModel::noiseless(), quad).bits_per_user;
  if (series == "lower_gamma") {
    need(p.gamma.has_value(), "gamma");
    return noisy_lower_gamma(size(), gauss(), *p.gamma).bits_per_user;
  }
  if (series == "lower_envelope" || series == "finite_lower")
    return noisy_lower_envelope(size(), gauss()).bits_per_user;
  if (series == "conjectured_upper" || series == "finite_upper")
    return conjectured_upper(size(), gauss(), quad).bits_per_user;
  if (series == "asympt_lower") return asympt_lower_gaussian(LoadPoint::from_beta(beta()), sigma2()).bits_per_user;
  if (series == "asympt_upper") return asympt_upper(LoadPoint::from_beta(beta()), sigma2()).bits_per_user;
  if (series == "tanaka") return tanaka_capacity(LoadPoint::from_beta(beta()), sigma2(), quad).c_per_user;
  if (series == "bpsk") return bpsk_reference(sigma2());
  throw DomainError("unknown series '" + series + "'");
}

struct PendingRow {
  CsvRow row;
  std::string series_key;
  FigurePoint point;
};

inline std::vector<CsvRow> evaluate_rows(std::vector<PendingRow>& pending, int threads,
                                         const QuadratureConfig& quad) {
  parallel_for(pending.size(), threads, [&](std::size_t i) {
    pending[i].row.y = series_value(pending[i].series_key, pending[i].point, quad);
  });
  std::vector<CsvRow> rows;
  rows.reserve(pending.size());
  for (auto& p : pending) rows.push_back(std::move(p.row));
  return rows;
}

}  // namespace detail

/// Rows ordered by group, panel (m, n, beta, Eb/N0, gamma), series, then x.
inline std::vector<CsvRow> figure_rows(int id, const FigureOverrides& ov = {}, int threads = 1,
                                       const QuadratureConfig& quad = {}) {
  FigureSpec spec = figure_spec(id);
  detail::apply_override(spec.groups, &SeriesGroup::ms, ov.ms, "m", id);
  detail::apply_override(spec.groups, &SeriesGroup::ns, ov.ns, "n", id);
  detail::apply_override(spec.groups, &SeriesGroup::betas, ov.betas, "beta", id);
  detail::apply_override(spec.groups, &SeriesGroup::ebn0_dbs, ov.ebn0_dbs, "ebn0_db", id);
  detail::apply_override(spec.groups, &SeriesGroup::gammas, ov.gammas, "gamma", id);
  if (ov.x) spec.x = *ov.x;
  const auto xs = spec.x.values();
  const std::string fig = std::to_string(id);
  const char* x_name = spec.x_axis == XAxis::n ? "n" : "ebn0_db";

  std::vector<detail::PendingRow> pending;
  for (const auto& g : spec.groups) {
    // An empty dimension contributes one "unset" slot.
    auto slots = [](const auto& v) { return std::max<std::size_t>(v.size(), 1); };
    for (std::size_t im = 0; im < slots(g.ms); ++im)
      for (std::size_t in = 0; in < slots(g.ns); ++in)
        for (std::size_t ib = 0; ib < slots(g.betas); ++ib)
          for (std::size_t ie = 0; ie < slots(g.ebn0_dbs); ++ie)
            for (std::size_t ig = 0; ig < slots(g.gammas); ++ig) {
              detail::FigurePoint base;
              base.noiseless = g.noiseless;
              nlohmann::json params = nlohmann::json::object();
              params["noise"] = g.noiseless ? "none" : "gaussian";
              if (!g.ms.empty()) params["m"] = *(base.m = g.ms[im]);
              if (!g.ns.empty()) params["n"] = *(base.n = g.ns[in]);
              if (!g.betas.empty()) params["beta"] = *(base.beta = g.betas[ib]);
              if (!g.ebn0_dbs.empty()) params["ebn0_db"] = *(base.ebn0_db = g.ebn0_dbs[ie]);
              if (!g.gammas.empty()) params["gamma"] = *(base.gamma = g.gammas[ig]);
              const std::string params_text = params.dump();

              for (const auto& s : g.series) {
                const std::string label = base.gamma ? s + "_" + format_double(*base.gamma) : s;
                for (double x : xs) {
                  detail::FigurePoint p = base;
                  double x_out = x;
                  if (spec.x_axis == XAxis::ebn0_db) {
                    p.ebn0_db = x;
                  } else if (spec.x_in_units_of_m) {
                    if (!p.m) throw DomainError("figure " + fig + ": n/m axis needs m");
                    p.n = detail::to_users(x * *p.m, "n");
                    x_out = *p.n;
                  } else {
                    p.n = detail::to_users(x, "n");
                  }
                  // Fixed load with a finite size: n follows from beta * m.
                  if (!p.n && p.m && p.beta) p.n = detail::to_users(*p.beta * *p.m, "beta * m");
                  pending.push_back({CsvRow{fig, label, x_name, x_out, "bits_per_user", 0.0, params_text}, s, p});
                }
              }
            }
  }
  return detail::evaluate_rows(pending, threads, quad);
}

/// One-variable sweep over a BoundRequest.
struct SweepSpec {
  std::string variable;  // n, m, ebn0_db or beta
  std::vector<double> values;
  BoundRequest fixed;

  void validate() const {
    if (variable != "n" && variable != "m" && variable != "ebn0_db" && variable != "beta")
      throw DomainError("sweep variable must be one of n, m, ebn0_db, beta");
    if (values.empty()) throw DomainError("sweep needs at least one value");
    const bool up = values.size() < 2 || values[1] > values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (up ? !(values[i] > values[i - 1]) : !(values[i] < values[i - 1]))
        throw DomainError("sweep values must be strictly monotone");
    }
  }
};

inline nlohmann::json request_params(const BoundRequest& r, std::string_view skip) {
  nlohmann::json j = nlohmann::json::object();
  j["noise"] = r.noise.describe();
  j["asymptotic"] = r.asymptotic;
  if (r.m && skip != "m") j["m"] = *r.m;
  if (r.n && skip != "n") j["n"] = *r.n;
  if (r.beta && skip != "beta") j["beta"] = *r.beta;
  if (r.zeta) j["zeta"] = *r.zeta;
  if (r.gamma) j["gamma"] = *r.gamma;
  if (r.noise.kind() == NoiseKind::uniform) j["eq6_mode"] = to_string(r.eq6_mode);
  if (skip == "ebn0_db") j["noise"] = "gaussian";
  return j;
}

inline std::vector<CsvRow> sweep_rows(const SweepSpec& spec, int threads = 1) {
  spec.validate();
  const std::string params = request_params(spec.fixed, spec.variable).dump();
  std::vector<std::vector<BoundRecord>> results(spec.values.size());
  parallel_for(spec.values.size(), threads, [&](std::size_t i) {
    BoundRequest req = spec.fixed;
    const double v = spec.values[i];
    if (spec.variable == "n") req.n = detail::to_users(v, "n");
    if (spec.variable == "m") req.m = detail::to_users(v, "m");
    if (spec.variable == "beta") req.beta = v;
    if (spec.variable == "ebn0_db") req.noise = NoiseModel::gaussian(EbN0{v});
    results[i] = evaluate(req);
  });
  std::vector<CsvRow> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (const auto& rec : results[i])
      rows.push_back({"sweep", rec.side, spec.variable, spec.values[i], "bits_per_user", rec.bits_per_user, params});
  }
  return rows;
}

}  // namespace cdma
