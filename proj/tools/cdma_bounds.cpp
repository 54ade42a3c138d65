// cdma_bounds: point bounds, sweeps, figure CSVs and brute-force oracles for
// binary-input, binary-signature synchronous CDMA.
//
//   cdma_bounds bound  --m 64 --n 128 --ebn0-db 8 --side both
//   cdma_bounds bound  --beta 2 --sigma2 0.25 --asymptotic --side both --tanaka
//   cdma_bounds sweep  --var n --values 4:256:4 --m 64 --ebn0-db 8
//   cdma_bounds figure 3 --out fig3.csv
//   cdma_bounds oracle exact --m 2 --n 3 --check-bounds
//   cdma_bounds oracle mc --matrix walsh2.txt --sigma2 1 --samples 200000 --seed 7
//
// Exit codes: 0 ok, 2 usage, 3 numerical non-convergence, 4 resource cap,
// 5 bound sandwich violated under --check-bounds.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cdma/errors.hpp"
#include "cdma/evaluate.hpp"
#include "cdma/figures.hpp"
#include "cdma/format.hpp"
#include "cdma/oracle.hpp"
#include "cdma/parallel.hpp"

namespace {

using nlohmann::json;

enum Exit : int { kOk = 0, kUsage = 2, kNumerical = 3, kResource = 4, kViolation = 5 };

struct NoiseFlags {
  std::optional<std::string> noise;
  std::optional<double> ebn0_db;
  std::optional<double> sigma2;

  void add(CLI::App& app) {
    auto* a = app.add_option("--noise", noise, "none | gaussian:<sigma2> | uniform:<a>");
    auto* b = app.add_option("--ebn0-db", ebn0_db, "Gaussian noise given as Eb/N0 in dB");
    auto* c = app.add_option("--sigma2", sigma2, "Gaussian noise variance");
    a->excludes(b)->excludes(c);
    b->excludes(c);
  }

  std::optional<cdma::NoiseModel> model() const {
    if (noise) return cdma::parse_noise(*noise);
    if (ebn0_db) return cdma::NoiseModel::gaussian(cdma::EbN0{*ebn0_db});
    if (sigma2) return cdma::NoiseModel::gaussian(*sigma2);
    return std::nullopt;
  }
};

struct BoundFlags {
  std::optional<int> m;
  std::optional<int> n;
  std::optional<double> beta;
  std::optional<double> zeta;
  NoiseFlags noise;
  std::string side = "lower";
  bool asymptotic = false;
  std::optional<double> gamma;
  bool envelope = false;
  std::string eq6_mode = "derived";
  bool tanaka = false;

  void add(CLI::App& app) {
    app.add_option("--m", m, "spreading gain (chips per symbol)");
    app.add_option("--n", n, "number of users");
    app.add_option("--beta", beta, "load n/m for asymptotic bounds");
    app.add_option("--zeta", zeta, "n/(m log2 n) for the noiseless asymptotic limit");
    noise.add(app);
    app.add_option("--side", side, "lower | upper | both")->check(CLI::IsMember({"lower", "upper", "both"}));
    app.add_flag("--asymptotic", asymptotic, "evaluate the large-system limit");
    auto* g = app.add_option("--gamma", gamma, "single member of the lower-bound family");
    auto* e = app.add_flag("--gamma-envelope", envelope, "supremum over gamma (default)");
    g->excludes(e);
    app.add_option("--eq6-mode", eq6_mode, "uniform-noise overlap scaling: derived | printed")
        ->check(CLI::IsMember({"derived", "printed"}));
    app.add_flag("--tanaka", tanaka, "also report the replica-symmetric estimate");
  }

  cdma::BoundRequest request() const {
    cdma::BoundRequest r;
    r.m = m;
    r.n = n;
    r.beta = beta;
    r.zeta = zeta;
    if (auto model = noise.model()) r.noise = *model;
    r.side = cdma::parse_side(side);
    r.asymptotic = asymptotic;
    r.gamma = gamma;
    r.eq6_mode = cdma::parse_eq6_mode(eq6_mode);
    r.tanaka = tanaka;
    return r;
  }
};

// Output goes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::optional<std::string>& path) {
    if (path) {
      file_.open(*path, std::ios::binary);
      if (!file_) throw cdma::DomainError("cannot open output file '" + *path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return cdma::format_double(v.get<double>());
  return v.dump();
}

void flatten(const json& obj, const std::string& prefix, std::ostream& os) {
  for (const auto& [key, value] : obj.items()) {
    if (value.is_object()) {
      flatten(value, prefix + key + ".", os);
    } else {
      os << prefix << key << '=' << scalar_text(value) << '\n';
    }
  }
}

json record_json(const cdma::BoundRecord& rec) {
  json j{{"side", rec.side}, {"kind", rec.kind}, {"bits_per_user", rec.bits_per_user}, {"meta", rec.meta}};
  if (rec.bits_total) j["bits_total"] = *rec.bits_total;
  return j;
}

void print_records(const std::vector<cdma::BoundRecord>& records, bool as_json, std::ostream& os) {
  if (as_json) {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(record_json(r));
    os << json{{"records", arr}}.dump(2) << '\n';
    return;
  }
  const bool prefixed = records.size() > 1;
  for (const auto& r : records) {
    const std::string p = prefixed ? r.side + "." : "";
    os << p << "kind=" << r.kind << '\n';
    if (r.bits_total) os << p << "bits_total=" << cdma::format_double(*r.bits_total) << '\n';
    os << p << "bits_per_user=" << cdma::format_double(r.bits_per_user) << '\n';
    flatten(r.meta, p, os);
  }
}

std::string matrix_inline(const cdma::SignatureMatrix& a) {
  std::string out;
  for (int r = 0; r < a.rows(); ++r) {
    if (r) out += ';';
    for (int c = 0; c < a.cols(); ++c) out += a.at(r, c) > 0 ? '+' : '-';
  }
  return out;
}

struct OracleExactFlags {
  int m = 0;
  int n = 0;
  std::optional<std::uint64_t> samples;
  std::uint64_t seed = 0;
  bool no_reduce = false;
  bool check = false;
};

struct OracleMcFlags {
  std::optional<std::string> matrix;
  std::optional<int> walsh;
  NoiseFlags noise;
  std::uint64_t samples = 200000;
  std::uint64_t seed = 0;
  bool check = false;
};

int run_oracle_exact(const OracleExactFlags& f, int threads, bool as_json, std::ostream& os) {
  const cdma::SystemSize size{f.m, f.n};
  cdma::EnumerationMode mode = cdma::ExhaustiveMode{!f.no_reduce};
  if (f.samples) mode = cdma::SampledMode{*f.samples, f.seed};
  const auto cap = cdma::exact_noiseless_capacity(size, mode, threads);
  const char* mode_name = f.samples ? "sampled" : (f.no_reduce ? "exhaustive" : "exhaustive_reduced");

  json out{{"m", f.m},
           {"n", f.n},
           {"mode", mode_name},
           {"matrices", cap.matrices},
           {"max", cap.max},
           {"mean", cap.mean},
           {"argmax", matrix_inline(cap.argmax)}};
  if (f.samples) out["seed"] = f.seed;

  int code = kOk;
  std::string sandwich;
  if (f.check) {
    const double lower = cdma::noiseless_lower(size).bits_total;
    const double upper = cdma::conjectured_upper(size, cdma::NoiseModel::noiseless()).bits_total;
    constexpr double kSlack = 1e-9;
    const bool ok = lower <= cap.mean + kSlack && cap.mean <= cap.max + kSlack && cap.max <= upper + kSlack;
    out["check"] = {{"lower", lower}, {"upper", upper}, {"ok", ok}};
    sandwich = cdma::format_general(lower, 7) + " ≤ " + cdma::format_general(cap.max, 7) + " ≤ " +
               cdma::format_general(upper, 7);
    if (!ok) code = kViolation;
  }

  if (as_json) {
    os << out.dump(2) << '\n';
  } else {
    flatten(out, "", os);
    if (f.check) os << sandwich << '\n';
  }
  if (code == kViolation) std::cerr << "error: bound sandwich violated\n";
  return code;
}

int run_oracle_mc(const OracleMcFlags& f, int threads, bool as_json, std::ostream& os) {
  if (f.matrix.has_value() == f.walsh.has_value()) throw cdma::DomainError("oracle mc needs exactly one of --matrix or --walsh");
  cdma::SignatureMatrix a(1, 1);
  if (f.matrix) {
    std::ifstream in(*f.matrix);
    if (!in) throw cdma::DomainError("cannot read matrix file '" + *f.matrix + "'");
    a = cdma::parse_signature_matrix(in);
  } else {
    a = cdma::SignatureMatrix::walsh(*f.walsh);
  }
  const auto model = f.noise.model();
  if (!model) throw cdma::DomainError("oracle mc needs a noise model (--noise, --sigma2 or --ebn0-db)");
  const auto est = cdma::mc_mutual_information(a, *model, f.samples, f.seed, threads);

  json out{{"m", a.rows()},
           {"n", a.cols()},
           {"noise", model->describe()},
           {"samples", est.samples},
           {"seed", est.seed},
           {"mean", est.mean},
           {"std_error", est.std_error}};
  int code = kOk;
  if (f.check) {
    // The uniform-input upper bound holds for every signature matrix.
    const double upper = cdma::conjectured_upper({a.rows(), a.cols()}, *model).bits_total;
    const bool ok = est.mean - 3.0 * est.std_error <= upper + 1e-9;
    out["check"] = {{"upper", upper}, {"ok", ok}};
    if (!ok) code = kViolation;
  }
  if (as_json) {
    os << out.dump(2) << '\n';
  } else {
    flatten(out, "", os);
  }
  if (code == kViolation) std::cerr << "error: Monte Carlo estimate exceeds the upper bound\n";
  return code;
}

template <class T>
std::optional<std::vector<T>> nonempty(const std::vector<T>& v) {
  if (v.empty()) return std::nullopt;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sum-capacity bounds for binary CDMA"};
  app.require_subcommand(1);

  int threads = cdma::default_threads();
  bool as_json = false;
  std::optional<std::string> out_path;
  auto add_common = [&](CLI::App& sub) {
    sub.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub.add_option("--out", out_path, "write output to this file");
  };

  auto* bound = app.add_subcommand("bound", "evaluate bounds at one point");
  BoundFlags bound_flags;
  bound_flags.add(*bound);
  add_common(*bound);
  bound->add_flag("--json", as_json, "machine-readable output");

  auto* sweep = app.add_subcommand("sweep", "vary one parameter and emit CSV");
  BoundFlags sweep_flags;
  sweep_flags.add(*sweep);
  add_common(*sweep);
  std::string sweep_var;
  std::string sweep_values;
  sweep->add_option("--var", sweep_var, "n | m | ebn0_db | beta")->required();
  sweep->add_option("--values", sweep_values, "start:stop:step or v1,v2,...")->required();

  auto* figure = app.add_subcommand("figure", "emit the CSV for one figure analogue");
  int figure_id = 0;
  std::vector<int> fig_m;
  std::vector<int> fig_n;
  std::vector<double> fig_beta;
  std::vector<double> fig_ebn0;
  std::vector<double> fig_gamma;
  std::optional<std::string> fig_x;
  figure->add_option("id", figure_id, "figure number 1..10")->required();
  figure->add_option("--m", fig_m, "override the spreading gains");
  figure->add_option("--n", fig_n, "override the user counts");
  figure->add_option("--beta", fig_beta, "override the loads");
  figure->add_option("--ebn0-db", fig_ebn0, "override the Eb/N0 values");
  figure->add_option("--gamma", fig_gamma, "override the gamma values");
  figure->add_option("--x-range", fig_x, "override the x axis as start:stop:step");
  add_common(*figure);

  auto* oracle = app.add_subcommand("oracle", "brute-force and Monte Carlo references");
  oracle->require_subcommand(1);
  auto* exact = oracle->add_subcommand("exact", "max/mean noiseless capacity over signature matrices");
  OracleExactFlags exact_flags;
  exact->add_option("--m", exact_flags.m, "spreading gain")->required();
  exact->add_option("--n", exact_flags.n, "number of users")->required();
  exact->add_option("--samples", exact_flags.samples, "sample this many random matrices instead");
  exact->add_option("--seed", exact_flags.seed, "seed for --samples");
  exact->add_flag("--no-reduce", exact_flags.no_reduce, "do not fix the first row");
  exact->add_flag("--check-bounds", exact_flags.check, "check lower <= mean <= max <= upper");
  exact->add_flag("--json", as_json, "machine-readable output");
  add_common(*exact);

  auto* mc = oracle->add_subcommand("mc", "Monte Carlo mutual information for one matrix");
  OracleMcFlags mc_flags;
  mc->add_option("--matrix", mc_flags.matrix, "signature matrix file");
  mc->add_option("--walsh", mc_flags.walsh, "use the Walsh matrix of this order");
  mc_flags.noise.add(*mc);
  mc->add_option("--samples", mc_flags.samples, "number of samples");
  mc->add_option("--seed", mc_flags.seed, "base seed");
  mc->add_flag("--check-bounds", mc_flags.check, "check the estimate against the upper bound");
  mc->add_flag("--json", as_json, "machine-readable output");
  add_common(*mc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Sink sink(out_path);
    std::ostream& os = sink.stream();
    if (bound->parsed()) {
      auto req = bound_flags.request();
      print_records(cdma::evaluate(req), as_json, os);
      return kOk;
    }
    if (sweep->parsed()) {
      cdma::SweepSpec spec{sweep_var, cdma::parse_values(sweep_values), sweep_flags.request()};
      cdma::write_csv(os, cdma::sweep_rows(spec, threads));
      return kOk;
    }
    if (figure->parsed()) {
      cdma::FigureOverrides ov{nonempty(fig_m), nonempty(fig_n), nonempty(fig_beta), nonempty(fig_ebn0),
                               nonempty(fig_gamma), std::nullopt};
      if (fig_x) {
        const auto xs = cdma::parse_values(*fig_x);
        if (fig_x->find(':') == std::string::npos) throw cdma::DomainError("--x-range must be start:stop:step");
        ov.x = cdma::Range{xs.front(), xs.back(), xs.size() > 1 ? xs[1] - xs[0] : 1.0};
      }
      cdma::write_csv(os, cdma::figure_rows(figure_id, ov, threads));
      return kOk;
    }
    if (exact->parsed()) return run_oracle_exact(exact_flags, threads, as_json, os);
    if (mc->parsed()) return run_oracle_mc(mc_flags, threads, as_json, os);
  } catch (const cdma::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const cdma::UnsupportedOperation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const cdma::AccuracyError& e) {
    std::cerr << "error: " << e.what() << " (partial=" << cdma::format_double(e.partial()) << ")\n";
    return kNumerical;
  } catch (const cdma::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const cdma::ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kResource;
  }
  return kUsage;
}
