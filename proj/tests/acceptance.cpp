// Acceptance gate: one PASS/FAIL line per primary criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cdma/asymptotic.hpp"
#include "cdma/finite_bounds.hpp"
#include "cdma/format.hpp"
#include "cdma/noise.hpp"
#include "cdma/oracle.hpp"
#include "support.hpp"

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using cdma::format_general;

double sigma2_of(double db) { return cdma::EbN0{db}.sigma2(); }

Outcome c01_noiseless_sandwich() {
  double worst = INFINITY;
  int cases = 0;
  for (int m = 1; m <= 3; ++m) {
    for (int n = 1; n <= 4 && m * n <= 12; ++n) {
      const cdma::SystemSize size{m, n};
      const auto cap = cdma::exact_noiseless_capacity(size);
      const double lo = cdma::noiseless_lower(size).bits_total;
      const double up = cdma::conjectured_upper(size, cdma::NoiseModel::noiseless()).bits_total;
      worst = std::min({worst, cap.mean - lo, cap.max - cap.mean, up - cap.max});
      ++cases;
    }
  }
  const auto c12 = cdma::exact_noiseless_capacity({1, 2});
  const auto c22 = cdma::exact_noiseless_capacity({2, 2});
  const bool spots = std::abs(cdma::noiseless_lower({1, 2}).bits_total - 1.415037) < 5e-7 &&
                     std::abs(c12.mean - 1.5) < 1e-12 && std::abs(c12.max - 1.5) < 1e-12 &&
                     std::abs(cdma::conjectured_upper({1, 2}, cdma::NoiseModel::noiseless()).bits_total - 1.5) < 1e-12 &&
                     std::abs(cdma::noiseless_lower({2, 2}).bits_total - 1.678072) < 5e-7 &&
                     c22.mean >= cdma::noiseless_lower({2, 2}).bits_total && std::abs(c22.max - 2.0) < 1e-12;
  return {worst >= -1e-9 && spots, std::to_string(cases) + " sizes, min slack " + format_general(worst, 3) +
                                       ", spot values " + (spots ? "ok" : "WRONG")};
}

Outcome c02_noise_to_zero() {
  const cdma::SystemSize size{8, 12};
  const double target = cdma::noiseless_lower(size).bits_per_user;
  std::vector<double> v;
  for (double s2 : {1e-2, 1e-4, 1e-6}) v.push_back(cdma::noisy_lower_envelope(size, cdma::NoiseModel::gaussian(s2)).bits_per_user);
  const bool monotone = v[0] < v[1] && v[1] < v[2] && v[2] <= target + 1e-12;
  const double gap = target - v[2];
  return {monotone && gap < 0.01, "envelope " + format_general(v[0], 6) + " < " + format_general(v[1], 6) + " < " +
                                      format_general(v[2], 6) + ", gap " + format_general(gap, 3) + " bits/user"};
}

Outcome c03_closed_vs_generic() {
  std::mt19937_64 rng(2024);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  double worst_g = 0.0;
  double worst_u = 0.0;
  for (int i = 0; i < 50; ++i) {
    const cdma::SystemSize size{integer(1, 16), integer(1, 16)};
    const double gamma = std::exp(uni(std::log(0.01), std::log(10.0)));
    const auto g = cdma::NoiseModel::gaussian(uni(0.05, 4.0));
    worst_g = std::max(worst_g, std::abs(cdma::noisy_lower_gamma(size, g, gamma).meta.raw_bits_total -
                                         cdma::noisy_lower_generic(size, g, gamma).meta.raw_bits_total));
    const auto u = cdma::NoiseModel::uniform(uni(0.1, 3.0));
    worst_u = std::max(worst_u,
                       std::abs(cdma::noisy_lower_gamma(size, u, gamma, cdma::Eq6Mode::derived).meta.raw_bits_total -
                                cdma::noisy_lower_generic(size, u, gamma).meta.raw_bits_total));
  }
  return {worst_g < 1e-7 && worst_u < 1e-7,
          "max |diff| Gaussian " + format_general(worst_g, 3) + ", uniform " + format_general(worst_u, 3) + " bits"};
}

Outcome c04_single_user_tightness() {
  bool ok = true;
  std::string detail;
  const auto a = cdma::SignatureMatrix::from_rows({{1}});
  for (double s2 : {0.25, 1.0, 4.0}) {
    const double up = cdma::conjectured_upper({1, 1}, cdma::NoiseModel::gaussian(s2)).bits_total;
    const auto est = cdma::mc_mutual_information(a, cdma::NoiseModel::gaussian(s2), 400000, 20240, cdma::default_threads());
    const double z = std::abs(est.mean - up) / est.std_error;
    ok = ok && z <= 3.0;
    detail += "s2=" + format_general(s2, 3) + ": " + format_general(z, 2) + " se; ";
  }
  return {ok, detail};
}

Outcome c05_tanaka_vs_bpsk() {
  double worst = INFINITY;
  for (double beta : {0.5, 1.0}) {
    for (double db : {0.0, 4.0, 8.0}) {
      const double s2 = sigma2_of(db);
      worst = std::min(worst, cdma::tanaka_capacity(cdma::LoadPoint::from_beta(beta), s2).c_per_user -
                                  cdma::bpsk_reference(s2));
    }
  }
  return {worst >= -0.01, "min(tanaka - bpsk) = " + format_general(worst, 4)};
}

Outcome c06_tanaka_large_load() {
  const double s2 = 0.25;
  std::vector<double> err;
  std::string detail = "ratio";
  for (double beta : {8.0, 32.0, 128.0}) {
    const auto load = cdma::LoadPoint::from_beta(beta);
    const double ratio = cdma::tanaka_capacity(load, s2).c_per_user / cdma::asympt_upper(load, s2).bits_per_user;
    err.push_back(std::abs(ratio - 1.0));
    detail += " " + format_general(ratio, 6);
  }
  return {err[0] > err[1] && err[1] > err[2] && err[2] < 0.05, detail + " at beta 8, 32, 128"};
}

Outcome c07_d1_dominance() {
  double worst_dom = -INFINITY;
  double worst_gap = 0.0;
  for (double beta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    for (double db : {0.0, 8.0, 16.0}) {
      const auto load = cdma::LoadPoint::from_beta(beta);
      const double lo = cdma::asympt_lower_gaussian(load, sigma2_of(db)).bits_per_user;
      const double d1 = cdma::d1_approx(load, sigma2_of(db)).bits_per_user;
      worst_dom = std::max(worst_dom, lo - d1);
      worst_gap = std::max(worst_gap, std::abs(d1 - lo));
    }
  }
  return {worst_dom <= 1e-6 && worst_gap < 0.05,
          "max(lower - d1) = " + format_general(worst_dom, 3) + ", max |d1 - lower| = " + format_general(worst_gap, 3)};
}

Outcome c08_shannon_limit() {
  const auto load = cdma::LoadPoint::from_beta(1e-6);
  auto excess = [&](double db) { return cdma::asympt_upper(load, sigma2_of(db)).raw - 1.0; };
  double lo = -3.0;
  double hi = 0.0;
  if (!(excess(lo) < 0.0 && excess(hi) > 0.0)) return {false, "no sign change on [-3, 0] dB"};
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  const double cross = 0.5 * (lo + hi);
  return {std::abs(cross + 1.593) <= 0.01, "crosses 1 bit/user at " + format_general(cross, 6) + " dB"};
}

Outcome c09_figure1_anchor() {
  int last = 0;
  for (int n = 1; n <= 400; ++n)
    if (cdma::noiseless_lower({64, n}).bits_per_user >= 0.95) last = n;
  bool upper_one = true;
  for (int n = 200; n <= 280; ++n)
    upper_one = upper_one && cdma::conjectured_upper({64, n}, cdma::NoiseModel::noiseless()).bits_per_user == 1.0;
  return {last >= 200 && last <= 280 && upper_one,
          "largest n with lower >= 0.95 is " + std::to_string(last) + ", upper = 1 on [200, 280]: " +
              (upper_one ? "yes" : "no")};
}

Outcome c10_finite_to_asymptotic() {
  const double s2 = sigma2_of(8.0);
  const double finite = cdma::noisy_lower_envelope({64, 128}, cdma::NoiseModel::gaussian(s2)).bits_per_user;
  const double limit = cdma::asympt_lower_gaussian(cdma::LoadPoint::from_beta(2.0), s2).bits_per_user;
  const double diff = std::abs(finite - limit);
  return {diff < 0.02, "finite " + format_general(finite, 6) + ", asymptotic " + format_general(limit, 6) + ", |diff| " +
                           format_general(diff, 3)};
}

Outcome c11_uniform_exact_entropy() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int m = std::uniform_int_distribution<int>(1, 16)(rng);
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    const auto u = cdma::NoiseModel::uniform(std::uniform_real_distribution<double>(0.1, 3.0)(rng));
    worst = std::max(worst, std::abs(cdma::mixture_entropy(u, m, n) - cdma::mixture_entropy_quadrature(u, m, n)));
  }
  return {worst < 1e-6, "max |exact - quadrature| = " + format_general(worst, 3) + " bits"};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c12_determinism() {
  using testing_support::run_cli;
  const std::vector<std::string> commands = {
      "bound --m 64 --n 128 --ebn0-db 8 --side both",
      "bound --beta 2 --ebn0-db 8 --asymptotic --side both --tanaka --json",
      "sweep --var ebn0_db --values -2:10:2 --m 16 --n 32 --side both",
      "figure 2",
      "figure 9 --m 8",
      "oracle exact --m 3 --n 5",
      "oracle exact --m 6 --n 8 --samples 500 --seed 11",
      "oracle mc --walsh 4 --sigma2 0.5 --samples 50000 --seed 7",
  };
  int compared = 0;
  for (const auto& cmd : commands) {
    const auto a = run_cli(cmd + " --threads 1");
    const auto b = run_cli(cmd + " --threads 1");
    const auto c = run_cli(cmd + " --threads 4");
    if (a.exit_code != 0 || a.out.empty()) return {false, "command failed: " + cmd};
    if (a.out != b.out) return {false, "repeat differs: " + cmd};
    if (a.out != c.out) return {false, "thread count changes output: " + cmd};
    ++compared;
  }
  const std::string f1 = "acceptance_fig3_t1.csv";
  const std::string f4 = "acceptance_fig3_t4.csv";
  if (run_cli("figure 3 --threads 1 --out " + f1).exit_code != 0 || run_cli("figure 3 --threads 4 --out " + f4).exit_code != 0)
    return {false, "figure 3 --out failed"};
  const bool same = slurp(f1) == slurp(f4) && !slurp(f1).empty();
  std::remove(f1.c_str());
  std::remove(f4.c_str());
  if (!same) return {false, "CSV files differ across thread counts"};
  return {true, std::to_string(compared) + " commands x 3 runs and a CSV file pair are byte-identical"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "noiseless sandwich vs exhaustive oracle", 10, c01_noiseless_sandwich},
      {2, "Gaussian envelope -> noiseless bound as noise vanishes", 5, c02_noise_to_zero},
      {3, "closed-form family vs generic quadrature", 60, c03_closed_vs_generic},
      {4, "m = n = 1 upper bound vs Monte Carlo", 30, c04_single_user_tightness},
      {5, "Tanaka >= BPSK - 0.01 for beta <= 1", 5, c05_tanaka_vs_bpsk},
      {6, "Tanaka / asymptotic upper -> 1 at large load", 5, c06_tanaka_large_load},
      {7, "D1 dominates and approximates the asymptotic lower bound", 60, c07_d1_dominance},
      {8, "Shannon-limit anchor at -1.593 dB", 0, c08_shannon_limit},
      {9, "figure 1 anchor near n = 239", 10, c09_figure1_anchor},
      {10, "finite envelope vs asymptotic lower bound", 0, c10_finite_to_asymptotic},
      {11, "uniform mixture entropy exact vs quadrature", 0, c11_uniform_exact_entropy},
      {12, "CLI determinism across runs and thread counts", 0, c12_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = out.pass;
    std::string timing = format_general(secs, 3) + " s";
    if (c.budget_s > 0) {
      timing += " of " + format_general(c.budget_s, 3) + " s";
      if (secs > c.budget_s) pass = false;
    }
    if (!pass) ++failures;
    std::printf("%s C%02d %s: %s [%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu primary criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
