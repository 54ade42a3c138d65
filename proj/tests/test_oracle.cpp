#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "catch_amalgamated.hpp"
#include "cdma/errors.hpp"
#include "cdma/finite_bounds.hpp"
#include "cdma/oracle.hpp"
#include "support.hpp"

using Catch::Matchers::WithinAbs;

namespace {

cdma::SignatureMatrix random_matrix(testing_support::Gen& gen, int m, int n) {
  cdma::SignatureMatrix a(m, n);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) a.set(r, c, gen.coin() ? 1 : -1);
  return a;
}

// Plain enumeration in binary order with a map of output vectors.
double entropy_bruteforce(const cdma::SignatureMatrix& a) {
  const int m = a.rows();
  const int n = a.cols();
  std::map<std::vector<int>, long> counts;
  for (long x = 0; x < (1L << n); ++x) {
    std::vector<int> y(m, 0);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) y[r] += a.at(r, c) * (((x >> c) & 1) ? 1 : -1);
    ++counts[y];
  }
  double h = 0.0;
  const double total = std::ldexp(1.0, n);
  for (const auto& [y, c] : counts) h -= c / total * std::log2(c / total);
  return h;
}

cdma::SignatureMatrix permuted(const cdma::SignatureMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  cdma::SignatureMatrix b(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) b.set(r, c, a.at(rows[r], cols[c]));
  return b;
}

}  // namespace

TEST_CASE("signature matrices") {
  CHECK_THROWS_AS(cdma::SignatureMatrix(0, 2), cdma::DomainError);
  cdma::SignatureMatrix a(2, 3);
  CHECK_THROWS_AS(a.set(0, 0, 0), cdma::DomainError);
  CHECK_THROWS_AS(cdma::SignatureMatrix::from_rows({{1, 1}, {1}}), cdma::DomainError);
  CHECK_THROWS_AS(cdma::SignatureMatrix::from_rows({{1, 2}}), cdma::DomainError);
  const auto w = cdma::SignatureMatrix::walsh(4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      int dot = 0;
      for (int r = 0; r < 4; ++r) dot += w.at(r, i) * w.at(r, j);
      CHECK(dot == (i == j ? 4 : 0));
    }
  CHECK_THROWS_AS(cdma::SignatureMatrix::walsh(3), cdma::DomainError);
}

TEST_CASE("signature matrix text format") {
  std::istringstream in("# walsh\n2 2\n+1 +1\n\n+ -\n");
  const auto a = cdma::parse_signature_matrix(in);
  CHECK(a == cdma::SignatureMatrix::from_rows({{1, 1}, {1, -1}}));
  std::istringstream again(cdma::format_signature_matrix(a));
  CHECK(cdma::parse_signature_matrix(again) == a);
  for (const char* bad : {"", "2 2\n1 1\n", "1 2\n1 0\n", "1 2\n1 1 1\n", "1 2\n1\n", "x y\n"}) {
    std::istringstream s(bad);
    CHECK_THROWS_AS(cdma::parse_signature_matrix(s), cdma::DomainError);
  }
}

TEST_CASE("output entropy examples") {
  CHECK(cdma::output_entropy(cdma::SignatureMatrix::from_rows({{1}})) == 1.0);
  CHECK_THAT(cdma::output_entropy(cdma::SignatureMatrix::from_rows({{1, 1}})), WithinAbs(1.5, 1e-15));
  CHECK_THAT(cdma::output_entropy(cdma::SignatureMatrix::from_rows({{1, 1}, {1, -1}})), WithinAbs(2.0, 1e-15));
  CHECK_THROWS_AS(cdma::output_entropy(cdma::SignatureMatrix(1, 25)), cdma::ResourceError);
}

TEST_CASE("output entropy matches plain enumeration") {
  testing_support::Gen gen(51);
  for (int i = 0; i < 60; ++i) {
    const auto a = random_matrix(gen, gen.integer(1, 6), gen.integer(1, 10));
    CHECK_THAT(cdma::output_entropy(a), WithinAbs(entropy_bruteforce(a), 1e-12));
  }
  // Tall matrices take the wide-key path.
  for (int i = 0; i < 5; ++i) {
    const auto a = random_matrix(gen, 20, 8);
    CHECK_THAT(cdma::output_entropy(a), WithinAbs(entropy_bruteforce(a), 1e-12));
  }
}

TEST_CASE("output entropy is invariant under relabelings") {
  testing_support::Gen gen(52);
  for (int i = 0; i < 40; ++i) {
    const int m = gen.integer(1, 5);
    const int n = gen.integer(1, 9);
    const auto a = random_matrix(gen, m, n);
    const double h = cdma::output_entropy(a);
    std::vector<int> rows(m), cols(n);
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(rows.begin(), rows.end(), gen.engine());
    std::shuffle(cols.begin(), cols.end(), gen.engine());
    CHECK_THAT(cdma::output_entropy(permuted(a, rows, cols)), WithinAbs(h, 1e-12));
    auto b = a;
    b.negate_row(gen.integer(0, m - 1));
    CHECK_THAT(cdma::output_entropy(b), WithinAbs(h, 1e-12));
    auto c = a;
    c.negate_col(gen.integer(0, n - 1));
    CHECK_THAT(cdma::output_entropy(c), WithinAbs(h, 1e-12));
  }
}

TEST_CASE("exact noiseless capacity examples") {
  const auto c11 = cdma::exact_noiseless_capacity({1, 1});
  CHECK(c11.max == 1.0);
  CHECK(c11.mean == 1.0);
  const auto c12 = cdma::exact_noiseless_capacity({1, 2});
  CHECK_THAT(c12.max, WithinAbs(1.5, 1e-15));
  CHECK_THAT(c12.mean, WithinAbs(1.5, 1e-15));
  const auto c22 = cdma::exact_noiseless_capacity({2, 2});
  CHECK_THAT(c22.max, WithinAbs(2.0, 1e-15));
  CHECK(c22.mean > 1.678);
  CHECK(c22.mean < 2.0);
  CHECK(cdma::output_entropy(c22.argmax) == c22.max);
}

TEST_CASE("symmetry reduction leaves max and mean unchanged") {
  for (auto [m, n] : std::vector<std::pair<int, int>>{{2, 2}, {1, 3}, {2, 3}, {3, 2}}) {
    const auto reduced = cdma::exact_noiseless_capacity({m, n}, cdma::ExhaustiveMode{true});
    const auto full = cdma::exact_noiseless_capacity({m, n}, cdma::ExhaustiveMode{false});
    CHECK(full.matrices == (reduced.matrices << n));
    CHECK_THAT(reduced.max, WithinAbs(full.max, 1e-12));
    CHECK_THAT(reduced.mean, WithinAbs(full.mean, 1e-12));
  }
}

TEST_CASE("exact noiseless capacity is sandwiched by the bounds") {
  for (int m = 1; m <= 4; ++m) {
    for (int n = 1; n * m <= 16; ++n) {
      const cdma::SystemSize size{m, n};
      const auto cap = cdma::exact_noiseless_capacity(size, cdma::ExhaustiveMode{}, 2);
      INFO("m=" << m << " n=" << n);
      CHECK(cap.mean >= cdma::noiseless_lower(size).bits_total - 1e-9);
      CHECK(cap.max >= cap.mean - 1e-12);
      CHECK(cap.max <= cdma::conjectured_upper(size, cdma::NoiseModel::noiseless()).bits_total + 1e-9);
    }
  }
}

TEST_CASE("exact capacity caps and determinism") {
  CHECK_THROWS_AS(cdma::exact_noiseless_capacity({4, 8}), cdma::ResourceError);
  CHECK_THROWS_AS(cdma::exact_noiseless_capacity({3, 7}, cdma::ExhaustiveMode{false}), cdma::ResourceError);
  CHECK_NOTHROW(cdma::exact_noiseless_capacity({2, 10}));
  const auto one = cdma::exact_noiseless_capacity({3, 5}, cdma::ExhaustiveMode{}, 1);
  const auto four = cdma::exact_noiseless_capacity({3, 5}, cdma::ExhaustiveMode{}, 4);
  CHECK(one.max == four.max);
  CHECK(one.mean == four.mean);
  CHECK(one.argmax == four.argmax);
  const auto s1 = cdma::exact_noiseless_capacity({6, 8}, cdma::SampledMode{300, 9}, 1);
  const auto s3 = cdma::exact_noiseless_capacity({6, 8}, cdma::SampledMode{300, 9}, 3);
  CHECK(s1.matrices == 300);
  CHECK(s1.mean == s3.mean);
  CHECK(s1.max == s3.max);
  CHECK(cdma::exact_noiseless_capacity({6, 8}, cdma::SampledMode{300, 10}).mean != s1.mean);
}

TEST_CASE("seed derivation spreads indices") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 5000; ++i) seen.insert(cdma::derive_seed(7, i));
  CHECK(seen.size() == 5000);
  CHECK(cdma::derive_seed(7, 0) != cdma::derive_seed(8, 0));
}

TEST_CASE("Monte Carlo mutual information limits") {
  const auto a = cdma::SignatureMatrix::from_rows({{1, 1}});
  const auto quiet = cdma::mc_mutual_information(a, cdma::NoiseModel::gaussian(1e-10), 20000, 3);
  CHECK(std::abs(quiet.mean - 1.5) <= 3 * quiet.std_error + 1e-12);
  const auto loud = cdma::mc_mutual_information(a, cdma::NoiseModel::gaussian(1e6), 20000, 3);
  CHECK(std::abs(loud.mean) <= 3 * loud.std_error);
  CHECK(quiet.samples == 20000);
  CHECK(quiet.seed == 3);
}

TEST_CASE("Monte Carlo agrees with the exact single-user value") {
  const auto a = cdma::SignatureMatrix::from_rows({{1}});
  for (const auto& model : {cdma::NoiseModel::gaussian(1.0), cdma::NoiseModel::uniform(1.5)}) {
    const auto est = cdma::mc_mutual_information(a, model, 100000, 17);
    const double exact = cdma::conjectured_upper({1, 1}, model).bits_total;
    INFO(model.describe() << " mean=" << est.mean << " se=" << est.std_error << " exact=" << exact);
    CHECK(std::abs(est.mean - exact) <= 3 * est.std_error);
  }
}

TEST_CASE("Monte Carlo determinism and error bars") {
  const auto w = cdma::SignatureMatrix::walsh(2);
  const auto g = cdma::NoiseModel::gaussian(0.5);
  const auto a1 = cdma::mc_mutual_information(w, g, 30000, 99, 1);
  const auto a4 = cdma::mc_mutual_information(w, g, 30000, 99, 4);
  CHECK(a1.mean == a4.mean);
  CHECK(a1.std_error == a4.std_error);
  const auto b = cdma::mc_mutual_information(w, g, 30000, 100, 2);
  CHECK(b.mean != a1.mean);
  CHECK(std::abs(b.mean - a1.mean) <= 6 * std::hypot(a1.std_error, b.std_error));
}

TEST_CASE("Walsh systems beat hard-decision BPSK") {
  for (int order : {2, 4}) {
    for (double s2 : {0.25, 1.0}) {
      const auto est = cdma::mc_mutual_information(cdma::SignatureMatrix::walsh(order), cdma::NoiseModel::gaussian(s2),
                                                   20000, 5);
      CHECK((est.mean + 3 * est.std_error) / order >= cdma::bpsk_reference(s2));
    }
  }
}

TEST_CASE("Monte Carlo argument checks") {
  const auto a = cdma::SignatureMatrix::from_rows({{1}});
  CHECK_THROWS_AS(cdma::mc_mutual_information(a, cdma::NoiseModel::noiseless(), 100, 1), cdma::UnsupportedOperation);
  CHECK_THROWS_AS(cdma::mc_mutual_information(a, cdma::NoiseModel::gaussian(1), 1, 1), cdma::DomainError);
  CHECK_THROWS_AS(cdma::mc_mutual_information(cdma::SignatureMatrix(1, 17), cdma::NoiseModel::gaussian(1), 10, 1),
                  cdma::ResourceError);
}
