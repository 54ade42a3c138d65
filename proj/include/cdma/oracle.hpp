#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "cdma/errors.hpp"
#include "cdma/finite_bounds.hpp"
#include "cdma/noise.hpp"
#include "cdma/numerics.hpp"
#include "cdma/parallel.hpp"

/// Ground truth at desk scale: exhaustive enumeration for the noiseless
/// channel and Monte Carlo mutual information for the noisy one.
namespace cdma {

/// m x n matrix with +-1 entries, one column (signature) per user.
class SignatureMatrix {
 public:
  SignatureMatrix(int m, int n) : m_(m), n_(n), entries_(static_cast<std::size_t>(m) * n, 1) {
    if (m < 1 || n < 1) throw DomainError("SignatureMatrix: need m >= 1 and n >= 1");
  }

  static SignatureMatrix from_rows(const std::vector<std::vector<int>>& rows) {
    if (rows.empty() || rows.front().empty()) throw DomainError("SignatureMatrix: empty matrix");
    SignatureMatrix a(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int r = 0; r < a.m_; ++r) {
      if (static_cast<int>(rows[r].size()) != a.n_) throw DomainError("SignatureMatrix: ragged rows");
      for (int c = 0; c < a.n_; ++c) a.set(r, c, rows[r][c]);
    }
    return a;
  }

  /// Sylvester-Hadamard (Walsh) matrix of the given power-of-two order.
  static SignatureMatrix walsh(int order) {
    if (order < 1 || !std::has_single_bit(static_cast<unsigned>(order))) {
      throw DomainError("SignatureMatrix::walsh: order must be a power of two");
    }
    SignatureMatrix a(order, order);
    for (int r = 0; r < order; ++r) {
      for (int c = 0; c < order; ++c) a.set(r, c, std::popcount(static_cast<unsigned>(r & c)) % 2 ? -1 : 1);
    }
    return a;
  }

  int rows() const { return m_; }
  int cols() const { return n_; }
  int at(int r, int c) const { return entries_[static_cast<std::size_t>(r) * n_ + c]; }
  void set(int r, int c, int v) {
    if (v != 1 && v != -1) throw DomainError("SignatureMatrix: entries must be +1 or -1");
    entries_[static_cast<std::size_t>(r) * n_ + c] = static_cast<std::int8_t>(v);
  }
  void negate_row(int r) {
    for (int c = 0; c < n_; ++c) set(r, c, -at(r, c));
  }
  void negate_col(int c) {
    for (int r = 0; r < m_; ++r) set(r, c, -at(r, c));
  }

  friend bool operator==(const SignatureMatrix&, const SignatureMatrix&) = default;

 private:
  int m_;
  int n_;
  std::vector<std::int8_t> entries_;
};

/// Text format: "m n" on the first line, then m rows of n entries drawn from
/// {+1, -1, 1, +, -}. Blank lines and lines starting with '#' are ignored.
inline SignatureMatrix parse_signature_matrix(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw DomainError("matrix file: missing header");
  std::istringstream header(lines.front());
  int m = 0;
  int n = 0;
  if (!(header >> m >> n) || m < 1 || n < 1) throw DomainError("matrix file: header must be 'm n'");
  if (static_cast<int>(lines.size()) - 1 != m) throw DomainError("matrix file: expected " + std::to_string(m) + " rows");
  SignatureMatrix a(m, n);
  for (int r = 0; r < m; ++r) {
    std::istringstream row(lines[r + 1]);
    std::string tok;
    int c = 0;
    while (row >> tok) {
      if (c >= n) throw DomainError("matrix file: row " + std::to_string(r + 1) + " has too many entries");
      if (tok == "+1" || tok == "1" || tok == "+") {
        a.set(r, c, 1);
      } else if (tok == "-1" || tok == "-") {
        a.set(r, c, -1);
      } else {
        throw DomainError("matrix file: bad entry '" + tok + "'");
      }
      ++c;
    }
    if (c != n) throw DomainError("matrix file: row " + std::to_string(r + 1) + " has too few entries");
  }
  return a;
}

inline std::string format_signature_matrix(const SignatureMatrix& a) {
  std::string out = std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) {
      if (c) out += ' ';
      out += a.at(r, c) > 0 ? "+1" : "-1";
    }
    out += '\n';
  }
  return out;
}

inline constexpr int kMaxEntropyUsers = 24;

/// H(Ax) in bits for x uniform on {+-1}^n, i.e. I(X;Y) of the noiseless
/// channel. Outputs are compared as integer vectors; the 1/sqrt(m) scale is a
/// bijective relabelling and is skipped.
inline double output_entropy(const SignatureMatrix& a) {
  const int m = a.rows();
  const int n = a.cols();
  if (n > kMaxEntropyUsers) {
    throw ResourceError("output_entropy: n=" + std::to_string(n) + " exceeds " + std::to_string(kMaxEntropyUsers));
  }
  const std::uint64_t inputs = std::uint64_t{1} << n;
  const int width = std::bit_width(static_cast<unsigned>(2 * n));
  const bool packable = m * width <= 64;
  if (!packable && inputs * static_cast<std::uint64_t>(m) > (std::uint64_t{1} << 27)) {
    throw ResourceError("output_entropy: output vectors too large to enumerate");
  }

  // Gray-code walk starting from x = (-1, ..., -1).
  std::vector<int> y(m, 0);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) y[r] -= a.at(r, c);
  }
  std::vector<int> x(n, -1);
  std::vector<std::uint64_t> packed;
  std::map<std::vector<int>, std::uint64_t> spilled;
  if (packable) packed.reserve(inputs);
  auto record = [&] {
    if (packable) {
      std::uint64_t key = 0;
      for (int r = 0; r < m; ++r) key = (key << width) | static_cast<std::uint64_t>(y[r] + n);
      packed.push_back(key);
    } else {
      ++spilled[y];
    }
  };
  record();
  for (std::uint64_t i = 1; i < inputs; ++i) {
    const int bit = std::countr_zero(i);
    const int step = -2 * x[bit];
    x[bit] = -x[bit];
    for (int r = 0; r < m; ++r) y[r] += step * a.at(r, bit);
    record();
  }

  std::vector<std::uint64_t> counts;
  if (packable) {
    std::sort(packed.begin(), packed.end());
    for (std::size_t i = 0; i < packed.size();) {
      std::size_t j = i;
      while (j < packed.size() && packed[j] == packed[i]) ++j;
      counts.push_back(j - i);
      i = j;
    }
  } else {
    for (const auto& [key, count] : spilled) counts.push_back(count);
  }
  // H = n - 2^-n sum_j n_j log2 n_j
  double acc = 0.0;
  for (auto c : counts) {
    if (c > 1) acc += static_cast<double>(c) * std::log2(static_cast<double>(c));
  }
  return n - acc / static_cast<double>(inputs);
}

/// splitmix64 finalizer; derives independent per-item seeds from one user seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct ExhaustiveMode {
  bool reduce_symmetry = true;
};

struct SampledMode {
  std::uint64_t count = 1000;
  std::uint64_t seed = 0;
};

using EnumerationMode = std::variant<ExhaustiveMode, SampledMode>;

struct NoiselessCapacity {
  double max = 0.0;
  double mean = 0.0;
  std::uint64_t matrices = 0;
  SignatureMatrix argmax{1, 1};
};

inline constexpr int kMaxFreeEntries = 20;

/// Max and mean of output_entropy over signature matrices. Exhaustive mode
/// fixes the first row to +1 (negating a column relabels one input), which
/// leaves both statistics unchanged and shrinks the space by 2^n.
inline NoiselessCapacity exact_noiseless_capacity(SystemSize size, EnumerationMode mode = ExhaustiveMode{},
                                                  int threads = 1) {
  size.validate();
  const int m = size.m;
  const int n = size.n;
  if (n > kMaxEntropyUsers) throw ResourceError("exact_noiseless_capacity: too many users");

  std::uint64_t count = 0;
  std::function<SignatureMatrix(std::uint64_t)> make;
  if (const auto* ex = std::get_if<ExhaustiveMode>(&mode)) {
    const int fixed_rows = ex->reduce_symmetry ? 1 : 0;
    const int free_entries = (m - fixed_rows) * n;
    if (free_entries > kMaxFreeEntries) {
      throw ResourceError("exact_noiseless_capacity: " + std::to_string(free_entries) +
                          " free entries exceed the exhaustive cap of " + std::to_string(kMaxFreeEntries));
    }
    count = std::uint64_t{1} << free_entries;
    make = [=](std::uint64_t idx) {
      SignatureMatrix a(m, n);
      int bit = 0;
      for (int r = fixed_rows; r < m; ++r) {
        for (int c = 0; c < n; ++c, ++bit) a.set(r, c, (idx >> bit) & 1 ? -1 : 1);
      }
      return a;
    };
  } else {
    const auto& s = std::get<SampledMode>(mode);
    if (s.count < 1) throw DomainError("exact_noiseless_capacity: sample count must be >= 1");
    count = s.count;
    const std::uint64_t seed = s.seed;
    make = [=](std::uint64_t idx) {
      std::mt19937_64 rng(derive_seed(seed, idx));
      SignatureMatrix a(m, n);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < n; ++c) a.set(r, c, rng() & 1 ? -1 : 1);
      }
      return a;
    };
  }

  std::vector<double> entropy(count);
  parallel_for(count, threads, [&](std::size_t i) { entropy[i] = output_entropy(make(i)); });

  NoiselessCapacity out;
  out.matrices = count;
  std::uint64_t best = 0;
  double sum = 0.0;
  for (std::uint64_t i = 0; i < count; ++i) {
    sum += entropy[i];
    if (entropy[i] > entropy[best]) best = i;
  }
  out.max = entropy[best];
  out.mean = sum / static_cast<double>(count);
  out.argmax = make(best);
  return out;
}

struct McEstimate {
  double mean = 0.0;       // bits
  double std_error = 0.0;  // bits
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

inline constexpr int kMaxMcUsers = 16;

namespace detail {

struct RunningMoments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    count += 1.0;
    const double d = v - mean;
    mean += d / count;
    m2 += d * (v - mean);
  }
  void merge(const RunningMoments& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double d = o.mean - mean;
    mean += d * o.count / total;
    m2 += o.m2 + d * d * count * o.count / total;
    count = total;
  }
};

// One draw of n - log2 sum_u f(A(X-u)/sqrt(m) + N) / f(N).
inline double mc_sample(const SignatureMatrix& a, const NoiseModel& model, std::uint64_t sample_seed) {
  const int m = a.rows();
  const int n = a.cols();
  std::mt19937_64 rng(sample_seed);
  std::vector<int> x(n);
  for (int c = 0; c < n; ++c) x[c] = rng() & 1 ? 1 : -1;
  std::vector<double> noise(m);
  if (model.kind() == NoiseKind::gaussian) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(model.sigma2()));
    for (auto& v : noise) v = gauss(rng);
  } else {
    const double h = model.half_width();
    std::uniform_real_distribution<double> flat(-h, h);
    for (auto& v : noise) v = flat(rng);
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  // Gray-code walk over u starting from u = (-1, ..., -1): diff = A (x - u).
  std::vector<int> u(n, -1);
  std::vector<int> diff(m, 0);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) diff[r] += a.at(r, c) * (x[c] + 1);
  }

  const bool gaussian = model.kind() == NoiseKind::gaussian;
  const double inv_two_s2 = gaussian ? 1.0 / (2.0 * model.sigma2()) : 0.0;
  const double half_width = gaussian ? 0.0 : model.half_width();
  double peak = kNegInf;
  double acc = 0.0;
  auto accumulate = [&] {
    double term = 0.0;
    for (int r = 0; r < m; ++r) {
      const double d = scale * diff[r];
      if (gaussian) {
        term -= (d * d + 2.0 * d * noise[r]) * inv_two_s2;
      } else if (std::abs(d + noise[r]) > half_width) {
        return;  // zero density: contributes nothing
      }
    }
    if (term > peak) {
      acc = acc * std::exp(peak - term) + 1.0;
      peak = term;
    } else {
      acc += std::exp(term - peak);
    }
  };
  accumulate();
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t i = 1; i < total; ++i) {
    const int bit = std::countr_zero(i);
    u[bit] = -u[bit];
    const int step = -2 * u[bit];  // u_b: -1 -> +1 lowers (x - u)_b by 2
    for (int r = 0; r < m; ++r) diff[r] += step * a.at(r, bit);
    accumulate();
  }
  return n - nats_to_bits(peak + std::log(acc));
}

}  // namespace detail

/// Monte Carlo estimate of I(X;Y) in bits under uniform inputs. Sample i
/// draws from its own generator seeded by derive_seed(seed, i), and moments
/// are merged in a fixed block order, so the result is bit-identical for any
/// thread count.
inline McEstimate mc_mutual_information(const SignatureMatrix& a, const NoiseModel& model, std::uint64_t samples,
                                        std::uint64_t seed, int threads = 1) {
  if (model.is_noiseless()) throw UnsupportedOperation("mc_mutual_information: requires Gaussian or uniform noise");
  if (a.cols() > kMaxMcUsers) {
    throw ResourceError("mc_mutual_information: n=" + std::to_string(a.cols()) + " exceeds " +
                        std::to_string(kMaxMcUsers));
  }
  if (samples < 2) throw DomainError("mc_mutual_information: need at least 2 samples");

  constexpr std::uint64_t kBlock = 1024;
  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<detail::RunningMoments> partial(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(samples, lo + kBlock);
    for (std::uint64_t i = lo; i < hi; ++i) partial[b].add(detail::mc_sample(a, model, derive_seed(seed, i)));
  });
  detail::RunningMoments total;
  for (const auto& p : partial) total.merge(p);
  const double variance = total.m2 / (total.count - 1.0);
  return {total.mean, std::sqrt(variance / total.count), samples, seed};
}

/// 1 - H(Q(1/sigma)): per-user capacity of hard-decision BPSK, which an
/// orthogonal (Walsh) system achieves for beta <= 1.
inline double bpsk_reference(double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("bpsk_reference: sigma2 must be > 0");
  return 1.0 - binary_entropy(q_function(1.0 / std::sqrt(sigma2)));
}

}  // namespace cdma
