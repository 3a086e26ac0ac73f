#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "jacpair/classify.hpp"
#include "jacpair/frequency.hpp"
#include "jacpair/homs.hpp"
#include "jacpair/pairing.hpp"
#include "jacpair/rng.hpp"
#include "jacpair/smith.hpp"
#include "jacpair/theory.hpp"

namespace jacpair {

/// Largest N with p^N < 2^62 (so residues and their sums fit in 64 bits).
inline int max_precision(std::int64_t p) {
  if (p < 2) throw std::invalid_argument("p must be >= 2");
  int n = 0;
  unsigned __int128 m = 1;
  while (m * static_cast<unsigned>(p) < (static_cast<unsigned __int128>(1) << 62)) {
    m *= static_cast<unsigned>(p);
    ++n;
  }
  return n;
}

inline constexpr int kDefaultGuard = 4;

/// Symmetric n x n matrix over Z/p^N standing in for a matrix over Z_p.
struct TruncatedPadicSymMatrix {
  std::int64_t p = 2;
  int precision = 1;
  int n = 0;
  std::vector<std::uint64_t> entries;  // row-major, residues in [0, p^N)

  [[nodiscard]] std::uint64_t modulus() const {
    std::uint64_t m = 1;
    for (int i = 0; i < precision; ++i) m *= static_cast<std::uint64_t>(p);
    return m;
  }
  [[nodiscard]] std::uint64_t at(int i, int j) const { return entries[static_cast<std::size_t>(i) * n + j]; }
  std::uint64_t& at(int i, int j) { return entries[static_cast<std::size_t>(i) * n + j]; }

  [[nodiscard]] bool is_zero_sum() const {
    const std::uint64_t m = modulus();
    for (int i = 0; i < n; ++i) {
      unsigned __int128 s = 0;
      for (int j = 0; j < n; ++j) s += at(i, j);
      if (s % m != 0) return false;
    }
    return true;
  }

  /// Leading principal (k x k) block.
  [[nodiscard]] TruncatedPadicSymMatrix principal_block(int k) const {
    TruncatedPadicSymMatrix b{p, precision, k, std::vector<std::uint64_t>(static_cast<std::size_t>(k) * k)};
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) b.at(i, j) = at(i, j);
    return b;
  }

  /// Reduction of an integer matrix.
  static TruncatedPadicSymMatrix from_integer(const IntMatrix& a, std::int64_t p, int precision) {
    if (!a.is_symmetric()) throw std::invalid_argument("matrix is not symmetric");
    TruncatedPadicSymMatrix t{p, precision, static_cast<int>(a.rows()), {}};
    Integer m(static_cast<unsigned long>(t.modulus()));
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j) {
        Integer r;
        mpz_fdiv_r(r.get_mpz_t(), a(i, j).get_mpz_t(), m.get_mpz_t());
        t.entries.push_back(r.get_ui());
      }
    return t;
  }
};

namespace detail {

inline void check_precision(std::int64_t p, int precision) {
  if (precision < 1) throw std::invalid_argument("precision must be >= 1");
  if (precision > max_precision(p)) throw std::invalid_argument("p^N does not fit in 62 bits");
}

}  // namespace detail

/// Haar-uniform draw: entries a_{ij}, i <= j, independent and uniform mod p^N,
/// read from the stream keyed by (seed, trial) in row-major upper-triangular order.
inline TruncatedPadicSymMatrix sample_sym(std::int64_t p, int precision, int n, std::uint64_t seed,
                                          std::uint64_t trial) {
  detail::check_precision(p, precision);
  TruncatedPadicSymMatrix a{p, precision, n, std::vector<std::uint64_t>(static_cast<std::size_t>(n) * n)};
  const std::uint64_t m = a.modulus();
  auto eng = make_stream(seed, stream_domain::kHaar, trial, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a.at(i, j) = a.at(j, i) = uniform_below(eng, m);
  return a;
}

/// Haar-uniform draw from the symmetric matrices with zero row and column
/// sums: the leading (n-1) block is uniform, the last row and column are
/// forced.  Uses its own stream (sub-key 1) for (seed, trial).
inline TruncatedPadicSymMatrix sample_sym_zerosum(std::int64_t p, int precision, int n,
                                                  std::uint64_t seed, std::uint64_t trial) {
  if (n < 2) throw std::invalid_argument("zero-sum sampling needs n >= 2");
  detail::check_precision(p, precision);
  TruncatedPadicSymMatrix a{p, precision, n, std::vector<std::uint64_t>(static_cast<std::size_t>(n) * n)};
  const std::uint64_t m = a.modulus();
  auto eng = make_stream(seed, stream_domain::kHaar, trial, 1);
  for (int i = 0; i + 1 < n; ++i)
    for (int j = i; j + 1 < n; ++j) a.at(i, j) = a.at(j, i) = uniform_below(eng, m);
  unsigned __int128 corner = 0;
  for (int i = 0; i + 1 < n; ++i) {
    unsigned __int128 s = 0;
    for (int j = 0; j + 1 < n; ++j) s += a.at(i, j);
    std::uint64_t last = static_cast<std::uint64_t>((m - s % m) % m);
    a.at(i, n - 1) = a.at(n - 1, i) = last;
    corner += last;
  }
  a.at(n - 1, n - 1) = static_cast<std::uint64_t>((m - corner % m) % m);
  return a;
}

/// Outcome when an elementary divisor is too close to the precision ceiling
/// for the cokernel pairing to be determined.
struct PrecisionExceeded {
  int max_valuation = 0;  // precision N when an elementary divisor vanishes mod p^N
};

using HaarSampleOutcome = std::variant<SylowPairing, PrecisionExceeded>;

namespace detail {

class ModRing {
 public:
  explicit ModRing(std::uint64_t m) : m_(m) {}
  [[nodiscard]] std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m_);
  }
  [[nodiscard]] std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return a >= b ? a - b : a + (m_ - b); }
  [[nodiscard]] std::uint64_t add(std::uint64_t a, std::uint64_t b) const { return sub(a, m_ - b); }
  [[nodiscard]] std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : m_ - a; }
  /// Inverse of a unit.
  [[nodiscard]] std::uint64_t inv(std::uint64_t a) const {
    Integer r, x(static_cast<unsigned long>(a)), m(static_cast<unsigned long>(m_));
    if (mpz_invert(r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t()) == 0)
      throw std::invalid_argument("not a unit");
    return r.get_ui();
  }
  [[nodiscard]] std::uint64_t modulus() const { return m_; }

 private:
  std::uint64_t m_;
};

inline int padic_valuation(std::uint64_t x, std::int64_t p, int cap) {
  if (x == 0) return cap;
  int v = 0;
  while (x % static_cast<std::uint64_t>(p) == 0) {
    x /= static_cast<std::uint64_t>(p);
    ++v;
  }
  return v;
}

// Smith form over Z/p^N: U A V = diag(p^{v_1}, ..., p^{v_n}), v ascending
// (v = N for entries that vanish).  Pivots are entries of least valuation,
// first in row-major order; the pivot row is scaled by the inverse unit.
struct LocalSmith {
  std::vector<int> valuations;
  std::vector<std::uint64_t> uinv;  // U^{-1}, n x n
  std::vector<std::uint64_t> v;     // V, n x n
};

inline LocalSmith local_smith(const TruncatedPadicSymMatrix& in, bool transforms) {
  const int n = in.n;
  const auto N = static_cast<std::size_t>(n);
  const ModRing R(in.modulus());
  std::vector<std::uint64_t> a = in.entries;
  LocalSmith out;
  if (transforms) {
    out.uinv.assign(N * N, 0);
    out.v.assign(N * N, 0);
    for (std::size_t i = 0; i < N; ++i) out.uinv[i * N + i] = out.v[i * N + i] = 1;
  }
  auto A = [&](std::size_t i, std::size_t j) -> std::uint64_t& { return a[i * N + j]; };
  const auto pu = static_cast<std::uint64_t>(in.p);
  for (std::size_t t = 0; t < N; ++t) {
    int best = in.precision;
    std::size_t bi = t, bj = t;
    for (std::size_t i = t; i < N && best > 0; ++i)
      for (std::size_t j = t; j < N; ++j) {
        int v = padic_valuation(A(i, j), in.p, in.precision);
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
          if (v == 0) break;
        }
      }
    if (best == in.precision) {
      for (std::size_t r = t; r < N; ++r) out.valuations.push_back(in.precision);
      break;
    }
    if (bi != t) {
      for (std::size_t j = 0; j < N; ++j) std::swap(A(t, j), A(bi, j));
      if (transforms)
        for (std::size_t r = 0; r < N; ++r) std::swap(out.uinv[r * N + t], out.uinv[r * N + bi]);
    }
    if (bj != t) {
      for (std::size_t i = 0; i < N; ++i) std::swap(A(i, t), A(i, bj));
      if (transforms)
        for (std::size_t r = 0; r < N; ++r) std::swap(out.v[r * N + t], out.v[r * N + bj]);
    }
    std::uint64_t pw = 1;
    for (int i = 0; i < best; ++i) pw *= pu;
    // Scale row t so the pivot is exactly p^best.
    const std::uint64_t unit = A(t, t) / pw;
    const std::uint64_t uinv = R.inv(unit % R.modulus());
    for (std::size_t j = t; j < N; ++j) A(t, j) = R.mul(A(t, j), uinv);
    if (transforms)  // U <- S U  =>  U^{-1} <- U^{-1} S^{-1}: column t times unit
      for (std::size_t r = 0; r < N; ++r) out.uinv[r * N + t] = R.mul(out.uinv[r * N + t], unit);
    // Clear column t (row operations).
    for (std::size_t i = t + 1; i < N; ++i) {
      if (A(i, t) == 0) continue;
      const std::uint64_t f = A(i, t) / pw;  // exact: valuation >= best
      for (std::size_t j = t; j < N; ++j) A(i, j) = R.sub(A(i, j), R.mul(f, A(t, j)));
      if (transforms)  // row_i -= f row_t  =>  col_t of U^{-1} += f col_i
        for (std::size_t r = 0; r < N; ++r)
          out.uinv[r * N + t] = R.add(out.uinv[r * N + t], R.mul(f, out.uinv[r * N + i]));
    }
    // Clear row t (column operations).
    for (std::size_t j = t + 1; j < N; ++j) {
      if (A(t, j) == 0) continue;
      const std::uint64_t f = A(t, j) / pw;
      A(t, j) = 0;
      if (transforms)
        for (std::size_t r = 0; r < N; ++r) out.v[r * N + j] = R.sub(out.v[r * N + j], R.mul(f, out.v[r * N + t]));
    }
    out.valuations.push_back(best);
  }
  return out;
}

}  // namespace detail

/// Elementary-divisor valuations of A over Z/p^N, ascending, with
/// precision N standing for "vanishes mod p^N".
inline std::vector<int> cokernel_valuations(const TruncatedPadicSymMatrix& a) {
  return detail::local_smith(a, false).valuations;
}

/// Cokernel p-group of A with its pairing, computed mod p^N.
///
/// The pairing on the cokernel depends on A modulo p^{v_i + v_j}, so the
/// outcome is reported only when 2 max v <= N - guard; otherwise
/// PrecisionExceeded.  Zero-sum input is reduced to its leading (n-1) block,
/// whose cokernel is the finite cokernel of A with the same pairing.
inline HaarSampleOutcome cokernel_pairing_mod_pN(const TruncatedPadicSymMatrix& in,
                                                 int guard = kDefaultGuard) {
  if (guard < 1) throw std::invalid_argument("guard must be >= 1");
  const TruncatedPadicSymMatrix& a0 = in;
  TruncatedPadicSymMatrix block;
  const TruncatedPadicSymMatrix* a = &a0;
  if (in.n >= 2 && in.is_zero_sum()) {
    block = in.principal_block(in.n - 1);
    a = &block;
  }
  auto sm = detail::local_smith(*a, true);
  const int vmax = sm.valuations.empty() ? 0 : sm.valuations.back();
  if (2 * vmax > a->precision - guard) return PrecisionExceeded{vmax};

  const auto N = static_cast<std::size_t>(a->n);
  const detail::ModRing R(a->modulus());
  const Integer p(static_cast<long>(a->p));
  std::vector<std::size_t> torsion;
  for (std::size_t i = 0; i < N; ++i)
    if (sm.valuations[i] > 0) torsion.push_back(i);
  const std::size_t k = torsion.size();
  std::vector<Integer> orders;
  RationalMatrix gram(k, k);
  for (std::size_t x = 0; x < k; ++x) orders.push_back(ipow(p, sm.valuations[torsion[x]]));
  // <g_i, g_j> = ((U^{-1})^T V)_{j,i} / p^{v_i}
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t y = 0; y < k; ++y) {
      const std::size_t i = torsion[x], j = torsion[y];
      std::uint64_t w = 0;
      for (std::size_t r = 0; r < N; ++r) w = R.add(w, R.mul(sm.uinv[r * N + j], sm.v[r * N + i]));
      gram(x, y) = Rational(Integer(static_cast<unsigned long>(w)), orders[x]);
      gram(x, y).canonicalize();
    }
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t y = 0; y < x; ++y) gram(x, y) = mod_one(gram(y, x));
  return SylowPairing{p, PairingGram(std::move(orders), std::move(gram))};
}

/// Sylow p-part of an integer symmetric matrix's cokernel with its pairing,
/// via the mod p^N route when the precision suffices and exact rational
/// arithmetic otherwise.  The matrix must be nonsingular.
inline SylowPairing local_sylow_pairing(const IntMatrix& a, std::int64_t p) {
  if (a.rows() == 0) return SylowPairing{Integer(static_cast<long>(p)), PairingGram{}};
  if (!a.is_symmetric()) throw std::invalid_argument("matrix is not symmetric");
  const auto t = TruncatedPadicSymMatrix::from_integer(a, p, max_precision(p));
  if (!(t.n >= 2 && t.is_zero_sum())) {
    auto out = cokernel_pairing_mod_pN(t);
    if (auto* s = std::get_if<SylowPairing>(&out)) return std::move(*s);
  }
  return sylow_part(cokernel_pairing(a).pairing, Integer(static_cast<long>(p)));
}

/// Exponents e with Z/p^e summands of coker(a), for nonsingular integer a.
inline std::vector<int> local_sylow_exponents(const IntMatrix& a, std::int64_t p) {
  std::vector<int> out;
  if (a.rows() == 0) return out;
  const int N = max_precision(p);
  auto vals = cokernel_valuations(TruncatedPadicSymMatrix::from_integer(a, p, N));
  if (!vals.empty() && vals.back() >= N) {
    const Integer P(static_cast<long>(p));
    for (const auto& d : smith_diagonal(a)) {
      if (sgn(d) == 0) throw SingularMatrix();
      if (int v = valuation(d, P); v > 0) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  for (int v : vals)
    if (v > 0) out.push_back(v);
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo estimators

inline const std::string kPrecisionExceededKey = "precision-exceeded";

/// Key for groups beyond the classification bound.
inline std::string other_key(const Integer& order) { return "other(" + order.get_str() + ")"; }

/// Classifies Sylow pairings, memoizing by the exact Gram data.  One instance
/// per worker.
class ClassCache {
 public:
  explicit ClassCache(std::int64_t catalog_bound = kDefaultCatalogBound) : bound_(catalog_bound) {}

  /// Class of s, or nullptr when a 2-group exceeds the catalog bound.
  const PairingClass* classify(const SylowPairing& s) {
    if (s.prime == 2 && s.pairing.order() > bound_) return nullptr;
    std::string sig = s.prime.get_str() + "|";
    for (const auto& o : s.pairing.orders()) sig += o.get_str() + ",";
    sig += "|";
    for (std::size_t i = 0; i < s.pairing.generator_count(); ++i)
      for (std::size_t j = i; j < s.pairing.generator_count(); ++j) sig += s.pairing.value(i, j).get_str() + ",";
    auto it = memo_.find(sig);
    if (it == memo_.end()) it = memo_.emplace(std::move(sig), classify_sylow(s, bound_)).first;
    return &it->second;
  }

  /// Class text, or other(order) beyond the catalog bound.
  std::string key(const SylowPairing& s) {
    const PairingClass* c = classify(s);
    return c ? c->to_string() : other_key(s.pairing.order());
  }

 private:
  std::int64_t bound_;
  std::map<std::string, PairingClass> memo_;
};

struct HaarOptions {
  int precision = 0;  // 0: max_precision(p)
  int guard = kDefaultGuard;
  bool zero_sum = false;
  std::int64_t catalog_bound = kDefaultCatalogBound;
  unsigned threads = 1;

  [[nodiscard]] int effective_precision(std::int64_t p) const {
    return precision > 0 ? precision : max_precision(p);
  }
};

inline TruncatedPadicSymMatrix draw_haar(std::int64_t p, int n, std::uint64_t seed, std::uint64_t trial,
                                         const HaarOptions& opts) {
  const int N = opts.effective_precision(p);
  return opts.zero_sum ? sample_sym_zerosum(p, N, n, seed, trial) : sample_sym(p, N, n, seed, trial);
}

/// Empirical distribution of the cokernel class of Haar-random symmetric
/// n x n matrices over Z_p (or zero-sum ones).  PrecisionExceeded outcomes
/// are counted under kPrecisionExceededKey.
inline FrequencyTable estimate_mu_n(std::int64_t p, int n, std::uint64_t trials, std::uint64_t seed,
                                    const HaarOptions& opts = {}) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  return run_chunked<FrequencyTable>(
      trials, opts.threads,
      [&](std::uint64_t b, std::uint64_t e) {
        FrequencyTable t;
        ClassCache cache(opts.catalog_bound);
        for (std::uint64_t trial = b; trial < e; ++trial) {
          auto out = cokernel_pairing_mod_pN(draw_haar(p, n, seed, trial, opts), opts.guard);
          if (std::holds_alternative<PrecisionExceeded>(out)) {
            t.add(kPrecisionExceededKey);
          } else {
            t.add(cache.key(std::get<SylowPairing>(out)));
          }
        }
        return t;
      },
      [](FrequencyTable& a, const FrequencyTable& b) { a.merge(b); });
}

/// Exact sums of a per-trial integer statistic.
struct MomentSums {
  std::uint64_t trials = 0;
  std::uint64_t precision_exceeded = 0;
  Integer sum = 0;
  Integer sum_squares = 0;

  void add(const Integer& x) {
    ++trials;
    sum += x;
    sum_squares += x * x;
  }
  void merge(const MomentSums& o) {
    trials += o.trials;
    precision_exceeded += o.precision_exceeded;
    sum += o.sum;
    sum_squares += o.sum_squares;
  }
  [[nodiscard]] std::uint64_t used() const { return trials - precision_exceeded; }
  [[nodiscard]] double mean() const {
    return used() ? mpq_class(sum, Integer(static_cast<unsigned long>(used()))).get_d() : 0.0;
  }
  /// Standard error of the mean.
  [[nodiscard]] double std_error() const {
    const auto n = used();
    if (n < 2) return 0.0;
    mpq_class m(sum, Integer(static_cast<unsigned long>(n)));
    mpq_class var = (mpq_class(sum_squares) - m * m * static_cast<double>(n)) / static_cast<double>(n - 1);
    return std::sqrt(std::max(0.0, var.get_d()) / static_cast<double>(n));
  }
  friend bool operator==(const MomentSums&, const MomentSums&) = default;
};

/// Monte Carlo mean of #Sur(coker A, Gamma') over Haar-random symmetric A.
/// Trials whose largest elementary divisor reaches valuation N - guard are
/// counted as precision_exceeded and left out of the mean.
inline MomentSums estimate_surjection_moment(std::int64_t p, int n, const PartitionType& target,
                                             std::uint64_t trials, std::uint64_t seed,
                                             const HaarOptions& opts = {}) {
  if (static_cast<std::size_t>(n) < target.parts())
    throw std::invalid_argument("n must be at least the number of parts of the target");
  return run_chunked<MomentSums>(
      trials, opts.threads,
      [&](std::uint64_t b, std::uint64_t e) {
        MomentSums s;
        for (std::uint64_t trial = b; trial < e; ++trial) {
          auto a = draw_haar(p, n, seed, trial, opts);
          if (opts.zero_sum) a = a.principal_block(n - 1);
          auto vals = cokernel_valuations(a);
          std::vector<int> src;
          bool exceeded = false;
          for (int v : vals) {
            if (v >= a.precision - opts.guard) exceeded = true;
            if (v > 0) src.push_back(v);
          }
          if (exceeded) {
            ++s.trials;
            ++s.precision_exceeded;
            continue;
          }
          s.add(count_surjections(src, target.exponents(), p));
        }
        return s;
      },
      [](MomentSums& a, const MomentSums& b) { a.merge(b); });
}

}  // namespace jacpair
