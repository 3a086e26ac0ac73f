#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jacpair/abelian_group.hpp"
#include "jacpair/classify.hpp"
#include "jacpair/errors.hpp"
#include "jacpair/finite_pairing.hpp"
#include "jacpair/pairing.hpp"

namespace jacpair {

/// Working precision (bits) for infinite products.
inline constexpr mp_bitcnt_t kPredictionBits = 512;
inline constexpr int kDefaultFactorsPerPrime = 20;
inline constexpr std::int64_t kDefaultPrimeBound = 100000;

/// A numerical prediction with a rigorous bound on the truncation error:
/// |true value - value| <= truncation_bound.
struct Prediction {
  mpf_class value{0, kPredictionBits};
  mpf_class truncation_bound{0, kPredictionBits};
  int terms_used = 0;
  /// Set when `value` is an exact rational (finite products).
  std::optional<Rational> exact;

  [[nodiscard]] double to_double() const { return value.get_d(); }
  [[nodiscard]] double bound_double() const { return truncation_bound.get_d(); }

  /// Decimal rendering with `digits` significant digits.
  [[nodiscard]] std::string to_string(int digits = 12) const {
    mp_exp_t exp = 0;
    std::string m = value.get_str(exp, 10, static_cast<std::size_t>(digits));
    if (m.empty()) return "0";
    bool neg = m[0] == '-';
    if (neg) m.erase(0, 1);
    std::string out;
    if (exp <= 0) {
      out = "0." + std::string(static_cast<std::size_t>(-exp), '0') + m;
    } else if (static_cast<std::size_t>(exp) >= m.size()) {
      out = m + std::string(static_cast<std::size_t>(exp) - m.size(), '0');
    } else {
      out = m.substr(0, static_cast<std::size_t>(exp)) + "." + m.substr(static_cast<std::size_t>(exp));
    }
    return neg ? "-" + out : out;
  }
};

namespace detail {

inline mpf_class to_mpf(const Rational& q) {
  mpf_class f(0, kPredictionBits);
  f = q;
  return f;
}

inline Prediction exact_prediction(const Rational& q, int terms) {
  Prediction p;
  p.value = to_mpf(q);
  p.truncation_bound = 0;
  p.terms_used = terms;
  p.exact = q;
  return p;
}

// prod_{i=1}^{terms} (1 - p^{-(2i + shift)}) exactly, with the tail bound
// sum_{i > terms} p^{-(2i+shift)} = p^{-(2 terms + 2 + shift)} / (1 - p^{-2}).
// Since prod(1 - x_i) >= 1 - sum x_i, the omitted factors move the value by
// at most that sum.
inline Prediction odd_power_product(std::int64_t p, int terms, int shift) {
  if (terms < 1) throw std::invalid_argument("terms must be >= 1");
  Rational prod = 1;
  Integer P(static_cast<long>(p));
  for (int i = 1; i <= terms; ++i) {
    Rational f(Integer(1), ipow(P, static_cast<unsigned long>(2 * i + shift)));
    f.canonicalize();
    prod *= 1 - f;
  }
  Prediction out;
  out.value = to_mpf(prod);
  out.exact = prod;
  out.terms_used = terms;
  Rational tail(Integer(1), ipow(P, static_cast<unsigned long>(2 * terms + 2 + shift)));
  tail.canonicalize();
  tail /= 1 - Rational(Integer(1), P * P);
  out.truncation_bound = to_mpf(tail);
  return out;
}

inline std::vector<std::int64_t> primes_up_to(std::int64_t bound) {
  std::vector<char> sieve(static_cast<std::size_t>(std::max<std::int64_t>(bound + 1, 2)), 1);
  std::vector<std::int64_t> out;
  for (std::int64_t i = 2; i <= bound; ++i) {
    if (!sieve[i]) continue;
    out.push_back(i);
    for (std::int64_t j = i * i; j <= bound; j += i) sieve[j] = 0;
  }
  return out;
}

// prod over primes p <= bound (optionally skipping 2) of
// prod_{i=1}^{terms} (1 - p^{-1-2i}), in binary floating point.
//   omitted factors at p <= bound:  sum_p p^{-3-2 terms} / (1 - p^{-2})
//   primes above bound:             sum_{m > B} m^{-3} / (1 - m^{-2}) <= 1 / (2 B^2 (1 - B^{-2}))
// plus a rounding allowance far below either term.
inline Prediction cyclic_product(std::int64_t prime_bound, int terms, bool skip_two) {
  if (terms < 1) throw std::invalid_argument("terms must be >= 1");
  if (prime_bound < 2) throw std::invalid_argument("prime bound must be >= 2");
  mpf_class prod(1, kPredictionBits);
  mpf_class tail(0, kPredictionBits);
  std::size_t ops = 0;
  for (std::int64_t p : primes_up_to(prime_bound)) {
    if (skip_two && p == 2) continue;
    mpf_class pf(static_cast<double>(p), kPredictionBits);
    mpf_class inv_p2 = 1 / (pf * pf);
    mpf_class x = 1 / pf * inv_p2;  // p^{-3}
    for (int i = 1; i <= terms; ++i) {
      prod *= 1 - x;
      x *= inv_p2;
      ops += 3;
    }
    // x is now p^{-3-2 terms}
    tail += x / (1 - inv_p2);
  }
  mpf_class b(static_cast<double>(prime_bound), kPredictionBits);
  tail += 1 / (2 * b * b * (1 - 1 / (b * b)));
  mpf_class rounding(0, kPredictionBits);
  mpf_div_2exp(rounding.get_mpf_t(), mpf_class(static_cast<double>(ops + 1), kPredictionBits).get_mpf_t(),
               kPredictionBits - 16);
  Prediction out;
  out.value = prod;
  out.truncation_bound = tail + rounding;
  out.terms_used = terms;
  return out;
}

inline void require_p_group(const PairingGram& p, std::int64_t prime) {
  Integer P(static_cast<long>(prime));
  for (const auto& o : p.orders())
    if (ipow(P, static_cast<unsigned long>(valuation(o, P))) != o)
      throw std::invalid_argument("pairing is not on a " + std::to_string(prime) + "-group");
}

}  // namespace detail

/// C_p = prod_{i>=1} (1 - p^{1-2i}), truncated after `terms` factors.
inline Prediction c_p(std::int64_t p, int terms = kDefaultFactorsPerPrime) {
  return detail::odd_power_product(p, terms, -1);
}

/// Limiting probability that the p-part is trivial (equal to C_p).
inline Prediction trivial_p_probability(std::int64_t p, int terms = kDefaultFactorsPerPrime) {
  return c_p(p, terms);
}

/// Limiting probability that the p-part is cyclic: C_p / (1 - p^{-1}).
inline Prediction cyclic_p_probability(std::int64_t p, int terms = kDefaultFactorsPerPrime) {
  return detail::odd_power_product(p, terms, 1);
}

/// prod_p prod_{i>=1} (1 - p^{-1-2i}) over all primes.
inline Prediction cyclic_probability_global(std::int64_t prime_bound = kDefaultPrimeBound,
                                            int terms = kDefaultFactorsPerPrime) {
  return detail::cyclic_product(prime_bound, terms, false);
}

/// Same product over odd primes only (probability that the odd part is cyclic).
inline Prediction odd_cyclic_probability(std::int64_t prime_bound = kDefaultPrimeBound,
                                         int terms = kDefaultFactorsPerPrime) {
  return detail::cyclic_product(prime_bound, terms, true);
}

/// C_p / (#Gamma * #Aut(Gamma, delta)).
inline Prediction mu_measure(const PairingGram& pairing, std::int64_t p,
                             int terms = kDefaultFactorsPerPrime) {
  detail::require_p_group(pairing, p);
  Integer weight = pairing.order() * Integer(static_cast<unsigned long>(count_aut_pairing(pairing)));
  Prediction c = c_p(p, terms);
  const mpf_class w(weight, kPredictionBits);
  Prediction out;
  out.value = c.value / w;
  out.truncation_bound = c.truncation_bound / w;
  out.terms_used = terms;
  return out;
}

inline Prediction mu_measure(const PairingClass& cls, std::int64_t p,
                             int terms = kDefaultFactorsPerPrime) {
  return mu_measure(gram_of(cls), p, terms);
}

/// Probability that a Haar-random n x n symmetric matrix over Z_p has cokernel
/// isomorphic to (Gamma, delta):
///   prod_{j=n-r+1}^{n} (1 - p^{-j}) prod_{i=1}^{ceil((n-r)/2)} (1 - p^{1-2i})
///   / (#Gamma #Aut(Gamma, delta)),   r = p-rank.
inline Prediction mu_n_finite(const PairingGram& pairing, std::int64_t p, int n) {
  detail::require_p_group(pairing, p);
  Integer P(static_cast<long>(p));
  const int r = pairing.group().p_rank(P);
  if (n < r) throw RankExceedsN(r, n);
  Rational prod = 1;
  for (int j = n - r + 1; j <= n; ++j) prod *= 1 - Rational(Integer(1), ipow(P, j));
  const int half = (n - r + 1) / 2;
  for (int i = 1; i <= half; ++i) prod *= 1 - Rational(Integer(1), ipow(P, 2 * i - 1));
  prod.canonicalize();
  Integer weight = pairing.order() * Integer(static_cast<unsigned long>(count_aut_pairing(pairing)));
  return detail::exact_prediction(prod / Rational(weight), half + r);
}

inline Prediction mu_n_finite(const PairingClass& cls, std::int64_t p, int n) {
  return mu_n_finite(gram_of(cls), p, n);
}

/// Zero-sum variant: finite cokernel of a Haar-random n x n symmetric matrix
/// with vanishing row and column sums.  Equals mu_n_finite at size n - 1.
inline Prediction mu_n_zerosum(const PairingGram& pairing, std::int64_t p, int n) {
  Integer P(static_cast<long>(p));
  const int r = pairing.group().p_rank(P);
  if (n - 1 < r) throw RankExceedsN(r, n - 1);
  return mu_n_finite(pairing, p, n - 1);
}

inline Prediction mu_n_zerosum(const PairingClass& cls, std::int64_t p, int n) {
  return mu_n_zerosum(gram_of(cls), p, n);
}

/// Type of  Gamma' = prod Z/p^{e_i}  with e_1 <= ... <= e_r.
class PartitionType {
 public:
  PartitionType() = default;
  PartitionType(std::vector<int> exponents) : e_(std::move(exponents)) {
    for (int x : e_)
      if (x < 1) throw std::invalid_argument("partition parts must be >= 1");
    std::sort(e_.begin(), e_.end());
  }
  PartitionType(std::initializer_list<int> exponents)
      : PartitionType(std::vector<int>(exponents)) {}

  [[nodiscard]] const std::vector<int>& exponents() const { return e_; }
  [[nodiscard]] std::size_t parts() const { return e_.size(); }

  /// lambda'_j = #{i : e_i >= j}, j = 1..max e.
  [[nodiscard]] std::vector<int> transpose() const {
    std::vector<int> t;
    if (e_.empty()) return t;
    for (int j = 1; j <= e_.back(); ++j)
      t.push_back(static_cast<int>(std::count_if(e_.begin(), e_.end(), [j](int x) { return x >= j; })));
    return t;
  }

  /// Partition whose parts are the given transpose (columns).
  static PartitionType from_transpose(const std::vector<int>& cols) {
    std::vector<int> e;
    if (cols.empty()) return {};
    int rows = *std::max_element(cols.begin(), cols.end());
    for (int i = 1; i <= rows; ++i)
      e.push_back(static_cast<int>(std::count_if(cols.begin(), cols.end(), [i](int c) { return c >= i; })));
    return PartitionType(std::move(e));
  }

  [[nodiscard]] FiniteAbelianGroup group(std::int64_t p) const {
    std::vector<Integer> f;
    for (int x : e_) f.push_back(ipow(Integer(static_cast<long>(p)), x));
    return FiniteAbelianGroup(std::move(f));
  }

  friend bool operator==(const PartitionType&, const PartitionType&) = default;

 private:
  std::vector<int> e_;
};

/// Limiting expected number of surjections onto Gamma':
/// p^{(r-1) e_1 + (r-2) e_2 + ... + e_{r-1}}.
inline Integer expected_surjections(const PartitionType& target, std::int64_t p) {
  const auto& e = target.exponents();
  const std::size_t r = e.size();
  unsigned long exp = 0;
  for (std::size_t i = 0; i < r; ++i) exp += (r - 1 - i) * static_cast<unsigned long>(e[i]);
  return ipow(Integer(static_cast<long>(p)), exp);
}

/// The same moment through the transpose: p^{sum_j lambda'_j (lambda'_j - 1) / 2}.
inline Integer expected_surjections_transpose(const PartitionType& target, std::int64_t p) {
  unsigned long exp = 0;
  for (int c : target.transpose()) exp += static_cast<unsigned long>(c) * (c - 1) / 2;
  return ipow(Integer(static_cast<long>(p)), exp);
}

/// Limiting E[p^{k r_p}] = prod_{j=0}^{k-1} (p^j + 1).
inline Integer rank_moment(int k, std::int64_t p) {
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  Integer out = 1;
  for (int j = 0; j < k; ++j) out *= ipow(Integer(static_cast<long>(p)), j) + 1;
  return out;
}

/// Number of j-dimensional subspaces of F_p^k.
inline Integer gaussian_binomial(int k, int j, std::int64_t p) {
  if (j < 0 || j > k) throw std::invalid_argument("need 0 <= j <= k");
  Integer P(static_cast<long>(p));
  Integer num = 1, den = 1;
  for (int i = 0; i < j; ++i) {
    num *= ipow(P, k) - ipow(P, i);
    den *= ipow(P, j) - ipow(P, i);
  }
  return num / den;
}

}  // namespace jacpair
