#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "jacpair/matrix.hpp"

namespace jacpair {

/// p-adic valuation of a nonzero integer.
inline int valuation(const Integer& x, const Integer& p) {
  if (x == 0) throw std::invalid_argument("valuation of zero");
  Integer y = x;
  int v = 0;
  while (mpz_divisible_p(y.get_mpz_t(), p.get_mpz_t())) {
    mpz_divexact(y.get_mpz_t(), y.get_mpz_t(), p.get_mpz_t());
    ++v;
  }
  return v;
}

inline Integer ipow(const Integer& base, unsigned long e) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

/// Prime factors of n by trial division; intended for orders of groups that
/// are small enough to enumerate.
inline std::vector<Integer> prime_factors(Integer n) {
  std::vector<Integer> out;
  if (n < 0) n = -n;
  for (Integer d = 2; d * d <= n; ++d) {
    if (mpz_divisible_p(n.get_mpz_t(), d.get_mpz_t())) {
      out.push_back(d);
      while (mpz_divisible_p(n.get_mpz_t(), d.get_mpz_t())) n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

/// Finite abelian group  Z/d_1 + ... + Z/d_k  with d_1 | d_2 | ... | d_k, d_i >= 2.
class FiniteAbelianGroup {
 public:
  FiniteAbelianGroup() = default;

  explicit FiniteAbelianGroup(std::vector<Integer> invariant_factors)
      : factors_(std::move(invariant_factors)) {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i] < 2) throw std::invalid_argument("invariant factor < 2");
      if (i > 0 && !mpz_divisible_p(factors_[i].get_mpz_t(), factors_[i - 1].get_mpz_t()))
        throw std::invalid_argument("invariant factors do not form a divisibility chain");
    }
  }

  FiniteAbelianGroup(std::initializer_list<long> invariant_factors)
      : FiniteAbelianGroup(std::vector<Integer>(invariant_factors.begin(),
                                                invariant_factors.end())) {}

  /// Canonical form of an arbitrary direct sum of cyclic groups Z/a_i.
  static FiniteAbelianGroup from_cyclic_orders(std::vector<Integer> orders) {
    for (std::size_t i = 0; i < orders.size(); ++i)
      for (std::size_t j = i + 1; j < orders.size(); ++j) {
        Integer g = gcd(orders[i], orders[j]);
        Integer l = lcm(orders[i], orders[j]);
        orders[i] = g;
        orders[j] = l;
      }
    std::vector<Integer> out;
    for (auto& a : orders)
      if (abs(a) > 1) out.push_back(abs(a));
    return FiniteAbelianGroup(std::move(out));
  }

  [[nodiscard]] const std::vector<Integer>& invariant_factors() const { return factors_; }
  [[nodiscard]] std::size_t rank() const { return factors_.size(); }
  [[nodiscard]] bool is_trivial() const { return factors_.empty(); }
  [[nodiscard]] bool is_cyclic() const { return factors_.size() <= 1; }

  [[nodiscard]] Integer order() const {
    Integer n = 1;
    for (const auto& d : factors_) n *= d;
    return n;
  }

  [[nodiscard]] Integer exponent() const { return factors_.empty() ? Integer(1) : factors_.back(); }

  /// Dimension of Gamma / p Gamma over F_p.
  [[nodiscard]] int p_rank(const Integer& p) const {
    int r = 0;
    for (const auto& d : factors_)
      if (mpz_divisible_p(d.get_mpz_t(), p.get_mpz_t())) ++r;
    return r;
  }

  /// Exponents e with Z/p^e factors of the Sylow p-subgroup, ascending.
  [[nodiscard]] std::vector<int> sylow_exponents(const Integer& p) const {
    std::vector<int> out;
    for (const auto& d : factors_)
      if (mpz_divisible_p(d.get_mpz_t(), p.get_mpz_t())) out.push_back(valuation(d, p));
    return out;
  }

  [[nodiscard]] FiniteAbelianGroup sylow(const Integer& p) const {
    std::vector<Integer> out;
    for (int e : sylow_exponents(p)) out.push_back(ipow(p, e));
    return FiniteAbelianGroup(std::move(out));
  }

  [[nodiscard]] std::string to_string() const {
    if (factors_.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (i) s += ',';
      s += factors_[i].get_str();
    }
    return s;
  }

  friend bool operator==(const FiniteAbelianGroup&, const FiniteAbelianGroup&) = default;

 private:
  std::vector<Integer> factors_;
};

}  // namespace jacpair
