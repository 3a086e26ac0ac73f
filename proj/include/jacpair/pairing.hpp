#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "jacpair/abelian_group.hpp"
#include "jacpair/errors.hpp"
#include "jacpair/graph.hpp"
#include "jacpair/matrix.hpp"
#include "jacpair/smith.hpp"

namespace jacpair {

/// Representative of x in Q/Z, in [0, 1).
inline Rational mod_one(const Rational& x) {
  Integer fl;
  mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return x - Rational(fl);
}

/// Symmetric bilinear pairing on a direct sum of cyclic groups Z/o_1 + ... + Z/o_k,
/// recorded as the values <g_i, g_j> in Q/Z on the standard generators.
///
/// Pairings produced from a Smith normal form list the generators in
/// invariant-factor order; orthogonal sums may list arbitrary cyclic orders.
class PairingGram {
 public:
  PairingGram() = default;

  PairingGram(std::vector<Integer> orders, RationalMatrix gram)
      : orders_(std::move(orders)), gram_(std::move(gram)) {
    const std::size_t k = orders_.size();
    if (gram_.rows() != k || gram_.cols() != k)
      throw std::invalid_argument("gram shape does not match generator count");
    for (const auto& o : orders_)
      if (o < 2) throw std::invalid_argument("generator order must be >= 2");
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        gram_(i, j) = mod_one(gram_(i, j));
        Rational t = gram_(i, j) * Rational(orders_[i]);
        if (t.get_den() != 1)
          throw std::invalid_argument("pairing value not killed by generator order");
      }
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        if (gram_(i, j) != gram_(j, i)) throw std::invalid_argument("gram is not symmetric");
  }

  [[nodiscard]] std::size_t generator_count() const { return orders_.size(); }
  [[nodiscard]] const std::vector<Integer>& orders() const { return orders_; }
  [[nodiscard]] const RationalMatrix& gram() const { return gram_; }
  [[nodiscard]] const Rational& value(std::size_t i, std::size_t j) const { return gram_(i, j); }

  [[nodiscard]] FiniteAbelianGroup group() const {
    return FiniteAbelianGroup::from_cyclic_orders(orders_);
  }
  [[nodiscard]] Integer order() const {
    Integer n = 1;
    for (const auto& o : orders_) n *= o;
    return n;
  }

  friend bool operator==(const PairingGram& a, const PairingGram& b) {
    return a.orders_ == b.orders_ && a.gram_ == b.gram_;
  }

 private:
  std::vector<Integer> orders_;
  RationalMatrix gram_;
};

/// Orthogonal direct sum; generators of `a` come first.
inline PairingGram orthogonal_sum(const PairingGram& a, const PairingGram& b) {
  const std::size_t ka = a.generator_count(), kb = b.generator_count();
  std::vector<Integer> orders = a.orders();
  orders.insert(orders.end(), b.orders().begin(), b.orders().end());
  RationalMatrix g(ka + kb, ka + kb);
  for (std::size_t i = 0; i < ka; ++i)
    for (std::size_t j = 0; j < ka; ++j) g(i, j) = a.value(i, j);
  for (std::size_t i = 0; i < kb; ++i)
    for (std::size_t j = 0; j < kb; ++j) g(ka + i, ka + j) = b.value(i, j);
  return PairingGram(std::move(orders), std::move(g));
}

/// Pairing with its generators reordered by `perm` (new index i = old perm[i]).
inline PairingGram permute_generators(const PairingGram& p, const std::vector<std::size_t>& perm) {
  std::vector<Integer> orders;
  RationalMatrix g(perm.size(), perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    orders.push_back(p.orders()[perm[i]]);
    for (std::size_t j = 0; j < perm.size(); ++j) g(i, j) = p.value(perm[i], perm[j]);
  }
  return PairingGram(std::move(orders), std::move(g));
}

/// Cokernel of a nonsingular symmetric integer matrix with its pairing
/// <x, y> = y^T A^{-1} x, together with integer lifts of the generators.
struct CokernelPairing {
  PairingGram pairing;
  /// Column i is a lift in Z^n of the i-th generator.
  IntMatrix generator_lifts;
};

/// With U A V = D the class of x is determined by (U x)_i mod d_i, so the
/// generators lift to the columns of U^{-1}.  Since A^{-1} = V D^{-1} U,
///   <g_i, g_j> = g_j^T A^{-1} g_i = ((U^{-1})^T V)_{j,i} / d_i.
inline CokernelPairing cokernel_pairing(const IntMatrix& a) {
  if (!a.is_square()) throw std::invalid_argument("cokernel pairing needs a square matrix");
  if (!a.is_symmetric()) throw std::invalid_argument("cokernel pairing needs a symmetric matrix");
  const std::size_t n = a.rows();
  SnfResult snf = smith_normal_form(a);
  std::vector<std::size_t> torsion;
  for (std::size_t i = 0; i < n; ++i) {
    if (sgn(snf.D(i, i)) == 0) throw SingularMatrix();
    if (snf.D(i, i) > 1) torsion.push_back(i);
  }
  const std::size_t k = torsion.size();
  std::vector<Integer> orders;
  IntMatrix lifts(n, k);
  RationalMatrix gram(k, k);
  for (std::size_t a_idx = 0; a_idx < k; ++a_idx) {
    const std::size_t i = torsion[a_idx];
    orders.push_back(snf.D(i, i));
    for (std::size_t r = 0; r < n; ++r) lifts(r, a_idx) = snf.U_inverse(r, i);
  }
  Integer w;
  for (std::size_t a_idx = 0; a_idx < k; ++a_idx)
    for (std::size_t b_idx = 0; b_idx < k; ++b_idx) {
      const std::size_t i = torsion[a_idx], j = torsion[b_idx];
      w = 0;
      for (std::size_t r = 0; r < n; ++r)
        mpz_addmul(w.get_mpz_t(), snf.U_inverse(r, j).get_mpz_t(), snf.V(r, i).get_mpz_t());
      gram(a_idx, b_idx) = Rational(w, snf.D(i, i));
      gram(a_idx, b_idx).canonicalize();
    }
  // Symmetrize exactly: both triangles agree mod 1 for symmetric A.
  for (std::size_t x = 0; x < k; ++x)
    for (std::size_t y = 0; y < x; ++y) gram(x, y) = mod_one(gram(y, x));
  return CokernelPairing{PairingGram(std::move(orders), std::move(gram)), std::move(lifts)};
}

/// Jacobian of a connected graph with its canonical duality pairing, computed
/// from the reduced Laplacian with `delete_vertex` removed (default: last).
inline PairingGram jacobian_with_pairing(const Graph& g, int delete_vertex = -1) {
  if (!is_connected(g)) throw DisconnectedGraph();
  if (g.vertex_count() <= 1) return PairingGram();
  return cokernel_pairing(reduced_laplacian(g, delete_vertex)).pairing;
}

/// Sylow p-subgroup with the restricted pairing.
struct SylowPairing {
  Integer prime;
  PairingGram pairing;

  [[nodiscard]] FiniteAbelianGroup group() const { return pairing.group(); }
};

/// Generators h_i = m_i g_i with m_i the prime-to-p part of the order of g_i,
/// sorted by ascending order.
inline SylowPairing sylow_part(const PairingGram& p, const Integer& prime) {
  const std::size_t k = p.generator_count();
  struct Gen {
    std::size_t idx;
    Integer order;
    Integer mult;
  };
  std::vector<Gen> gens;
  for (std::size_t i = 0; i < k; ++i) {
    const Integer& d = p.orders()[i];
    if (!mpz_divisible_p(d.get_mpz_t(), prime.get_mpz_t())) continue;
    Integer pp = ipow(prime, static_cast<unsigned long>(valuation(d, prime)));
    gens.push_back({i, pp, d / pp});
  }
  std::stable_sort(gens.begin(), gens.end(),
                   [](const Gen& a, const Gen& b) { return a.order < b.order; });
  std::vector<Integer> orders;
  RationalMatrix g(gens.size(), gens.size());
  for (std::size_t a = 0; a < gens.size(); ++a) {
    orders.push_back(gens[a].order);
    for (std::size_t b = 0; b < gens.size(); ++b)
      g(a, b) = Rational(gens[a].mult * gens[b].mult) * p.value(gens[a].idx, gens[b].idx);
  }
  return SylowPairing{prime, PairingGram(std::move(orders), std::move(g))};
}

/// One Sylow part per prime dividing the order, ascending by prime.
inline std::vector<SylowPairing> sylow_split(const PairingGram& p) {
  std::vector<SylowPairing> out;
  for (const auto& q : prime_factors(p.order())) out.push_back(sylow_part(p, q));
  return out;
}

}  // namespace jacpair
