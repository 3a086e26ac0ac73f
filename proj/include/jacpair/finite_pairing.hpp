#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "jacpair/errors.hpp"
#include "jacpair/pairing.hpp"

namespace jacpair {

/// Default order bound for brute-force isomorphism and automorphism searches.
inline constexpr std::int64_t kDefaultSearchBound = 1024;

/// Machine-word view of a pairing on a small group, with every element
/// enumerated.  Values are numerators over the group exponent.
class FinitePairing {
 public:
  FinitePairing(const PairingGram& p, std::int64_t bound = kDefaultSearchBound) {
    Integer order = p.order();
    if (order > bound) throw OrderExceedsBound(order.get_str(), std::to_string(bound));
    size_ = order.get_si();
    for (const auto& o : p.orders()) orders_.push_back(o.get_si());
    modulus_ = 1;
    for (auto o : orders_) modulus_ = std::lcm(modulus_, o);
    const std::size_t k = orders_.size();
    gram_.resize(k * k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        Rational v = p.value(i, j) * Rational(modulus_);
        gram_[i * k + j] = v.get_num().get_si();  // exact: den | modulus
      }
    build_elements();
  }

  [[nodiscard]] std::int64_t size() const { return size_; }
  [[nodiscard]] std::size_t generator_count() const { return orders_.size(); }
  [[nodiscard]] const std::vector<std::int64_t>& orders() const { return orders_; }
  [[nodiscard]] std::int64_t modulus() const { return modulus_; }
  [[nodiscard]] std::int64_t gram(std::size_t i, std::size_t j) const {
    return gram_[i * orders_.size() + j];
  }

  [[nodiscard]] const std::int32_t* coords(std::int64_t x) const {
    return coords_.data() + x * static_cast<std::int64_t>(orders_.size());
  }

  /// <x, y> as a numerator mod modulus().
  [[nodiscard]] std::int64_t pair(std::int64_t x, std::int64_t y) const {
    const std::size_t k = orders_.size();
    const std::int64_t* dx = dual_.data() + x * static_cast<std::int64_t>(k);
    const std::int32_t* cy = coords(y);
    __int128 s = 0;
    for (std::size_t b = 0; b < k; ++b) s += static_cast<__int128>(dx[b]) * cy[b];
    return static_cast<std::int64_t>(s % modulus_);
  }

  /// <x, g_b> for the generator g_b.
  [[nodiscard]] std::int64_t pair_with_generator(std::int64_t x, std::size_t b) const {
    return dual_[x * static_cast<std::int64_t>(orders_.size()) + b];
  }

  [[nodiscard]] std::int64_t element_order(std::int64_t x) const { return elem_order_[x]; }

  /// True when d * x = 0.
  [[nodiscard]] bool killed_by(std::int64_t x, std::int64_t d) const {
    return d % elem_order_[x] == 0;
  }

  /// Brute-force check that x -> <x, .> has trivial kernel.
  [[nodiscard]] bool is_nondegenerate() const {
    const std::size_t k = orders_.size();
    for (std::int64_t x = 1; x < size_; ++x) {
      bool zero = true;
      for (std::size_t b = 0; b < k && zero; ++b) zero = pair_with_generator(x, b) == 0;
      if (zero) return false;
    }
    return true;
  }

  /// Isomorphism invariant: counts of (element order, <x,x>) pairs.
  [[nodiscard]] std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, std::int64_t>>
  signature() const {
    std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> h;
    for (std::int64_t x = 0; x < size_; ++x) ++h[{elem_order_[x], pair(x, x)}];
    return {h.begin(), h.end()};
  }

 private:
  void build_elements() {
    const std::size_t k = orders_.size();
    coords_.assign(static_cast<std::size_t>(size_) * k, 0);
    dual_.assign(static_cast<std::size_t>(size_) * k, 0);
    elem_order_.assign(static_cast<std::size_t>(size_), 1);
    std::vector<std::int32_t> c(k, 0);
    for (std::int64_t x = 0; x < size_; ++x) {
      std::int64_t ord = 1;
      for (std::size_t a = 0; a < k; ++a) {
        coords_[x * k + a] = c[a];
        std::int64_t oa = orders_[a] / std::gcd<std::int64_t>(orders_[a], c[a]);
        ord = std::lcm(ord, oa);
      }
      elem_order_[x] = ord;
      for (std::size_t b = 0; b < k; ++b) {
        __int128 s = 0;
        for (std::size_t a = 0; a < k; ++a) s += static_cast<__int128>(c[a]) * gram_[a * k + b];
        dual_[x * k + b] = static_cast<std::int64_t>(s % modulus_);
      }
      for (std::size_t a = 0; a < k; ++a) {  // mixed-radix increment
        if (++c[a] < orders_[a]) break;
        c[a] = 0;
      }
    }
  }

  std::int64_t size_ = 1;
  std::vector<std::int64_t> orders_;
  std::int64_t modulus_ = 1;
  std::vector<std::int64_t> gram_;
  std::vector<std::int32_t> coords_;
  std::vector<std::int64_t> dual_;
  std::vector<std::int64_t> elem_order_;
};

namespace detail {

// Enumerates homomorphisms  source -> target  that carry the source pairing to
// the target pairing, by choosing images of source generators one at a time.
// For a nondegenerate source every such map is injective, hence an
// isomorphism when the orders agree.
class IsometrySearch {
 public:
  IsometrySearch(const FinitePairing& src, const FinitePairing& dst) : src_(src), dst_(dst) {
    const std::size_t k = src_.generator_count();
    // Rescale source values to the target modulus.
    scale_ok_ = dst_.modulus() % src_.modulus() == 0;
    const std::int64_t f = scale_ok_ ? dst_.modulus() / src_.modulus() : 1;
    want_.resize(k * k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) want_[i * k + j] = src_.gram(i, j) * f;
    candidates_.resize(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::int64_t x = 0; x < dst_.size(); ++x)
        if (dst_.killed_by(x, src_.orders()[i]) && dst_.pair(x, x) == want_[i * k + i])
          candidates_[i].push_back(x);
    chosen_.resize(k);
  }

  /// Number of isometries, stopping early once `limit` are found.
  std::uint64_t count(std::uint64_t limit = std::numeric_limits<std::uint64_t>::max()) {
    if (!scale_ok_) return 0;
    limit_ = limit;
    found_ = 0;
    dfs(0);
    return found_;
  }

 private:
  void dfs(std::size_t i) {
    const std::size_t k = src_.generator_count();
    if (i == k) {
      ++found_;
      return;
    }
    for (std::int64_t x : candidates_[i]) {
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j) ok = dst_.pair(x, chosen_[j]) == want_[i * k + j];
      if (!ok) continue;
      chosen_[i] = x;
      dfs(i + 1);
      if (found_ >= limit_) return;
    }
  }

  const FinitePairing& src_;
  const FinitePairing& dst_;
  bool scale_ok_ = true;
  std::vector<std::int64_t> want_;
  std::vector<std::vector<std::int64_t>> candidates_;
  std::vector<std::int64_t> chosen_;
  std::uint64_t found_ = 0;
  std::uint64_t limit_ = 0;
};

}  // namespace detail

/// Brute-force nondegeneracy check (the map g -> <g, .> is injective).
inline bool is_nondegenerate(const PairingGram& p, std::int64_t bound = kDefaultSearchBound) {
  return FinitePairing(p, bound).is_nondegenerate();
}

inline bool is_isomorphic(const FinitePairing& a, const FinitePairing& b) {
  if (a.size() != b.size() || a.modulus() != b.modulus()) return false;
  if (!a.is_nondegenerate()) throw DegeneratePairing("isomorphism test on degenerate input");
  if (a.signature() != b.signature()) return false;
  return detail::IsometrySearch(a, b).count(1) == 1;
}

/// True iff the groups agree and some group isomorphism carries one pairing
/// to the other.
inline bool is_isomorphic(const PairingGram& a, const PairingGram& b,
                          std::int64_t bound = kDefaultSearchBound) {
  if (a.group() != b.group()) return false;
  return is_isomorphic(FinitePairing(a, bound), FinitePairing(b, bound));
}

inline std::uint64_t count_aut_pairing(const FinitePairing& p) {
  if (!p.is_nondegenerate()) throw DegeneratePairing("automorphism count on degenerate input");
  return detail::IsometrySearch(p, p).count();
}

/// |Aut(Gamma, delta)| by exhaustive enumeration.
inline std::uint64_t count_aut_pairing(const PairingGram& p,
                                       std::int64_t bound = kDefaultSearchBound) {
  return count_aut_pairing(FinitePairing(p, bound));
}

}  // namespace jacpair
