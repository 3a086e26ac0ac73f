#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "jacpair/abelian_group.hpp"

namespace jacpair {

/// #Sur(Gamma, Gamma') for p-groups given by their exponent lists
///   Gamma = + Z/p^{src_i},   Gamma' = + Z/p^{dst_j}.
///
/// A map is fixed by the images y_i of the generators of Gamma, subject to
/// p^{src_i} y_i = 0, and is onto iff the images span Gamma'/p Gamma' (Frattini).
/// Images are bucketed by their class mod p Gamma' and the spanning tuples of
/// classes are enumerated with multiplicities.
inline Integer count_surjections(const std::vector<int>& src, const std::vector<int>& dst,
                                 std::int64_t p) {
  const std::size_t r = dst.size();
  std::int64_t frattini_size = 1;
  for (std::size_t b = 0; b < r; ++b) frattini_size *= p;
  // Elements y of Gamma' enumerated by mixed radix; record p-adic valuation of
  // the order and the class mod p.
  std::int64_t total = 1;
  for (int f : dst) {
    for (int i = 0; i < f; ++i) total *= p;
    if (total > (std::int64_t{1} << 24)) throw std::invalid_argument("target group too large");
  }
  std::vector<int> order_exp(static_cast<std::size_t>(total));
  std::vector<std::int64_t> frattini(static_cast<std::size_t>(total));
  {
    std::vector<std::int64_t> radix(r), c(r, 0);
    for (std::size_t b = 0; b < r; ++b) {
      radix[b] = 1;
      for (int i = 0; i < dst[b]; ++i) radix[b] *= p;
    }
    for (std::int64_t y = 0; y < total; ++y) {
      int oe = 0;
      std::int64_t fi = 0;
      for (std::size_t b = r; b-- > 0;) {
        std::int64_t v = c[b];
        int e = dst[b];
        while (v != 0 && v % p == 0) {
          v /= p;
          --e;
        }
        if (c[b] != 0) oe = std::max(oe, e);
        fi = fi * p + c[b] % p;
      }
      order_exp[y] = oe;
      frattini[y] = fi;
      for (std::size_t b = 0; b < r; ++b) {
        if (++c[b] < radix[b]) break;
        c[b] = 0;
      }
    }
  }
  // mult[i][v]: admissible images of generator i in Frattini class v.
  const std::size_t k = src.size();
  std::vector<std::vector<std::int64_t>> mult(k, std::vector<std::int64_t>(frattini_size, 0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::int64_t y = 0; y < total; ++y)
      if (order_exp[y] <= src[i]) ++mult[i][frattini[y]];

  // Depth-first over classes, carrying an echelon basis of the span in F_p^r.
  auto digits = [&](std::int64_t v) {
    std::vector<std::int64_t> d(r);
    for (std::size_t b = 0; b < r; ++b) {
      d[b] = v % p;
      v /= p;
    }
    return d;
  };
  auto inv_mod = [&](std::int64_t a) {
    for (std::int64_t x = 1; x < p; ++x)
      if (a * x % p == 1) return x;
    return std::int64_t{0};
  };
  using Basis = std::vector<std::vector<std::int64_t>>;  // rows with distinct pivots
  auto reduce = [&](const Basis& basis, std::vector<std::int64_t> v) {
    for (const auto& row : basis) {
      std::size_t piv = 0;
      while (row[piv] == 0) ++piv;
      std::int64_t f = v[piv] % p;
      if (f == 0) continue;
      for (std::size_t b = 0; b < r; ++b) v[b] = ((v[b] - f * row[b]) % p + p) % p;
    }
    return v;
  };
  Integer result = 0;
  auto dfs = [&](auto&& self, std::size_t i, const Basis& basis, const Integer& weight) -> void {
    if (basis.size() + (k - i) < r) return;
    if (i == k) {
      if (basis.size() == r) result += weight;
      return;
    }
    for (std::int64_t v = 0; v < frattini_size; ++v) {
      if (mult[i][v] == 0) continue;
      Integer w = weight * Integer(static_cast<long>(mult[i][v]));
      auto red = reduce(basis, digits(v));
      std::size_t piv = 0;
      while (piv < r && red[piv] == 0) ++piv;
      if (piv == r) {
        self(self, i + 1, basis, w);
      } else {
        Basis next = basis;
        std::int64_t s = inv_mod(red[piv]);
        for (auto& x : red) x = x * s % p;
        next.push_back(std::move(red));
        self(self, i + 1, next, w);
      }
    }
  };
  dfs(dfs, 0, Basis{}, Integer(1));
  return result;
}

/// #Hom(Gamma, Gamma') for p-groups: prod_{i,j} p^{min(src_i, dst_j)}.
inline Integer count_homs(const std::vector<int>& src, const std::vector<int>& dst, std::int64_t p) {
  unsigned long e = 0;
  for (int a : src)
    for (int b : dst) e += static_cast<unsigned long>(std::min(a, b));
  return ipow(Integer(static_cast<long>(p)), e);
}

}  // namespace jacpair
