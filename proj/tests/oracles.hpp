#pragma once

// Independent reference implementations used only by tests.  None of them
// calls into the Smith form or the classifiers.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "jacpair/abelian_group.hpp"
#include "jacpair/matrix.hpp"

namespace oracle {

using jacpair::FiniteAbelianGroup;
using jacpair::IntMatrix;
using jacpair::Integer;
using jacpair::Rational;
using jacpair::RationalMatrix;

/// Determinant by cofactor expansion (fine up to 5 x 5).
inline Integer cofactor_det(const IntMatrix& m) {
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  if (n == 1) return m(0, 0);
  Integer d = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (m(0, j) == 0) continue;
    IntMatrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t c = 0, b = 0; c < n; ++c)
        if (c != j) minor(i - 1, b++) = m(i, c);
    Integer t = m(0, j) * cofactor_det(minor);
    d += (j % 2 == 0) ? t : Integer(-t);
  }
  return d;
}

inline void subsets(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return;
  for (;;) {
    f(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

/// gcd of all k x k minors (0 if all vanish).
inline Integer determinantal_divisor(const IntMatrix& m, std::size_t k) {
  Integer g = 0;
  subsets(m.rows(), k, [&](const std::vector<std::size_t>& rs) {
    subsets(m.cols(), k, [&](const std::vector<std::size_t>& cs) {
      IntMatrix s(k, k);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) s(a, b) = m(rs[a], cs[b]);
      g = gcd(g, cofactor_det(s));
    });
  });
  return g;
}

/// Rank over Q by fraction-field elimination.
inline std::size_t rational_rank(const IntMatrix& m) {
  RationalMatrix a = jacpair::to_rational(m);
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
    std::size_t piv = r;
    while (piv < a.rows() && a(piv, c) == 0) ++piv;
    if (piv == a.rows()) continue;
    a.swap_rows(piv, r);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == r || a(i, c) == 0) continue;
      Rational f = a(i, c) / a(r, c);
      for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= f * a(r, j);
    }
    ++r;
  }
  return r;
}

/// Torsion invariants from determinantal divisors s_k = d_k / d_{k-1}.
inline FiniteAbelianGroup torsion_by_minors(const IntMatrix& m) {
  const std::size_t r = rational_rank(m);
  std::vector<Integer> f;
  Integer prev = 1;
  for (std::size_t k = 1; k <= r; ++k) {
    Integer d = determinantal_divisor(m, k);
    Integer s = d / prev;
    if (s > 1) f.push_back(s);
    prev = d;
  }
  return FiniteAbelianGroup(std::move(f));
}

/// Lower-triangular basis (columns) of the full-rank lattice spanned by the
/// columns of `gens`, by gcd column elimination.
inline IntMatrix hermite_basis(IntMatrix g) {
  const std::size_t n = g.rows();
  for (std::size_t i = 0; i < n; ++i) {
    for (;;) {
      std::size_t best = g.cols();
      for (std::size_t j = i; j < g.cols(); ++j)
        if (g(i, j) != 0 && (best == g.cols() || abs(g(i, j)) < abs(g(i, best)))) best = j;
      if (best == g.cols()) throw std::invalid_argument("lattice is not full rank");
      g.swap_cols(i, best);
      bool done = true;
      for (std::size_t j = i + 1; j < g.cols(); ++j) {
        if (g(i, j) == 0) continue;
        Integer q;
        mpz_fdiv_q(q.get_mpz_t(), g(i, j).get_mpz_t(), g(i, i).get_mpz_t());
        for (std::size_t r = 0; r < n; ++r) g(r, j) -= q * g(r, i);
        if (g(i, j) != 0) done = false;
      }
      if (done) break;
    }
    if (g(i, i) < 0)
      for (std::size_t r = 0; r < n; ++r) g(r, i) = -g(r, i);
  }
  IntMatrix h(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) h(r, c) = g(r, c);
  return h;
}

/// Coset enumeration of Z^n / L for a full-rank lattice with lower-triangular
/// basis H: canonical representatives 0 <= x_i < H_ii.
class CosetGroup {
 public:
  explicit CosetGroup(IntMatrix h) : h_(std::move(h)) {}

  [[nodiscard]] std::vector<Integer> reduce(std::vector<Integer> x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      Integer q;
      mpz_fdiv_q(q.get_mpz_t(), x[i].get_mpz_t(), h_(i, i).get_mpz_t());
      if (q != 0)
        for (std::size_t r = i; r < x.size(); ++r) x[r] -= q * h_(r, i);
    }
    return x;
  }

  [[nodiscard]] Integer order() const {
    Integer o = 1;
    for (std::size_t i = 0; i < h_.rows(); ++i) o *= h_(i, i);
    return o;
  }

  void for_each(const std::function<void(const std::vector<Integer>&)>& f) const {
    const std::size_t n = h_.rows();
    std::vector<Integer> x(n, 0);
    if (n == 0) {
      f(x);
      return;
    }
    for (;;) {
      f(x);
      std::size_t i = 0;
      while (i < n) {
        if (++x[i] < h_(i, i)) break;
        x[i] = 0;
        ++i;
      }
      if (i == n) return;
    }
  }

  /// #{x : k x = 0}.
  [[nodiscard]] std::uint64_t killed_by(const Integer& k) const {
    std::uint64_t c = 0;
    for_each([&](const std::vector<Integer>& x) {
      std::vector<Integer> y(x);
      for (auto& v : y) v *= k;
      y = reduce(std::move(y));
      if (std::all_of(y.begin(), y.end(), [](const Integer& v) { return v == 0; })) ++c;
    });
    return c;
  }

  /// Invariant factors recovered from the counts |G[p^j]|.
  [[nodiscard]] FiniteAbelianGroup structure() const {
    std::vector<Integer> cyclic;
    for (const auto& p : jacpair::prime_factors(order())) {
      std::vector<int> log_counts{0};
      Integer pk = p;
      for (;;) {
        const Integer c(static_cast<unsigned long>(killed_by(pk)));
        log_counts.push_back(c == 1 ? 0 : jacpair::valuation(c, p));
        if (log_counts.back() == log_counts[log_counts.size() - 2]) break;
        pk *= p;
      }
      // number of cyclic factors of exponent >= j is log_counts[j] - log_counts[j-1]
      const int top = static_cast<int>(log_counts.size()) - 2;
      for (int j = 1; j <= top; ++j) {
        int at_least_j = log_counts[j] - log_counts[j - 1];
        int at_least_next = j < top ? log_counts[j + 1] - log_counts[j] : 0;
        for (int c = 0; c < at_least_j - at_least_next; ++c) cyclic.push_back(jacpair::ipow(p, j));
      }
    }
    return FiniteAbelianGroup::from_cyclic_orders(std::move(cyclic));
  }

 private:
  IntMatrix h_;
};

/// Torsion of coker(M) by coset enumeration of Z^n / (M Z^n + m Z^n), where m
/// is the torsion exponent bound d_r; returns nullopt when the quotient has
/// more than `limit` elements.
inline std::optional<FiniteAbelianGroup> torsion_by_cosets(const IntMatrix& m, std::uint64_t limit = 2000000) {
  const std::size_t n = m.rows();
  const std::size_t r = rational_rank(m);
  Integer mod = r == 0 ? Integer(1) : abs(determinantal_divisor(m, r));
  if (mod == 0) mod = 1;
  Integer size = mod;
  for (std::size_t i = r; i < n; ++i) size *= mod;
  if (size > limit) return std::nullopt;
  if (n == 0) return FiniteAbelianGroup{};
  IntMatrix gens(n, m.cols() + n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) gens(i, j) = m(i, j);
    gens(i, m.cols() + i) = mod;
  }
  CosetGroup g(hermite_basis(gens));
  FiniteAbelianGroup full = g.structure();
  // remove the n - r copies of Z/mod contributed by the free part
  std::vector<Integer> f = full.invariant_factors();
  for (std::size_t i = r; i < n && mod > 1; ++i) {
    if (f.empty() || f.back() != mod) throw std::logic_error("coset oracle: unexpected free part");
    f.pop_back();
  }
  return FiniteAbelianGroup(std::move(f));
}

inline IntMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  IntMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = d(rng);
  return m;
}

/// Number of j-dimensional subspaces of F_p^k by enumerating spans.
inline std::uint64_t count_subspaces(int k, int j, int p) {
  std::uint64_t total = 1;
  for (int i = 0; i < k; ++i) total *= p;
  auto add = [&](std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0, place = 1;
    for (int i = 0; i < k; ++i) {
      out += ((a % p + b % p) % p) * place;
      a /= p;
      b /= p;
      place *= p;
    }
    return out;
  };
  auto scale = [&](std::uint64_t a, int s) {
    std::uint64_t out = 0;
    for (int i = 0; i < s; ++i) out = add(out, a);
    return out;
  };
  // grow subspaces one vector at a time: each (d+1)-space is the span of a d-space and a vector outside it
  auto extend = [&](const std::vector<bool>& span, std::uint64_t v) {
    std::vector<bool> out(span);
    for (std::uint64_t e = 0; e < total; ++e)
      if (span[e])
        for (int s = 1; s < p; ++s) out[add(e, scale(v, s))] = true;
    return out;
  };
  std::vector<bool> zero(total, false);
  zero[0] = true;
  std::set<std::vector<bool>> level{zero};
  for (int d = 0; d < j; ++d) {
    std::set<std::vector<bool>> next;
    for (const auto& span : level)
      for (std::uint64_t v = 0; v < total; ++v)
        if (!span[v]) next.insert(extend(span, v));
    level = std::move(next);
  }
  return level.size();
}

/// #Hom and #Sur between p-groups given by exponent lists, by enumerating all
/// generator images and closing the image under addition.
struct HomCounts {
  std::uint64_t homs = 0;
  std::uint64_t surs = 0;
};

inline HomCounts brute_force_homs(const std::vector<int>& src, const std::vector<int>& dst, std::int64_t p) {
  std::vector<std::int64_t> mod;
  std::int64_t size = 1;
  for (int e : dst) {
    std::int64_t m = 1;
    for (int i = 0; i < e; ++i) m *= p;
    mod.push_back(m);
    size *= m;
  }
  auto decode = [&](std::int64_t y) {
    std::vector<std::int64_t> c(mod.size());
    for (std::size_t b = 0; b < mod.size(); ++b) {
      c[b] = y % mod[b];
      y /= mod[b];
    }
    return c;
  };
  auto encode = [&](const std::vector<std::int64_t>& c) {
    std::int64_t y = 0;
    for (std::size_t b = mod.size(); b-- > 0;) y = y * mod[b] + ((c[b] % mod[b]) + mod[b]) % mod[b];
    return y;
  };
  auto times = [&](std::int64_t y, std::int64_t k) {
    auto c = decode(y);
    for (auto& v : c) v *= k;
    return encode(c);
  };
  auto plus = [&](std::int64_t a, std::int64_t b) {
    auto x = decode(a), y = decode(b);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
    return encode(x);
  };
  HomCounts out;
  std::vector<std::int64_t> img(src.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == src.size()) {
      ++out.homs;
      std::vector<bool> in(size, false);
      in[0] = true;
      std::vector<std::int64_t> elems{0};
      for (std::size_t k = 0; k < elems.size(); ++k)
        for (auto g : img) {
          auto w = plus(elems[k], g);
          if (!in[w]) {
            in[w] = true;
            elems.push_back(w);
          }
        }
      if (static_cast<std::int64_t>(elems.size()) == size) ++out.surs;
      return;
    }
    std::int64_t ord = 1;
    for (int t = 0; t < src[i]; ++t) ord *= p;
    for (std::int64_t y = 0; y < size; ++y) {
      if (times(y, ord) != 0) continue;
      img[i] = y;
      rec(i + 1);
    }
  };
  rec(0);
  return out;
}

}  // namespace oracle
