#pragma once

#include <gmp.h>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "jacpair/abelian_group.hpp"
#include "jacpair/errors.hpp"
#include "jacpair/matrix.hpp"

namespace jacpair {

/// Smith normal form U * M * V = D.  U_inverse is kept alongside U because the
/// cokernel generators are the columns of U^{-1}.
struct SnfResult {
  IntMatrix U;
  IntMatrix D;
  IntMatrix V;
  IntMatrix U_inverse;

  [[nodiscard]] std::vector<Integer> diagonal() const {
    std::vector<Integer> d;
    for (std::size_t i = 0; i < std::min(D.rows(), D.cols()); ++i) d.push_back(D(i, i));
    return d;
  }
};

namespace detail {

// Row/column elimination over Z.  When `track` is set, every row operation is
// mirrored on U (left) and inversely on U^{-1} (right); column operations on V.
class SmithReducer {
 public:
  SmithReducer(IntMatrix m, bool track) : a_(std::move(m)), track_(track) {
    if (track_) {
      u_ = IntMatrix::identity(a_.rows());
      uinv_ = IntMatrix::identity(a_.rows());
      v_ = IntMatrix::identity(a_.cols());
    }
  }

  void run() {
    const std::size_t limit = std::min(a_.rows(), a_.cols());
    for (std::size_t t = 0; t < limit; ++t) {
      if (!place_min_pivot(t, t, t)) break;
      for (;;) {
        clear_column(t);
        clear_row(t);
        if (!row_and_col_clear(t)) {
          place_min_pivot(t, t, t);
          continue;
        }
        // Divisibility: fold an offending row into the pivot row.
        auto bad = find_non_multiple(t);
        if (!bad) break;
        add_row(t, *bad, Integer(1));
      }
      if (a_(t, t) < 0) negate_row(t);
    }
  }

  IntMatrix& a() { return a_; }
  IntMatrix& u() { return u_; }
  IntMatrix& uinv() { return uinv_; }
  IntMatrix& v() { return v_; }

 private:
  // Moves the nonzero entry of least magnitude in the block [r0.., c0..] to
  // (t, t).  Returns false when the block is zero.
  bool place_min_pivot(std::size_t t, std::size_t r0, std::size_t c0) {
    std::size_t bi = 0, bj = 0;
    bool found = false;
    for (std::size_t i = r0; i < a_.rows(); ++i)
      for (std::size_t j = c0; j < a_.cols(); ++j) {
        const Integer& x = a_(i, j);
        if (sgn(x) == 0) continue;
        if (!found || mpz_cmpabs(x.get_mpz_t(), a_(bi, bj).get_mpz_t()) < 0) {
          bi = i;
          bj = j;
          found = true;
          if (mpz_cmpabs_ui(x.get_mpz_t(), 1) == 0) goto done;
        }
      }
  done:
    if (!found) return false;
    swap_rows(t, bi);
    swap_cols(t, bj);
    return true;
  }

  void clear_column(std::size_t t) {
    Integer q;
    for (std::size_t i = t + 1; i < a_.rows(); ++i) {
      if (sgn(a_(i, t)) == 0) continue;
      mpz_tdiv_q(q.get_mpz_t(), a_(i, t).get_mpz_t(), a_(t, t).get_mpz_t());
      if (sgn(q) != 0) add_row(i, t, -q);
    }
  }

  void clear_row(std::size_t t) {
    Integer q;
    for (std::size_t j = t + 1; j < a_.cols(); ++j) {
      if (sgn(a_(t, j)) == 0) continue;
      mpz_tdiv_q(q.get_mpz_t(), a_(t, j).get_mpz_t(), a_(t, t).get_mpz_t());
      if (sgn(q) != 0) add_col(j, t, -q);
    }
  }

  bool row_and_col_clear(std::size_t t) const {
    for (std::size_t i = t + 1; i < a_.rows(); ++i)
      if (sgn(a_(i, t)) != 0) return false;
    for (std::size_t j = t + 1; j < a_.cols(); ++j)
      if (sgn(a_(t, j)) != 0) return false;
    return true;
  }

  std::optional<std::size_t> find_non_multiple(std::size_t t) const {
    const Integer& p = a_(t, t);
    if (mpz_cmpabs_ui(p.get_mpz_t(), 1) == 0) return std::nullopt;
    for (std::size_t i = t + 1; i < a_.rows(); ++i)
      for (std::size_t j = t + 1; j < a_.cols(); ++j)
        if (!mpz_divisible_p(a_(i, j).get_mpz_t(), p.get_mpz_t())) return i;
    return std::nullopt;
  }

  // row_dst += c * row_src
  void add_row(std::size_t dst, std::size_t src, const Integer& c) {
    axpy_row(a_, dst, src, c);
    if (track_) {
      axpy_row(u_, dst, src, c);
      // U^{-1} <- U^{-1} E^{-1}: col_src -= c * col_dst
      Integer neg = -c;
      axpy_col(uinv_, src, dst, neg);
    }
  }

  // col_dst += c * col_src
  void add_col(std::size_t dst, std::size_t src, const Integer& c) {
    axpy_col(a_, dst, src, c);
    if (track_) axpy_col(v_, dst, src, c);
  }

  void swap_rows(std::size_t x, std::size_t y) {
    if (x == y) return;
    a_.swap_rows(x, y);
    if (track_) {
      u_.swap_rows(x, y);
      uinv_.swap_cols(x, y);
    }
  }

  void swap_cols(std::size_t x, std::size_t y) {
    if (x == y) return;
    a_.swap_cols(x, y);
    if (track_) v_.swap_cols(x, y);
  }

  void negate_row(std::size_t t) {
    for (auto& x : a_.row(t)) x = -x;
    if (track_) {
      for (auto& x : u_.row(t)) x = -x;
      for (std::size_t i = 0; i < uinv_.rows(); ++i) uinv_(i, t) = -uinv_(i, t);
    }
  }

  static void axpy_row(IntMatrix& m, std::size_t dst, std::size_t src, const Integer& c) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const Integer& s = m(src, j);
      if (sgn(s) == 0) continue;
      mpz_addmul(m(dst, j).get_mpz_t(), c.get_mpz_t(), s.get_mpz_t());
    }
  }

  static void axpy_col(IntMatrix& m, std::size_t dst, std::size_t src, const Integer& c) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const Integer& s = m(i, src);
      if (sgn(s) == 0) continue;
      mpz_addmul(m(i, dst).get_mpz_t(), c.get_mpz_t(), s.get_mpz_t());
    }
  }

  IntMatrix a_, u_, uinv_, v_;
  bool track_;
};

}  // namespace detail

/// Smith normal form with unimodular transforms, U * M * V = D.
/// Pivots are chosen with least absolute value; the diagonal is nonnegative
/// and satisfies d_1 | d_2 | ... (zeros last).
inline SnfResult smith_normal_form(const IntMatrix& m) {
  detail::SmithReducer r(m, true);
  r.run();
  return SnfResult{std::move(r.u()), std::move(r.a()), std::move(r.v()), std::move(r.uinv())};
}

/// Diagonal of the Smith normal form without building transforms.
inline std::vector<Integer> smith_diagonal(const IntMatrix& m) {
  detail::SmithReducer r(m, false);
  r.run();
  std::vector<Integer> d;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) d.push_back(r.a()(i, i));
  return d;
}

/// Invariant factors of the torsion part of Z^rows / M Z^cols.
inline FiniteAbelianGroup cokernel_invariants(const IntMatrix& m) {
  std::vector<Integer> out;
  for (auto& d : smith_diagonal(m))
    if (d > 1) out.push_back(d);
  return FiniteAbelianGroup(std::move(out));
}

/// Fraction-free (Bareiss) determinant.
inline Integer determinant(const IntMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("determinant of non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  IntMatrix a = m;
  Integer prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (sgn(a(k, k)) == 0) {
      std::size_t s = k + 1;
      while (s < n && sgn(a(s, k)) == 0) ++s;
      if (s == n) return 0;
      a.swap_rows(k, s);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        Integer t = a(i, j) * a(k, k) - a(i, k) * a(k, j);
        mpz_divexact(a(i, j).get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

/// Exact inverse over Q by Gauss-Jordan elimination.
inline RationalMatrix rational_inverse(const IntMatrix& m) {
  if (!m.is_square()) throw std::invalid_argument("inverse of non-square matrix");
  const std::size_t n = m.rows();
  RationalMatrix a = to_rational(m);
  RationalMatrix inv = RationalMatrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && sgn(a(piv, c)) == 0) ++piv;
    if (piv == n) throw SingularMatrix();
    a.swap_rows(c, piv);
    inv.swap_rows(c, piv);
    Rational s = 1 / a(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      a(c, j) *= s;
      inv(c, j) *= s;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || sgn(a(i, c)) == 0) continue;
      Rational f = a(i, c);
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= f * a(c, j);
        inv(i, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

}  // namespace jacpair
