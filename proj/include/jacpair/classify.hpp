#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "jacpair/errors.hpp"
#include "jacpair/finite_pairing.hpp"
#include "jacpair/pairing.hpp"

namespace jacpair {

/// One generator of the semigroup of p-groups with duality pairing.
///
///   A_{p^r}, B_{p^r}          on Z/p^r (odd p: <1,1> = p^{-r}, alpha p^{-r})
///   A, B, C, D_{2^r}          on Z/2^r, <1,1> = 2^{-r}, -2^{-r}, 5*2^{-r}, -5*2^{-r}
///   E, F_{2^r}                on (Z/2^r)^2
///
/// Text form is the letter followed by the order of the underlying group, so
/// E at r = 1 renders as "E4" and F at r = 2 as "F16".
struct Symbol {
  char letter = 'A';
  std::int64_t prime = 2;
  int exponent = 1;

  [[nodiscard]] bool is_two_dimensional() const { return letter == 'E' || letter == 'F'; }

  [[nodiscard]] Integer cyclic_order() const {
    return ipow(Integer(prime), static_cast<unsigned long>(exponent));
  }
  [[nodiscard]] Integer group_order() const {
    Integer c = cyclic_order();
    return is_two_dimensional() ? Integer(c * c) : c;
  }
  [[nodiscard]] std::string to_string() const {
    return std::string(1, letter) + group_order().get_str();
  }

  /// Letter first, then by the rendered order.
  friend bool operator<(const Symbol& a, const Symbol& b) {
    if (a.letter != b.letter) return a.letter < b.letter;
    return a.group_order() < b.group_order();
  }
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// Whether the symbol is one of the listed generators (with its r-bounds).
inline bool is_valid_symbol(const Symbol& s) {
  if (s.prime < 2 || s.exponent < 1) return false;
  if (s.prime == 2) {
    switch (s.letter) {
      case 'A':
      case 'E':
        return true;
      case 'B':
      case 'F':
        return s.exponent >= 2;
      case 'C':
      case 'D':
        return s.exponent >= 3;
      default:
        return false;
    }
  }
  return s.letter == 'A' || s.letter == 'B';
}

/// Isomorphism class of a finite abelian group with duality pairing, as a
/// sorted multiset of generator symbols (possibly over several primes).
class PairingClass {
 public:
  PairingClass() = default;
  explicit PairingClass(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
    for (const auto& s : symbols_)
      if (!is_valid_symbol(s)) throw std::invalid_argument("invalid generator symbol " + s.to_string());
    std::sort(symbols_.begin(), symbols_.end());
  }

  [[nodiscard]] const std::vector<Symbol>& symbols() const { return symbols_; }
  [[nodiscard]] bool is_trivial() const { return symbols_.empty(); }

  [[nodiscard]] Integer order() const {
    Integer n = 1;
    for (const auto& s : symbols_) n *= s.group_order();
    return n;
  }

  [[nodiscard]] std::vector<std::int64_t> primes() const {
    std::vector<std::int64_t> ps;
    for (const auto& s : symbols_) ps.push_back(s.prime);
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    return ps;
  }

  [[nodiscard]] PairingClass for_prime(std::int64_t p) const {
    std::vector<Symbol> out;
    for (const auto& s : symbols_)
      if (s.prime == p) out.push_back(s);
    return PairingClass(std::move(out));
  }

  /// "1" for the trivial class, otherwise symbols joined by '+', e.g. "A2+A4".
  [[nodiscard]] std::string to_string() const {
    if (symbols_.empty()) return "1";
    std::string out;
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (i) out += '+';
      out += symbols_[i].to_string();
    }
    return out;
  }

  static PairingClass parse(std::string_view text);

  friend PairingClass operator+(const PairingClass& a, const PairingClass& b) {
    std::vector<Symbol> s = a.symbols_;
    s.insert(s.end(), b.symbols_.begin(), b.symbols_.end());
    return PairingClass(std::move(s));
  }
  friend bool operator==(const PairingClass&, const PairingClass&) = default;
  friend bool operator<(const PairingClass& a, const PairingClass& b) {
    return std::lexicographical_compare(a.symbols_.begin(), a.symbols_.end(), b.symbols_.begin(),
                                        b.symbols_.end());
  }

 private:
  std::vector<Symbol> symbols_;
};

namespace detail {

inline bool is_prime_small(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

}  // namespace detail

inline PairingClass PairingClass::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text == "1" || text.empty()) return {};
  std::vector<Symbol> out;
  while (!text.empty()) {
    auto plus = text.find('+');
    std::string_view tok = trim(text.substr(0, plus));
    text = plus == std::string_view::npos ? std::string_view{} : text.substr(plus + 1);
    if (plus != std::string_view::npos && trim(text).empty())
      throw std::invalid_argument("bad pairing symbol: trailing '+'");
    if (tok.size() < 2 || tok[0] < 'A' || tok[0] > 'F')
      throw std::invalid_argument("bad pairing symbol '" + std::string(tok) + "'");
    std::int64_t q = 0;
    auto [ptr, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), q);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || q < 2)
      throw std::invalid_argument("bad pairing symbol '" + std::string(tok) + "'");
    Symbol s;
    s.letter = tok[0];
    std::int64_t p = 2;
    while (q % p != 0) ++p;
    int e = 0;
    std::int64_t rest = q;
    while (rest % p == 0) {
      rest /= p;
      ++e;
    }
    if (rest != 1 || !detail::is_prime_small(p))
      throw std::invalid_argument("symbol order is not a prime power: " + std::string(tok));
    if (s.is_two_dimensional()) {
      if (e % 2 != 0) throw std::invalid_argument("E/F symbols need an even exponent: " + std::string(tok));
      e /= 2;
    }
    s.prime = p;
    s.exponent = e;
    out.push_back(s);
  }
  return PairingClass(std::move(out));
}

/// Smallest quadratic non-residue modulo an odd prime.
inline std::int64_t least_nonresidue(std::int64_t p) {
  for (std::int64_t a = 2; a < p; ++a) {
    Integer r;
    Integer base(static_cast<long>(a)), e(static_cast<long>((p - 1) / 2)), m(static_cast<long>(p));
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
    if (r != 1) return a;
  }
  throw std::invalid_argument("no quadratic non-residue");
}

/// Explicit Gram matrix of a class: orthogonal sum of its generator forms,
/// blocks ordered by (prime, cyclic order).
inline PairingGram gram_of(const PairingClass& c) {
  std::vector<Symbol> sy = c.symbols();
  std::stable_sort(sy.begin(), sy.end(), [](const Symbol& a, const Symbol& b) {
    return std::tie(a.prime, a.exponent) < std::tie(b.prime, b.exponent);
  });
  PairingGram out;
  for (const auto& s : sy) {
    Integer q = s.cyclic_order();
    if (s.is_two_dimensional()) {
      RationalMatrix g(2, 2);
      Rational inv(Integer(1), q);
      g(0, 1) = inv;
      g(1, 0) = inv;
      if (s.letter == 'F') {
        g(0, 0) = 2 * inv;
        g(1, 1) = 2 * inv;
      }
      out = orthogonal_sum(out, PairingGram({q, q}, std::move(g)));
      continue;
    }
    long num = 1;
    if (s.prime == 2) {
      num = s.letter == 'A' ? 1 : s.letter == 'B' ? -1 : s.letter == 'C' ? 5 : -5;
    } else if (s.letter == 'B') {
      num = static_cast<long>(least_nonresidue(s.prime));
    }
    RationalMatrix g(1, 1);
    g(0, 0) = Rational(Integer(num), q);
    g(0, 0).canonicalize();
    out = orthogonal_sum(out, PairingGram({q}, std::move(g)));
  }
  return out;
}

/// Legendre symbol test: true when u is a nonzero square mod the odd prime p.
inline bool is_quadratic_residue(const Integer& u, const Integer& p) {
  return mpz_legendre(u.get_mpz_t(), p.get_mpz_t()) == 1;
}

/// Canonical class of a pairing on an odd p-group.
///
/// Works with S = p^e * Gram (mod p^e, e the exponent).  An entry of least
/// valuation w belongs to generators of order p^{e-w}; a diagonal one splits
/// off an orthogonal cyclic summand, an off-diagonal one is first moved to
/// the diagonal by g_i <- g_i + g_j.  Each summand u p^{-r} is A or B by the
/// residuosity of u; pairs B+B are then rewritten as A+A.
inline PairingClass classify_odd_p(const SylowPairing& s) {
  const Integer& p = s.prime;
  if (p == 2) throw std::invalid_argument("classify_odd_p called with p = 2");
  const PairingGram& pg = s.pairing;
  std::size_t k = pg.generator_count();
  if (k == 0) return {};
  const std::int64_t pl = p.get_si();

  std::vector<int> ord_exp(k);
  int e = 0;
  for (std::size_t i = 0; i < k; ++i) {
    ord_exp[i] = valuation(pg.orders()[i], p);
    if (ipow(p, ord_exp[i]) != pg.orders()[i]) throw std::invalid_argument("not a p-group pairing");
    e = std::max(e, ord_exp[i]);
  }
  const Integer mod = ipow(p, static_cast<unsigned long>(e));
  auto reduce = [&](Integer x) {
    mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), mod.get_mpz_t());
    return x;
  };
  std::vector<std::vector<Integer>> S(k, std::vector<Integer>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      Rational v = pg.value(i, j) * Rational(mod);
      S[i][j] = reduce(v.get_num());
    }
  auto val = [&](const Integer& x) { return sgn(x) == 0 ? e : valuation(x, p); };

  std::vector<std::size_t> live(k);
  std::iota(live.begin(), live.end(), 0);
  std::vector<Symbol> out;
  while (!live.empty()) {
    int best = e;
    for (std::size_t a : live)
      for (std::size_t b : live) best = std::min(best, val(S[a][b]));
    if (best >= e) throw DegeneratePairing("pairing vanishes on remaining generators");
    const int r = e - best;
    std::size_t bi = k, bj = k;
    for (std::size_t a : live)
      if (bi == k && val(S[a][a]) == best) bi = bj = a;
    for (std::size_t a : live)
      for (std::size_t b : live)
        if (bi == k && val(S[a][b]) == best) {
          bi = a;
          bj = b;
        }
    if (ord_exp[bi] != r || ord_exp[bj] != r)
      throw DegeneratePairing("generator order does not match pairing denominator");
    if (bi != bj) {
      // g_bi <- g_bi + g_bj; the new diagonal S_ii + 2 S_ij + S_jj has valuation `best`.
      const Integer sii = S[bi][bi], sij = S[bi][bj], sjj = S[bj][bj];
      for (std::size_t c : live) {
        S[bi][c] = reduce(S[bi][c] + S[bj][c]);
        S[c][bi] = S[bi][c];
      }
      S[bi][bi] = reduce(sii + 2 * sij + sjj);
      if (val(S[bi][bi]) != best) throw DegeneratePairing("diagonalization stalled");
    }
    const std::size_t i = bi;
    const Integer pw = ipow(p, static_cast<unsigned long>(best));
    const Integer unit = S[i][i] / pw;
    const Integer ord = ipow(p, static_cast<unsigned long>(r));
    Integer unit_inv;
    mpz_invert(unit_inv.get_mpz_t(), unit.get_mpz_t(), ord.get_mpz_t());
    // Complement: g_j <- g_j - c_j g_i with c_j = S_ij / S_ii (mod p^r).
    std::vector<Integer> c(k);
    for (std::size_t j : live) {
      if (j == i) continue;
      Integer a = S[i][j] / pw;  // exact: best is the least valuation
      c[j] = a * unit_inv;
      mpz_fdiv_r(c[j].get_mpz_t(), c[j].get_mpz_t(), ord.get_mpz_t());
    }
    std::vector<std::size_t> rest;
    for (std::size_t j : live)
      if (j != i) rest.push_back(j);
    for (std::size_t j : rest)
      for (std::size_t l : rest) S[j][l] = reduce(S[j][l] - c[l] * S[i][j]);
    Symbol sym;
    sym.prime = pl;
    sym.exponent = r;
    Integer um = unit;
    mpz_fdiv_r(um.get_mpz_t(), um.get_mpz_t(), p.get_mpz_t());
    sym.letter = is_quadratic_residue(um, p) ? 'A' : 'B';
    out.push_back(sym);
    live = std::move(rest);
  }
  // Normal form: at most one B per exponent.
  std::map<int, int> b_count;
  for (const auto& sy : out)
    if (sy.letter == 'B') ++b_count[sy.exponent];
  for (auto& sy : out)
    if (sy.letter == 'B') sy.letter = 'A';
  for (auto& [r, cnt] : b_count)
    if (cnt % 2 == 1)
      for (auto& sy : out)
        if (sy.exponent == r) {
          sy.letter = 'B';
          break;
        }
  return PairingClass(std::move(out));
}

// ---------------------------------------------------------------------------
// p = 2: catalog of orthogonal sums of generators, deduplicated by
// isomorphism, searched by brute force.

/// Default order bound for the 2-group catalog.
inline constexpr std::int64_t kDefaultCatalogBound = 64;

struct CatalogEntry {
  PairingClass cls;
  std::shared_ptr<const FinitePairing> pairing;
  std::uint64_t aut = 0;
};

namespace detail {

// All multisets of size `n` drawn from `letters` (non-decreasing sequences).
inline void multisets(const std::vector<char>& letters, int n, std::size_t start,
                      std::vector<char>& cur, std::vector<std::vector<char>>& out) {
  if (n == 0) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < letters.size(); ++i) {
    cur.push_back(letters[i]);
    multisets(letters, n - 1, i, cur, out);
    cur.pop_back();
  }
}

// Symbol multisets realizing (Z/2^r)^m for a single r.
inline std::vector<std::vector<Symbol>> blocks_for_exponent(int r, int m) {
  std::vector<char> cyclic{'A'};
  if (r >= 2) cyclic.push_back('B');
  if (r >= 3) {
    cyclic.push_back('C');
    cyclic.push_back('D');
  }
  std::vector<std::vector<Symbol>> out;
  for (int ef = 0; 2 * ef <= m; ++ef) {
    for (int f = 0; f <= (r >= 2 ? ef : 0); ++f) {
      std::vector<std::vector<char>> ms;
      std::vector<char> cur;
      multisets(cyclic, m - 2 * ef, 0, cur, ms);
      for (auto& lst : ms) {
        std::vector<Symbol> s;
        for (char c : lst) s.push_back({c, 2, r});
        for (int i = 0; i < ef - f; ++i) s.push_back({'E', 2, r});
        for (int i = 0; i < f; ++i) s.push_back({'F', 2, r});
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

inline std::vector<CatalogEntry> build_catalog(const std::vector<int>& exps) {
  std::map<int, int> mult;
  for (int r : exps) ++mult[r];
  std::vector<std::vector<Symbol>> combos{{}};
  for (auto [r, m] : mult) {
    std::vector<std::vector<Symbol>> next;
    for (const auto& base : combos)
      for (const auto& blk : blocks_for_exponent(r, m)) {
        auto s = base;
        s.insert(s.end(), blk.begin(), blk.end());
        next.push_back(std::move(s));
      }
    combos = std::move(next);
  }
  std::vector<PairingClass> classes;
  for (auto& c : combos) classes.emplace_back(std::move(c));
  std::sort(classes.begin(), classes.end());  // minimal representative first

  std::vector<CatalogEntry> out;
  std::int64_t bound = 1;
  for (int r : exps) bound <<= r;
  for (const auto& cls : classes) {
    auto fp = std::make_shared<const FinitePairing>(gram_of(cls), bound);
    bool seen = false;
    for (const auto& entry : out)
      if (is_isomorphic(*fp, *entry.pairing)) {
        seen = true;
        break;
      }
    if (seen) continue;
    out.push_back({cls, fp, count_aut_pairing(*fp)});
  }
  return out;
}

}  // namespace detail

/// Isomorphism classes of pairings on the 2-group with the given exponents
/// (ascending list of r for Z/2^r factors), with their automorphism counts.
/// Built on first use and then shared read-only.
inline std::shared_ptr<const std::vector<CatalogEntry>> two_group_catalog(std::vector<int> exps) {
  static std::mutex mu;
  static std::map<std::vector<int>, std::shared_ptr<const std::vector<CatalogEntry>>> cache;
  std::sort(exps.begin(), exps.end());
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(exps);
    if (it != cache.end()) return it->second;
  }
  auto built = std::make_shared<const std::vector<CatalogEntry>>(detail::build_catalog(exps));
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(exps, built).first->second;
}

inline std::vector<int> exponents_of(const SylowPairing& s) {
  std::vector<int> exps;
  for (const auto& o : s.pairing.orders()) exps.push_back(valuation(o, s.prime));
  std::sort(exps.begin(), exps.end());
  return exps;
}

/// Catalog representative isomorphic to a pairing on a 2-group.
inline PairingClass classify_p2(const SylowPairing& s,
                                std::int64_t catalog_bound = kDefaultCatalogBound) {
  if (s.prime != 2) throw std::invalid_argument("classify_p2 called with p != 2");
  if (s.pairing.generator_count() == 0) return {};
  Integer order = s.pairing.order();
  if (order > catalog_bound)
    throw OrderExceedsBound(order.get_str(), std::to_string(catalog_bound));
  FinitePairing fp(s.pairing, catalog_bound);
  if (!fp.is_nondegenerate()) throw DegeneratePairing("2-group pairing has a kernel");
  auto sig = fp.signature();
  auto cat = two_group_catalog(exponents_of(s));
  for (const auto& entry : *cat)
    if (entry.pairing->signature() == sig && detail::IsometrySearch(fp, *entry.pairing).count(1) == 1)
      return entry.cls;
  throw NoCatalogMatch();
}

/// Class of a Sylow pairing at any prime.
inline PairingClass classify_sylow(const SylowPairing& s,
                                   std::int64_t catalog_bound = kDefaultCatalogBound) {
  return s.prime == 2 ? classify_p2(s, catalog_bound) : classify_odd_p(s);
}

/// Class of a pairing on an arbitrary finite abelian group, prime by prime.
inline PairingClass classify(const PairingGram& p,
                             std::int64_t catalog_bound = kDefaultCatalogBound) {
  PairingClass out;
  for (const auto& part : sylow_split(p)) out = out + classify_sylow(part, catalog_bound);
  return out;
}

/// Every class of order p^m for m <= max_m (odd p: normal forms; p = 2: the
/// catalog), ascending by order then by symbols.
inline std::vector<PairingClass> enumerate_classes(std::int64_t p, int max_m) {
  std::vector<PairingClass> out;
  // partitions of m into exponents
  std::vector<std::vector<int>> parts;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int left, int maxpart) -> void {
    if (left == 0) {
      parts.push_back(cur);
      return;
    }
    for (int x = std::min(left, maxpart); x >= 1; --x) {
      cur.push_back(x);
      self(self, left - x, x);
      cur.pop_back();
    }
  };
  for (int m = 0; m <= max_m; ++m) {
    parts.clear();
    rec(rec, m, m);
    std::vector<PairingClass> level;
    for (auto exps : parts) {
      std::sort(exps.begin(), exps.end());
      if (p == 2) {
        if (exps.empty()) {
          level.emplace_back();
          continue;
        }
        for (const auto& e : *two_group_catalog(exps)) level.push_back(e.cls);
        continue;
      }
      std::map<int, int> mult;
      for (int r : exps) ++mult[r];
      std::vector<std::vector<Symbol>> combos{{}};
      for (auto [r, m_r] : mult) {
        std::vector<std::vector<Symbol>> next;
        for (int b = 0; b <= 1; ++b)
          for (const auto& base : combos) {
            auto s = base;
            for (int i = 0; i < m_r; ++i) s.push_back({i < b ? 'B' : 'A', p, r});
            next.push_back(std::move(s));
          }
        combos = std::move(next);
      }
      for (auto& c : combos) level.emplace_back(std::move(c));
    }
    std::sort(level.begin(), level.end());
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

/// |Aut| of a class; uses the catalog at p = 2 and brute force otherwise,
/// multiplying across primes.
inline std::uint64_t aut_of_class(const PairingClass& c, std::int64_t bound = kDefaultSearchBound) {
  std::uint64_t total = 1;
  for (auto p : c.primes()) total *= count_aut_pairing(gram_of(c.for_prime(p)), bound);
  return total;
}

}  // namespace jacpair
