#include <gtest/gtest.h>

#include <random>

#include "jacpair/classify.hpp"
#include "jacpair/finite_pairing.hpp"
#include "jacpair/graph.hpp"
#include "jacpair/pairing.hpp"
#include "oracles.hpp"

using namespace jacpair;

namespace {

Rational q(long a, long b) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

PairingGram cyclic(long order, long num) {
  RationalMatrix g(1, 1);
  g(0, 0) = q(num, order);
  return PairingGram({Integer(order)}, g);
}

// Symmetric matrices with nonzero determinant and small cokernel.
IntMatrix random_nonsingular_symmetric(std::mt19937_64& rng, std::size_t n) {
  for (;;) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        long v = static_cast<long>(rng() % 9) - 4;
        m(i, j) = v;
        m(j, i) = v;
      }
    Integer d = determinant(m);
    if (d != 0 && abs(d) <= 400) return m;
  }
}

}  // namespace

TEST(PairingGram, ReducesValuesModOne) {
  RationalMatrix g(1, 1);
  g(0, 0) = q(7, 3);
  PairingGram p({Integer(3)}, g);
  EXPECT_EQ(p.value(0, 0), q(1, 3));
  g(0, 0) = q(-1, 3);
  EXPECT_EQ(PairingGram({Integer(3)}, g).value(0, 0), q(2, 3));
}

TEST(PairingGram, RejectsInconsistentInput) {
  RationalMatrix g(1, 1);
  g(0, 0) = q(1, 4);
  EXPECT_THROW(PairingGram({Integer(2)}, g), std::invalid_argument);
  EXPECT_THROW(PairingGram({Integer(1)}, RationalMatrix(1, 1)), std::invalid_argument);
  RationalMatrix h(2, 2);
  h(0, 1) = q(1, 2);
  EXPECT_THROW(PairingGram({Integer(2), Integer(2)}, h), std::invalid_argument);
  EXPECT_THROW(PairingGram({Integer(2)}, h), std::invalid_argument);
}

TEST(CokernelPairing, ValuesMatchInverseOnLifts) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 1 + rng() % 4;
    IntMatrix a = random_nonsingular_symmetric(rng, n);
    CokernelPairing cp = cokernel_pairing(a);
    RationalMatrix inv = rational_inverse(a);
    const std::size_t k = cp.pairing.generator_count();
    ASSERT_EQ(cp.generator_lifts.cols(), k);
    EXPECT_EQ(cp.pairing.group(), cokernel_invariants(a));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        Rational v = 0;
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t c = 0; c < n; ++c)
            v += Rational(cp.generator_lifts(r, j)) * inv(r, c) * Rational(cp.generator_lifts(c, i));
        EXPECT_EQ(cp.pairing.value(i, j), mod_one(v)) << a;
      }
    if (cp.pairing.order() <= 1024) {
      EXPECT_TRUE(is_nondegenerate(cp.pairing)) << a;
    }
  }
}

TEST(CokernelPairing, GeneratorOrdersAreExact) {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 40; ++t) {
    IntMatrix a = random_nonsingular_symmetric(rng, 3);
    CokernelPairing cp = cokernel_pairing(a);
    RationalMatrix inv = rational_inverse(a);
    for (std::size_t i = 0; i < cp.pairing.generator_count(); ++i) {
      // d * g lies in the image of A, and no proper divisor does.
      const Integer d = cp.pairing.orders()[i];
      auto in_image = [&](const Integer& m) {
        for (std::size_t r = 0; r < 3; ++r) {
          Rational s = 0;
          for (std::size_t c = 0; c < 3; ++c) s += inv(r, c) * Rational(m * cp.generator_lifts(c, i));
          if (s.get_den() != 1) return false;
        }
        return true;
      };
      EXPECT_TRUE(in_image(d));
      for (Integer e = 1; e < d; ++e)
        if (mpz_divisible_p(d.get_mpz_t(), e.get_mpz_t())) {
          EXPECT_FALSE(in_image(e));
        }
    }
  }
}

TEST(CokernelPairing, RejectsBadInput) {
  EXPECT_THROW(cokernel_pairing(IntMatrix{{1, 2}, {3, 4}}), std::invalid_argument);
  EXPECT_THROW(cokernel_pairing(IntMatrix{{1, 1}, {1, 1}}), SingularMatrix);
  EXPECT_THROW(cokernel_pairing(IntMatrix(2, 3)), std::invalid_argument);
}

TEST(JacobianPairing, Triangle) {
  PairingGram p = jacobian_with_pairing(Graph::cycle(3));
  ASSERT_EQ(p.orders(), std::vector<Integer>{Integer(3)});
  // <g, g> = 2/3 for the generator: a non-square unit over 3
  EXPECT_EQ(p.value(0, 0), q(2, 3));
  EXPECT_TRUE(is_isomorphic(p, cyclic(3, 2)));
  EXPECT_FALSE(is_isomorphic(p, cyclic(3, 1)));
  EXPECT_EQ(classify(p).to_string(), "B3");
}

TEST(JacobianPairing, TreesAreTrivial) {
  EXPECT_EQ(jacobian_with_pairing(Graph::path(5)).generator_count(), 0u);
  EXPECT_EQ(jacobian_with_pairing(Graph::path(2)).order(), 1);
  EXPECT_EQ(jacobian_with_pairing(Graph(1, {})).order(), 1);
  EXPECT_TRUE(classify(jacobian_with_pairing(Graph::path(4))).is_trivial());
}

TEST(JacobianPairing, CompleteGraphFour) {
  PairingGram p = jacobian_with_pairing(Graph::complete(4));
  EXPECT_EQ(p.group(), (FiniteAbelianGroup{4, 4}));
  EXPECT_TRUE(is_nondegenerate(p));
}

TEST(JacobianPairing, CompleteGraphGroups) {
  for (int n = 3; n <= 7; ++n) {
    std::vector<Integer> inv(n - 2, Integer(n));
    EXPECT_EQ(jacobian_with_pairing(Graph::complete(n)).group(), FiniteAbelianGroup(inv));
  }
}

TEST(JacobianPairing, CycleIsCyclic) {
  for (int n = 3; n <= 9; ++n) {
    PairingGram p = jacobian_with_pairing(Graph::cycle(n));
    EXPECT_EQ(p.group(), (FiniteAbelianGroup{n}));
    // the pairing on Jac(C_n) is <g, g> = -1/n for a vertex-difference generator
    EXPECT_TRUE(is_isomorphic(p, cyclic(n, n - 1)));
  }
}

TEST(JacobianPairing, DisconnectedThrows) {
  EXPECT_THROW(jacobian_with_pairing(Graph(4, {{0, 1}, {2, 3}})), DisconnectedGraph);
  EXPECT_THROW(jacobian_with_pairing(Graph(2, {})), DisconnectedGraph);
}

TEST(JacobianPairing, IndependentOfDeletedVertex) {
  GraphSampleConfig cfg{7, 0.45, 8, true};
  int compared = 0;
  for (std::uint64_t t = 0; t < 60; ++t) {
    Graph g = sample_gnq(cfg, t);
    PairingGram base = jacobian_with_pairing(g, g.vertex_count() - 1);
    if (base.order() > 1024) continue;
    for (int v = 0; v + 1 < g.vertex_count(); ++v) {
      PairingGram other = jacobian_with_pairing(g, v);
      EXPECT_TRUE(is_isomorphic(base, other)) << "trial " << t << " vertex " << v;
      EXPECT_EQ(classify(base), classify(other));
    }
    ++compared;
  }
  EXPECT_GT(compared, 30);
}

TEST(SylowSplit, CyclicSixMatchesBruteForce) {
  PairingGram p = cyclic(6, 1);
  auto parts = sylow_split(p);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].prime, 2);
  EXPECT_EQ(parts[1].prime, 3);
  // h = 3 on Z/6: <3,3> = 9/6 = 1/2; h = 2: <2,2> = 4/6 = 2/3
  EXPECT_EQ(parts[0].pairing.value(0, 0), q(1, 2));
  EXPECT_EQ(parts[1].pairing.value(0, 0), q(2, 3));

  FinitePairing fp(p);
  for (std::int64_t x = 0; x < 6; ++x)
    for (std::int64_t y = 0; y < 6; ++y) EXPECT_EQ(fp.pair(x, y), (x * y) % 6);
  EXPECT_EQ(classify(p).to_string(), "A2+B3");
}

TEST(SylowSplit, ReassemblesToIsomorphicPairing) {
  std::mt19937_64 rng(47);
  int checked = 0;
  for (int t = 0; t < 80 && checked < 40; ++t) {
    IntMatrix a = random_nonsingular_symmetric(rng, 3);
    PairingGram p = cokernel_pairing(a).pairing;
    if (p.order() > 512 || p.order() == 1) continue;
    PairingGram sum;
    Integer order = 1;
    for (const auto& s : sylow_split(p)) {
      EXPECT_EQ(s.group(), p.group().sylow(s.prime));
      order *= s.pairing.order();
      sum = orthogonal_sum(sum, s.pairing);
    }
    EXPECT_EQ(order, p.order());
    EXPECT_TRUE(is_isomorphic(p, sum)) << a;
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

TEST(SylowSplit, TrivialGroupHasNoParts) {
  EXPECT_TRUE(sylow_split(PairingGram()).empty());
  EXPECT_EQ(sylow_part(cyclic(9, 1), Integer(2)).pairing.generator_count(), 0u);
}

TEST(Nondegeneracy, DetectsDegenerateForm) {
  RationalMatrix g(2, 2);
  g(0, 0) = q(1, 2);
  g(0, 1) = q(1, 2);
  g(1, 0) = q(1, 2);
  g(1, 1) = q(1, 2);
  PairingGram p({Integer(2), Integer(2)}, g);
  EXPECT_FALSE(is_nondegenerate(p));
  EXPECT_THROW(count_aut_pairing(p), DegeneratePairing);
  EXPECT_TRUE(is_nondegenerate(cyclic(5, 2)));
}

TEST(FinitePairing, BoundIsEnforced) {
  EXPECT_THROW(FinitePairing(cyclic(2048, 1)), OrderExceedsBound);
  EXPECT_NO_THROW(FinitePairing(cyclic(2048, 1), 4096));
}
