#include <gtest/gtest.h>

#include "hcf/group.hpp"
#include "oracles.hpp"

using namespace hcf;

TEST(Group, MultiplicationMatchesMatrixProduct) {
  oracle::Gen gen(11);
  for (int i = 0; i < 2000; ++i) {
    GroupElement g = gen.element(), h = gen.element();
    EXPECT_EQ(g * h, oracle::element(oracle::matmul(oracle::matrix(g), oracle::matrix(h))));
  }
}

TEST(Group, AssociativityAndInverses) {
  oracle::Gen gen(12);
  for (int i = 0; i < 2000; ++i) {
    GroupElement f = gen.element(), g = gen.element(), h = gen.element();
    EXPECT_EQ((f * g) * h, f * (g * h));
    EXPECT_EQ(g * inv(g), identity());
    EXPECT_EQ(inv(g) * g, identity());
  }
}

TEST(Group, CoordinatesAreCBA) {
  oracle::Gen gen(13);
  for (int i = 0; i < 200; ++i) {
    GroupElement g = gen.element();
    EXPECT_EQ(gen_c(g.t3) * gen_b(g.t2) * gen_a(g.t1), g);
    AbcCoords s = to_abc(g);
    EXPECT_EQ(gen_a(s.s1) * gen_b(s.s2) * gen_c(s.s3), g);
    EXPECT_EQ(from_abc(s), g);
  }
}

TEST(Group, CommutatorOfGenerators) {
  oracle::Gen gen(14);
  for (int i = 0; i < 500; ++i) {
    Rational x = gen.rational(), y = gen.rational();
    EXPECT_EQ(commutator(gen_a(x), gen_b(y)), gen_c(x * y));
  }
}

TEST(Group, FlipIsAnInvolutiveAutomorphism) {
  oracle::Gen gen(15);
  for (int i = 0; i < 2000; ++i) {
    GroupElement g = gen.element(), h = gen.element();
    EXPECT_EQ(flip(g * h), flip(g) * flip(h));
    EXPECT_EQ(flip(flip(g)), g);
  }
  EXPECT_EQ(flip(gen_a(3)), gen_b(3));
  EXPECT_EQ(flip(gen_c(2)), gen_c(-2));
}

TEST(Group, PowersAndCenter) {
  oracle::Gen gen(16);
  for (int i = 0; i < 200; ++i) {
    GroupElement g = gen.element();
    GroupElement acc = identity();
    for (long k = 0; k <= 6; ++k) {
      EXPECT_EQ(power(g, k), acc);
      EXPECT_EQ(power(g, -k), inv(acc));
      acc = acc * g;
    }
    EXPECT_TRUE(is_central(center_part(g)));
    GroupElement z = gen_c(gen.rational());
    EXPECT_EQ(z * g, g * z);
  }
}
