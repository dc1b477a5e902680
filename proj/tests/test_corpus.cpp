#include "contraction_lab/asymptotic.hpp"
#include "contraction_lab/corpus.hpp"

#include <gtest/gtest.h>

using namespace clab;

namespace {

const Tolerances kTol{};

Classification kinds(const CMatrix& m) { return classify(make_contraction(m, kTol), kTol); }

}  // namespace

TEST(Generate, SameSeedSameOutput) {
  for (const auto& [kind, name] : gen_kind_names()) {
    GenSpec s{4, kind, 99, {}};
    Generated a = generate(s), b = generate(s);
    EXPECT_EQ(a.first, b.first) << name;
    EXPECT_EQ(a.second.has_value(), b.second.has_value());
    if (a.second) EXPECT_EQ(*a.second, *b.second);
  }
}

TEST(Generate, DifferentSeedsDiffer) {
  EXPECT_NE(generate(GenSpec{3, GenKind::generic, 1, {}}).first, generate(GenSpec{3, GenKind::generic, 2, {}}).first);
}

TEST(Generate, EveryKindIsAContraction) {
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (const auto& [kind, name] : gen_kind_names())
      for (Index d : {1, 2, 5}) {
        Generated g = generate(GenSpec{d, kind, seed, {}});
        EXPECT_LE(op_norm(g.first), 1.0 + 1e-12) << name;
        if (g.second) EXPECT_LE(op_norm(*g.second), 1.0 + 1e-12) << name;
      }
}

TEST(Generate, KindsSatisfyTheirPredicates) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_TRUE(kinds(generate(GenSpec{4, GenKind::unitary, seed, {}}).first).unitary);
    EXPECT_TRUE(kinds(generate(GenSpec{4, GenKind::partial_isometry, seed, {}}).first).partial_isometry);
    EXPECT_TRUE(kinds(generate(GenSpec{4, GenKind::strict, seed, {}}).first).strict);
    EXPECT_TRUE(kinds(generate(GenSpec{4, GenKind::normal, seed, {}}).first).quasi_normal);
    EXPECT_TRUE(kinds(generate(GenSpec{4, GenKind::quasi_isometry, seed, {}}).first).quasi_isometry);

    Generated c = generate(GenSpec{3, GenKind::commuting_pair, seed, {}});
    ASSERT_TRUE(c.second.has_value());
    EXPECT_LE(op_norm(CMatrix(c.first * *c.second - *c.second * c.first)), 1e-12);

    Generated dc = generate(GenSpec{3, GenKind::doubly_commuting_pair, seed, {}});
    const CMatrix &a = dc.first, &b = *dc.second;
    EXPECT_LE(op_norm(CMatrix(a * b - b * a)), 1e-12);
    EXPECT_LE(op_norm(CMatrix(a.adjoint() * b - b * a.adjoint())), 1e-12);

    CMatrix up = generate(GenSpec{4, GenKind::direct_sum_U_plus_Q, seed, {{"unitary_dim", 2}}}).first;
    EXPECT_EQ(reducing_unitary_part(make_contraction(up, kTol), kTol).dim(), 2);
  }
}

TEST(Generate, NilpotentShiftWithZeroWeightHasZeroLimit) {
  Generated g = generate(GenSpec{4, GenKind::nilpotent_shift, 0, {{"lambda", 0.0}}});
  EXPECT_EQ(g.flags, std::vector<std::string>{"truncated-infinite-model"});
  CMatrix t = g.first;
  CMatrix p = t * t * t * t;
  EXPECT_EQ(op_norm(p), 0.0);
  AsymptoticData a = asymptotic_limit(make_contraction(t, kTol), kTol);
  EXPECT_TRUE(a.idempotent);
  EXPECT_LE(op_norm(a.s_t), 1e-15);
}

TEST(Generate, InvalidSpecsAreRejected) {
  EXPECT_THROW(generate(GenSpec{0, GenKind::generic, 0, {}}), InvalidSpec);
  EXPECT_THROW(generate(GenSpec{65, GenKind::generic, 0, {}}), InvalidSpec);
  EXPECT_THROW(generate(GenSpec{3, GenKind::strict, 0, {{"norm_bound", 1.5}}}), InvalidSpec);
  EXPECT_THROW(generate(GenSpec{3, GenKind::partial_isometry, 0, {{"rank", 1.5}}}), InvalidSpec);
  EXPECT_THROW(generate(GenSpec{3, GenKind::nilpotent_shift, 0, {{"lambda", 2.0}}}), InvalidSpec);
  EXPECT_THROW(parse_gen_kind("nope"), InvalidSpec);
}

TEST(Generate, KindNamesRoundTrip) {
  for (const auto& [kind, name] : gen_kind_names()) {
    EXPECT_EQ(parse_gen_kind(name), kind);
    EXPECT_EQ(to_string(kind), name);
  }
}
