#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace slgen {
namespace {

using testing::GrammarBuilder;

Height H(std::uint32_t v) { return Height{v}; }

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.code == code; });
}

TEST(Heights, LeafRuleIsOne) {
  const Grammar g = GrammarBuilder().mg("N").rule("N()").build();
  EXPECT_EQ(compute_heights(g), (HeightMap{H(1)}));
}

TEST(Heights, OneFixpointStep) {
  const Grammar g = testing::two_category_grammar();
  EXPECT_EQ(compute_heights(g), (HeightMap{H(2), H(1)}));
}

TEST(Heights, MutualRecursionWithoutLeafIsInfinite) {
  const Grammar g = GrammarBuilder().mg("A").mg("B").rule("A(*,B)").rule("B(A,*)").build();
  const HeightMap h = compute_heights(g);
  EXPECT_FALSE(h[0].is_finite());
  EXPECT_FALSE(h[1].is_finite());
  EXPECT_EQ(h[0], Height::infinite());
}

TEST(Heights, MarkerRuleAddsOne) {
  const Grammar g = GrammarBuilder().mg("S").nmg("M").rule("S()").rule("M(S)").build();
  EXPECT_EQ(compute_heights(g), (HeightMap{H(1), H(2)}));
}

TEST(Heights, MinOverRulesMaxOverDependents) {
  // S has a deep rule and a shallow one; the shallow one wins.
  const Grammar g = GrammarBuilder()
                        .mg("S").mg("T").mg("N")
                        .rule("S(T,*,N)").rule("S(*,N)")
                        .rule("T(N,*)").rule("N()")
                        .build();
  EXPECT_EQ(compute_heights(g), (HeightMap{H(2), H(2), H(1)}));
}

TEST(Heights, DanglingReferenceThrows) {
  Grammar g = testing::two_category_grammar();
  g.mg_rules[0].right.push_back(CategoryId{9});
  EXPECT_THROW(compute_heights(g), StructureError);
  EXPECT_THROW(is_finite(g), StructureError);
}

TEST(IsFinite, Examples) {
  EXPECT_TRUE(is_finite(testing::two_category_grammar()));
  EXPECT_FALSE(is_finite(GrammarBuilder().mg("A").mg("B").rule("A(*,B)").rule("B(A,*)").build()));
  const Grammar repaired =
      GrammarBuilder().mg("A").mg("B").rule("A(*,B)").rule("A()").rule("B(A,*)").build();
  EXPECT_TRUE(is_finite(repaired));
  // Fixpoint oracle values for the repaired grammar.
  EXPECT_EQ(compute_heights(repaired), (HeightMap{H(1), H(2)}));
}

TEST(IsFinite, AmbiguousRulesAreAccepted) {
  // A(*,B) and B(A,*) together are ambiguous, not invalid.
  const Grammar g = GrammarBuilder()
                        .mg("A").mg("B")
                        .rule("A(*,B)").rule("A()").rule("B(A,*)").rule("B()")
                        .build();
  EXPECT_TRUE(validate_grammar(g).empty());
  EXPECT_TRUE(is_finite(g));
}

TEST(Validate, WellFormed) { EXPECT_TRUE(validate_grammar(testing::two_category_grammar()).empty()); }

TEST(Validate, KindMismatch) {
  Grammar g = GrammarBuilder().mg("S").nmg("M").rule("S()").rule("M(S)").build();
  MgRule bad;
  bad.id = 99;
  bad.head = CategoryId{1};
  g.mg_rules.push_back(bad);
  const auto v = validate_grammar(g);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].code, "kind-mismatch");
}

TEST(Validate, DanglingReference) {
  Grammar g = testing::two_category_grammar();
  g.mg_rules[0].left.push_back(CategoryId{5});
  const auto v = validate_grammar(g);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].code, "dangling-reference");
}

TEST(Validate, EmptyInventoryDuplicateIdsAndRoot) {
  Grammar g = GrammarBuilder().mg("S").nmg("M").rule("S()").rule("M(S)").build();
  g.units.erase(g.units.begin());
  EXPECT_TRUE(has_code(validate_grammar(g), "empty-inventory"));

  g = testing::two_category_grammar();
  g.mg_rules[1].id = g.mg_rules[0].id;
  EXPECT_TRUE(has_code(validate_grammar(g), "duplicate-id"));

  g = GrammarBuilder().mg("S").nmg("M").rule("S()").rule("M(S)").root("M").build();
  EXPECT_TRUE(has_code(validate_grammar(g), "kind-mismatch"));

  g = testing::two_category_grammar();
  g.categories[1].label = "S";
  EXPECT_TRUE(has_code(validate_grammar(g), "duplicate-label"));

  g = testing::two_category_grammar();
  g.units[0].sync = SyncType::NMG_START;
  EXPECT_TRUE(has_code(validate_grammar(g), "kind-mismatch"));
}

TEST(Validate, PermutationLinks) {
  Grammar g = GrammarBuilder().mg("S").mg("N").rule("S(N,*)").rule("S(*,N)").rule("N()").build();
  g.mg_rules[1].permutation_of = g.mg_rules[0].id;
  EXPECT_TRUE(validate_grammar(g).empty());
  g.mg_rules[1].right = {CategoryId{0}};
  EXPECT_TRUE(has_code(validate_grammar(g), "bad-permutation"));
  g.mg_rules[1].permutation_of = 42;
  EXPECT_TRUE(has_code(validate_grammar(g), "bad-permutation"));
}

// Heights equal the least depth found by explicit tree enumeration.
TEST(HeightProperties, FixpointSoundnessAgainstEnumeration) {
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const Grammar g = testing::random_small_grammar(seed, 5);
    const HeightMap h = compute_heights(g);
    oracle::TreeEnumerator trees(g);
    for (std::uint32_t c = 0; c < g.categories.size(); ++c) {
      // With n categories any finite height is at most n.
      const auto depth = trees.min_depth(c, static_cast<std::uint32_t>(g.categories.size()) + 1);
      if (h[c].is_finite()) {
        ASSERT_TRUE(depth.has_value()) << "seed " << seed << " category " << c;
        EXPECT_EQ(*depth, h[c].value()) << "seed " << seed << " category " << c;
      } else {
        EXPECT_FALSE(depth.has_value()) << "seed " << seed << " category " << c;
      }
    }
  }
}

TEST(HeightProperties, AddingARuleNeverRaisesHeights) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Grammar g = testing::random_small_grammar(seed, 5);
    const HeightMap before = compute_heights(g);
    Rng rng(seed ^ 0xABCDEF);
    const auto n = g.categories.size();
    const auto head = CategoryId{static_cast<std::uint32_t>(rng.index(n))};
    if (g.category(head).kind == CategoryKind::MG) {
      MgRule r;
      r.id = next_rule_id(g);
      r.head = head;
      for (std::size_t k = rng.index(3); k > 0; --k)
        r.right.push_back(CategoryId{static_cast<std::uint32_t>(rng.index(n))});
      g.mg_rules.push_back(r);
    } else {
      g.nmg_rules.push_back({next_rule_id(g), head, CategoryId{static_cast<std::uint32_t>(rng.index(n))}});
    }
    const HeightMap after = compute_heights(g);
    for (std::size_t c = 0; c < n; ++c) EXPECT_LE(after[c], before[c]) << "seed " << seed;
  }
}

TEST(HeightProperties, HornClauseEquivalence) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Grammar g = testing::random_small_grammar(seed, 6);
    const HeightMap h = compute_heights(g);
    const auto derivable = oracle::horn_derivable(g);
    for (std::size_t c = 0; c < h.size(); ++c) ASSERT_EQ(h[c].is_finite(), derivable[c]) << "seed " << seed;
    ASSERT_EQ(is_finite(g), oracle::horn_finite(g)) << "seed " << seed;
  }
}

}  // namespace
}  // namespace slgen
