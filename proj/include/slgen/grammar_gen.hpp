#pragma once

// Random grammar generation: categories and kinds, rules, permutation
// injection for weak word order, height repair, and unit inventories.

#include <algorithm>
#include <array>
#include <numeric>
#include <string>
#include <vector>

#include "slgen/grammar.hpp"
#include "slgen/params.hpp"
#include "slgen/random.hpp"

namespace slgen {

// Rule redraws allowed when height repair fails (e.g. marker-only cycles).
inline constexpr int kMaxRuleDraws = 256;

inline std::vector<Category> draw_categories(const GenParams& p, Rng& rng) {
  std::vector<Category> cats;
  cats.reserve(static_cast<std::size_t>(p.num_categories));
  for (std::int64_t i = 0; i < p.num_categories; ++i) {
    Category c;
    c.id = CategoryId{static_cast<std::uint32_t>(i)};
    c.label = "C" + std::to_string(i);
    // Category 0 is the root and must be manual.
    c.kind = (i > 0 && rng.bernoulli(p.nmg_category_ratio)) ? CategoryKind::NMG
                                                            : CategoryKind::MG;
    cats.push_back(std::move(c));
  }
  return cats;
}

// Fills mg_rules / nmg_rules of a grammar whose categories are already set.
inline void draw_rules(Grammar& g, const GenParams& p, Rng& rng) {
  g.mg_rules.clear();
  g.nmg_rules.clear();
  const std::size_t n = g.categories.size();
  RuleId next = 0;
  auto any_category = [&] { return CategoryId{static_cast<std::uint32_t>(rng.index(n))}; };

  for (const auto& c : g.categories) {
    if (c.kind != CategoryKind::MG) continue;
    const auto count = std::max<std::int64_t>(0, sample(p.rules_per_category, rng));
    for (std::int64_t k = 0; k < count; ++k) {
      MgRule r;
      r.id = next++;
      r.head = c.id;
      const auto deps = static_cast<std::size_t>(std::max<std::int64_t>(0, sample(p.deps_per_rule, rng)));
      const std::size_t left = sample_head_slot(p.head_position, deps, rng);
      for (std::size_t d = 0; d < deps; ++d) (d < left ? r.left : r.right).push_back(any_category());
      g.mg_rules.push_back(std::move(r));
    }
  }
  for (const auto& c : g.categories) {
    if (c.kind != CategoryKind::NMG) continue;
    // A marker category without rules could never be finite.
    const auto count = std::max<std::int64_t>(1, sample(p.rules_per_category, rng));
    for (std::int64_t k = 0; k < count; ++k)
      g.nmg_rules.push_back(NmgRule{next++, c.id, any_category()});
  }
}

// Element sequence of an MG rule with the head slot encoded as nullopt.
using RuleElements = std::vector<std::optional<CategoryId>>;

inline RuleElements rule_elements(const MgRule& r) {
  RuleElements e(r.left.begin(), r.left.end());
  e.push_back(std::nullopt);
  e.insert(e.end(), r.right.begin(), r.right.end());
  return e;
}

inline MgRule rule_from_elements(RuleId id, CategoryId head, const RuleElements& e) {
  MgRule r;
  r.id = id;
  r.head = head;
  bool after = false;
  for (const auto& x : e) {
    if (!x) {
      after = true;
      continue;
    }
    (after ? r.right : r.left).push_back(*x);
  }
  return r;
}

// A uniformly drawn element sequence different from the rule's own. Shuffling
// positions is uniform over distinct sequences of the multiset, so rejecting the
// original keeps it uniform over the remaining ones.
inline RuleElements draw_distinct_permutation(const MgRule& r, Rng& rng) {
  const RuleElements original = rule_elements(r);
  RuleElements e = original;
  do {
    e = original;
    for (std::size_t i = e.size(); i > 1; --i) std::swap(e[i - 1], e[rng.index(i)]);
  } while (e == original);
  return e;
}

// For each original MG rule with >= 2 elements (dependents plus the head slot),
// with probability p_perm adds one distinct permutation of it.
inline Grammar inject_permutations(Grammar g, double p_perm, Rng& rng) {
  if (p_perm <= 0.0) return g;
  RuleId next = next_rule_id(g);
  const std::size_t original = g.mg_rules.size();
  for (std::size_t i = 0; i < original; ++i) {
    if (g.mg_rules[i].permutation_of) continue;
    if (g.mg_rules[i].dependent_count() + 1 < 2) continue;
    if (!rng.bernoulli(p_perm)) continue;
    const MgRule& base = g.mg_rules[i];
    MgRule perm = rule_from_elements(next++, base.head, draw_distinct_permutation(base, rng));
    perm.permutation_of = base.id;
    g.mg_rules.push_back(std::move(perm));
  }
  return g;
}

namespace detail {

inline bool owns_leaf_rule(const Grammar& g, CategoryId c) {
  return std::any_of(g.mg_rules.begin(), g.mg_rules.end(),
                     [c](const MgRule& r) { return r.head == c && r.is_leaf(); });
}

// Follows the cheapest marker rules down from an NMG category to the first MG
// category that could still be lowered by a leaf rule.
inline std::optional<CategoryId> manual_repair_point(const Grammar& g, const HeightMap& h,
                                                     CategoryId c) {
  while (g.category(c).kind == CategoryKind::NMG) {
    const NmgRule* best = nullptr;
    for (const auto& r : g.nmg_rules)
      if (r.head == c && (!best || rule_height(h, r) < rule_height(h, *best))) best = &r;
    if (!best || !rule_height(h, *best).is_finite()) return std::nullopt;
    c = best->dependent;
  }
  if (h[c.index] == Height{1} || owns_leaf_rule(g, c)) return std::nullopt;
  return c;
}

// Heights the grammar would have if every MG category owned a leaf rule: the
// best enforce_height can reach without touching marker rules.
inline HeightMap height_floor(const Grammar& g) {
  Grammar leafy = g;
  RuleId next = next_rule_id(g);
  for (const auto& c : g.categories)
    if (c.kind == CategoryKind::MG) leafy.mg_rules.push_back(MgRule{next++, c.id, {}, {}, {}});
  return compute_heights(leafy);
}

// Redraws the dependents of marker rules whose category stays above the limit
// even with every MG category at height 1. Returns false if rounds run out.
inline bool redraw_deep_markers(Grammar& g, std::int64_t limit, Rng& rng) {
  const std::size_t n = g.categories.size();
  for (int round = 0; round < kMaxRuleDraws; ++round) {
    const HeightMap floor = height_floor(g);
    bool settled = true;
    for (auto& r : g.nmg_rules) {
      const Height h = floor[r.head.index];
      if (h.is_finite() && h.value() <= static_cast<std::uint64_t>(limit)) continue;
      settled = false;
      r.dependent = CategoryId{static_cast<std::uint32_t>(rng.index(n))};
    }
    if (settled) return true;
  }
  return false;
}

}  // namespace detail

// Adds leaf rules until every category is finite with height <= limit.
// Each round: MG categories at exactly the limit get a leaf rule (markers at the
// limit are lowered through the MG category beneath them); with nothing at the
// limit, the lowest-index infinite MG category gets one, then the lowest-index
// MG category above the limit, then any MG category above height 1. Throws
// RepairError when every MG category already owns a leaf rule.
inline Grammar enforce_height(Grammar g, std::int64_t limit) {
  if (limit < 1) throw ParamError("height_limit", "must be >= 1");
  const Height cap{static_cast<std::uint32_t>(std::min<std::int64_t>(limit, Height::kInfinite - 1))};
  RuleId next = next_rule_id(g);
  for (;;) {
    const HeightMap h = compute_heights(g);
    const bool ok = std::all_of(h.begin(), h.end(), [&](Height x) { return x <= cap; });
    if (ok) return g;

    std::set<CategoryId> targets;
    for (const auto& c : g.categories) {
      if (h[c.id.index] != cap) continue;
      if (c.kind == CategoryKind::MG) {
        if (!detail::owns_leaf_rule(g, c.id)) targets.insert(c.id);
      } else if (auto m = detail::manual_repair_point(g, h, c.id)) {
        targets.insert(*m);
      }
    }
    if (targets.empty()) {
      auto pick = [&](auto pred) -> std::optional<CategoryId> {
        for (const auto& c : g.categories)
          if (c.kind == CategoryKind::MG && pred(h[c.id.index]) && !detail::owns_leaf_rule(g, c.id))
            return c.id;
        return std::nullopt;
      };
      auto c = pick([](Height x) { return !x.is_finite(); });
      if (!c) c = pick([&](Height x) { return cap < x; });
      if (!c) c = pick([](Height x) { return Height{1} < x; });
      if (!c) throw RepairError("no manual category left to repair; marker categories exceed the height limit or form a cycle");
      targets.insert(*c);
    }
    for (CategoryId c : targets) {
      MgRule leaf;
      leaf.id = next++;
      leaf.head = c;
      g.mg_rules.push_back(std::move(leaf));
    }
  }
}

// One inventory per category, in category order. duration_scale is drawn from
// Normal(mean, std), redrawn below kMinDurationScale and finally clamped to it.
inline std::vector<Unit> generate_units(const std::vector<Category>& cats, const GenParams& p,
                                        Rng& rng) {
  std::vector<Unit> units;
  UnitId next = 0;
  const std::array<double, 3> ratios{p.nmg_sync_ratios.full, p.nmg_sync_ratios.start,
                                     p.nmg_sync_ratios.end};
  constexpr std::array<SyncType, 3> nmg_types{SyncType::NMG_FULL, SyncType::NMG_START,
                                              SyncType::NMG_END};
  for (const auto& c : cats) {
    const auto k = std::max<std::int64_t>(1, sample(p.units_per_category, rng));
    for (std::int64_t i = 0; i < k; ++i) {
      Unit u;
      u.id = next++;
      u.category = c.id;
      u.sync = c.kind == CategoryKind::MG ? SyncType::MG : nmg_types[rng.categorical(ratios)];
      double scale = rng.normal(p.duration_scale_mean, p.duration_scale_std);
      for (int tries = 0; scale < kMinDurationScale && tries < 64; ++tries)
        scale = rng.normal(p.duration_scale_mean, p.duration_scale_std);
      u.duration_scale = std::max(scale, kMinDurationScale);
      units.push_back(u);
    }
  }
  return units;
}

// Categories -> rules (marker dependents redrawn until reachable) -> permutations
// -> height repair -> units. Deterministic in params.seed.
inline Grammar generate_grammar(const GenParams& p) {
  validate(p);
  Rng rng(p.seed);
  Grammar g;
  g.categories = draw_categories(p, rng);
  g.root = CategoryId{0};
  g.params = p;
  const bool has_markers = std::any_of(g.categories.begin(), g.categories.end(),
                                       [](const Category& c) { return c.kind == CategoryKind::NMG; });
  if (has_markers && p.height_limit < 2)
    throw RepairError("marker categories have height >= 2; height_limit " +
                      std::to_string(p.height_limit) + " cannot be met");
  for (int attempt = 0;; ++attempt) {
    draw_rules(g, p, rng);
    if (!detail::redraw_deep_markers(g, p.height_limit, rng)) {
      if (attempt + 1 >= kMaxRuleDraws)
        throw RepairError("marker rules stay above the height limit after " +
                          std::to_string(kMaxRuleDraws) + " rule draws");
      continue;
    }
    Grammar candidate = inject_permutations(g, p.permutation_prob, rng);
    try {
      g = enforce_height(std::move(candidate), p.height_limit);
      break;
    } catch (const RepairError& e) {
      if (attempt + 1 >= kMaxRuleDraws)
        throw RepairError("no repairable rule draw after " + std::to_string(kMaxRuleDraws) +
                          " attempts: " + e.what());
    }
  }
  g.units = generate_units(g.categories, p, rng);
  return g;
}

}  // namespace slgen
