#pragma once

// Grammar model: categories, Hays-style MG rules X(Y-n..*..Ym), marker rules X(Y),
// unit inventories, and the height analysis that decides finiteness.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "slgen/error.hpp"
#include "slgen/params.hpp"

namespace slgen {

struct CategoryId {
  std::uint32_t index = 0;
  auto operator<=>(const CategoryId&) const = default;
};

using RuleId = std::int64_t;
using UnitId = std::int64_t;

enum class CategoryKind { MG, NMG };

enum class SyncType { MG, NMG_FULL, NMG_START, NMG_END };

inline std::string_view to_string(CategoryKind k) { return k == CategoryKind::MG ? "MG" : "NMG"; }

inline std::string_view to_string(SyncType s) {
  switch (s) {
    case SyncType::MG: return "MG";
    case SyncType::NMG_FULL: return "NMG_FULL";
    case SyncType::NMG_START: return "NMG_START";
    case SyncType::NMG_END: return "NMG_END";
  }
  return "?";
}

inline std::optional<CategoryKind> parse_kind(std::string_view s) {
  if (s == "MG") return CategoryKind::MG;
  if (s == "NMG") return CategoryKind::NMG;
  return std::nullopt;
}

inline std::optional<SyncType> parse_sync(std::string_view s) {
  if (s == "MG") return SyncType::MG;
  if (s == "NMG_FULL") return SyncType::NMG_FULL;
  if (s == "NMG_START") return SyncType::NMG_START;
  if (s == "NMG_END") return SyncType::NMG_END;
  return std::nullopt;
}

inline constexpr std::size_t kSyncTypeCount = 4;

struct Category {
  CategoryId id;
  std::string label;
  CategoryKind kind = CategoryKind::MG;
  bool operator==(const Category&) const = default;
};

// head takes the star slot between `left` (positions -n..-1) and `right` (1..m).
struct MgRule {
  RuleId id = 0;
  CategoryId head;
  std::vector<CategoryId> left;
  std::vector<CategoryId> right;
  std::optional<RuleId> permutation_of;

  std::size_t dependent_count() const { return left.size() + right.size(); }
  bool is_leaf() const { return left.empty() && right.empty(); }
  bool operator==(const MgRule&) const = default;
};

struct NmgRule {
  RuleId id = 0;
  CategoryId head;
  CategoryId dependent;
  bool operator==(const NmgRule&) const = default;
};

struct Unit {
  UnitId id = 0;
  CategoryId category;
  SyncType sync = SyncType::MG;
  double duration_scale = 1.0;  // gamma scale, seconds
  bool operator==(const Unit&) const = default;
};

struct Grammar {
  std::vector<Category> categories;  // categories[i].id.index == i
  std::vector<MgRule> mg_rules;
  std::vector<NmgRule> nmg_rules;
  std::vector<Unit> units;  // sorted by (category, id)
  CategoryId root;
  std::optional<GenParams> params;

  const Category& category(CategoryId c) const { return categories.at(c.index); }
  bool has_category(CategoryId c) const { return c.index < categories.size(); }

  bool operator==(const Grammar&) const = default;
};

inline RuleId next_rule_id(const Grammar& g) {
  RuleId next = 0;
  for (const auto& r : g.mg_rules) next = std::max(next, r.id + 1);
  for (const auto& r : g.nmg_rules) next = std::max(next, r.id + 1);
  return next;
}

inline std::optional<CategoryId> find_category(const Grammar& g, std::string_view label) {
  for (const auto& c : g.categories)
    if (c.label == label) return c.id;
  return std::nullopt;
}

inline std::vector<const Unit*> units_of(const Grammar& g, CategoryId c) {
  std::vector<const Unit*> out;
  for (const auto& u : g.units)
    if (u.category == c) out.push_back(&u);
  return out;
}

// Height of a category: least depth of a finite derivation, or infinite.
class Height {
 public:
  static constexpr std::uint32_t kInfinite = std::numeric_limits<std::uint32_t>::max();

  constexpr Height() = default;
  constexpr explicit Height(std::uint32_t v) : value_(v) {}
  static constexpr Height infinite() { return Height{}; }

  constexpr bool is_finite() const { return value_ != kInfinite; }
  constexpr std::uint32_t value() const { return value_; }

  auto operator<=>(const Height&) const = default;

 private:
  std::uint32_t value_ = kInfinite;
};

using HeightMap = std::vector<Height>;  // indexed by CategoryId::index

// Every rule, unit and root reference resolves. Throws StructureError otherwise.
inline void require_resolvable(const Grammar& g) {
  auto check = [&](CategoryId c, const char* what) {
    if (!g.has_category(c))
      throw StructureError(std::string("dangling category reference in ") + what + ": " +
                           std::to_string(c.index));
  };
  for (std::size_t i = 0; i < g.categories.size(); ++i)
    if (g.categories[i].id.index != i)
      throw StructureError("category at position " + std::to_string(i) + " has index " +
                           std::to_string(g.categories[i].id.index));
  for (const auto& r : g.mg_rules) {
    check(r.head, "mg rule head");
    for (auto d : r.left) check(d, "mg rule dependent");
    for (auto d : r.right) check(d, "mg rule dependent");
  }
  for (const auto& r : g.nmg_rules) {
    check(r.head, "nmg rule head");
    check(r.dependent, "nmg rule dependent");
  }
  for (const auto& u : g.units) check(u.category, "unit");
  check(g.root, "root");
}

namespace detail {

inline Height rule_height(const HeightMap& h, const std::vector<CategoryId>& left,
                          const std::vector<CategoryId>& right) {
  std::uint32_t worst = 0;
  for (const auto* side : {&left, &right})
    for (auto d : *side) {
      if (!h[d.index].is_finite()) return Height::infinite();
      worst = std::max(worst, h[d.index].value());
    }
  return Height{worst + 1};
}

}  // namespace detail

// Height a rule would give its head under `h`.
inline Height rule_height(const HeightMap& h, const MgRule& r) {
  return detail::rule_height(h, r.left, r.right);
}

inline Height rule_height(const HeightMap& h, const NmgRule& r) {
  const Height d = h[r.dependent.index];
  return d.is_finite() ? Height{d.value() + 1} : Height::infinite();
}

// Least fixpoint of H(C) = 1 + min over rules of C (max over dependents H(d)),
// max over no dependents being 0.
inline HeightMap compute_heights(const Grammar& g) {
  require_resolvable(g);
  HeightMap h(g.categories.size(), Height::infinite());
  bool changed = true;
  while (changed) {
    changed = false;
    auto relax = [&](CategoryId head, Height cand) {
      if (cand < h[head.index]) {
        h[head.index] = cand;
        changed = true;
      }
    };
    for (const auto& r : g.mg_rules) relax(r.head, rule_height(h, r));
    for (const auto& r : g.nmg_rules) relax(r.head, rule_height(h, r));
  }
  return h;
}

inline bool is_finite(const Grammar& g) {
  const HeightMap h = compute_heights(g);
  return std::all_of(h.begin(), h.end(), [](Height x) { return x.is_finite(); });
}

// Largest finite height, or infinite if any category is infinite. 0 for no categories.
inline Height max_height(const HeightMap& h) {
  std::uint32_t m = 0;
  for (Height x : h) {
    if (!x.is_finite()) return Height::infinite();
    m = std::max(m, x.value());
  }
  return Height{m};
}

inline std::vector<Violation> validate_grammar(const Grammar& g) {
  std::vector<Violation> out;
  auto add = [&out](std::string code, std::string msg) {
    out.push_back({std::move(code), std::move(msg), false});
  };
  auto resolves = [&](CategoryId c, const std::string& where) {
    if (g.has_category(c)) return true;
    add("dangling-reference", where + " references undeclared category " + std::to_string(c.index));
    return false;
  };

  std::set<std::string> labels;
  for (std::size_t i = 0; i < g.categories.size(); ++i) {
    const auto& c = g.categories[i];
    if (c.id.index != i)
      add("duplicate-id", "category at position " + std::to_string(i) + " carries index " +
                              std::to_string(c.id.index));
    if (c.label.empty()) add("empty-label", "category " + std::to_string(i) + " has no label");
    if (!labels.insert(c.label).second) add("duplicate-label", "label '" + c.label + "' repeated");
  }

  std::set<RuleId> rule_ids;
  std::map<RuleId, const MgRule*> mg_by_id;
  for (const auto& r : g.mg_rules) {
    const std::string where = "mg rule " + std::to_string(r.id);
    if (!rule_ids.insert(r.id).second) add("duplicate-id", where + " id repeated");
    mg_by_id.emplace(r.id, &r);
    if (resolves(r.head, where) && g.category(r.head).kind != CategoryKind::MG)
      add("kind-mismatch", where + " has NMG head '" + g.category(r.head).label + "'");
    for (auto d : r.left) resolves(d, where);
    for (auto d : r.right) resolves(d, where);
  }
  for (const auto& r : g.nmg_rules) {
    const std::string where = "nmg rule " + std::to_string(r.id);
    if (!rule_ids.insert(r.id).second) add("duplicate-id", where + " id repeated");
    if (resolves(r.head, where) && g.category(r.head).kind != CategoryKind::NMG)
      add("kind-mismatch", where + " has MG head '" + g.category(r.head).label + "'");
    resolves(r.dependent, where);
  }

  for (const auto& r : g.mg_rules) {
    if (!r.permutation_of) continue;
    const std::string where = "mg rule " + std::to_string(r.id);
    auto it = mg_by_id.find(*r.permutation_of);
    if (it == mg_by_id.end()) {
      add("bad-permutation", where + " is a permutation of unknown rule " +
                                 std::to_string(*r.permutation_of));
      continue;
    }
    const MgRule& base = *it->second;
    auto multiset = [](const MgRule& x) {
      std::vector<CategoryId> m = x.left;
      m.insert(m.end(), x.right.begin(), x.right.end());
      std::sort(m.begin(), m.end());
      return m;
    };
    if (base.head != r.head || multiset(base) != multiset(r))
      add("bad-permutation", where + " does not permute rule " + std::to_string(base.id));
  }

  std::set<UnitId> unit_ids;
  std::vector<std::size_t> unit_count(g.categories.size(), 0);
  for (const auto& u : g.units) {
    const std::string where = "unit " + std::to_string(u.id);
    if (!unit_ids.insert(u.id).second) add("duplicate-id", where + " id repeated");
    if (!(u.duration_scale > 0.0)) add("bad-unit", where + " has non-positive duration scale");
    if (!resolves(u.category, where)) continue;
    ++unit_count[u.category.index];
    const bool mg_cat = g.category(u.category).kind == CategoryKind::MG;
    if (mg_cat != (u.sync == SyncType::MG))
      add("kind-mismatch", where + " sync type " + std::string(to_string(u.sync)) +
                               " in " + std::string(to_string(g.category(u.category).kind)) +
                               " category");
  }
  for (std::size_t i = 0; i < g.categories.size(); ++i)
    if (unit_count[i] == 0)
      add("empty-inventory", "category '" + g.categories[i].label + "' has no units");

  if (g.categories.empty()) add("empty-grammar", "grammar declares no categories");
  if (resolves(g.root, "root") && g.category(g.root).kind != CategoryKind::MG)
    add("kind-mismatch", "root category '" + g.category(g.root).label + "' is NMG");
  return out;
}

}  // namespace slgen
