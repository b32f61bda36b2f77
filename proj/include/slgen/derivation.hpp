#pragma once

// Random dependency-tree derivation from a finite grammar.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slgen/grammar.hpp"
#include "slgen/random.hpp"

namespace slgen {

using NodeId = std::uint32_t;

struct TreeNode {
  NodeId id = 0;
  Unit unit;
  CategoryId category;
  RuleId applied_rule = 0;
  std::vector<NodeId> left;   // MG nodes
  std::vector<NodeId> right;  // MG nodes
  std::optional<NodeId> marked;  // NMG nodes

  bool is_manual() const { return unit.sync == SyncType::MG; }
  bool operator==(const TreeNode&) const = default;
};

// nodes[i].id == i; node ids follow preorder.
struct SyntaxTree {
  std::vector<TreeNode> nodes;
  NodeId root = 0;
  std::string grammar_ref;

  const TreeNode& node(NodeId id) const { return nodes.at(id); }
  bool operator==(const SyntaxTree&) const = default;
};

namespace detail {

struct RuleIndex {
  std::vector<std::vector<const MgRule*>> mg;  // by head category
  std::vector<std::vector<const NmgRule*>> nmg;

  explicit RuleIndex(const Grammar& g) : mg(g.categories.size()), nmg(g.categories.size()) {
    for (const auto& r : g.mg_rules) mg[r.head.index].push_back(&r);
    for (const auto& r : g.nmg_rules) nmg[r.head.index].push_back(&r);
  }
};

class Deriver {
 public:
  Deriver(const Grammar& g, const HeightMap& h, std::uint32_t limit, Rng& rng)
      : g_(g), h_(h), limit_(limit), rng_(rng), rules_(g) {}

  NodeId expand(CategoryId cat, std::uint32_t depth, SyntaxTree& t) {
    const NodeId id = static_cast<NodeId>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes[id].id = id;
    t.nodes[id].category = cat;
    // A rule at this depth may only use dependents that fit in the remaining depth.
    const Height budget{limit_ - depth + 1};

    if (g_.category(cat).kind == CategoryKind::MG) {
      const MgRule* r = choose(rules_.mg[cat.index], budget);
      t.nodes[id].applied_rule = r->id;
      std::vector<NodeId> left, right;
      for (auto d : r->left) left.push_back(expand(d, depth + 1, t));
      for (auto d : r->right) right.push_back(expand(d, depth + 1, t));
      t.nodes[id].left = std::move(left);
      t.nodes[id].right = std::move(right);
    } else {
      const NmgRule* r = choose(rules_.nmg[cat.index], budget);
      t.nodes[id].applied_rule = r->id;
      const NodeId child = expand(r->dependent, depth + 1, t);
      t.nodes[id].marked = child;
    }
    return id;
  }

 private:
  template <typename Rule>
  const Rule* choose(const std::vector<const Rule*>& candidates, Height budget) {
    std::vector<const Rule*> eligible;
    for (const Rule* r : candidates)
      if (rule_height(h_, *r) <= budget) eligible.push_back(r);
    if (eligible.empty())
      throw StructureError("no eligible rule within the depth budget");  // unreachable on finite grammars
    return eligible[rng_.index(eligible.size())];
  }

  const Grammar& g_;
  const HeightMap& h_;
  std::uint32_t limit_;
  Rng& rng_;
  RuleIndex rules_;
};

}  // namespace detail

// Depth bound used for derivation: the grammar's height limit, raised to the
// root's height for hand-built grammars that exceed it.
inline std::uint32_t derivation_depth_limit(const Grammar& g, const HeightMap& h, CategoryId root) {
  std::uint32_t limit = h[root.index].value();
  if (g.params && g.params->height_limit > 0)
    limit = std::max<std::uint32_t>(limit, static_cast<std::uint32_t>(g.params->height_limit));
  return limit;
}

// Expands root_category top-down, drawing uniformly among the rules whose
// dependents all fit in the remaining depth, then replaces each category by a
// unit drawn uniformly from its inventory.
inline SyntaxTree derive_tree(const Grammar& g, CategoryId root_category, Rng& rng,
                              std::string grammar_ref = {}) {
  const HeightMap h = compute_heights(g);
  if (!g.has_category(root_category)) throw StructureError("unknown root category");
  if (g.category(root_category).kind != CategoryKind::MG)
    throw StructureError("root category '" + g.category(root_category).label + "' is not MG");
  if (!std::all_of(h.begin(), h.end(), [](Height x) { return x.is_finite(); }))
    throw StructureError("grammar is not finite");

  SyntaxTree t;
  t.grammar_ref = std::move(grammar_ref);
  detail::Deriver d(g, h, derivation_depth_limit(g, h, root_category), rng);
  t.root = d.expand(root_category, 1, t);

  std::vector<std::vector<const Unit*>> inventory(g.categories.size());
  for (const auto& u : g.units) inventory[u.category.index].push_back(&u);
  for (auto& n : t.nodes) {
    const auto& inv = inventory[n.category.index];
    if (inv.empty()) throw StructureError("category '" + g.category(n.category).label + "' has no units");
    n.unit = *inv[rng.index(inv.size())];
  }
  return t;
}

inline SyntaxTree derive_tree(const Grammar& g, Rng& rng) { return derive_tree(g, g.root, rng); }

// Depth of the tree counting category expansions (root = 1). Assumes a valid tree.
inline std::uint32_t tree_depth(const SyntaxTree& t) {
  std::vector<std::uint32_t> depth(t.nodes.size(), 0);
  std::uint32_t best = 0;
  std::vector<NodeId> stack{t.root};
  depth[t.root] = 1;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const auto& n = t.nodes[id];
    best = std::max(best, depth[id]);
    auto push = [&](NodeId c) {
      depth[c] = depth[id] + 1;
      stack.push_back(c);
    };
    for (NodeId c : n.left) push(c);
    for (NodeId c : n.right) push(c);
    if (n.marked) push(*n.marked);
  }
  return best;
}

// Structural tree checks: ids in range, one parent per non-root node, root reachable.
inline std::vector<Violation> check_tree_structure(const SyntaxTree& t) {
  std::vector<Violation> out;
  const std::size_t n = t.nodes.size();
  if (n == 0) return {{"empty-tree", "tree has no nodes"}};
  if (t.root >= n) return {{"bad-root", "root id out of range"}};
  std::vector<int> parents(n, 0);
  bool in_range = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = t.nodes[i];
    if (node.id != i) out.push_back({"bad-id", "node at position " + std::to_string(i) + " has id " + std::to_string(node.id)});
    auto child = [&](NodeId c) {
      if (c >= n) {
        out.push_back({"bad-id", "node " + std::to_string(i) + " has out-of-range child " + std::to_string(c)});
        in_range = false;
      } else {
        ++parents[c];
      }
    };
    for (NodeId c : node.left) child(c);
    for (NodeId c : node.right) child(c);
    if (node.marked) child(*node.marked);
  }
  if (!in_range) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const int want = i == t.root ? 0 : 1;
    if (parents[i] != want)
      out.push_back({"multiple-parents", "node " + std::to_string(i) + " has " + std::to_string(parents[i]) + " parents"});
  }
  // Reachability from the root rules out cycles given the parent counts above.
  std::vector<bool> seen(n, false);
  std::vector<NodeId> stack{t.root};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (seen[id]) continue;
    seen[id] = true;
    ++visited;
    const auto& node = t.nodes[id];
    for (NodeId c : node.left) stack.push_back(c);
    for (NodeId c : node.right) stack.push_back(c);
    if (node.marked) stack.push_back(*node.marked);
  }
  if (visited != n) out.push_back({"unreachable", std::to_string(n - visited) + " nodes not reachable from root"});
  return out;
}

// Every node applies an existing rule headed by its category, and its children
// match that rule's element sequence exactly.
inline std::vector<Violation> tree_conforms(const SyntaxTree& t, const Grammar& g) {
  std::vector<Violation> out = check_tree_structure(t);
  if (!out.empty()) return out;

  std::map<RuleId, const MgRule*> mg;
  std::map<RuleId, const NmgRule*> nmg;
  for (const auto& r : g.mg_rules) mg.emplace(r.id, &r);
  for (const auto& r : g.nmg_rules) nmg.emplace(r.id, &r);
  std::map<UnitId, const Unit*> units;
  for (const auto& u : g.units) units.emplace(u.id, &u);

  auto categories = [&t](const std::vector<NodeId>& ids) {
    std::vector<CategoryId> c;
    for (NodeId id : ids) c.push_back(t.nodes[id].category);
    return c;
  };
  auto sorted = [](std::vector<CategoryId> v) {
    std::sort(v.begin(), v.end());
    return v;
  };

  for (const auto& n : t.nodes) {
    const std::string where = "node " + std::to_string(n.id);
    if (!g.has_category(n.category)) {
      out.push_back({"unknown-category", where + " has undeclared category"});
      continue;
    }
    auto u = units.find(n.unit.id);
    if (u == units.end() || *u->second != n.unit)
      out.push_back({"unknown-unit", where + " carries unit " + std::to_string(n.unit.id) + " not in the grammar"});
    else if (n.unit.category != n.category)
      out.push_back({"unit-category", where + " unit belongs to another category"});

    if (auto it = mg.find(n.applied_rule); it != mg.end()) {
      const MgRule& r = *it->second;
      if (r.head != n.category) {
        out.push_back({"rule-head", where + " applies rule " + std::to_string(r.id) + " of another category"});
        continue;
      }
      if (n.marked) out.push_back({"rule-form", where + " has a marked child under an MG rule"});
      const auto l = categories(n.left), rr = categories(n.right);
      if (l != r.left || rr != r.right) {
        std::vector<CategoryId> have = l, want = r.left;
        have.insert(have.end(), rr.begin(), rr.end());
        want.insert(want.end(), r.right.begin(), r.right.end());
        if (sorted(have) == sorted(want))
          out.push_back({"order", where + " children are ordered differently from rule " + std::to_string(r.id)});
        else
          out.push_back({"children", where + " children do not match rule " + std::to_string(r.id)});
      }
    } else if (auto jt = nmg.find(n.applied_rule); jt != nmg.end()) {
      const NmgRule& r = *jt->second;
      if (r.head != n.category) {
        out.push_back({"rule-head", where + " applies rule " + std::to_string(r.id) + " of another category"});
        continue;
      }
      if (!n.left.empty() || !n.right.empty() || !n.marked)
        out.push_back({"rule-form", where + " marker node must have exactly one marked child"});
      else if (t.nodes[*n.marked].category != r.dependent)
        out.push_back({"children", where + " marked child does not match rule " + std::to_string(r.id)});
    } else {
      out.push_back({"unknown-rule", where + " applies unknown rule " + std::to_string(n.applied_rule)});
    }
  }
  return out;
}

}  // namespace slgen
