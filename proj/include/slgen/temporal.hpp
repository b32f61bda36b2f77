#pragma once

// Temporal valuation: relative values (durations, translations) drawn per node,
// then propagated to absolute spans. MG intervals abut in tree in-order;
// markers synchronize one or both ends to the projection of their dependent.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "slgen/derivation.hpp"
#include "slgen/error.hpp"
#include "slgen/params.hpp"
#include "slgen/random.hpp"

namespace slgen {

struct Span {
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
  bool operator==(const Span&) const = default;
};

// Translation redraws for a full marker whose span would invert.
inline constexpr int kMaxTranslationRedraws = 16;
// Minimum extent given to a marker span that stayed degenerate after redraws.
inline constexpr double kMinMarkerExtent = 0.001;

// Per-node relative values. Fields not used by a node's sync type are nullopt.
struct NodeValuation {
  std::optional<double> duration;           // MG
  std::optional<double> start_translation;  // NMG_FULL, NMG_START
  std::optional<double> end_translation;    // NMG_FULL, NMG_END
  std::optional<double> free_duration;      // NMG_START, NMG_END
  bool operator==(const NodeValuation&) const = default;
};

struct RelativeValuation {
  std::vector<NodeValuation> nodes;  // by node id
};

struct TemporalSolution {
  std::vector<Span> spans;  // by node id
  std::vector<bool> clamped;
  double document_length = 0.0;
};

namespace detail {

// Total MG duration beneath each node (the projection length, since MGs abut).
inline std::vector<double> manual_mass(const SyntaxTree& t, const std::vector<NodeValuation>& v) {
  std::vector<double> mass(t.nodes.size(), 0.0);
  // Preorder ids: children always have larger ids than their parent.
  for (std::size_t i = t.nodes.size(); i-- > 0;) {
    const auto& n = t.nodes[i];
    double m = n.is_manual() ? v[i].duration.value_or(0.0) : 0.0;
    for (NodeId c : n.left) m += mass[c];
    for (NodeId c : n.right) m += mass[c];
    if (n.marked) m += mass[*n.marked];
    mass[i] = m;
  }
  return mass;
}

}  // namespace detail

// Durations are Gamma(2, unit.duration_scale); translations Normal(0, translation_std).
// A full marker whose translations would invert its span is redrawn up to
// kMaxTranslationRedraws times.
inline RelativeValuation draw_valuation(const SyntaxTree& t, double translation_std, Rng& rng) {
  RelativeValuation val;
  val.nodes.resize(t.nodes.size());
  for (const auto& n : t.nodes)
    if (n.is_manual()) val.nodes[n.id].duration = rng.gamma2(n.unit.duration_scale);

  const std::vector<double> mass = detail::manual_mass(t, val.nodes);
  for (const auto& n : t.nodes) {
    auto& v = val.nodes[n.id];
    switch (n.unit.sync) {
      case SyncType::MG:
        break;
      case SyncType::NMG_FULL: {
        const double extent = n.marked ? mass[*n.marked] : 0.0;
        double s = rng.normal(0.0, translation_std);
        double e = rng.normal(0.0, translation_std);
        for (int k = 0; extent + e - s <= 0.0 && k < kMaxTranslationRedraws; ++k) {
          s = rng.normal(0.0, translation_std);
          e = rng.normal(0.0, translation_std);
        }
        v.start_translation = s;
        v.end_translation = e;
        break;
      }
      case SyncType::NMG_START:
        v.start_translation = rng.normal(0.0, translation_std);
        v.free_duration = rng.gamma2(n.unit.duration_scale);
        break;
      case SyncType::NMG_END:
        v.end_translation = rng.normal(0.0, translation_std);
        v.free_duration = rng.gamma2(n.unit.duration_scale);
        break;
    }
  }
  return val;
}

inline RelativeValuation draw_valuation(const SyntaxTree& t, const GenParams& p, Rng& rng) {
  return draw_valuation(t, p.translation_std, rng);
}

namespace detail {

class Propagator {
 public:
  Propagator(const SyntaxTree& t, const RelativeValuation& v, TemporalSolution& s)
      : t_(t), v_(v), s_(s) {}

  // Lays out the subtree at `id` from `cursor`; returns its projection.
  Span layout(NodeId id, double& cursor) {
    const TreeNode& n = t_.nodes[id];
    const NodeValuation& v = v_.nodes[id];
    if (n.is_manual()) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      auto take = [&](Span p) {
        lo = std::min(lo, p.start);
        hi = std::max(hi, p.end);
      };
      for (NodeId c : n.left) take(layout(c, cursor));
      s_.spans[id] = {cursor, cursor + v.duration.value()};
      cursor = s_.spans[id].end;
      take(s_.spans[id]);
      for (NodeId c : n.right) take(layout(c, cursor));
      return {lo, hi};
    }

    const Span p = layout(n.marked.value(), cursor);
    Span own;
    switch (n.unit.sync) {
      case SyncType::NMG_FULL:
        own = {p.start + v.start_translation.value(), p.end + v.end_translation.value()};
        break;
      case SyncType::NMG_START:
        own.start = p.start + v.start_translation.value();
        own.end = own.start + v.free_duration.value();
        break;
      case SyncType::NMG_END:
        own.end = p.end + v.end_translation.value();
        own.start = own.end - v.free_duration.value();
        break;
      case SyncType::MG:
        break;
    }
    if (!(own.end > own.start)) {
      own.end = own.start + kMinMarkerExtent;
      s_.clamped[id] = true;
    }
    s_.spans[id] = own;
    return p;  // markers do not extend the projection
  }

 private:
  const SyntaxTree& t_;
  const RelativeValuation& v_;
  TemporalSolution& s_;
};

}  // namespace detail

inline TemporalSolution solve(const SyntaxTree& t, const RelativeValuation& val) {
  TemporalSolution s;
  s.spans.resize(t.nodes.size());
  s.clamped.assign(t.nodes.size(), false);
  if (t.nodes.empty()) return s;
  double cursor = 0.0;
  detail::Propagator(t, val, s).layout(t.root, cursor);

  double lo = std::numeric_limits<double>::infinity();
  for (const auto& sp : s.spans) lo = std::min(lo, sp.start);
  double hi = 0.0;
  for (auto& sp : s.spans) {
    sp.start -= lo;
    sp.end -= lo;
    hi = std::max(hi, sp.end);
  }
  s.document_length = hi;
  return s;
}

inline std::size_t clamp_count(const TemporalSolution& s) {
  return static_cast<std::size_t>(std::count(s.clamped.begin(), s.clamped.end(), true));
}

// Projection of every node, re-derived bottom-up from the MG spans alone.
// nullopt for subtrees without manual material.
inline std::vector<std::optional<Span>> projections_from_spans(const SyntaxTree& t,
                                                               const std::vector<Span>& spans) {
  std::vector<std::optional<Span>> proj(t.nodes.size());
  auto merge = [](std::optional<Span>& acc, const std::optional<Span>& x) {
    if (!x) return;
    if (!acc) acc = x;
    else acc = Span{std::min(acc->start, x->start), std::max(acc->end, x->end)};
  };
  // Children have larger preorder ids; for arbitrary ids use an explicit postorder.
  std::vector<NodeId> order;
  std::vector<NodeId> stack{t.root};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const auto& n = t.nodes[id];
    for (NodeId c : n.left) stack.push_back(c);
    for (NodeId c : n.right) stack.push_back(c);
    if (n.marked) stack.push_back(*n.marked);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& n = t.nodes[*it];
    std::optional<Span> acc;
    if (n.is_manual()) acc = spans[*it];
    for (NodeId c : n.left) merge(acc, proj[c]);
    for (NodeId c : n.right) merge(acc, proj[c]);
    if (n.marked) merge(acc, proj[*n.marked]);
    proj[*it] = acc;
  }
  return proj;
}

inline constexpr double kTimeTolerance = 1e-9;

// Verifies a solution against the full constraint set without the solver's
// traversal. Clamped markers are reported as warnings.
inline std::vector<Violation> check_constraints(const SyntaxTree& t, const RelativeValuation& val,
                                                const TemporalSolution& sol,
                                                double tol = kTimeTolerance) {
  std::vector<Violation> out;
  const std::size_t n = t.nodes.size();
  if (sol.spans.size() != n || val.nodes.size() != n)
    return {{"size", "solution or valuation does not cover the tree"}};
  auto near = [tol](double a, double b) { return std::abs(a - b) <= tol; };
  auto fmt = [](double x) { return std::to_string(x); };

  // Durations.
  std::vector<NodeId> manual;
  for (const auto& node : t.nodes) {
    if (!node.is_manual()) continue;
    manual.push_back(node.id);
    const Span& s = sol.spans[node.id];
    const auto& d = val.nodes[node.id].duration;
    if (!d) out.push_back({"valuation", "MG node " + std::to_string(node.id) + " has no duration"});
    else if (!near(s.length(), *d))
      out.push_back({"duration", "MG node " + std::to_string(node.id) + " spans " + fmt(s.length()) +
                                     " s, drew " + fmt(*d)});
  }

  // MG spans pairwise disjoint.
  std::sort(manual.begin(), manual.end(), [&](NodeId a, NodeId b) {
    return sol.spans[a].start < sol.spans[b].start;
  });
  for (std::size_t i = 1; i < manual.size(); ++i) {
    const Span& a = sol.spans[manual[i - 1]];
    const Span& b = sol.spans[manual[i]];
    if (a.end > b.start + tol)
      out.push_back({"overlap", "MG nodes " + std::to_string(manual[i - 1]) + " and " +
                                    std::to_string(manual[i]) + " overlap"});
  }

  // Rule element order: each MG head's dependents' projections and its own span
  // appear in sequence.
  const auto proj = projections_from_spans(t, sol.spans);
  for (const auto& node : t.nodes) {
    if (!node.is_manual()) continue;
    std::vector<std::optional<Span>> seq;
    for (NodeId c : node.left) seq.push_back(proj[c]);
    seq.push_back(sol.spans[node.id]);
    for (NodeId c : node.right) seq.push_back(proj[c]);
    for (std::size_t i = 1; i < seq.size(); ++i) {
      if (!seq[i - 1] || !seq[i]) continue;
      if (seq[i - 1]->end > seq[i]->start + tol)
        out.push_back({"order", "MG node " + std::to_string(node.id) +
                                    " elements out of rule order at position " + std::to_string(i)});
    }
  }

  // Marker synchronization.
  for (const auto& node : t.nodes) {
    if (node.is_manual()) continue;
    const std::string where = "NMG node " + std::to_string(node.id);
    if (!node.marked || !proj[*node.marked]) {
      out.push_back({"sync", where + " marks no manual material"});
      continue;
    }
    const Span p = *proj[*node.marked];
    const auto& v = val.nodes[node.id];
    Span want;
    switch (node.unit.sync) {
      case SyncType::NMG_FULL:
        if (!v.start_translation || !v.end_translation) {
          out.push_back({"valuation", where + " lacks translations"});
          continue;
        }
        want = {p.start + *v.start_translation, p.end + *v.end_translation};
        break;
      case SyncType::NMG_START:
        if (!v.start_translation || !v.free_duration) {
          out.push_back({"valuation", where + " lacks start translation or duration"});
          continue;
        }
        want.start = p.start + *v.start_translation;
        want.end = want.start + *v.free_duration;
        break;
      case SyncType::NMG_END:
        if (!v.end_translation || !v.free_duration) {
          out.push_back({"valuation", where + " lacks end translation or duration"});
          continue;
        }
        want.end = p.end + *v.end_translation;
        want.start = want.end - *v.free_duration;
        break;
      case SyncType::MG:
        continue;
    }
    const Span& got = sol.spans[node.id];
    if (!(want.end > want.start)) {
      if (near(got.start, want.start) && near(got.length(), kMinMarkerExtent))
        out.push_back({"clamped", where + " degenerate span clamped to 1 ms", true});
      else
        out.push_back({"sync", where + " degenerate span not clamped at its anchor"});
    } else if (!near(got.start, want.start) || !near(got.end, want.end)) {
      out.push_back({"sync", where + " span [" + fmt(got.start) + ", " + fmt(got.end) +
                                 ") expected [" + fmt(want.start) + ", " + fmt(want.end) + ")"});
    }
  }

  double lo = std::numeric_limits<double>::infinity();
  for (const auto& s : sol.spans) lo = std::min(lo, s.start);
  if (n > 0 && !near(lo, 0.0)) out.push_back({"normalization", "minimum start is " + fmt(lo)});
  for (std::size_t i = 0; i < n; ++i)
    if (!(sol.spans[i].end > sol.spans[i].start))
      out.push_back({"extent", "node " + std::to_string(i) + " has end <= start"});
  return out;
}

}  // namespace slgen
