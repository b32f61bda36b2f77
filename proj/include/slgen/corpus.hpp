#pragma once

// Annotated corpora: one JSON document per line, generated per index from a
// mixed seed so any document can be regenerated on its own.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "slgen/derivation.hpp"
#include "slgen/format.hpp"
#include "slgen/temporal.hpp"

namespace slgen {

struct DocUnit {
  NodeId node = 0;
  UnitId unit = 0;
  std::string category;
  SyncType sync = SyncType::MG;
  double start = 0.0;  // seconds, microsecond grid
  double end = 0.0;
  bool operator==(const DocUnit&) const = default;
};

// head == nullopt is the ROOT attachment. rule is the rule applied at `dependent`.
struct Dependency {
  std::optional<NodeId> head;
  NodeId dependent = 0;
  RuleId rule = 0;
  bool operator==(const Dependency&) const = default;
};

struct AnnotatedDocument {
  std::string doc_id;
  std::uint64_t seed = 0;
  std::vector<DocUnit> units;          // by node id
  std::vector<Dependency> dependencies;  // by dependent
  bool operator==(const AnnotatedDocument&) const = default;
};

inline double to_microseconds_grid(double seconds) { return std::round(seconds * 1e6) / 1e6; }

inline std::string make_doc_id(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "d%06llu", static_cast<unsigned long long>(index));
  return buf;
}

inline AnnotatedDocument make_document(const SyntaxTree& t, const TemporalSolution& sol,
                                       const Grammar& g, std::string doc_id, std::uint64_t seed) {
  AnnotatedDocument d;
  d.doc_id = std::move(doc_id);
  d.seed = seed;
  for (const auto& n : t.nodes) {
    DocUnit u;
    u.node = n.id;
    u.unit = n.unit.id;
    u.category = g.category(n.category).label;
    u.sync = n.unit.sync;
    u.start = to_microseconds_grid(sol.spans[n.id].start);
    u.end = to_microseconds_grid(sol.spans[n.id].end);
    // Sub-microsecond extents would collapse on the grid.
    if (!(u.end > u.start)) u.end = u.start + 1e-6;
    d.units.push_back(std::move(u));
  }
  d.dependencies.resize(t.nodes.size());
  for (const auto& n : t.nodes) d.dependencies[n.id] = Dependency{std::nullopt, n.id, n.applied_rule};
  for (const auto& n : t.nodes) {
    for (NodeId c : n.left) d.dependencies[c].head = n.id;
    for (NodeId c : n.right) d.dependencies[c].head = n.id;
    if (n.marked) d.dependencies[*n.marked].head = n.id;
  }
  return d;
}

// Everything produced for one corpus index, before serialization.
struct GeneratedDocument {
  SyntaxTree tree;
  RelativeValuation valuation;
  TemporalSolution solution;
  AnnotatedDocument document;
};

// derive_tree -> draw_valuation -> solve with seed document_seed(base_seed, index).
inline GeneratedDocument generate_document(const Grammar& g, const GenParams& p,
                                           std::uint64_t base_seed, std::uint64_t index,
                                           const std::string& grammar_ref = {}) {
  const std::uint64_t seed = document_seed(base_seed, index);
  Rng rng(seed);
  GeneratedDocument out;
  out.tree = derive_tree(g, g.root, rng, grammar_ref);
  out.valuation = draw_valuation(out.tree, p, rng);
  out.solution = solve(out.tree, out.valuation);
  out.document = make_document(out.tree, out.solution, g, make_doc_id(index), seed);
  return out;
}

// ------------------------------------------------------------ line format ----

namespace detail {

inline void append_time(std::string& s, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  s += buf;
}

inline void append_quoted(std::string& s, const std::string& v) { s += ojson(v).dump(); }

}  // namespace detail

// One line, no trailing newline. Keys in fixed order, times with 6 decimals.
inline std::string serialize_document(const AnnotatedDocument& d) {
  std::string s = "{\"doc_id\":";
  detail::append_quoted(s, d.doc_id);
  s += ",\"seed\":" + std::to_string(d.seed) + ",\"units\":[";
  for (std::size_t i = 0; i < d.units.size(); ++i) {
    const auto& u = d.units[i];
    if (i) s += ',';
    s += "{\"node\":" + std::to_string(u.node) + ",\"unit\":" + std::to_string(u.unit) + ",\"category\":";
    detail::append_quoted(s, u.category);
    s += ",\"sync\":\"";
    s += to_string(u.sync);
    s += "\",\"start\":";
    detail::append_time(s, u.start);
    s += ",\"end\":";
    detail::append_time(s, u.end);
    s += '}';
  }
  s += "],\"deps\":[";
  for (std::size_t i = 0; i < d.dependencies.size(); ++i) {
    const auto& e = d.dependencies[i];
    if (i) s += ',';
    s += "{\"head\":" + (e.head ? std::to_string(*e.head) : std::string("null")) +
         ",\"dep\":" + std::to_string(e.dependent) + ",\"rule\":" + std::to_string(e.rule) + '}';
  }
  s += "]}";
  return s;
}

// Parses one corpus line. Checks syntax, field types, unique node ids and
// end > start; tree shape is left to validate_document.
inline AnnotatedDocument parse_document(std::string_view line, const std::string& source = "corpus",
                                        std::size_t line_no = 1) {
  const ojson j = detail::parse_json(line, source, line_no);
  detail::Reader r(source, line_no);
  r.only(j, "$", {"doc_id", "seed", "units", "deps"});
  AnnotatedDocument d;
  d.doc_id = r.string(r.field(j, "$", "doc_id"), "doc_id");
  d.seed = r.u64(r.field(j, "$", "seed"), "seed");
  const auto& units = r.array(r.field(j, "$", "units"), "units");
  std::set<NodeId> nodes;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const std::string p = "units[" + std::to_string(i) + "]";
    r.only(units[i], p, {"node", "unit", "category", "sync", "start", "end"});
    DocUnit u;
    u.node = r.index(r.field(units[i], p, "node"), p + ".node");
    u.unit = r.integer(r.field(units[i], p, "unit"), p + ".unit");
    u.category = r.string(r.field(units[i], p, "category"), p + ".category");
    const auto sync = parse_sync(r.string(r.field(units[i], p, "sync"), p + ".sync"));
    if (!sync) r.fail(p + ".sync", "unknown sync type");
    u.sync = *sync;
    u.start = r.real(r.field(units[i], p, "start"), p + ".start");
    u.end = r.real(r.field(units[i], p, "end"), p + ".end");
    if (!(u.end > u.start)) r.fail(p, "span end must be greater than start");
    if (!nodes.insert(u.node).second) r.fail(p + ".node", "duplicate node id");
    d.units.push_back(std::move(u));
  }
  const auto& deps = r.array(r.field(j, "$", "deps"), "deps");
  for (std::size_t i = 0; i < deps.size(); ++i) {
    const std::string p = "deps[" + std::to_string(i) + "]";
    r.only(deps[i], p, {"head", "dep", "rule"});
    Dependency e;
    const ojson& h = r.field(deps[i], p, "head");
    if (!h.is_null()) e.head = r.index(h, p + ".head");
    e.dependent = r.index(r.field(deps[i], p, "dep"), p + ".dep");
    e.rule = r.integer(r.field(deps[i], p, "rule"), p + ".rule");
    d.dependencies.push_back(e);
  }
  return d;
}

inline std::string serialize_corpus(const std::vector<AnnotatedDocument>& docs) {
  std::string s;
  for (const auto& d : docs) s += serialize_document(d) + "\n";
  return s;
}

// Calls fn(document) per non-empty line.
inline void for_each_document(std::istream& in, const std::string& source,
                              const std::function<void(AnnotatedDocument&&)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(parse_document(line, source, line_no));
  }
}

inline std::vector<AnnotatedDocument> parse_corpus(std::string_view text,
                                                   const std::string& source = "corpus") {
  std::vector<AnnotatedDocument> docs;
  std::istringstream in{std::string(text)};
  for_each_document(in, source, [&](AnnotatedDocument&& d) { docs.push_back(std::move(d)); });
  return docs;
}

// -------------------------------------------------------------- manifest ----

inline constexpr std::string_view kManifestFormat = "slgen-manifest";
inline constexpr int kManifestVersion = 1;
inline constexpr std::string_view kSeedDerivation =
    "splitmix64(base_seed + index * 0x9E3779B97F4A7C15)";

struct CorpusManifest {
  std::string grammar_hash;
  GenParams params;
  std::uint64_t document_count = 0;
  std::uint64_t base_seed = 0;
  std::string tool_version{kToolVersion};
  bool operator==(const CorpusManifest&) const = default;
};

inline std::string serialize_manifest(const CorpusManifest& m) {
  ojson j;
  j["format"] = kManifestFormat;
  j["version"] = kManifestVersion;
  j["tool_version"] = m.tool_version;
  j["grammar_hash"] = m.grammar_hash;
  j["document_count"] = m.document_count;
  j["base_seed"] = m.base_seed;
  j["seed_derivation"] = kSeedDerivation;
  j["params"] = to_json(m.params);
  return j.dump(2) + "\n";
}

inline CorpusManifest parse_manifest(std::string_view text, const std::string& source = "manifest") {
  const ojson j = detail::parse_json(text, source);
  detail::Reader r(source, 0);
  r.only(j, "$", {"format", "version", "tool_version", "grammar_hash", "document_count",
                  "base_seed", "seed_derivation", "params"});
  if (r.string(r.field(j, "$", "format"), "format") != kManifestFormat)
    r.fail("format", "not a corpus manifest");
  const auto version = r.integer(r.field(j, "$", "version"), "version");
  if (version != kManifestVersion)
    throw VersionError(source + ": manifest version " + std::to_string(version) + " is not supported");
  if (r.string(r.field(j, "$", "seed_derivation"), "seed_derivation") != kSeedDerivation)
    r.fail("seed_derivation", "unknown seed derivation");
  CorpusManifest m;
  m.tool_version = r.string(r.field(j, "$", "tool_version"), "tool_version");
  m.grammar_hash = r.string(r.field(j, "$", "grammar_hash"), "grammar_hash");
  m.document_count = r.u64(r.field(j, "$", "document_count"), "document_count");
  m.base_seed = r.u64(r.field(j, "$", "base_seed"), "base_seed");
  m.params = params_from_json(r.field(j, "$", "params"), "params", r);
  validate(m.params);
  return m;
}

// ------------------------------------------------------------ generation ----

// Streams n documents to `sink` in index order. Workers compute documents in
// blocks; output bytes do not depend on `jobs`. Memory is bounded by one block.
inline CorpusManifest generate_corpus(const Grammar& g, std::uint64_t n, std::uint64_t base_seed,
                                      const GenParams& p,
                                      const std::function<void(const std::string& line)>& sink,
                                      unsigned jobs = 1) {
  if (const auto v = validate_grammar(g); !v.empty())
    throw StructureError("invalid grammar: " + v.front().message);
  if (!is_finite(g)) throw StructureError("grammar is not finite");
  validate(p);

  CorpusManifest m;
  m.grammar_hash = grammar_hash(g);
  m.params = p;
  m.document_count = n;
  m.base_seed = base_seed;

  jobs = std::max(1u, jobs);
  const std::uint64_t block = jobs == 1 ? 1 : 64ULL * jobs;
  std::vector<std::string> lines;
  for (std::uint64_t first = 0; first < n; first += block) {
    const std::uint64_t count = std::min(block, n - first);
    lines.assign(count, {});
    auto work = [&](unsigned worker) {
      for (std::uint64_t k = worker; k < count; k += jobs)
        lines[k] = serialize_document(generate_document(g, p, base_seed, first + k, m.grammar_hash).document);
    };
    if (jobs == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
    }
    for (const auto& l : lines) sink(l);
  }
  return m;
}

inline CorpusManifest generate_corpus(const Grammar& g, std::uint64_t n, std::uint64_t base_seed,
                                      const GenParams& p, std::ostream& out, unsigned jobs = 1) {
  return generate_corpus(
      g, n, base_seed, p, [&out](const std::string& l) { out << l << '\n'; }, jobs);
}

// Regenerates the corpus a manifest describes. Throws if the grammar differs.
inline void regenerate_corpus(const Grammar& g, const CorpusManifest& m, std::ostream& out,
                              unsigned jobs = 1) {
  if (grammar_hash(g) != m.grammar_hash)
    throw InputError("grammar hash " + grammar_hash(g) + " does not match manifest " + m.grammar_hash);
  generate_corpus(g, m.document_count, m.base_seed, m.params, out, jobs);
}

// ------------------------------------------------------------ validation ----

inline constexpr double kGridTolerance = 2e-6;

// Depth of each node from the dependency list (root = 1); nullopt if not a tree.
inline std::optional<std::vector<std::uint32_t>> dependency_depths(const AnnotatedDocument& d) {
  std::map<NodeId, std::optional<NodeId>> head;
  for (const auto& e : d.dependencies)
    if (!head.emplace(e.dependent, e.head).second) return std::nullopt;
  if (head.size() != d.units.size()) return std::nullopt;
  std::map<NodeId, std::size_t> pos;
  for (std::size_t i = 0; i < d.units.size(); ++i) pos[d.units[i].node] = i;
  std::vector<std::uint32_t> depth(d.units.size(), 0);
  for (std::size_t i = 0; i < d.units.size(); ++i) {
    std::uint32_t k = 1;
    auto it = head.find(d.units[i].node);
    if (it == head.end()) return std::nullopt;
    std::optional<NodeId> h = it->second;
    while (h) {
      if (++k > d.units.size() || !head.count(*h)) return std::nullopt;
      h = head[*h];
    }
    depth[i] = k;
  }
  return depth;
}

// Checks a parsed document: dependency tree shape, MG disjointness and, with a
// grammar, category/unit consistency, rule conformance and rule element order.
// Times are compared on the microsecond grid.
inline std::vector<Violation> validate_document(const AnnotatedDocument& d, const Grammar* g = nullptr) {
  std::vector<Violation> out;
  const std::string where = d.doc_id + ": ";
  const std::size_t n = d.units.size();
  if (n == 0) return {{"empty-document", where + "document has no units"}};
  for (std::size_t i = 0; i < n; ++i)
    if (d.units[i].node != i) return {{"node-ids", where + "node ids must be 0..n-1 in order"}};

  std::size_t roots = 0;
  std::vector<int> seen(n, 0);
  for (const auto& e : d.dependencies) {
    if (e.dependent >= n || (e.head && *e.head >= n)) {
      out.push_back({"unknown-node", where + "dependency references unknown node"});
      continue;
    }
    ++seen[e.dependent];
    if (!e.head) ++roots;
  }
  if (!out.empty()) return out;
  if (roots != 1) out.push_back({"root-count", where + std::to_string(roots) + " ROOT attachments"});
  for (std::size_t i = 0; i < n; ++i)
    if (seen[i] != 1) out.push_back({"head-count", where + "node " + std::to_string(i) + " has " + std::to_string(seen[i]) + " heads"});
  if (!out.empty()) return out;
  if (!dependency_depths(d)) return {{"cycle", where + "dependencies do not form a tree"}};

  std::vector<std::size_t> manual;
  for (std::size_t i = 0; i < n; ++i)
    if (d.units[i].sync == SyncType::MG) manual.push_back(i);
  std::sort(manual.begin(), manual.end(), [&](auto a, auto b) { return d.units[a].start < d.units[b].start; });
  for (std::size_t i = 1; i < manual.size(); ++i)
    if (d.units[manual[i - 1]].end > d.units[manual[i]].start + kGridTolerance)
      out.push_back({"overlap", where + "MG nodes " + std::to_string(manual[i - 1]) + " and " +
                                    std::to_string(manual[i]) + " overlap"});
  if (!g) return out;

  // Rebuild the syntax tree: children split around the head by projection.
  SyntaxTree t;
  t.nodes.resize(n);
  std::map<UnitId, const Unit*> units;
  for (const auto& u : g->units) units.emplace(u.id, &u);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& du = d.units[i];
    auto& node = t.nodes[i];
    node.id = static_cast<NodeId>(i);
    auto it = units.find(du.unit);
    if (it == units.end()) {
      out.push_back({"unknown-unit", where + "node " + std::to_string(i) + " unit " + std::to_string(du.unit) + " not in grammar"});
      continue;
    }
    node.unit = *it->second;
    node.category = node.unit.category;
    if (g->category(node.category).label != du.category)
      out.push_back({"category", where + "node " + std::to_string(i) + " category label mismatch"});
    if (node.unit.sync != du.sync)
      out.push_back({"sync-type", where + "node " + std::to_string(i) + " sync type mismatch"});
  }
  if (!out.empty()) return out;

  std::vector<Span> spans(n);
  for (std::size_t i = 0; i < n; ++i) spans[i] = {d.units[i].start, d.units[i].end};
  std::vector<std::vector<NodeId>> children(n);
  for (const auto& e : d.dependencies) {
    t.nodes[e.dependent].applied_rule = e.rule;
    if (e.head) children[*e.head].push_back(e.dependent);
    else t.root = e.dependent;
  }
  // Provisional tree with all children on the right to derive projections.
  for (std::size_t i = 0; i < n; ++i) t.nodes[i].right = children[i];
  const auto proj = projections_from_spans(t, spans);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = t.nodes[i];
    node.right.clear();
    std::vector<NodeId> kids = children[i];
    std::sort(kids.begin(), kids.end(), [&](NodeId a, NodeId b) {
      const double sa = proj[a] ? proj[a]->start : 0.0, sb = proj[b] ? proj[b]->start : 0.0;
      return sa < sb;
    });
    if (!node.is_manual()) {
      if (kids.size() == 1) node.marked = kids.front();
      else node.right = kids;  // reported by tree_conforms as a form error
      continue;
    }
    for (NodeId c : kids) {
      const bool before = proj[c] && proj[c]->end <= spans[i].start + kGridTolerance;
      (before ? node.left : node.right).push_back(c);
    }
  }
  for (auto& v : tree_conforms(t, *g)) {
    v.message = where + v.message;
    out.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = t.nodes[i];
    if (!node.is_manual()) continue;
    std::vector<std::optional<Span>> seq;
    for (NodeId c : node.left) seq.push_back(proj[c]);
    seq.push_back(spans[i]);
    for (NodeId c : node.right) seq.push_back(proj[c]);
    for (std::size_t k = 1; k < seq.size(); ++k)
      if (seq[k - 1] && seq[k] && seq[k - 1]->end > seq[k]->start + kGridTolerance)
        out.push_back({"order", where + "node " + std::to_string(i) + " dependents interleave"});
  }
  return out;
}

// ----------------------------------------------------------------- stats ----

// Streaming mean/variance (Welford).
struct Moments {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  // mean^2 / variance: the gamma shape estimate.
  double shape() const { const double v = variance(); return v > 0.0 ? mean * mean / v : 0.0; }
};

struct CorpusStats {
  std::uint64_t documents = 0;
  std::array<std::uint64_t, kSyncTypeCount> units_by_sync{};
  std::map<std::uint32_t, std::uint64_t> depth_histogram;
  Moments mg_durations;                  // all MG span lengths
  std::map<UnitId, Moments> unit_durations;  // gamma-drawn span lengths per unit
  std::map<RuleId, std::uint64_t> rule_usage;

  std::uint64_t mg_units() const { return units_by_sync[0]; }
  std::uint64_t nmg_units() const { return units_by_sync[1] + units_by_sync[2] + units_by_sync[3]; }
  double mg_fraction() const {
    const auto total = mg_units() + nmg_units();
    return total ? static_cast<double>(mg_units()) / static_cast<double>(total) : 0.0;
  }

  void add(const AnnotatedDocument& d) {
    ++documents;
    for (const auto& u : d.units) {
      ++units_by_sync[static_cast<std::size_t>(u.sync)];
      const double len = u.end - u.start;
      if (u.sync == SyncType::MG) mg_durations.add(len);
      if (u.sync != SyncType::NMG_FULL) unit_durations[u.unit].add(len);
    }
    for (const auto& e : d.dependencies) ++rule_usage[e.rule];
    if (const auto depths = dependency_depths(d)) {
      const auto m = depths->empty() ? 0u : *std::max_element(depths->begin(), depths->end());
      ++depth_histogram[m];
    }
  }
};

inline CorpusStats corpus_stats(const std::vector<AnnotatedDocument>& docs) {
  CorpusStats s;
  for (const auto& d : docs) s.add(d);
  return s;
}

// Scale lookup by unit id (from a grammar) adds the expected gamma mean 2*scale.
inline ojson to_json(const CorpusStats& s, const Grammar* g = nullptr) {
  ojson j;
  j["documents"] = s.documents;
  ojson by_sync;
  for (std::size_t i = 0; i < kSyncTypeCount; ++i)
    by_sync[std::string(to_string(static_cast<SyncType>(i)))] = s.units_by_sync[i];
  j["units_by_sync"] = by_sync;
  j["mg_units"] = s.mg_units();
  j["nmg_units"] = s.nmg_units();
  j["mg_fraction"] = s.mg_fraction();
  ojson hist = ojson::object();
  for (const auto& [depth, count] : s.depth_histogram) hist[std::to_string(depth)] = count;
  j["depth_histogram"] = hist;
  j["mg_duration"] = {{"count", s.mg_durations.count},
                      {"mean", s.mg_durations.mean},
                      {"variance", s.mg_durations.variance()}};
  std::map<UnitId, double> scale;
  if (g)
    for (const auto& u : g->units) scale[u.id] = u.duration_scale;
  ojson units = ojson::array();
  for (const auto& [id, m] : s.unit_durations) {
    ojson u{{"unit", id}, {"count", m.count}, {"mean", m.mean}, {"variance", m.variance()},
            {"shape_estimate", m.shape()}};
    if (auto it = scale.find(id); it != scale.end()) {
      u["scale"] = it->second;
      u["expected_mean"] = 2.0 * it->second;
    }
    units.push_back(std::move(u));
  }
  j["duration_by_unit"] = units;
  ojson rules = ojson::object();
  for (const auto& [id, count] : s.rule_usage) rules[std::to_string(id)] = count;
  j["rule_usage"] = rules;
  return j;
}

}  // namespace slgen
