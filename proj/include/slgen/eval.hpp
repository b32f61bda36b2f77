#pragma once

// Unlabeled attachment scoring of predicted dependencies against a generated
// gold corpus, plus a span-based baseline parser for exercising the harness.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "slgen/corpus.hpp"

namespace slgen {

struct PredictedDependency {
  std::optional<NodeId> head;  // nullopt = ROOT
  NodeId dependent = 0;
  std::optional<RuleId> rule;  // accepted, not scored
  bool operator==(const PredictedDependency&) const = default;
};

struct Prediction {
  std::string doc_id;
  std::vector<PredictedDependency> dependencies;
  bool operator==(const Prediction&) const = default;
};

inline std::string serialize_prediction(const Prediction& p) {
  std::string s = "{\"doc_id\":" + ojson(p.doc_id).dump() + ",\"deps\":[";
  for (std::size_t i = 0; i < p.dependencies.size(); ++i) {
    const auto& e = p.dependencies[i];
    if (i) s += ',';
    s += "{\"head\":" + (e.head ? std::to_string(*e.head) : std::string("null")) +
         ",\"dep\":" + std::to_string(e.dependent);
    if (e.rule) s += ",\"rule\":" + std::to_string(*e.rule);
    s += '}';
  }
  return s + "]}";
}

inline Prediction parse_prediction(std::string_view line, const std::string& source = "predictions",
                                   std::size_t line_no = 1) {
  const ojson j = detail::parse_json(line, source, line_no);
  detail::Reader r(source, line_no);
  r.only(j, "$", {"doc_id", "deps"});
  Prediction p;
  p.doc_id = r.string(r.field(j, "$", "doc_id"), "doc_id");
  const auto& deps = r.array(r.field(j, "$", "deps"), "deps");
  for (std::size_t i = 0; i < deps.size(); ++i) {
    const std::string path = "deps[" + std::to_string(i) + "]";
    r.only(deps[i], path, {"head", "dep", "rule"});
    PredictedDependency e;
    const ojson& h = r.field(deps[i], path, "head");
    if (!h.is_null()) e.head = r.index(h, path + ".head");
    e.dependent = r.index(r.field(deps[i], path, "dep"), path + ".dep");
    if (deps[i].contains("rule") && !deps[i]["rule"].is_null())
      e.rule = r.integer(deps[i]["rule"], path + ".rule");
    p.dependencies.push_back(e);
  }
  return p;
}

inline std::vector<Prediction> parse_predictions(std::string_view text,
                                                 const std::string& source = "predictions") {
  std::vector<Prediction> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_prediction(line, source, no));
  }
  return out;
}

struct Tally {
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  // Vacuously 1 when there is nothing to attach.
  double score() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 1.0; }
  Tally& operator+=(const Tally& o) {
    correct += o.correct;
    total += o.total;
    return *this;
  }
};

struct DocumentScore {
  std::string doc_id;
  Tally attachment;  // non-root gold units
  bool root_correct = false;
  std::array<Tally, kSyncTypeCount> by_sync{};  // keyed by the dependent's sync type
  double uas() const { return attachment.score(); }
};

struct EvalReport {
  std::vector<DocumentScore> documents;  // gold order
  Tally attachment;
  std::uint64_t roots_correct = 0;
  std::array<Tally, kSyncTypeCount> by_sync{};

  std::uint64_t document_count() const { return documents.size(); }
  double uas() const { return attachment.score(); }  // micro-average
  double root_accuracy() const {
    return documents.empty() ? 1.0
                             : static_cast<double>(roots_correct) / static_cast<double>(documents.size());
  }
};

// Missing predictions score every attachment wrong. Throws InputError for
// predictions naming unknown documents or nodes, duplicate predictions, or a
// dependent with two predicted heads.
inline EvalReport score(const std::vector<AnnotatedDocument>& gold,
                        const std::vector<Prediction>& predictions) {
  std::map<std::string, const AnnotatedDocument*> gold_by_id;
  for (const auto& d : gold)
    if (!gold_by_id.emplace(d.doc_id, &d).second)
      throw InputError("gold corpus repeats doc_id " + d.doc_id);
  std::map<std::string, const Prediction*> pred_by_id;
  for (const auto& p : predictions) {
    if (!gold_by_id.count(p.doc_id)) throw InputError("prediction for unknown document " + p.doc_id);
    if (!pred_by_id.emplace(p.doc_id, &p).second)
      throw InputError("more than one prediction for document " + p.doc_id);
  }

  EvalReport report;
  for (const auto& d : gold) {
    std::set<NodeId> nodes;
    std::map<NodeId, SyncType> sync;
    for (const auto& u : d.units) {
      nodes.insert(u.node);
      sync[u.node] = u.sync;
    }
    std::map<NodeId, std::optional<NodeId>> predicted;
    if (auto it = pred_by_id.find(d.doc_id); it != pred_by_id.end()) {
      for (const auto& e : it->second->dependencies) {
        if (!nodes.count(e.dependent))
          throw InputError("document " + d.doc_id + ": unknown node " + std::to_string(e.dependent));
        if (e.head && !nodes.count(*e.head))
          throw InputError("document " + d.doc_id + ": unknown node " + std::to_string(*e.head));
        if (!predicted.emplace(e.dependent, e.head).second)
          throw InputError("document " + d.doc_id + ": node " + std::to_string(e.dependent) +
                           " has more than one predicted head");
      }
    }

    DocumentScore ds;
    ds.doc_id = d.doc_id;
    for (const auto& e : d.dependencies) {
      auto it = predicted.find(e.dependent);
      const bool has = it != predicted.end();
      if (!e.head) {
        ds.root_correct = has && !it->second;
        continue;
      }
      const bool ok = has && it->second == e.head;
      Tally t{ok ? 1u : 0u, 1u};
      ds.attachment += t;
      ds.by_sync[static_cast<std::size_t>(sync.at(e.dependent))] += t;
    }
    report.attachment += ds.attachment;
    report.roots_correct += ds.root_correct ? 1 : 0;
    for (std::size_t i = 0; i < kSyncTypeCount; ++i) report.by_sync[i] += ds.by_sync[i];
    report.documents.push_back(std::move(ds));
  }
  return report;
}

inline Prediction gold_as_prediction(const AnnotatedDocument& d) {
  Prediction p;
  p.doc_id = d.doc_id;
  for (const auto& e : d.dependencies) p.dependencies.push_back({e.head, e.dependent, e.rule});
  return p;
}

// MG units attach to the temporally previous MG unit (the first to ROOT); NMG
// units attach to the MG unit they overlap longest, ties to the earlier start.
inline Prediction baseline_parse(const AnnotatedDocument& d) {
  Prediction p;
  p.doc_id = d.doc_id;
  std::vector<const DocUnit*> manual;
  for (const auto& u : d.units)
    if (u.sync == SyncType::MG) manual.push_back(&u);
  std::stable_sort(manual.begin(), manual.end(),
                   [](const DocUnit* a, const DocUnit* b) { return a->start < b->start; });
  std::map<NodeId, std::optional<NodeId>> head;
  for (std::size_t i = 0; i < manual.size(); ++i)
    head[manual[i]->node] = i == 0 ? std::nullopt : std::optional<NodeId>(manual[i - 1]->node);
  for (const auto& u : d.units) {
    if (u.sync == SyncType::MG) continue;
    const DocUnit* best = nullptr;
    double best_overlap = -1.0;
    for (const DocUnit* m : manual) {  // ascending start, so strict > keeps the earlier on ties
      const double ov = std::max(0.0, std::min(u.end, m->end) - std::max(u.start, m->start));
      if (ov > best_overlap) {
        best_overlap = ov;
        best = m;
      }
    }
    head[u.node] = best ? std::optional<NodeId>(best->node) : std::nullopt;
  }
  for (const auto& [dep, h] : head) p.dependencies.push_back({h, dep, std::nullopt});
  return p;
}

inline ojson to_json(const EvalReport& r) {
  auto tally = [](const Tally& t) {
    return ojson{{"correct", t.correct}, {"total", t.total}, {"uas", t.score()}};
  };
  auto breakdown = [&](const std::array<Tally, kSyncTypeCount>& b) {
    ojson j;
    for (std::size_t i = 0; i < kSyncTypeCount; ++i)
      j[std::string(to_string(static_cast<SyncType>(i)))] = tally(b[i]);
    return j;
  };
  ojson j;
  j["documents"] = r.document_count();
  j["uas"] = r.uas();
  j["root_accuracy"] = r.root_accuracy();
  j["attachment"] = tally(r.attachment);
  j["by_sync"] = breakdown(r.by_sync);
  ojson docs = ojson::array();
  for (const auto& d : r.documents)
    docs.push_back({{"doc_id", d.doc_id},
                    {"uas", d.uas()},
                    {"root_correct", d.root_correct},
                    {"attachment", tally(d.attachment)},
                    {"by_sync", breakdown(d.by_sync)}});
  j["per_document"] = docs;
  return j;
}

}  // namespace slgen
