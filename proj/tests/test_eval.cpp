#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"

namespace slgen {
namespace {

using testing::GrammarBuilder;

DocUnit unit(NodeId node, SyncType sync, double start, double end) {
  return DocUnit{node, static_cast<UnitId>(node), "C", sync, start, end};
}

// Root 0 with dependents 1..4: 1->0, 2->0, 3->1, 4->1.
AnnotatedDocument five_node_document() {
  AnnotatedDocument d;
  d.doc_id = "d000000";
  for (NodeId i = 0; i < 5; ++i) d.units.push_back(unit(i, SyncType::MG, i, i + 1.0));
  d.dependencies = {{std::nullopt, 0, 0}, {0, 1, 0}, {0, 2, 0}, {1, 3, 0}, {1, 4, 0}};
  return d;
}

std::vector<AnnotatedDocument> generated_corpus(std::uint64_t n, std::uint64_t seed, double nmg = 0.3) {
  GenParams p = testing::default_params();
  p.seed = seed;
  p.nmg_category_ratio = nmg;
  const Grammar g = generate_grammar(p);
  std::ostringstream out;
  generate_corpus(g, n, seed, p, out);
  return parse_corpus(out.str());
}

TEST(Score, IdentityIsPerfect) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto gold = generated_corpus(100, seed);
    std::vector<Prediction> preds;
    for (const auto& d : gold) preds.push_back(gold_as_prediction(d));
    const EvalReport r = score(gold, preds);
    EXPECT_EQ(r.uas(), 1.0);
    EXPECT_EQ(r.root_accuracy(), 1.0);
    EXPECT_EQ(r.document_count(), 100u);
  }
}

TEST(Score, EveryHeadWrong) {
  const AnnotatedDocument d = five_node_document();
  Prediction p;
  p.doc_id = d.doc_id;
  p.dependencies = {{std::nullopt, 0, {}}, {2, 1, {}}, {3, 2, {}}, {4, 3, {}}, {3, 4, {}}};
  const EvalReport r = score({d}, {p});
  EXPECT_EQ(r.uas(), 0.0);
  EXPECT_EQ(r.attachment.total, 4u);
  EXPECT_EQ(r.root_accuracy(), 1.0);
}

TEST(Score, TwoOfFour) {
  const AnnotatedDocument d = five_node_document();
  Prediction p;
  p.doc_id = d.doc_id;
  // 1 and 3 correct; 2 and 4 wrong; root predicted on 2 instead of 0.
  p.dependencies = {{0, 1, {}}, {std::nullopt, 2, {}}, {1, 3, {}}, {2, 4, {}}, {1, 0, {}}};
  const EvalReport r = score({d}, {p});
  EXPECT_EQ(r.documents[0].uas(), 0.5);
  EXPECT_EQ(r.uas(), 0.5);
  EXPECT_EQ(r.root_accuracy(), 0.0);
}

TEST(Score, MissingPredictionIsWrong) {
  AnnotatedDocument a = five_node_document();
  AnnotatedDocument b = five_node_document();
  b.doc_id = "d000001";
  const EvalReport r = score({a, b}, {gold_as_prediction(a)});
  EXPECT_EQ(r.attachment.correct, 4u);
  EXPECT_EQ(r.attachment.total, 8u);
  EXPECT_EQ(r.root_accuracy(), 0.5);
  EXPECT_EQ(r.documents[1].uas(), 0.0);
}

TEST(Score, SingleNodeDocumentIsVacuous) {
  AnnotatedDocument d;
  d.doc_id = "d000000";
  d.units = {unit(0, SyncType::MG, 0, 1)};
  d.dependencies = {{std::nullopt, 0, 0}};
  const EvalReport r = score({d}, {gold_as_prediction(d)});
  EXPECT_EQ(r.uas(), 1.0);
  EXPECT_EQ(r.attachment.total, 0u);
}

TEST(Score, InputErrors) {
  const AnnotatedDocument d = five_node_document();
  Prediction unknown_doc = gold_as_prediction(d);
  unknown_doc.doc_id = "nope";
  EXPECT_THROW(score({d}, {unknown_doc}), InputError);

  Prediction unknown_node = gold_as_prediction(d);
  unknown_node.dependencies[1].head = 42;
  try {
    score({d}, {unknown_node});
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("d000000"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
  }

  Prediction two_heads = gold_as_prediction(d);
  two_heads.dependencies.push_back({2, 1, {}});
  EXPECT_THROW(score({d}, {two_heads}), InputError);

  EXPECT_THROW(score({d}, {gold_as_prediction(d), gold_as_prediction(d)}), InputError);
}

TEST(Score, InvariantUnderReordering) {
  const auto gold = generated_corpus(60, 5);
  std::vector<Prediction> preds;
  for (const auto& d : gold) preds.push_back(baseline_parse(d));
  const EvalReport base = score(gold, preds);

  std::mt19937_64 shuffle(1);
  auto gold2 = gold;
  auto preds2 = preds;
  std::shuffle(gold2.begin(), gold2.end(), shuffle);
  std::shuffle(preds2.begin(), preds2.end(), shuffle);
  for (auto& p : preds2) std::shuffle(p.dependencies.begin(), p.dependencies.end(), shuffle);
  for (auto& d : gold2) std::shuffle(d.dependencies.begin(), d.dependencies.end(), shuffle);
  const EvalReport r = score(gold2, preds2);
  EXPECT_EQ(r.attachment.correct, base.attachment.correct);
  EXPECT_EQ(r.attachment.total, base.attachment.total);
  EXPECT_EQ(r.roots_correct, base.roots_correct);
  EXPECT_EQ(r.uas(), base.uas());
}

TEST(Score, SyncBreakdownSums) {
  const auto gold = generated_corpus(200, 9, 0.5);
  std::vector<Prediction> preds;
  for (const auto& d : gold) preds.push_back(baseline_parse(d));
  const EvalReport r = score(gold, preds);
  Tally sum;
  double weighted = 0.0;
  for (const auto& t : r.by_sync) {
    sum += t;
    weighted += static_cast<double>(t.total) * t.score();
  }
  EXPECT_EQ(sum.correct, r.attachment.correct);
  EXPECT_EQ(sum.total, r.attachment.total);
  EXPECT_NEAR(weighted / static_cast<double>(sum.total), r.uas(), 1e-12);
  EXPECT_GE(r.uas(), 0.0);
  EXPECT_LE(r.uas(), 1.0);
}

TEST(PredictionFormat, RoundTrip) {
  const auto gold = generated_corpus(50, 2);
  for (const auto& d : gold) {
    const Prediction p = gold_as_prediction(d);
    const std::string line = serialize_prediction(p);
    EXPECT_EQ(parse_prediction(line), p);
  }
  EXPECT_THROW(parse_predictions("{\"doc_id\":\"a\",\"deps\":[{\"dep\":1}]}\n"), ParseError);
}

TEST(Baseline, SingleManualUnit) {
  AnnotatedDocument d;
  d.doc_id = "x";
  d.units = {unit(0, SyncType::MG, 0, 1)};
  d.dependencies = {{std::nullopt, 0, 0}};
  const Prediction p = baseline_parse(d);
  ASSERT_EQ(p.dependencies.size(), 1u);
  EXPECT_FALSE(p.dependencies[0].head);
}

TEST(Baseline, SequentialManualUnits) {
  AnnotatedDocument d;
  d.doc_id = "x";
  // Node ids out of temporal order: c=0, a=1, b=2.
  d.units = {unit(0, SyncType::MG, 2, 3), unit(1, SyncType::MG, 0, 1), unit(2, SyncType::MG, 1, 2)};
  const Prediction p = baseline_parse(d);
  std::map<NodeId, std::optional<NodeId>> h;
  for (const auto& e : p.dependencies) h[e.dependent] = e.head;
  EXPECT_EQ(h.at(1), std::nullopt);
  EXPECT_EQ(h.at(2), std::optional<NodeId>(1));
  EXPECT_EQ(h.at(0), std::optional<NodeId>(2));
}

TEST(Baseline, MarkerAttachesToLongestOverlap) {
  AnnotatedDocument d;
  d.doc_id = "x";
  d.units = {unit(0, SyncType::MG, 0, 1), unit(1, SyncType::MG, 1, 2), unit(2, SyncType::MG, 2, 3),
             unit(3, SyncType::NMG_FULL, 1, 2),    // exactly node 1
             unit(4, SyncType::NMG_START, 0.5, 1.5),  // tie between 0 and 1
             unit(5, SyncType::NMG_END, 1.8, 3.0)};   // mostly node 2
  std::map<NodeId, std::optional<NodeId>> h;
  for (const auto& e : baseline_parse(d).dependencies) h[e.dependent] = e.head;
  EXPECT_EQ(h.at(3), std::optional<NodeId>(1));
  EXPECT_EQ(h.at(4), std::optional<NodeId>(0));
  EXPECT_EQ(h.at(5), std::optional<NodeId>(2));
}

TEST(Baseline, ChainGrammarIsSolved) {
  GenParams p = testing::default_params();
  p.permutation_prob = 0.0;
  p.height_limit = 8;
  const Grammar g = GrammarBuilder()
                        .mg("S").mg("T")
                        .rule("S(*,S)").rule("S(*,T)").rule("S()").rule("T(*,S)").rule("T()")
                        .params(p)
                        .build();
  std::ostringstream out;
  generate_corpus(g, 500, 3, p, out);
  const auto gold = parse_corpus(out.str());
  std::vector<Prediction> preds;
  std::uint64_t longest = 0;
  for (const auto& d : gold) {
    preds.push_back(baseline_parse(d));
    longest = std::max<std::uint64_t>(longest, d.units.size());
  }
  const EvalReport r = score(gold, preds);
  EXPECT_EQ(r.by_sync[static_cast<std::size_t>(SyncType::MG)].score(), 1.0);
  EXPECT_EQ(r.root_accuracy(), 1.0);
  EXPECT_GT(longest, 3u);
}

TEST(Baseline, HarnessRunsOnGeneratedCorpora) {
  const auto gold = generated_corpus(100, 4, 0.4);
  std::vector<Prediction> preds;
  for (const auto& d : gold) preds.push_back(baseline_parse(d));
  const EvalReport r = score(gold, preds);
  EXPECT_EQ(r.document_count(), 100u);
  EXPECT_GE(r.uas(), 0.0);
  EXPECT_LE(r.uas(), 1.0);
  const ojson j = to_json(r);
  EXPECT_EQ(j["per_document"].size(), 100u);
}

}  // namespace
}  // namespace slgen
