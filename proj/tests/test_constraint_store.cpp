#include <gtest/gtest.h>

#include <cmath>

#include "ecpo/constraint_store.hpp"
#include "ecpo/error.hpp"
#include "ecpo/text.hpp"

using namespace ecpo;

namespace {

ConstraintSnippet snip(std::string id, SnippetLayer layer, std::string text) {
  ConstraintSnippet s;
  s.snippet_id = std::move(id);
  s.layer = layer;
  s.clause_id = "c-" + s.snippet_id;
  s.text = std::move(text);
  return s;
}

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST(ConstraintStore, VersionsAreImmutable) {
  const ConstraintStore v0;
  const auto v1 = v0.update({snip("a", SnippetLayer::Legal, "keep distance in rain")}, {});
  const auto v2 = v1.update({snip("b", SnippetLayer::Driver, "no audio alerts")}, {"a"});
  EXPECT_EQ(v0.version(), 0u);
  EXPECT_TRUE(v0.empty());
  EXPECT_EQ(v1.snippets().size(), 1u);
  EXPECT_EQ(v1.snippets()[0].version, 1u);
  ASSERT_EQ(v2.snippets().size(), 1u);
  EXPECT_EQ(v2.snippets()[0].snippet_id, "b");
  EXPECT_EQ(v2.latest_version(), 2u);
  EXPECT_EQ(v2.at_version(1).snippets()[0].snippet_id, "a");
  EXPECT_EQ(code_of([&] { v2.at_version(9); }), "UNKNOWN_VERSION");
}

TEST(ConstraintStore, UpdateErrors) {
  const auto v1 = ConstraintStore().update({snip("a", SnippetLayer::Legal, "x")}, {});
  EXPECT_EQ(code_of([&] { v1.update({snip("a", SnippetLayer::Legal, "y")}, {}); }), "DUPLICATE_ID");
  EXPECT_EQ(code_of([&] { v1.update({}, {"zz"}); }), "UNKNOWN_REMOVAL_ID");
  auto no_clause = snip("n", SnippetLayer::Legal, "x");
  no_clause.clause_id.clear();
  EXPECT_EQ(code_of([&] { v1.update({no_clause}, {}); }), "BAD_SNIPPET");
  // removing and re-adding an id in one update replaces it
  EXPECT_EQ(v1.update({snip("a", SnippetLayer::Vehicle, "z")}, {"a"}).snippets()[0].text, "z");
}

TEST(ConstraintStore, QueryBuilding) {
  PerceptionSummary z;
  z.scene_labels = {"Traffic Jam"};
  z.driver_labels = {"Anxiety"};
  z.summary_final = "The driver is parking in traffic.";
  DriverProfile d;
  d.sensitivities = {{"noise", SensitivityLevel::High}, {"glare", SensitivityLevel::Low}};
  d.alert_modality_preference = "visual";
  VehicleProfile v;
  v.jurisdiction = "CN";
  v.operating_mode = "L2";
  const auto q = build_query(z, d, v);
  EXPECT_EQ(q.jurisdiction, "CN");
  EXPECT_EQ(q.sensitivity_terms, (std::vector<std::string>{"noise", "visual"}));
  EXPECT_EQ(q.situation_terms, (std::vector<std::string>{"traffic", "jam", "anxiety", "driver", "parking"}));
  EXPECT_EQ(build_query({}, {}, {}).situation_terms, std::vector<std::string>{"general"});
}

TEST(ConstraintStore, LexicalRetrievalRanksAndBreaksTies) {
  const auto store = ConstraintStore().update(
      {snip("b", SnippetLayer::Legal, "rain visibility"), snip("a", SnippetLayer::Legal, "rain visibility"),
       snip("c", SnippetLayer::Driver, "music volume")},
      {});
  RetrievalQuery q;
  q.situation_terms = {"rain", "visibility"};
  const auto r = retrieve(store, q, 3);
  ASSERT_EQ(r.ranked.size(), 3u);
  EXPECT_EQ(r.ranked[0].snippet_id, "a");
  EXPECT_EQ(r.ranked[1].snippet_id, "b");
  EXPECT_EQ(r.ranked[0].score, 1.0);
  EXPECT_EQ(r.ranked[2].score, 0.0);
  EXPECT_EQ(retrieve(store, q, 1).ranked.size(), 1u);
  EXPECT_EQ(code_of([&] { retrieve(store, q, 0); }), "BAD_TOP_K");
  EXPECT_EQ(code_of([&] { retrieve(ConstraintStore(), q, 1); }), "EMPTY_STORE");
}

TEST(ConstraintStore, LexicalCosineValues) {
  EXPECT_DOUBLE_EQ(lexical_cosine({"a", "b"}, {"a", "c"}), 0.5);
  EXPECT_DOUBLE_EQ(lexical_cosine({}, {"a"}), 0.0);
  EXPECT_EQ(lexical_cosine({"x", "y", "x", "z"}, {"x", "y", "x", "z"}), 1.0);
}

TEST(ConstraintStore, EmbeddingRetrieval) {
  const auto store = ConstraintStore().update(
      {snip("a", SnippetLayer::Legal, "x"), snip("b", SnippetLayer::Legal, "y")}, {});
  EmbeddingIndex idx;
  idx.add("a", {1.0, 0.0});
  idx.add("b", {0.6, 0.8});
  const std::vector<double> q{0.0, 1.0};
  const auto r = retrieve(store, {}, 2, Scorer::embedding(idx, &q));
  EXPECT_EQ(r.scorer_kind, ScorerKind::Embedding);
  EXPECT_EQ(r.ranked[0].snippet_id, "b");
  EXPECT_DOUBLE_EQ(r.ranked[0].score, 0.8);
  EXPECT_EQ(code_of([&] { idx.add("c", {1.0, 1.0}); }), "BAD_EMBEDDING");
  EXPECT_EQ(code_of([&] { idx.add("c", {1.0}); }), "BAD_EMBEDDING");
  EXPECT_EQ(code_of([&] { retrieve(store, {}, 1, Scorer::embedding(idx, nullptr)); }), "MISSING_EMBEDDING");
  EmbeddingIndex partial;
  partial.add("a", {1.0, 0.0});
  EXPECT_EQ(code_of([&] { retrieve(store, {}, 1, Scorer::embedding(partial, &q)); }), "MISSING_EMBEDDING");
}

TEST(ConstraintStore, CompressionOrderAndBudget) {
  std::vector<ScoredSnippet> ranked{
      {snip("d1", SnippetLayer::Driver, "one two three"), 0.9},
      {snip("l1", SnippetLayer::Legal, "one two"), 0.1},
      {snip("v1", SnippetLayer::Vehicle, "one two three four"), 0.5},
      {snip("l2", SnippetLayer::Legal, "one"), 0.1},
  };
  const auto s = compress(ranked, 6);
  ASSERT_EQ(s.entries.size(), 2u);
  EXPECT_EQ(s.entries[0].snippet_id, "l1");
  EXPECT_EQ(s.entries[1].snippet_id, "l2");
  EXPECT_EQ(s.tokens_used, 3u);
  // stops at the first snippet that does not fit, even if later ones would
  const auto all = compress(ranked, 100);
  EXPECT_EQ(all.entries.size(), 4u);
  EXPECT_EQ(all.entries[2].snippet_id, "v1");
  EXPECT_EQ(all.render().substr(0, 14), "[legal c-l1] o");
  EXPECT_EQ(code_of([&] { compress(ranked, 0); }), "BAD_BUDGET");
}

TEST(ConstraintStore, ResolveUsesPinnedVersion) {
  const auto v1 = ConstraintStore().update({snip("a", SnippetLayer::Legal, "old text")}, {});
  RetrievalQuery q;
  q.situation_terms = {"text"};
  const auto r = retrieve(v1, q, 1);
  const auto v2 = v1.update({snip("a2", SnippetLayer::Legal, "new text")}, {"a"});
  const auto resolved = resolve(v2, r);
  ASSERT_EQ(resolved.size(), 1u);
  EXPECT_EQ(resolved[0].snippet.text, "old text");
}
