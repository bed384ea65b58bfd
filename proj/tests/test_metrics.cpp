#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ecpo/error.hpp"
#include "ecpo/metrics.hpp"

using namespace ecpo;

namespace {

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

StrategyEvalRecord rec(bool valid, bool low = false, int sev = 0, HazardSet h = {}, HazardSet hh = {}) {
  StrategyEvalRecord r;
  r.schema_valid = valid;
  r.low_level = low;
  r.violation_severity = sev;
  r.hazards_truth = std::move(h);
  r.hazards_addressed = std::move(hh);
  return r;
}

}  // namespace

TEST(Metrics, MultilabelExample) {
  const std::vector<LabelSetSample> s{{{"a", "b", "c"}, {"b", "c", "d"}}};
  const auto r = multilabel_metrics(s);
  EXPECT_DOUBLE_EQ(r.iou, 50.0);
  EXPECT_DOUBLE_EQ(r.emr, 0.0);
  EXPECT_NEAR(r.f1, 200.0 / 3.0, 1e-6);
  const std::vector<LabelSetSample> same{{{"x", "y"}, {"Y ", "x"}}};
  const auto q = multilabel_metrics(same);
  EXPECT_DOUBLE_EQ(q.iou, 100.0);
  EXPECT_DOUBLE_EQ(q.emr, 100.0);
  EXPECT_NEAR(q.f1, 100.0, 1e-6);
}

TEST(Metrics, EmptyEmptySamplesAreExcluded) {
  const std::vector<LabelSetSample> s{{{"a"}, {"a"}}, {{}, {}}, {{}, {}}};
  const auto r = multilabel_metrics(s);
  EXPECT_EQ(r.eligible, 1u);
  EXPECT_EQ(r.excluded, 2u);
  EXPECT_DOUBLE_EQ(r.iou, 100.0);
  const std::vector<LabelSetSample> none{{{}, {}}};
  EXPECT_EQ(code_of([&] { multilabel_metrics(none); }), "NO_ELIGIBLE_SAMPLES");
  const std::vector<LabelSetSample> one_side{{{}, {"a"}}};
  EXPECT_DOUBLE_EQ(multilabel_metrics(one_side).iou, 0.0);
}

TEST(Metrics, Classification) {
  EXPECT_DOUBLE_EQ(classification_metrics({"a", "b"}, {"a", "b"}).macro_f1, 100.0);
  const auto r = classification_metrics({"a", "a", "b", "b"}, {"a", "a", "a", "a"});
  EXPECT_DOUBLE_EQ(r.accuracy, 50.0);
  EXPECT_NEAR(r.macro_f1, 100.0 * (2.0 / 3.0) / 2.0, 1e-12);
  const auto declared = classification_metrics({"a", "b"}, {"a", "b"}, {"a", "b", "c", "d"});
  EXPECT_DOUBLE_EQ(declared.macro_f1, 50.0);
  EXPECT_EQ(code_of([] { classification_metrics({"a"}, {}); }), "LENGTH_MISMATCH");
}

TEST(Metrics, BleuPerfectAndDisjoint) {
  const std::vector<TokenSeq> r{metric_tokens("the driver keeps a safe gap")};
  EXPECT_NEAR(bleu4(r, r), 100.0, 1e-9);
  const std::vector<TokenSeq> h{metric_tokens("x y z w v u")};
  EXPECT_LT(bleu4(r, h), 1e-6);
  EXPECT_EQ(code_of([&] { bleu4(r, {}); }), "LENGTH_MISMATCH");
}

TEST(Metrics, BleuHandComputed) {
  const std::vector<TokenSeq> refs{metric_tokens("a b c d e"), metric_tokens("a b c"), metric_tokens("x y z")};
  const std::vector<TokenSeq> hyps{metric_tokens("a b c d"), metric_tokens("a b x"), metric_tokens("X Y Z")};
  // p1 = 9/10, p2 = 6/7, p3 = 3/4, p4 = 1/1; c = 10, r = 11
  const double expected =
      100.0 * std::exp(1.0 - 11.0 / 10.0) * std::pow((9.0 / 10.0) * (6.0 / 7.0) * (3.0 / 4.0) * 1.0, 0.25);
  EXPECT_NEAR(bleu4(refs, hyps), expected, 1e-9);
}

TEST(Metrics, RougeL) {
  EXPECT_NEAR(rouge_l({metric_tokens("a b c d")}, {metric_tokens("a c d e")}), 75.0, 1e-12);
  EXPECT_DOUBLE_EQ(rouge_l({metric_tokens("a b")}, {metric_tokens("a b")}), 100.0);
  EXPECT_DOUBLE_EQ(rouge_l({metric_tokens("a b")}, {metric_tokens("c d")}), 0.0);
  EXPECT_DOUBLE_EQ(rouge_l({{}}, {{}}), 100.0);
  EXPECT_DOUBLE_EQ(rouge_l({{"a"}}, {{}}), 0.0);
  EXPECT_EQ(lcs_length({"a", "b", "c", "b", "d", "a", "b"}, {"b", "d", "c", "a", "b", "a"}), 4u);
}

TEST(Metrics, HazardF1Examples) {
  EXPECT_NEAR(hazard_f1({"a", "b"}, {"a"}), 200.0 / 3.0, 1e-6);
  EXPECT_DOUBLE_EQ(hazard_f1({"a"}, {}), 0.0);
}

TEST(Metrics, StrategyMetricsAndValidityRule) {
  std::vector<StrategyEvalRecord> recs{rec(true, true, 2, {"a", "b"}, {"a"}), rec(true, false, 0, {"a"}, {"a"}),
                                       rec(false)};
  const auto r = strategy_metrics(recs);
  EXPECT_NEAR(*r.find("valid_pct")->value, 200.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(*r.find("viol_sev")->value, 1.0);
  EXPECT_DOUBLE_EQ(*r.find("low_ctrl_pct")->value, 50.0);
  EXPECT_NEAR(*r.find("haz_f1")->value, (200.0 / 3.0 + 100.0) / 2.0, 1e-6);

  recs.push_back(rec(false));
  recs.push_back(rec(false));
  const auto low = strategy_metrics(recs);
  EXPECT_DOUBLE_EQ(*low.find("valid_pct")->value, 40.0);
  for (const char* m : {"viol_sev", "low_ctrl_pct", "haz_f1"}) {
    EXPECT_FALSE(low.find(m)->value);
    EXPECT_EQ(low.find(m)->na_reason, "VALIDITY_BELOW_50");
  }
  const auto empty = strategy_metrics({});
  EXPECT_EQ(empty.find("valid_pct")->na_reason, "NO_SAMPLES");
  EXPECT_EQ(code_of([] { strategy_metrics(std::vector{rec(false, true)}); }), "BAD_RECORD");
}

TEST(Metrics, TableRendersNA) {
  const auto r = strategy_metrics(std::vector{rec(false)});
  const auto t = r.table();
  EXPECT_NE(t.find("N/A (VALIDITY_BELOW_50)"), std::string::npos);
  EXPECT_NE(t.find("valid_pct"), std::string::npos);
}

TEST(Metrics, HasCanonicalCombinations) {
  const auto one = [](bool a, bool b, bool c) { return 100.0 * has_item({{a, b, c}}); };
  EXPECT_DOUBLE_EQ(one(true, true, true), 100.0);
  EXPECT_DOUBLE_EQ(one(true, false, false), 50.0);
  EXPECT_DOUBLE_EQ(one(false, true, false), 30.0);
  EXPECT_DOUBLE_EQ(one(false, false, true), 20.0);
  EXPECT_DOUBLE_EQ(one(false, false, false), 0.0);
  EXPECT_DOUBLE_EQ(100.0 * has_item({{true, true, true}, {true, false, true}}), 70.0);
}

TEST(Metrics, HasAcrossSeeds) {
  const std::vector<RatedItem> items{{"p", "s1", {{true, true, true}}},
                                     {"q", "s1", {{false, false, false}}},
                                     {"p", "s2", {{true, true, true}}}};
  const auto r = has_aggregate(items);
  EXPECT_DOUBLE_EQ(r.per_seed.at("s1"), 50.0);
  EXPECT_DOUBLE_EQ(r.per_seed.at("s2"), 100.0);
  EXPECT_DOUBLE_EQ(r.mean, 75.0);
  EXPECT_NEAR(r.std, std::sqrt(2.0 * 25.0 * 25.0), 1e-12);
  EXPECT_EQ(code_of([] { has_aggregate({}); }), "NO_RATINGS");
}

TEST(Metrics, Spearman) {
  EXPECT_DOUBLE_EQ(*spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
  EXPECT_DOUBLE_EQ(*spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_FALSE(spearman({1, 2, 3}, {5, 5, 5}).has_value());
  EXPECT_EQ(code_of([] { spearman({1, 2}, {1}); }), "LENGTH_MISMATCH");
  EXPECT_EQ(code_of([] { spearman({1}, {1}); }), "TOO_FEW_POINTS");
  EXPECT_EQ(average_ranks({3, 1, 3, 2}), (std::vector<double>{3.5, 1, 3.5, 2}));
  const std::vector<double> x{1, 5, 2, 8, 8}, y{2, 3, 1, 9, 7};
  std::vector<double> x3;
  for (double v : x) x3.push_back(v * v * v + 1);
  EXPECT_NEAR(*spearman(x, y), *spearman(x3, y), 1e-12);
}

TEST(Metrics, SpearmanMatchesRankThenPearson) {
  const std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
  const std::vector<double> y{2, 7, 1, 8, 2, 8, 1, 8, 2, 8};
  // rank by counting: r = 1 + #smaller + (#equal - 1) / 2
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r;
    for (double a : v) {
      double less = 0, equal = 0;
      for (double b : v) {
        less += b < a ? 1 : 0;
        equal += b == a ? 1 : 0;
      }
      r.push_back(1 + less + (equal - 1) / 2);
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i] / 10;
    my += ry[i] / 10;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  EXPECT_NEAR(*spearman(x, y), sxy / std::sqrt(sxx * syy), 1e-12);
}

TEST(Metrics, PerSampleSetBounds) {
  std::mt19937 rng(13);
  const std::vector<std::string> alphabet{"a", "b", "c", "d", "e"};
  for (int i = 0; i < 300; ++i) {
    LabelSetSample s;
    for (const auto& l : alphabet) {
      if (rng() % 2) s.truth.insert(l);
      if (rng() % 2) s.prediction.insert(l);
    }
    if (s.truth.empty() && s.prediction.empty()) continue;
    const auto r = multilabel_metrics(std::vector{s});
    const double iou = r.iou / 100.0;
    EXPECT_GE(r.f1 + 1e-6, 100.0 * 2 * iou / (1 + iou));
    EXPECT_LE(r.emr, r.iou + 1e-9);
    EXPECT_LE(r.emr, r.f1 + 1e-6);
  }
}

TEST(Metrics, StrategyMetricsIgnoreRecordOrder) {
  std::vector<StrategyEvalRecord> recs{rec(true, true, 3, {"a", "b"}, {"a"}), rec(true, false, 1, {"a"}, {}),
                                       rec(false), rec(true, false, 0, {}, {"c"})};
  const auto a = strategy_metrics(recs);
  std::reverse(recs.begin(), recs.end());
  const auto b = strategy_metrics(recs);
  for (const auto& [name, v] : a.metrics) EXPECT_EQ(v.value, b.find(name)->value) << name;
}
