#include <gtest/gtest.h>

#include "ecpo/error.hpp"
#include "ecpo/hazards.hpp"
#include "ecpo/policy.hpp"

using namespace ecpo;

TEST(Hazards, RainDerivesFromRainyLabel) {
  PerceptionSummary z;
  z.scene_labels = {"rainy"};
  const auto h = derive_hazards(z, {}, HazardRules::builtin());
  EXPECT_TRUE(h.contains("wet_road"));
  EXPECT_TRUE(h.contains("reduced_visibility"));
}

TEST(Hazards, MultiWordTriggersNeedContiguousTokens) {
  const auto& r = HazardRules::builtin();
  EXPECT_TRUE(r.fired("stuck in a traffic jam", kScopeSummaries).contains("dense_traffic"));
  EXPECT_FALSE(r.fired("jam the traffic", kScopeSummaries).contains("dense_traffic"));
  EXPECT_TRUE(r.fired("Stop-and-go queue", kScopeSummaries).contains("dense_traffic"));
}

TEST(Hazards, SnippetsContribute) {
  ConstraintSnippet s;
  s.text = "Fog advisories apply on this route.";
  const auto h = derive_hazards({}, std::vector{s}, HazardRules::builtin());
  EXPECT_EQ(h, HazardSet{"reduced_visibility"});
}

TEST(Hazards, AddressedHazardsIgnoreEvidence) {
  PolicyAction p;
  Action a;
  a.rationale = "keep calm";
  a.evidence.out_of_vehicle_text = {"heavy rain"};
  p.actions.push_back(a);
  EXPECT_TRUE(extract_addressed_hazards(p, HazardRules::builtin()).empty());
  p.actions[0].parameters["text"] = std::string("Rain ahead, slow down");
  EXPECT_TRUE(extract_addressed_hazards(p, HazardRules::builtin()).contains("wet_road"));
  p.objectives = "Manage drowsiness";
  EXPECT_TRUE(extract_addressed_hazards(p, HazardRules::builtin()).contains("drowsiness"));
}

TEST(Hazards, ScopesRestrictRules) {
  const auto rules = HazardRules::parse("ice ; labels ; icy_road\n# comment\n");
  PerceptionSummary z;
  z.summary_final = "ice on the bridge";
  EXPECT_TRUE(derive_hazards(z, {}, rules).empty());
  z.scene_labels = {"ice"};
  EXPECT_EQ(derive_hazards(z, {}, rules), HazardSet{"icy_road"});
  EXPECT_EQ(rules.vocabulary(), HazardSet{"icy_road"});
}

TEST(Hazards, BadRulesThrow) {
  EXPECT_THROW(HazardRules::parse("rain ; all\n"), Error);
  EXPECT_THROW(HazardRules::parse("rain ; nowhere ; wet\n"), Error);
  EXPECT_THROW(HazardRules::parse(" ; all ; wet\n"), Error);
}

TEST(Hazards, ManeuverMentions) {
  const auto& m = ManeuverVocabulary::builtin();
  EXPECT_EQ(m.mentioned("Slow and smooth for parking."), std::vector<std::string>{"parking"});
  EXPECT_EQ(m.mentioned("Please change lanes to the left"), std::vector<std::string>{"lane change"});
  EXPECT_TRUE(m.mentioned("Keep a larger distance").empty());
}
