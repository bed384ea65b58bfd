#include <gtest/gtest.h>

#include <algorithm>

#include "ecpo/error.hpp"
#include "ecpo/validator.hpp"
#include "test_util.hpp"

using namespace ecpo;

namespace {

const CheckResult& check(const std::vector<CheckResult>& c, const std::string& id) {
  const auto it = std::find_if(c.begin(), c.end(), [&](const CheckResult& r) { return r.check_id == id; });
  if (it == c.end()) throw std::runtime_error("no check " + id);
  return *it;
}

std::vector<std::string> failed(const EcpoReport& r) {
  std::vector<std::string> out;
  for (const auto& c : r.checks) {
    if (!c.passed) out.push_back(c.check_id);
  }
  return out;
}

CheckResult fail(std::string id, CheckLayer l) { return {std::move(id), l, false, true, "x", std::nullopt}; }

PolicyAction simple_policy(ActionType t, std::string rationale) {
  PolicyAction p;
  p.objectives = "o";
  Action a;
  a.type = t;
  a.rationale = std::move(rationale);
  p.actions.push_back(a);
  return p;
}

}  // namespace

TEST(Validator, SeverityAndCount) {
  EXPECT_EQ(violation_summary({}), (ViolationSummary{0, 0}));
  const std::vector<CheckResult> two{fail("d", CheckLayer::Driver), fail("c", CheckLayer::Contextual)};
  EXPECT_EQ(violation_summary(two), (ViolationSummary{2, 2}));
  const std::vector<CheckResult> three{fail("l", CheckLayer::Legal), fail("v", CheckLayer::Vehicle),
                                       fail("d", CheckLayer::Driver), fail("d", CheckLayer::Driver)};
  EXPECT_EQ(violation_summary(three), (ViolationSummary{4, 3}));
}

TEST(Validator, CoreScoreExamples) {
  EXPECT_DOUBLE_EQ(core_score({0, 0}), 1.0);
  EXPECT_NEAR(core_score({1, 2}), 0.55, 1e-12);
  EXPECT_DOUBLE_EQ(core_score({1, 12}), 0.0);
}

TEST(Validator, EcpoScoreExamples) {
  EXPECT_DOUBLE_EQ(ecpo_score(1, 1, 1), 1.0);
  EXPECT_NEAR(ecpo_score(0.55, 0.5, 1.0), 0.625, 1e-12);
  EXPECT_THROW(ecpo_score(1, 1, 1, {0.5, 0.5, 0.5}), Error);
  EXPECT_THROW(check_weights({1.2, -0.1, -0.1}), Error);
}

TEST(Validator, CabinBandHvacOutsideBandIsTheOnlyDriverViolation) {
  const auto prompt = testutil::fixture_prompt("cabin_band_prompt.json");
  const auto r = validate(testutil::fixture("cabin_band_policy_26c.json"), prompt);
  ASSERT_TRUE(r.schema_valid);
  EXPECT_EQ(failed(r), std::vector<std::string>{"driver.cabin_band"});
  EXPECT_EQ(r.violation, (ViolationSummary{2, 1}));
  EXPECT_NEAR(r.s_core, 0.4, 1e-12);

  const auto ok = validate(testutil::fixture("cabin_band_policy_23c.json"), prompt);
  EXPECT_TRUE(failed(ok).empty());
  EXPECT_DOUBLE_EQ(ok.ecpo, 1.0);
  EXPECT_GT(ok.ecpo, r.ecpo);
}

TEST(Validator, RainHeadwayEvidenceMatchesContext) {
  const auto prompt = testutil::fixture_prompt("rain_headway_prompt.json");
  const auto r = validate(testutil::fixture("rain_headway_policy.jsonc"), prompt);
  ASSERT_TRUE(r.schema_valid);
  EXPECT_DOUBLE_EQ(r.s_str, 1.0);
  EXPECT_DOUBLE_EQ(r.s_evd, 1.0);
  EXPECT_FALSE(r.low_level());
  EXPECT_TRUE(r.hazards_addressed.contains("wet_road"));
}

TEST(Validator, EvidenceCoveragePartial) {
  PerceptionSummary z;
  z.summary_final = "Heavy rain with limited visibility ahead.";
  z.objects = {"car_12"};
  PolicyAction p = simple_policy(ActionType::HmiPrompt, "r");
  p.actions[0].evidence.out_of_vehicle_text = {"heavy rain, limited visibility", "sunny skies"};
  p.actions[0].evidence.objects = {"car_12", "bus_9"};
  p.actions.push_back(simple_policy(ActionType::Hvac, "r").actions[0]);
  EXPECT_DOUBLE_EQ(evidence_coverage(p, z, {}), 0.25);
  EXPECT_DOUBLE_EQ(evidence_coverage(PolicyAction{}, z, {}), 0.0);
}

TEST(Validator, LegalKeywordCarriesClauseRef) {
  StrategyPrompt u;
  ConstraintSnippet s;
  s.snippet_id = "no-overtake";
  s.layer = SnippetLayer::Legal;
  s.clause_id = "L-9";
  s.text = "No overtaking in this zone.";
  s.assertions = Assertions{};
  s.assertions->forbidden_keywords = {"overtake"};
  u.constraints = {s};
  const auto checks = run_layered_checks(simple_policy(ActionType::DrivingSuggestion, "overtake now"), u);
  const auto& c = check(checks, "legal.forbidden_keyword");
  EXPECT_FALSE(c.passed);
  EXPECT_EQ(c.clause_ref, "L-9");
  EXPECT_TRUE(check(run_layered_checks(simple_policy(ActionType::DrivingSuggestion, "hold lane"), u),
                    "legal.forbidden_keyword")
                  .passed);
}

TEST(Validator, InventoryOrderAndNotApplicable) {
  const auto& inv = check_inventory();
  ASSERT_EQ(inv.size(), 11u);
  const auto checks = run_layered_checks(simple_policy(ActionType::AmbientLight, "calm"), StrategyPrompt{});
  ASSERT_EQ(checks.size(), inv.size());
  int last = 5;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    EXPECT_EQ(checks[i].check_id, inv[i]);
    EXPECT_LE(severity(checks[i].layer), last);
    last = severity(checks[i].layer);
    EXPECT_TRUE(checks[i].passed);
    EXPECT_FALSE(checks[i].applicable);
    EXPECT_EQ(checks[i].detail, "not applicable");
  }
}

TEST(Validator, VehicleChecks) {
  StrategyPrompt u;
  u.vehicle.available_actuators = {ActionType::AmbientLight, ActionType::Hvac};
  u.vehicle.capability_limits = {{ActionType::Hvac, "target_temperature", 16, 30}};
  auto p = simple_policy(ActionType::AmbientLight, "calm");
  auto checks = run_layered_checks(p, u);
  EXPECT_TRUE(check(checks, "vehicle.unavailable_actuator").passed);
  EXPECT_TRUE(check(checks, "vehicle.capability_limits").passed);

  p.actions.push_back(simple_policy(ActionType::HmiPrompt, "x").actions[0]);
  auto hvac = simple_policy(ActionType::Hvac, "x").actions[0];
  hvac.parameters["target_temperature"] = std::int64_t{35};
  p.actions.push_back(hvac);
  checks = run_layered_checks(p, u);
  EXPECT_FALSE(check(checks, "vehicle.unavailable_actuator").passed);
  EXPECT_FALSE(check(checks, "vehicle.capability_limits").passed);
  EXPECT_EQ(violation_summary(checks), (ViolationSummary{3, 2}));
}

TEST(Validator, DriverSensitivityGate) {
  StrategyPrompt u = testutil::fixture_prompt("cabin_band_prompt.json");
  auto p = simple_policy(ActionType::HmiPrompt, "Parking, stay focused");
  p.actions[0].parameters["modality"] = std::string("audio+visual");
  auto checks = run_layered_checks(p, u);
  EXPECT_FALSE(check(checks, "driver.sensitivity").passed);
  EXPECT_FALSE(check(checks, "driver.preferred_modality").passed);
  u.driver.sensitivities["noise"] = SensitivityLevel::Low;
  u.driver.alert_modality_preference = "multimodal";
  checks = run_layered_checks(p, u);
  EXPECT_TRUE(check(checks, "driver.sensitivity").passed);
  EXPECT_TRUE(check(checks, "driver.preferred_modality").passed);
}

TEST(Validator, ContextualChecks) {
  StrategyPrompt u;
  u.z.scene_labels = {"rainy"};
  u.z.summary_final = "Driving forward on a highway.";
  auto p = simple_policy(ActionType::DrivingSuggestion, "Consider a lane change to overtake.");
  auto checks = run_layered_checks(p, u);
  EXPECT_FALSE(check(checks, "contextual.hazard_conservatism").passed);
  EXPECT_FALSE(check(checks, "contextual.maneuver_consistency").passed);
  p.actions[0].rationale = "Rain reduces visibility and the road is wet; keep a longer gap.";
  checks = run_layered_checks(p, u);
  EXPECT_TRUE(check(checks, "contextual.hazard_conservatism").passed);
  EXPECT_TRUE(check(checks, "contextual.maneuver_consistency").passed);
}

TEST(Validator, InvalidDocumentScoresZero) {
  const auto prompt = testutil::fixture_prompt("cabin_band_prompt.json");
  const auto r = validate("{not json", prompt);
  EXPECT_FALSE(r.schema_valid);
  EXPECT_EQ(r.ecpo, 0.0);
  EXPECT_EQ(r.s_core, 0.0);
  EXPECT_TRUE(r.checks.empty());
  EXPECT_FALSE(r.hazards_truth.empty());
}

TEST(Validator, LowLevelLanguageDoesNotFlipValidity) {
  const auto r = validate(
      R"({"objectives":"o","actions":[{"type":"Driving suggest","parameters":{"text":"Brake hard now"},"rationale":"r","evidence":{"labels":["x"]}}]})",
      StrategyPrompt{});
  EXPECT_TRUE(r.schema_valid);
  EXPECT_TRUE(r.low_level());
}
