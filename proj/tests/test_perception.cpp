#include <gtest/gtest.h>

#include <set>

#include "ecpo/error.hpp"
#include "ecpo/perception.hpp"

using namespace ecpo;

namespace {

HalfSample half(std::string id, Split s) {
  HalfSample h;
  h.sample_id = std::move(id);
  h.split = s;
  return h;
}

HeadLabels heads(const std::string& emotion, const std::string& behavior, const std::string& scene,
                 const std::string& motion) {
  return {{"emotion", {emotion}}, {"behavior", {behavior}}, {"traffic_scene", {scene}}, {"vehicle_motion", {motion}}};
}

}  // namespace

TEST(Perception, ParseBand) {
  EXPECT_EQ(parse_band("22-24"), (std::pair{22.0, 24.0}));
  EXPECT_EQ(parse_band("22–24°C"), (std::pair{22.0, 24.0}));
  EXPECT_EQ(parse_band("24 to 22"), (std::pair{22.0, 24.0}));
  EXPECT_FALSE(parse_band("warm").has_value());
}

TEST(Perception, VehicleProfileCheck) {
  VehicleProfile v;
  v.available_actuators = {ActionType::HmiPrompt};
  v.capability_limits = {{ActionType::Hvac, "target_temperature", 16, 30}};
  EXPECT_THROW(check_vehicle_profile(v), Error);
  v.available_actuators.insert(ActionType::Hvac);
  EXPECT_NO_THROW(check_vehicle_profile(v));
}

TEST(Perception, EmptyStagesAreReported) {
  PerceptionSummary z;
  z.summary_transition = "x";
  EXPECT_EQ(z.empty_stages(), (std::vector<std::string>{"initial", "final"}));
}

TEST(Perception, VocabularyLookup) {
  const auto& v = LabelVocabulary::builtin();
  EXPECT_TRUE(v.is_known("Traffic Jam"));
  EXPECT_TRUE(v.is_known("emotion: neutral"));
  EXPECT_FALSE(v.is_known("emotion: traffic jam"));
  EXPECT_FALSE(v.is_known("levitation"));
  EXPECT_THROW(LabelVocabulary::parse("{}"), Error);
}

TEST(Perception, LcgMatchesReferenceRecurrence) {
  Lcg64 rng(42);
  std::uint64_t s = 42;
  for (int i = 0; i < 5; ++i) {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    EXPECT_EQ(rng.next(), static_cast<std::uint32_t>(s >> 32));
  }
}

TEST(Perception, BelowStaysInRange) {
  Lcg64 rng(7);
  for (std::uint32_t n : {1u, 2u, 3u, 7u, 1000u}) {
    for (int i = 0; i < 200; ++i) EXPECT_LT(rng.below(n), n);
  }
}

TEST(Perception, SingleElementPairing) {
  const std::vector<HalfSample> in{half("i0", Split::Train)};
  const std::vector<HalfSample> out{half("o0", Split::Train)};
  const auto p = pair_mixed(in, out, 123, 1);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].out_ids, std::vector<std::string>{"o0"});
  EXPECT_EQ(p[0].record.prompt.prompt_id, "i0|o0");
}

TEST(Perception, PairingErrors) {
  const std::vector<HalfSample> in{half("i0", Split::Val)};
  const std::vector<HalfSample> out{half("o0", Split::Train)};
  EXPECT_THROW(pair_mixed(in, out, 1, 1), Error);
  EXPECT_THROW(pair_mixed(in, out, 1, 0), Error);
}

TEST(Perception, PairingMergesContent) {
  auto i = half("i", Split::Test);
  i.z.driver_labels = {"anxiety"};
  i.z.summary_initial = "driver tense";
  i.z.objects = {"car_1"};
  i.ground_truth_labels = {{"emotion", {"anxiety"}}};
  auto o = half("o", Split::Test);
  o.z.scene_labels = {"traffic jam"};
  o.z.summary_initial = "queue ahead";
  o.z.objects = {"car_1", "bus_2"};
  o.ground_truth_labels = {{"traffic_scene", {"traffic jam"}}};
  const auto p = pair_mixed(std::vector{i}, std::vector{o}, 5, 1);
  const auto& z = p[0].record.prompt.z;
  EXPECT_EQ(z.summary_initial, "driver tense queue ahead");
  EXPECT_EQ(z.objects, (std::vector<std::string>{"car_1", "bus_2"}));
  EXPECT_EQ(z.scene_labels, std::set<std::string>{"traffic jam"});
  EXPECT_EQ(p[0].record.ground_truth_labels.size(), 2u);
  EXPECT_EQ(p[0].record.split, Split::Test);
}

TEST(Perception, DifferentSeedsChangePairings) {
  std::vector<HalfSample> in, out;
  for (int k = 0; k < 8; ++k) {
    in.push_back(half("i" + std::to_string(k), Split::Train));
    out.push_back(half("o" + std::to_string(k), Split::Train));
  }
  EXPECT_EQ(pair_mixed(in, out, 1, 1), pair_mixed(in, out, 1, 1));
  EXPECT_NE(pair_mixed(in, out, 1, 1), pair_mixed(in, out, 2, 1));
}

TEST(Perception, ScenarioGroups) {
  const auto& v = LabelVocabulary::builtin();
  EXPECT_EQ(classify_scenario(heads("neutral", "normal driving", "smooth traffic", "forward moving"), v),
            ScenarioGroup::Nominal);
  EXPECT_EQ(classify_scenario(heads("anxiety", "normal driving", "smooth traffic", "forward moving"), v),
            ScenarioGroup::DriverCritical);
  EXPECT_EQ(classify_scenario(heads("neutral", "normal driving", "traffic jam", "forward moving"), v),
            ScenarioGroup::EnvCritical);
  EXPECT_EQ(classify_scenario(heads("anger", "normal driving", "smooth traffic", "backward moving"), v),
            ScenarioGroup::InteractionCritical);
}

TEST(Perception, StratifyPartitionsAndReportsMissingHeads) {
  const auto& v = LabelVocabulary::builtin();
  std::vector<SampleRecord> recs(3);
  recs[0].ground_truth_labels = heads("neutral", "normal driving", "smooth traffic", "forward moving");
  recs[1].ground_truth_labels = heads("anxiety", "normal driving", "smooth traffic", "forward moving");
  recs[2].ground_truth_labels = heads("anxiety", "looking around", "traffic jam", "parking");
  const auto g = stratify(recs, v);
  ASSERT_EQ(g.size(), 4u);
  std::size_t total = 0;
  for (const auto& [k, r] : g) total += r.size();
  EXPECT_EQ(total, 3u);
  EXPECT_EQ(g.at(ScenarioGroup::EnvCritical).size(), 0u);

  HeadLabels missing = heads("neutral", "normal driving", "smooth traffic", "forward moving");
  missing.erase("vehicle_motion");
  try {
    classify_scenario(missing, v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "MISSING_HEAD");
  }
  StratifyHeads custom;
  custom.env_heads = {"weather"};
  HeadLabels w = heads("neutral", "normal driving", "smooth traffic", "forward moving");
  w["weather"] = {"rain"};
  try {
    classify_scenario(w, v, custom);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "MISSING_NOMINAL");
  }
}
