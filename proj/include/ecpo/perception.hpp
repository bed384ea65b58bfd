#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecpo/policy.hpp"
#include "ecpo/snippet.hpp"

namespace ecpo {

/// Structured perception output: discrete driver/scene labels, the three-stage
/// textual summary and referenced object identifiers.
struct PerceptionSummary {
  std::set<std::string> driver_labels;
  std::set<std::string> scene_labels;
  std::string summary_initial;
  std::string summary_transition;
  std::string summary_final;
  std::vector<std::string> objects;

  /// Names of stages that are empty ("initial", "transition", "final").
  std::vector<std::string> empty_stages() const;
  bool operator==(const PerceptionSummary&) const = default;
};

struct DriverProfile {
  std::string alert_modality_preference;
  std::string alert_frequency;
  std::map<std::string, SensitivityLevel> sensitivities;
  std::string style_preference;
  std::map<std::string, std::string> cabin_preferences;  // e.g. temperature_band -> "22-24"

  bool operator==(const DriverProfile&) const = default;
};

/// "22-24", "22–24", "22 to 24" or "22..24", with an optional unit. Reversed
/// ends are swapped.
std::optional<std::pair<double, double>> parse_band(std::string_view s);

struct VehicleProfile {
  std::string jurisdiction;
  std::string operating_mode;
  std::set<ActionType> available_actuators;
  std::vector<ParameterBound> capability_limits;

  bool operator==(const VehicleProfile&) const = default;
};

/// Throws Error("BAD_PROFILE") when a capability bound names an actuator that
/// is not available or has min > max.
void check_vehicle_profile(const VehicleProfile& v);

struct StrategyPrompt {
  std::string prompt_id;
  PerceptionSummary z;
  DriverProfile driver;
  VehicleProfile vehicle;
  std::vector<ConstraintSnippet> constraints;  // retrieval order

  bool operator==(const StrategyPrompt&) const = default;
};

enum class Split { Train, Val, Test };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

using HeadLabels = std::map<std::string, std::set<std::string>>;

struct SampleRecord {
  StrategyPrompt prompt;
  std::optional<PolicyAction> reference_policy;
  Split split = Split::Train;
  HeadLabels ground_truth_labels;

  bool operator==(const SampleRecord&) const = default;
};

/// Heads, their allowed labels and (optionally) their nominal label. Labels are
/// compared after snake_key normalization ("Traffic Jam" == "traffic_jam").
class LabelVocabulary {
public:
  struct Head {
    std::string name;
    std::string group;  // "driver" or "scene"
    std::set<std::string> labels;
    std::optional<std::string> nominal;
  };

  /// JSON document {"heads": [{name, group, labels, nominal?}, ...]}.
  /// Throws Error("BAD_VOCABULARY").
  static LabelVocabulary parse(std::string_view json_text);
  static LabelVocabulary load(const std::string& path);
  static const LabelVocabulary& builtin();

  const std::vector<Head>& heads() const { return heads_; }
  const Head* find(std::string_view head) const;

  /// Bare labels ("anxiety") and head-qualified ones ("emotion: anxious") are
  /// looked up in every head or in the named head respectively.
  bool is_known(std::string_view label) const;
  std::vector<std::string> unknown_labels(const PerceptionSummary& z) const;

private:
  std::vector<Head> heads_;
};

std::string normalize_label(std::string_view label);

// ---- Mixed pairing ----------------------------------------------------------

/// 64-bit linear congruential generator with Knuth's MMIX constants
/// (a = 6364136223846793005, c = 1442695040888963407, m = 2^64). Outputs are
/// the high 32 bits of the state after each step.
class Lcg64 {
public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit Lcg64(std::uint64_t seed) : state_(seed) {}

  std::uint32_t next() {
    state_ = state_ * kMultiplier + kIncrement;
    return static_cast<std::uint32_t>(state_ >> 32);
  }

  /// Uniform in [0, n) by rejection of the biased tail; n >= 1.
  std::uint32_t below(std::uint32_t n);

private:
  std::uint64_t state_;
};

/// Fisher–Yates shuffle driven by Lcg64 (i from n-1 down to 1, j = below(i+1)).
template <typename T>
void seeded_shuffle(std::vector<T>& items, Lcg64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = rng.below(static_cast<std::uint32_t>(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Seed of the per-split generator: seed XOR (split index * 0x9E3779B97F4A7C15),
/// split index train=0, val=1, test=2.
std::uint64_t split_seed(std::uint64_t seed, Split split);

/// One single-source sample (in-cabin or out-of-cabin).
struct HalfSample {
  std::string sample_id;
  Split split = Split::Train;
  PerceptionSummary z;
  HeadLabels ground_truth_labels;

  bool operator==(const HalfSample&) const = default;
};

struct MixedPair {
  std::string in_id;
  std::vector<std::string> out_ids;
  Split split = Split::Train;
  SampleRecord record;

  bool operator==(const MixedPair&) const = default;
};

/// Split-preserving synthetic pairing. Out-of-cabin samples are shuffled per
/// split; the k-th in-cabin sample of a split (input order) receives the
/// block of shuffled positions k*block_size .. k*block_size+block_size-1,
/// taken modulo the split size. Throws Error("EMPTY_SPLIT") or
/// Error("BAD_BLOCK_SIZE").
std::vector<MixedPair> pair_mixed(std::span<const HalfSample> in_samples,
                                  std::span<const HalfSample> out_samples, std::uint64_t seed,
                                  std::size_t block_size);

// ---- Scenario stratification -----------------------------------------------

enum class ScenarioGroup { DriverCritical, EnvCritical, InteractionCritical, Nominal };

std::string_view to_string(ScenarioGroup g);

struct StratifyHeads {
  std::vector<std::string> driver_heads{"emotion", "behavior"};
  std::vector<std::string> env_heads{"traffic_scene", "vehicle_motion"};
};

/// Throws Error("MISSING_HEAD") or Error("MISSING_NOMINAL").
ScenarioGroup classify_scenario(const HeadLabels& labels, const LabelVocabulary& vocab,
                                const StratifyHeads& heads = {});

std::map<ScenarioGroup, std::vector<SampleRecord>> stratify(std::span<const SampleRecord> records,
                                                            const LabelVocabulary& vocab,
                                                            const StratifyHeads& heads = {});

}  // namespace ecpo
