#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecpo/json_io.hpp"
#include "ecpo/perception.hpp"
#include "ecpo/preference.hpp"
#include "ecpo/validator.hpp"

namespace ecpo {

/// Every tunable of a batch run. Omitted keys keep the module defaults; beta and
/// lambda_ecpo have none.
struct RunConfig {
  EcpoWeights weights;
  PenaltyTable penalties;
  std::optional<std::string> lexicon_path;
  std::optional<std::string> hazard_rules_path;
  std::optional<std::string> maneuvers_path;
  std::optional<std::string> label_vocab_path;
  double match_threshold = 0.5;
  double epsilon = kMetricEpsilon;
  std::size_t j_max = 5;
  TrainingConfig training;
  std::size_t top_k = 5;
  std::size_t token_budget = 256;
  std::vector<std::uint64_t> seeds{0};
  std::size_t block_size = 1;

  /// Keys are snake_case; unknown keys are rejected. Relative paths resolve
  /// against `base_dir`. Throws Error("BAD_CONFIG"), Error("BAD_WEIGHTS") or
  /// Error("MISSING_PATH").
  static RunConfig parse(std::string_view json_text, const std::string& base_dir = ".");
  static RunConfig load(const std::string& path);

  /// Re-checks the invariants after flag overrides.
  void check() const;

  /// Loads the configured lexicon, rules and vocabularies (built-ins otherwise).
  ValidatorConfig validator_config() const;
  LabelVocabulary vocabulary() const;

  io::ojson echo() const;
};

/// "0.5,0.3,0.2". Throws Error("BAD_WEIGHTS").
EcpoWeights parse_weights(std::string_view s);

}  // namespace ecpo
