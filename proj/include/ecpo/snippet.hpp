#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ecpo/policy.hpp"

namespace ecpo {

/// Source layer of a stored constraint. The contextual layer has no snippets:
/// it is instantiated by the perception summary.
enum class SnippetLayer { Legal, Vehicle, Driver };

std::string_view to_string(SnippetLayer l);
std::optional<SnippetLayer> parse_snippet_layer(std::string_view s);

enum class SensitivityLevel { None, Low, Medium, High };

std::string_view to_string(SensitivityLevel l);
std::optional<SensitivityLevel> parse_sensitivity_level(std::string_view s);

/// Activation condition: the assertion only binds when the driver's
/// sensitivity `key` is at least `level`.
struct SensitivityGate {
  std::string key;
  SensitivityLevel level = SensitivityLevel::High;

  bool operator==(const SensitivityGate&) const = default;
};

/// Machine-readable surrogate of a natural-language clause, evaluated by the
/// validator against the policy's structured fields.
struct Assertions {
  std::set<ActionType> forbidden_action_types;
  std::vector<ParameterBound> parameter_bounds;
  /// Present marks the modality preference as binding. An empty set binds to
  /// the driver's own alert_modality_preference.
  std::optional<std::set<std::string>> required_modalities;
  std::vector<std::string> forbidden_keywords;  // word patterns, see compile_word_pattern
  std::set<std::string> forbidden_modalities;
  std::optional<SensitivityGate> when_sensitivity;

  bool operator==(const Assertions&) const = default;
};

/// Throws Error("BAD_ASSERTION") when a bound has min > max or a keyword does
/// not compile.
void check_assertions(const Assertions& a);

struct ConstraintSnippet {
  std::string snippet_id;
  SnippetLayer layer = SnippetLayer::Legal;
  std::optional<std::string> jurisdiction;
  std::optional<std::string> vehicle_config;
  std::string clause_id;
  std::string text;
  std::optional<Assertions> assertions;
  std::uint64_t version = 0;  // store version that introduced the snippet

  bool operator==(const ConstraintSnippet&) const = default;
};

/// Higher value = higher priority (legal 3, vehicle 2, driver 1).
int priority(SnippetLayer l);

}  // namespace ecpo
