#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ecpo {

/// High-level channel an action is executed on.
enum class ActionType { DrivingSuggestion, HmiPrompt, Hvac, AmbientLight };

/// Canonical wire spelling ("driving_suggestion", "hmi_prompt", "hvac", "ambient_light").
std::string_view to_string(ActionType t);

/// Accepts the canonical spellings plus surface forms such as "Driving suggest",
/// "HMI prompt", "HVAC" or "Ambient-Light" (case, whitespace and punctuation
/// are ignored).
std::optional<ActionType> parse_action_type(std::string_view s);

inline constexpr ActionType kAllActionTypes[] = {ActionType::DrivingSuggestion,
                                                 ActionType::HmiPrompt, ActionType::Hvac,
                                                 ActionType::AmbientLight};

using ParamValue = std::variant<std::string, std::int64_t, double>;

/// Numeric view of a parameter: integers and decimals, plus strings that are
/// a plain number optionally followed by a unit ("23", "23°C", "2.5 km").
std::optional<double> numeric_value(const ParamValue& v);

/// Inclusive numeric range on one parameter of one action channel.
struct ParameterBound {
  ActionType action_type = ActionType::Hvac;
  std::string key;  // snake_case parameter key
  double min = 0.0;
  double max = 0.0;

  bool contains(double v) const { return v >= min && v <= max; }
  bool operator==(const ParameterBound&) const = default;
};

struct Evidence {
  std::vector<std::string> in_cabin_text;
  std::vector<std::string> out_of_vehicle_text;
  std::vector<std::string> objects;
  std::vector<std::string> labels;

  bool empty() const {
    return in_cabin_text.empty() && out_of_vehicle_text.empty() && objects.empty() &&
           labels.empty();
  }
  std::size_t size() const {
    return in_cabin_text.size() + out_of_vehicle_text.size() + objects.size() + labels.size();
  }
  bool operator==(const Evidence&) const = default;
};

struct Action {
  ActionType type = ActionType::HmiPrompt;
  std::map<std::string, ParamValue> parameters;  // keys are snake_case
  std::string rationale;
  Evidence evidence;

  bool operator==(const Action&) const = default;
};

/// One optional entry per layer, in priority order.
struct ConstraintLedger {
  std::optional<std::string> legal_regulations;
  std::optional<std::string> vehicle_limits;
  std::optional<std::string> driver_preferences;
  std::optional<std::string> contextual_evidence;

  bool empty() const {
    return !legal_regulations && !vehicle_limits && !driver_preferences && !contextual_evidence;
  }
  bool operator==(const ConstraintLedger&) const = default;
};

struct PolicyAction {
  std::string objectives;
  ConstraintLedger constraints;
  std::vector<Action> actions;

  bool operator==(const PolicyAction&) const = default;
};

enum class DefectCode {
  // hard: the document is schema-invalid
  Unparseable,
  MissingActions,
  NoActions,
  TooManyActions,
  InvalidAction,
  UnknownActionType,
  // soft: penalised by structural_score
  MissingObjectives,
  MissingConstraints,
  MissingRationale,
  EmptyEvidence,
  // soft: recorded, no default penalty
  UnknownField,
  UnknownConstraintLayer,
  ExtraConstraintEntry,
  InvalidConstraintEntry,
  InvalidParameters,
  InvalidParameterValue,
  InvalidEvidence,
};

std::string_view to_string(DefectCode c);
bool is_hard(DefectCode c);

struct StructuralDefect {
  DefectCode code;
  std::string path;  // JSON-pointer style, e.g. "/actions/1/type"
  std::string message;

  bool operator==(const StructuralDefect&) const = default;
};

struct ParseOutcome {
  std::optional<PolicyAction> policy;  // engaged iff Valid
  std::vector<StructuralDefect> defects;

  bool valid() const { return policy.has_value(); }
};

struct ParseOptions {
  std::size_t j_max = 5;
};

/// Total: never throws, every failure is a defect in the outcome.
ParseOutcome parse_policy(std::string_view document, const ParseOptions& options = {});

/// Canonical compact JSON: objectives, constraints (priority order, absent layers
/// omitted), actions in list order with type, parameters (sorted), rationale and
/// evidence.
std::string serialize_policy(const PolicyAction& policy);

struct PenaltyTable {
  double missing_objectives = 0.1;
  double missing_constraints = 0.1;
  double missing_rationale = 0.1;  // per action
  double rationale_cap = 0.3;
  double empty_evidence = 0.1;  // per action
  double evidence_cap = 0.3;
  double other_soft = 0.0;  // per remaining soft defect
};

/// 0 for an invalid outcome; otherwise 1 minus the penalties implied by the
/// outcome's soft defects, clamped to [0, 1].
double structural_score(const ParseOutcome& outcome, const PenaltyTable& penalties = {});

/// Same rule expressed over a bare defect list (valid documents only).
double structural_score(const std::vector<StructuralDefect>& defects,
                        const PenaltyTable& penalties = {});

}  // namespace ecpo
