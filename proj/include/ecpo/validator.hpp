#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecpo/hazards.hpp"
#include "ecpo/low_level.hpp"
#include "ecpo/perception.hpp"
#include "ecpo/policy.hpp"

namespace ecpo {

/// Constraint layers in descending priority. The underlying value is the
/// severity a violation in that layer assigns.
enum class CheckLayer : int { Legal = 4, Vehicle = 3, Driver = 2, Contextual = 1 };

std::string_view to_string(CheckLayer l);
inline int severity(CheckLayer l) { return static_cast<int>(l); }

struct CheckResult {
  std::string check_id;
  CheckLayer layer = CheckLayer::Contextual;
  bool passed = true;
  bool applicable = true;  // false => passed with detail "not applicable"
  std::string detail;
  std::optional<std::string> clause_ref;

  bool operator==(const CheckResult&) const = default;
};

/// Severity L in 0..4 and count C of distinct failed checks.
struct ViolationSummary {
  int severity = 0;
  int count = 0;

  bool operator==(const ViolationSummary&) const = default;
};

ViolationSummary violation_summary(std::span<const CheckResult> checks);

/// max(0, 1 - L/4 - 0.1 * min(C, 10))
double core_score(const ViolationSummary& v);

struct EcpoWeights {
  double core = 0.5;
  double evidence = 0.3;
  double structure = 0.2;

  bool operator==(const EcpoWeights&) const = default;
};

/// Throws Error("BAD_WEIGHTS") unless all weights are finite, non-negative and
/// sum to 1 within 1e-9.
void check_weights(const EcpoWeights& w);

double ecpo_score(double s_core, double s_evd, double s_str, const EcpoWeights& w = {});

struct EvidenceMatchConfig {
  double threshold = 0.5;  // Jaccard over content tokens
};

/// Mean over actions of the fraction of evidence entries that match z or a
/// snippet. Actions without evidence contribute 0; no actions gives 0.
double evidence_coverage(const PolicyAction& policy, const PerceptionSummary& z,
                         std::span<const ConstraintSnippet> snippets,
                         const EvidenceMatchConfig& cfg = {});

struct ValidatorConfig {
  EcpoWeights weights;
  PenaltyTable penalties;
  ParseOptions parse;
  EvidenceMatchConfig evidence;
  std::shared_ptr<const ControlLexicon> lexicon;
  std::shared_ptr<const HazardRules> hazards;
  std::shared_ptr<const ManeuverVocabulary> maneuvers;

  /// Built-in lexicon, hazard rules and maneuver vocabulary.
  static ValidatorConfig defaults();

  const ControlLexicon& lexicon_or_builtin() const;
  const HazardRules& hazards_or_builtin() const;
  const ManeuverVocabulary& maneuvers_or_builtin() const;
};

/// Registered check ids, in evaluation order.
const std::vector<std::string>& check_inventory();

/// Runs every registered check once, legal -> vehicle -> driver -> contextual,
/// without early termination.
std::vector<CheckResult> run_layered_checks(const PolicyAction& policy,
                                            const StrategyPrompt& prompt,
                                            const ValidatorConfig& config = ValidatorConfig::defaults());

struct EcpoReport {
  bool schema_valid = false;
  std::vector<StructuralDefect> defects;
  std::vector<CheckResult> checks;
  ViolationSummary violation;
  double s_core = 0.0;
  double s_evd = 0.0;
  double s_str = 0.0;
  double ecpo = 0.0;
  EcpoWeights weights_used;
  std::vector<LowLevelMatch> low_level_matches;
  HazardSet hazards_truth;
  HazardSet hazards_addressed;

  bool low_level() const { return !low_level_matches.empty(); }
};

/// Full pipeline for one candidate. Unparseable or schema-invalid documents get
/// every component and the aggregate set to 0 and no checks.
EcpoReport validate(std::string_view document, const StrategyPrompt& prompt,
                    const ValidatorConfig& config = ValidatorConfig::defaults());

/// Same as validate() for an already parsed outcome.
EcpoReport validate(const ParseOutcome& outcome, const StrategyPrompt& prompt,
                    const ValidatorConfig& config = ValidatorConfig::defaults());

}  // namespace ecpo
