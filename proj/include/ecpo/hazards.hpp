#pragma once

#include <istream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecpo/perception.hpp"
#include "ecpo/policy.hpp"
#include "ecpo/snippet.hpp"

namespace ecpo {

using HazardSet = std::set<std::string>;

/// Where a hazard rule may fire.
enum HazardScope : unsigned {
  kScopeLabels = 1u << 0,
  kScopeSummaries = 1u << 1,
  kScopeSnippets = 1u << 2,
  kScopePolicyText = 1u << 3,
  kScopeAll = kScopeLabels | kScopeSummaries | kScopeSnippets | kScopePolicyText,
};

/// Stemmed token sequences; a text matches when one of them occurs as a
/// contiguous run in the text's stemmed tokens.
class TriggerSet {
public:
  TriggerSet() = default;
  explicit TriggerSet(const std::vector<std::string>& phrases);

  bool matches(const std::vector<std::string>& text_stems) const;
  bool matches(std::string_view text) const;
  const std::vector<std::string>& phrases() const { return phrases_; }

private:
  std::vector<std::string> phrases_;
  std::vector<std::vector<std::string>> sequences_;
};

struct HazardRule {
  TriggerSet triggers;
  unsigned scopes = kScopeAll;
  std::string hazard;
};

/// Rule file: one rule per line, `triggers ; scopes ; hazard_id`, triggers
/// separated by '|', scopes by ',' (labels, summaries, snippets, policy_text,
/// all). '#' starts a comment.
class HazardRules {
public:
  /// Throws Error("BAD_RULE").
  static HazardRules parse(std::istream& in);
  static HazardRules parse(std::string_view text);
  static HazardRules load(const std::string& path);
  static const HazardRules& builtin();

  const std::vector<HazardRule>& rules() const { return rules_; }
  HazardSet vocabulary() const;

  /// Hazards whose rules include `scope` and fire on `text`.
  HazardSet fired(std::string_view text, HazardScope scope) const;

private:
  std::vector<HazardRule> rules_;
};

/// H(u): rules firing on z's labels, summary stages or snippet texts.
HazardSet derive_hazards(const PerceptionSummary& z, std::span<const ConstraintSnippet> snippets,
                         const HazardRules& rules);

/// Ĥ(u, y): rules firing on the objectives, ledger entries, rationales or
/// string parameters of the policy. Evidence is not consulted.
HazardSet extract_addressed_hazards(const PolicyAction& policy, const HazardRules& rules);

/// Text of one action that can address a hazard: rationale and string parameters.
std::string action_text(const Action& action);

/// Maneuver vocabulary: one maneuver per line, aliases separated by '|'.
class ManeuverVocabulary {
public:
  struct Maneuver {
    std::string name;  // first alias
    TriggerSet aliases;
  };

  static ManeuverVocabulary parse(std::string_view text);
  static ManeuverVocabulary load(const std::string& path);
  static const ManeuverVocabulary& builtin();

  const std::vector<Maneuver>& maneuvers() const { return maneuvers_; }
  std::vector<std::string> mentioned(std::string_view text) const;

private:
  std::vector<Maneuver> maneuvers_;
};

}  // namespace ecpo
