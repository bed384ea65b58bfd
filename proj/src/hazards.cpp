#include "ecpo/hazards.hpp"

#include <fstream>
#include <sstream>

#include "ecpo/defaults.hpp"
#include "ecpo/error.hpp"
#include "ecpo/text.hpp"

namespace ecpo {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(text::trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string strip_comment(std::string line) {
  if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
  return text::trim(line);
}

std::string read_file(const std::string& path, const char* code) {
  std::ifstream in(path);
  if (!in) throw Error(code, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TriggerSet::TriggerSet(const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) {
    auto seq = text::stems(text::tokenize(p));
    if (seq.empty()) continue;
    phrases_.push_back(text::trim(p));
    sequences_.push_back(std::move(seq));
  }
}

bool TriggerSet::matches(const std::vector<std::string>& text_stems) const {
  for (const auto& seq : sequences_) {
    if (text::contains_sequence(text_stems, seq)) return true;
  }
  return false;
}

bool TriggerSet::matches(std::string_view text) const {
  return matches(text::stems(text::tokenize(text)));
}

HazardRules HazardRules::parse(std::istream& in) {
  HazardRules out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = strip_comment(line);
    if (body.empty()) continue;
    const auto where = "line " + std::to_string(lineno) + ": ";
    const auto fields = split(body, ';');
    if (fields.size() != 3) throw Error("BAD_RULE", where + "expected 'triggers ; scopes ; hazard'");

    HazardRule rule;
    rule.triggers = TriggerSet(split(fields[0], '|'));
    if (rule.triggers.phrases().empty()) throw Error("BAD_RULE", where + "rule has no triggers");

    rule.scopes = 0;
    for (const auto& s : split(fields[1], ',')) {
      const auto k = text::snake_key(s);
      if (k == "all") rule.scopes |= kScopeAll;
      else if (k == "labels") rule.scopes |= kScopeLabels;
      else if (k == "summaries") rule.scopes |= kScopeSummaries;
      else if (k == "snippets") rule.scopes |= kScopeSnippets;
      else if (k == "policy_text") rule.scopes |= kScopePolicyText;
      else throw Error("BAD_RULE", where + "unknown scope '" + s + "'");
    }
    rule.hazard = text::snake_key(fields[2]);
    if (rule.hazard.empty()) throw Error("BAD_RULE", where + "empty hazard id");
    out.rules_.push_back(std::move(rule));
  }
  return out;
}

HazardRules HazardRules::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

HazardRules HazardRules::load(const std::string& path) { return parse(read_file(path, "BAD_RULE")); }

const HazardRules& HazardRules::builtin() {
  static const HazardRules rules = parse(defaults::kHazardRules);
  return rules;
}

HazardSet HazardRules::vocabulary() const {
  HazardSet out;
  for (const auto& r : rules_) out.insert(r.hazard);
  return out;
}

HazardSet HazardRules::fired(std::string_view text, HazardScope scope) const {
  HazardSet out;
  const auto stems = text::stems(text::tokenize(text));
  for (const auto& r : rules_) {
    if ((r.scopes & scope) != 0 && r.triggers.matches(stems)) out.insert(r.hazard);
  }
  return out;
}

HazardSet derive_hazards(const PerceptionSummary& z, std::span<const ConstraintSnippet> snippets,
                         const HazardRules& rules) {
  HazardSet out;
  const auto merge = [&](const HazardSet& s) { out.insert(s.begin(), s.end()); };
  for (const auto* labels : {&z.driver_labels, &z.scene_labels}) {
    for (const auto& l : *labels) merge(rules.fired(l, kScopeLabels));
  }
  for (const auto* stage : {&z.summary_initial, &z.summary_transition, &z.summary_final}) {
    merge(rules.fired(*stage, kScopeSummaries));
  }
  for (const auto& s : snippets) merge(rules.fired(s.text, kScopeSnippets));
  return out;
}

std::string action_text(const Action& action) {
  std::string out = action.rationale;
  for (const auto& [key, value] : action.parameters) {
    if (const auto* s = std::get_if<std::string>(&value)) {
      out += "\n";
      out += *s;
    }
  }
  return out;
}

HazardSet extract_addressed_hazards(const PolicyAction& policy, const HazardRules& rules) {
  HazardSet out;
  const auto merge = [&](std::string_view t) {
    const auto s = rules.fired(t, kScopePolicyText);
    out.insert(s.begin(), s.end());
  };
  merge(policy.objectives);
  const auto& c = policy.constraints;
  for (const auto* entry : {&c.legal_regulations, &c.vehicle_limits, &c.driver_preferences,
                            &c.contextual_evidence}) {
    if (*entry) merge(**entry);
  }
  for (const auto& a : policy.actions) merge(action_text(a));
  return out;
}

ManeuverVocabulary ManeuverVocabulary::parse(std::string_view text) {
  ManeuverVocabulary out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto body = strip_comment(line);
    if (body.empty()) continue;
    auto aliases = split(body, '|');
    Maneuver m{aliases.front(), TriggerSet(aliases)};
    if (m.aliases.phrases().empty()) continue;
    out.maneuvers_.push_back(std::move(m));
  }
  return out;
}

ManeuverVocabulary ManeuverVocabulary::load(const std::string& path) {
  return parse(read_file(path, "BAD_MANEUVERS"));
}

const ManeuverVocabulary& ManeuverVocabulary::builtin() {
  static const ManeuverVocabulary vocab = parse(defaults::kManeuverTerms);
  return vocab;
}

std::vector<std::string> ManeuverVocabulary::mentioned(std::string_view text) const {
  const auto stems = text::stems(text::tokenize(text));
  std::vector<std::string> out;
  for (const auto& m : maneuvers_) {
    if (m.aliases.matches(stems)) out.push_back(m.name);
  }
  return out;
}

}  // namespace ecpo
