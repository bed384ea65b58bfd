#include "ecpo/validator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include "ecpo/error.hpp"
#include "ecpo/text.hpp"

namespace ecpo {

std::string_view to_string(CheckLayer l) {
  switch (l) {
    case CheckLayer::Legal: return "legal";
    case CheckLayer::Vehicle: return "vehicle";
    case CheckLayer::Driver: return "driver";
    case CheckLayer::Contextual: return "contextual";
  }
  return "contextual";
}

ViolationSummary violation_summary(std::span<const CheckResult> checks) {
  ViolationSummary v;
  std::set<std::string_view> failed;
  for (const auto& c : checks) {
    if (c.passed) continue;
    if (failed.insert(c.check_id).second) ++v.count;
    v.severity = std::max(v.severity, severity(c.layer));
  }
  return v;
}

double core_score(const ViolationSummary& v) {
  const double s = 1.0 - static_cast<double>(v.severity) / 4.0 -
                   0.1 * static_cast<double>(std::min(v.count, 10));
  return std::max(0.0, s);
}

void check_weights(const EcpoWeights& w) {
  for (double x : {w.core, w.evidence, w.structure}) {
    if (!std::isfinite(x) || x < 0.0) throw Error("BAD_WEIGHTS", "weights must be finite and non-negative");
  }
  if (std::abs(w.core + w.evidence + w.structure - 1.0) > 1e-9) {
    throw Error("BAD_WEIGHTS", "weights must sum to 1");
  }
}

double ecpo_score(double s_core, double s_evd, double s_str, const EcpoWeights& w) {
  check_weights(w);
  return std::clamp(w.core * s_core + w.evidence * s_evd + w.structure * s_str, 0.0, 1.0);
}

// ---- evidence -----------------------------------------------------------------

namespace {

std::vector<std::string> sentences(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '.' || c == ';' || c == '!' || c == '?' || c == '\n') {
      if (!text::trim(cur).empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!text::trim(cur).empty()) out.push_back(cur);
  return out;
}

struct EvidenceIndex {
  std::set<std::string> exact;  // normalized labels and object ids
  std::vector<std::vector<std::string>> texts;

  EvidenceIndex(const PerceptionSummary& z, std::span<const ConstraintSnippet> snippets) {
    const auto add_text = [&](const std::string& s) {
      auto toks = text::content_tokens(s);
      if (!toks.empty()) texts.push_back(std::move(toks));
    };
    // Whole passages and their sentences, so that a cited fragment of a long
    // summary can still clear the threshold.
    const auto add_passage = [&](const std::string& s) {
      add_text(s);
      const auto parts = sentences(s);
      if (parts.size() > 1) {
        for (const auto& p : parts) add_text(p);
      }
    };
    for (const auto* labels : {&z.driver_labels, &z.scene_labels}) {
      for (const auto& l : *labels) {
        exact.insert(normalize_label(l));
        add_text(l);
      }
    }
    for (const auto& o : z.objects) {
      exact.insert(normalize_label(o));
      add_text(o);
    }
    for (const auto* stage : {&z.summary_initial, &z.summary_transition, &z.summary_final}) {
      add_passage(*stage);
    }
    for (const auto& s : snippets) add_passage(s.text);
  }

  bool matches(const std::string& entry, double threshold) const {
    if (exact.contains(normalize_label(entry))) return true;
    const auto toks = text::content_tokens(entry);
    if (toks.empty()) return false;
    return std::any_of(texts.begin(), texts.end(), [&](const std::vector<std::string>& t) {
      return text::jaccard(toks, t) >= threshold;
    });
  }
};

}  // namespace

double evidence_coverage(const PolicyAction& policy, const PerceptionSummary& z,
                         std::span<const ConstraintSnippet> snippets,
                         const EvidenceMatchConfig& cfg) {
  if (policy.actions.empty()) return 0.0;
  const EvidenceIndex index(z, snippets);
  double total = 0.0;
  for (const auto& a : policy.actions) {
    const auto& ev = a.evidence;
    const std::size_t n = ev.size();
    if (n == 0) continue;
    std::size_t matched = 0;
    for (const auto* list : {&ev.in_cabin_text, &ev.out_of_vehicle_text, &ev.objects, &ev.labels}) {
      for (const auto& entry : *list) matched += index.matches(entry, cfg.threshold) ? 1 : 0;
    }
    total += static_cast<double>(matched) / static_cast<double>(n);
  }
  return total / static_cast<double>(policy.actions.size());
}

// ---- configuration ------------------------------------------------------------

ValidatorConfig ValidatorConfig::defaults() { return {}; }

const ControlLexicon& ValidatorConfig::lexicon_or_builtin() const {
  return lexicon ? *lexicon : ControlLexicon::builtin();
}
const HazardRules& ValidatorConfig::hazards_or_builtin() const {
  return hazards ? *hazards : HazardRules::builtin();
}
const ManeuverVocabulary& ValidatorConfig::maneuvers_or_builtin() const {
  return maneuvers ? *maneuvers : ManeuverVocabulary::builtin();
}

// ---- layered checks -----------------------------------------------------------

namespace {

std::set<std::string> modality_parts(std::string_view modality) {
  std::set<std::string> out;
  for (const auto& t : text::tokenize(modality)) {
    if (t == "multimodal" || t == "multi") {
      out.insert("audio");
      out.insert("visual");
    } else if (t != "modal") {
      out.insert(t);
    }
  }
  return out;
}

std::optional<std::set<std::string>> action_modalities(const Action& a) {
  const auto it = a.parameters.find("modality");
  if (it == a.parameters.end()) return std::nullopt;
  const auto* s = std::get_if<std::string>(&it->second);
  if (s == nullptr) return std::nullopt;
  return modality_parts(*s);
}

bool gate_open(const Assertions& a, const DriverProfile& driver) {
  if (!a.when_sensitivity) return true;
  const auto it = driver.sensitivities.find(a.when_sensitivity->key);
  return it != driver.sensitivities.end() && it->second >= a.when_sensitivity->level;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string action_label(std::size_t i, const Action& a) {
  return "action " + std::to_string(i) + " (" + std::string(to_string(a.type)) + ")";
}

/// Accumulates the outcome of one check.
class CheckBuilder {
public:
  CheckBuilder(std::string id, CheckLayer layer) {
    result_.check_id = std::move(id);
    result_.layer = layer;
  }

  void applicable() { applicable_ = true; }

  void violation(std::string what, const std::optional<std::string>& clause = std::nullopt) {
    applicable_ = true;
    result_.passed = false;
    if (!result_.detail.empty()) result_.detail += "; ";
    result_.detail += what;
    if (!result_.clause_ref && clause) result_.clause_ref = clause;
  }

  CheckResult finish() {
    result_.applicable = applicable_;
    if (!applicable_) result_.detail = "not applicable";
    else if (result_.passed && result_.detail.empty()) result_.detail = "ok";
    return std::move(result_);
  }

private:
  CheckResult result_;
  bool applicable_ = false;
};

struct AssertionKinds {
  bool types = false;
  bool keywords = false;
  bool bounds = false;
  bool forbidden_modalities = false;
  bool required_modalities = false;
};

/// Evaluates the selected assertion kinds of every snippet in `layer`.
void apply_assertions(CheckBuilder& check, const PolicyAction& policy, const StrategyPrompt& prompt,
                      SnippetLayer layer, const AssertionKinds& kinds) {
  for (const auto& snip : prompt.constraints) {
    if (snip.layer != layer || !snip.assertions) continue;
    const auto& a = *snip.assertions;
    if (!gate_open(a, prompt.driver)) continue;
    const auto& clause = snip.clause_id;

    if (kinds.types && !a.forbidden_action_types.empty()) {
      check.applicable();
      for (std::size_t i = 0; i < policy.actions.size(); ++i) {
        if (a.forbidden_action_types.contains(policy.actions[i].type)) {
          check.violation(action_label(i, policy.actions[i]) + " uses a forbidden channel", clause);
        }
      }
    }
    if (kinds.keywords && !a.forbidden_keywords.empty()) {
      check.applicable();
      for (const auto& kw : a.forbidden_keywords) {
        const auto re = compile_word_pattern(kw);
        for (std::size_t i = 0; i < policy.actions.size(); ++i) {
          const auto t = action_text(policy.actions[i]);
          if (std::regex_search(t, re)) {
            check.violation(action_label(i, policy.actions[i]) + " contains forbidden keyword '" + kw + "'", clause);
          }
        }
      }
    }
    if (kinds.bounds && !a.parameter_bounds.empty()) {
      check.applicable();
      for (const auto& b : a.parameter_bounds) {
        for (std::size_t i = 0; i < policy.actions.size(); ++i) {
          const auto& act = policy.actions[i];
          if (act.type != b.action_type) continue;
          const auto it = act.parameters.find(b.key);
          if (it == act.parameters.end()) continue;
          const auto v = numeric_value(it->second);
          if (v && !b.contains(*v)) {
            check.violation(action_label(i, act) + " sets " + b.key + " outside [" +
                                    format_number(b.min) + ", " + format_number(b.max) + "]",
                            clause);
          }
        }
      }
    }
    if (kinds.forbidden_modalities && !a.forbidden_modalities.empty()) {
      check.applicable();
      for (std::size_t i = 0; i < policy.actions.size(); ++i) {
        const auto mods = action_modalities(policy.actions[i]);
        if (!mods) continue;
        for (const auto& m : *mods) {
          if (a.forbidden_modalities.contains(m)) {
            check.violation(action_label(i, policy.actions[i]) + " uses forbidden modality '" + m + "'", clause);
          }
        }
      }
    }
    if (kinds.required_modalities && a.required_modalities) {
      std::set<std::string> allowed = *a.required_modalities;
      if (allowed.empty()) allowed = modality_parts(prompt.driver.alert_modality_preference);
      if (allowed.empty()) continue;
      check.applicable();
      for (std::size_t i = 0; i < policy.actions.size(); ++i) {
        const auto mods = action_modalities(policy.actions[i]);
        if (!mods) continue;
        for (const auto& m : *mods) {
          if (!allowed.contains(m)) {
            check.violation(action_label(i, policy.actions[i]) + " uses modality '" + m +
                                "' outside the binding preference",
                            clause);
          }
        }
      }
    }
  }
}

std::optional<double> hvac_temperature(const Action& a) {
  for (const char* key : {"target_temperature", "temperature", "cabin_temperature"}) {
    if (const auto it = a.parameters.find(key); it != a.parameters.end()) return numeric_value(it->second);
  }
  return std::nullopt;
}

std::optional<std::pair<double, double>> temperature_band(const DriverProfile& d) {
  for (const char* key : {"temperature_band", "temperature", "cabin_temperature"}) {
    if (const auto it = d.cabin_preferences.find(key); it != d.cabin_preferences.end()) {
      return parse_band(it->second);
    }
  }
  return std::nullopt;
}

using CheckFn = std::function<void(CheckBuilder&, const PolicyAction&, const StrategyPrompt&,
                                   const ValidatorConfig&)>;

struct CheckSpec {
  std::string id;
  CheckLayer layer;
  CheckFn run;
};

const std::vector<CheckSpec>& registry() {
  static const std::vector<CheckSpec> specs = {
      {"legal.forbidden_action_type", CheckLayer::Legal,
       [](CheckBuilder& c, const PolicyAction& p, const StrategyPrompt& u, const ValidatorConfig&) {
         apply_assertions(c, p, u, SnippetLayer::Legal, {.types = true});
       }},
      {"legal.forbidden_keyword", CheckLayer::Legal,
       [](CheckBuilder& c, const PolicyAction& p, const StrategyPrompt& u, const ValidatorConfig&) {
         apply_assertions(c, p, u, SnippetLayer::Legal, {.keywords = true});
       }},
      {"legal.hmi_limits", CheckLayer::Legal,
       [](CheckBuilder& c, const PolicyAction& p, const StrategyPrompt& u, const ValidatorConfig&) {
         apply_assertions(c, p, u, SnippetLayer::Legal,
                          {.bounds = true, .forbidden_modalities = true, .required_modalities = true});
       }},
      {"vehicle.unavailable_actuator", CheckLayer::Vehicle,
       [](CheckBuilder& c, const PolicyAction& p, const StrategyPrompt& u, const ValidatorConfig&) {
         const auto& avail = u.vehicle.available_actuators;
         if (avail.empty()) return;
         c.applicable();
         for (std::size_t i = 0; i < p.actions.size(); ++i) {
           if (!avail.contains(p.actions[i].type)) {
             c.violation(action_label(i, p.actions[i]) + " targets an unavailable actuator");
           }
         }
       }},
      {"vehicle.capability_limits", CheckLayer::Vehicle,
       [](CheckBuilder& c, const PolicyAction& p, const StrategyPrompt& u, const ValidatorConfig&) {
         if (u.vehicle.capability_limits.empty()) return;
         c.applicable();
         for (const auto& b : u.vehicle.capability_limits) {
           for (std::size_t i = 0; i < p.actions.size(); ++i) {
             const auto& act = p.actions[i];
             if (act.type != b.action_type) continue;
             const auto it = act.parameters.find(b.key);
             if (it == act.parameters.end()) continue;
             const auto v = numeric_value(it->second);
             if (v && !b.contains(*v)) c.violation(action_label(i, act) + " exceeds capability limit on " + b.key);
           }
         }
       }},
      {"vehicle.snippet_limits", CheckLayer::Vehicle,
       [](CheckBuilder& c, const PolicyAction& p, const StrategyPrompt& u, const ValidatorConfig&) {
         apply_assertions(c, p, u, SnippetLayer::Vehicle,
                          {.types = true, .keywords = true, .bounds = true,
                           .forbidden_modalities = true, .required_modalities = true});
       }},
      {"driver.preferred_modality", CheckLayer::Driver,
       [](CheckBuilder& c, const PolicyAction& p, const StrategyPrompt& u, const ValidatorConfig&) {
         apply_assertions(c, p, u, SnippetLayer::Driver, {.required_modalities = true});
       }},
      {"driver.cabin_band", CheckLayer::Driver,
       [](CheckBuilder& c, const PolicyAction& p, const StrategyPrompt& u, const ValidatorConfig&) {
         const auto band = temperature_band(u.driver);
         if (!band) return;
         for (std::size_t i = 0; i < p.actions.size(); ++i) {
           const auto& act = p.actions[i];
           if (act.type != ActionType::Hvac) continue;
           const auto t = hvac_temperature(act);
           if (!t) continue;
           c.applicable();
           if (*t < band->first || *t > band->second) {
             c.violation(action_label(i, act) + " sets " + format_number(*t) +
                         " outside the preferred cabin band");
           }
         }
       }},
      {"driver.sensitivity", CheckLayer::Driver,
       [](CheckBuilder& c, const PolicyAction& p, const StrategyPrompt& u, const ValidatorConfig&) {
         apply_assertions(c, p, u, SnippetLayer::Driver,
                          {.types = true, .keywords = true, .bounds = true, .forbidden_modalities = true});
       }},
      {"contextual.hazard_conservatism", CheckLayer::Contextual,
       [](CheckBuilder& c, const PolicyAction& p, const StrategyPrompt& u, const ValidatorConfig& cfg) {
         const auto& rules = cfg.hazards_or_builtin();
         const auto hazards = derive_hazards(u.z, u.constraints, rules);
         if (hazards.empty()) return;
         c.applicable();
         HazardSet addressed;
         for (const auto& a : p.actions) {
           const auto h = rules.fired(action_text(a), kScopePolicyText);
           addressed.insert(h.begin(), h.end());
         }
         for (const auto& h : hazards) {
           if (!addressed.contains(h)) c.violation("hazard '" + h + "' is not addressed by any action");
         }
       }},
      {"contextual.maneuver_consistency", CheckLayer::Contextual,
       [](CheckBuilder& c, const PolicyAction& p, const StrategyPrompt& u, const ValidatorConfig& cfg) {
         const auto& vocab = cfg.maneuvers_or_builtin();
         std::string context;
         for (const auto& l : u.z.scene_labels) context += l + "\n";
         context += u.z.summary_initial + "\n" + u.z.summary_transition + "\n" + u.z.summary_final;
         const auto present = vocab.mentioned(context);
         for (std::size_t i = 0; i < p.actions.size(); ++i) {
           for (const auto& m : vocab.mentioned(action_text(p.actions[i]))) {
             c.applicable();
             if (std::find(present.begin(), present.end(), m) == present.end()) {
               c.violation(action_label(i, p.actions[i]) + " refers to maneuver '" + m +
                           "' absent from the scene");
             }
           }
         }
       }},
  };
  return specs;
}

}  // namespace

const std::vector<std::string>& check_inventory() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& s : registry()) out.push_back(s.id);
    return out;
  }();
  return ids;
}

std::vector<CheckResult> run_layered_checks(const PolicyAction& policy,
                                            const StrategyPrompt& prompt,
                                            const ValidatorConfig& config) {
  std::vector<CheckResult> out;
  out.reserve(registry().size());
  for (const auto& entry : registry()) {
    CheckBuilder b(entry.id, entry.layer);
    entry.run(b, policy, prompt, config);
    out.push_back(b.finish());
  }
  return out;
}

// ---- pipeline -----------------------------------------------------------------

EcpoReport validate(const ParseOutcome& outcome, const StrategyPrompt& prompt,
                    const ValidatorConfig& config) {
  check_weights(config.weights);
  EcpoReport r;
  r.weights_used = config.weights;
  r.defects = outcome.defects;
  r.schema_valid = outcome.valid();
  const auto& rules = config.hazards_or_builtin();
  r.hazards_truth = derive_hazards(prompt.z, prompt.constraints, rules);
  if (!outcome.valid()) return r;

  const auto& policy = *outcome.policy;
  r.low_level_matches = detect_low_level_control(policy, config.lexicon_or_builtin());
  r.checks = run_layered_checks(policy, prompt, config);
  r.violation = violation_summary(r.checks);
  r.s_core = core_score(r.violation);
  r.s_evd = evidence_coverage(policy, prompt.z, prompt.constraints, config.evidence);
  r.s_str = structural_score(outcome, config.penalties);
  r.ecpo = ecpo_score(r.s_core, r.s_evd, r.s_str, config.weights);
  r.hazards_addressed = extract_addressed_hazards(policy, rules);
  return r;
}

EcpoReport validate(std::string_view document, const StrategyPrompt& prompt,
                    const ValidatorConfig& config) {
  return validate(parse_policy(document, config.parse), prompt, config);
}

}  // namespace ecpo
