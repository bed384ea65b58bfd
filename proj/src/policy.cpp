#include "ecpo/policy.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "ecpo/text.hpp"
#include "json.hpp"

namespace ecpo {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string alnum_key(std::string_view s) {
  std::string out;
  for (char c : s) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) out.push_back(c);
    if (c >= 'A' && c <= 'Z') out.push_back(static_cast<char>(c - 'A' + 'a'));
  }
  return out;
}

enum class Layer { Legal, Vehicle, Driver, Contextual };

std::optional<Layer> ledger_layer(std::string_view key) {
  const auto k = text::snake_key(key);
  if (k == "legal_regulations" || k == "legal_regulation" || k == "legal") return Layer::Legal;
  if (k == "vehicle_limits" || k == "vehicle_limit" || k == "vehicle") return Layer::Vehicle;
  if (k == "driver_preferences" || k == "driver_preference" || k == "driver") return Layer::Driver;
  if (k == "contextual_evidence" || k == "contextual" || k == "context") return Layer::Contextual;
  return std::nullopt;
}

std::optional<std::string>& ledger_slot(ConstraintLedger& l, Layer layer) {
  switch (layer) {
    case Layer::Legal: return l.legal_regulations;
    case Layer::Vehicle: return l.vehicle_limits;
    case Layer::Driver: return l.driver_preferences;
    case Layer::Contextual: return l.contextual_evidence;
  }
  return l.contextual_evidence;
}

bool blank(std::string_view s) { return text::trim(s).empty(); }

class Parser {
public:
  explicit Parser(const ParseOptions& opts) : opts_(opts) {}

  ParseOutcome run(std::string_view document) {
    ParseOutcome out;
    if (!text::is_valid_utf8(document)) {
      add(DefectCode::Unparseable, "", "document is not valid UTF-8");
      out.defects = std::move(defects_);
      return out;
    }
    json doc = json::parse(document, nullptr, /*allow_exceptions=*/false,
                           /*ignore_comments=*/true);
    if (doc.is_discarded()) {
      add(DefectCode::Unparseable, "", "document is not well-formed JSON");
      out.defects = std::move(defects_);
      return out;
    }
    if (!doc.is_object()) {
      add(DefectCode::Unparseable, "", "top-level value must be an object");
      out.defects = std::move(defects_);
      return out;
    }

    PolicyAction policy;
    const json* objectives = nullptr;
    const json* constraints = nullptr;
    const json* actions = nullptr;
    for (const auto& [key, value] : doc.items()) {
      const auto k = text::snake_key(key);
      if (k == "objectives" || k == "objective") {
        objectives = &value;
      } else if (k == "constraints") {
        constraints = &value;
      } else if (k == "actions") {
        actions = &value;
      } else {
        add(DefectCode::UnknownField, "/" + key, "unknown top-level field");
      }
    }

    policy.objectives = parse_objectives(objectives);
    policy.constraints = parse_ledger(constraints);
    parse_actions(actions, policy.actions);

    const bool hard = std::any_of(defects_.begin(), defects_.end(),
                                  [](const StructuralDefect& d) { return is_hard(d.code); });
    if (!hard) out.policy = std::move(policy);
    out.defects = std::move(defects_);
    return out;
  }

private:
  void add(DefectCode code, std::string path, std::string message) {
    defects_.push_back({code, std::move(path), std::move(message)});
  }

  std::string parse_objectives(const json* v) {
    std::string result;
    if (v == nullptr) {
      add(DefectCode::MissingObjectives, "/objectives", "objectives field is missing");
      return result;
    }
    if (v->is_string()) {
      result = v->get<std::string>();
    } else if (v->is_array() || v->is_object()) {
      // {"...": "statement"} or ["statement", ...] collapse to one statement
      for (const auto& item : *v) {
        if (!item.is_string()) continue;
        if (!result.empty()) result.push_back(' ');
        result += item.get<std::string>();
      }
    }
    if (blank(result)) {
      add(DefectCode::MissingObjectives, "/objectives", "objectives statement is empty");
    }
    return result;
  }

  void ledger_entry(ConstraintLedger& ledger, const std::string& key, const json& value,
                    const std::string& path) {
    const auto layer = ledger_layer(key);
    if (!layer) {
      add(DefectCode::UnknownConstraintLayer, path, "unknown constraint layer '" + key + "'");
      return;
    }
    std::vector<std::string> entries;
    if (value.is_string()) {
      entries.push_back(value.get<std::string>());
    } else if (value.is_array()) {
      for (const auto& item : value) {
        if (item.is_string()) {
          entries.push_back(item.get<std::string>());
        } else {
          add(DefectCode::InvalidConstraintEntry, path, "non-string constraint entry");
        }
      }
    } else {
      add(DefectCode::InvalidConstraintEntry, path, "constraint entry must be a string");
      return;
    }
    auto& slot = ledger_slot(ledger, *layer);
    for (auto& e : entries) {
      if (blank(e)) {
        add(DefectCode::InvalidConstraintEntry, path, "empty constraint entry");
      } else if (slot) {
        add(DefectCode::ExtraConstraintEntry, path, "layer already has an entry; extra ignored");
      } else {
        slot = std::move(e);
      }
    }
  }

  ConstraintLedger parse_ledger(const json* v) {
    ConstraintLedger ledger;
    if (v == nullptr) {
      add(DefectCode::MissingConstraints, "/constraints", "constraint ledger is missing");
      return ledger;
    }
    if (v->is_object()) {
      for (const auto& [key, value] : v->items()) {
        ledger_entry(ledger, key, value, "/constraints/" + key);
      }
    } else if (v->is_array()) {
      for (std::size_t i = 0; i < v->size(); ++i) {
        const auto& item = (*v)[i];
        const auto path = "/constraints/" + std::to_string(i);
        if (!item.is_object()) {
          add(DefectCode::InvalidConstraintEntry, path, "ledger list items must be keyed entries");
          continue;
        }
        for (const auto& [key, value] : item.items()) {
          ledger_entry(ledger, key, value, path + "/" + key);
        }
      }
    } else {
      add(DefectCode::MissingConstraints, "/constraints", "constraint ledger has invalid type");
      return ledger;
    }
    if (ledger.empty()) {
      add(DefectCode::MissingConstraints, "/constraints", "constraint ledger has no entries");
    }
    return ledger;
  }

  void parse_actions(const json* v, std::vector<Action>& out) {
    if (v == nullptr || !v->is_array()) {
      add(DefectCode::MissingActions, "/actions", "actions array is missing");
      return;
    }
    if (v->empty()) {
      add(DefectCode::NoActions, "/actions", "actions array is empty");
      return;
    }
    if (v->size() > opts_.j_max) {
      add(DefectCode::TooManyActions, "/actions",
          std::to_string(v->size()) + " actions exceed the limit of " +
              std::to_string(opts_.j_max));
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto path = "/actions/" + std::to_string(i);
      if (auto a = parse_action((*v)[i], path)) out.push_back(std::move(*a));
    }
  }

  std::optional<Action> parse_action(const json& v, const std::string& path) {
    if (!v.is_object()) {
      add(DefectCode::InvalidAction, path, "action must be an object");
      return std::nullopt;
    }
    Action action;
    const json* type = nullptr;
    const json* params = nullptr;
    const json* rationale = nullptr;
    const json* evidence = nullptr;
    for (const auto& [key, value] : v.items()) {
      const auto k = text::snake_key(key);
      if (k == "type") {
        type = &value;
      } else if (k == "parameters" || k == "params") {
        params = &value;
      } else if (k == "rationale") {
        rationale = &value;
      } else if (k == "evidence") {
        evidence = &value;
      } else {
        add(DefectCode::UnknownField, path + "/" + key, "unknown action field");
      }
    }

    bool ok = true;
    if (type == nullptr) {
      add(DefectCode::UnknownActionType, path + "/type", "action type is missing");
      ok = false;
    } else if (!type->is_string()) {
      add(DefectCode::UnknownActionType, path + "/type", "action type must be a string");
      ok = false;
    } else if (auto t = parse_action_type(type->get<std::string>())) {
      action.type = *t;
    } else {
      add(DefectCode::UnknownActionType, path + "/type",
          "unmappable action type '" + type->get<std::string>() + "'");
      ok = false;
    }

    if (params != nullptr) parse_parameters(*params, path + "/parameters", action.parameters);

    if (rationale != nullptr && rationale->is_string()) action.rationale = rationale->get<std::string>();
    if (blank(action.rationale)) {
      add(DefectCode::MissingRationale, path + "/rationale", "action has no rationale");
    }

    parse_evidence(evidence, path + "/evidence", action.evidence);
    if (!ok) return std::nullopt;
    return action;
  }

  void parse_parameters(const json& v, const std::string& path,
                        std::map<std::string, ParamValue>& out) {
    if (!v.is_object()) {
      add(DefectCode::InvalidParameters, path, "parameters must be an object");
      return;
    }
    for (const auto& [key, value] : v.items()) {
      const auto k = text::snake_key(key);
      const auto p = path + "/" + key;
      if (k.empty()) {
        add(DefectCode::InvalidParameterValue, p, "empty parameter key");
        continue;
      }
      if (out.contains(k)) {
        add(DefectCode::InvalidParameters, p, "duplicate parameter key after normalization");
        continue;
      }
      if (value.is_string()) {
        out.emplace(k, value.get<std::string>());
      } else if (value.is_number_integer() && !value.is_number_unsigned()) {
        out.emplace(k, value.get<std::int64_t>());
      } else if (value.is_number_unsigned()) {
        const auto u = value.get<std::uint64_t>();
        if (u <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
          out.emplace(k, static_cast<std::int64_t>(u));
        } else {
          out.emplace(k, static_cast<double>(u));
        }
      } else if (value.is_number_float()) {
        out.emplace(k, value.get<double>());
      } else {
        add(DefectCode::InvalidParameterValue, p, "parameter values must be string or number");
      }
    }
  }

  void evidence_list(const json& v, const std::string& path, std::vector<std::string>& out) {
    if (v.is_string()) {
      if (blank(v.get_ref<const std::string&>())) {
        add(DefectCode::InvalidEvidence, path, "blank evidence entry");
      } else {
        out.push_back(v.get<std::string>());
      }
      return;
    }
    if (!v.is_array()) {
      add(DefectCode::InvalidEvidence, path, "evidence list must be an array of strings");
      return;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto& item = v[i];
      if (!item.is_string() || blank(item.get_ref<const std::string&>())) {
        add(DefectCode::InvalidEvidence, path + "/" + std::to_string(i),
            "evidence entries must be non-blank strings");
        continue;
      }
      out.push_back(item.get<std::string>());
    }
  }

  void parse_evidence(const json* v, const std::string& path, Evidence& ev) {
    if (v != nullptr && !v->is_object()) {
      add(DefectCode::InvalidEvidence, path, "evidence must be an object");
    } else if (v != nullptr) {
      for (const auto& [key, value] : v->items()) {
        const auto k = text::snake_key(key);
        const auto p = path + "/" + key;
        if (k == "in_cabin_text" || k == "in_cabin") {
          evidence_list(value, p, ev.in_cabin_text);
        } else if (k == "out_of_vehicle_text" || k == "out_of_vehicle" ||
                   k == "out_of_cabin_text") {
          evidence_list(value, p, ev.out_of_vehicle_text);
        } else if (k == "objects") {
          evidence_list(value, p, ev.objects);
        } else if (k == "labels") {
          evidence_list(value, p, ev.labels);
        } else {
          add(DefectCode::UnknownField, p, "unknown evidence field");
        }
      }
    }
    if (ev.empty()) add(DefectCode::EmptyEvidence, path, "action cites no evidence");
  }

  ParseOptions opts_;
  std::vector<StructuralDefect> defects_;
};

ordered_json param_json(const ParamValue& v) {
  return std::visit([](const auto& x) { return ordered_json(x); }, v);
}

}  // namespace

std::string_view to_string(ActionType t) {
  switch (t) {
    case ActionType::DrivingSuggestion: return "driving_suggestion";
    case ActionType::HmiPrompt: return "hmi_prompt";
    case ActionType::Hvac: return "hvac";
    case ActionType::AmbientLight: return "ambient_light";
  }
  return "unknown";
}

std::optional<ActionType> parse_action_type(std::string_view s) {
  const auto k = alnum_key(s);
  if (k == "drivingsuggestion" || k == "drivingsuggest" || k == "drivingsuggestions" ||
      k == "driving") {
    return ActionType::DrivingSuggestion;
  }
  if (k == "hmiprompt" || k == "hmi" || k == "hmiprompts") return ActionType::HmiPrompt;
  if (k == "hvac") return ActionType::Hvac;
  if (k == "ambientlight" || k == "ambientlighting" || k == "ambient") {
    return ActionType::AmbientLight;
  }
  return std::nullopt;
}

std::optional<double> numeric_value(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  const auto s = text::trim(std::get<std::string>(v));
  double out = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr == first) return std::nullopt;
  for (const auto* p = ptr; p != last; ++p) {
    if (*p >= '0' && *p <= '9') return std::nullopt;
  }
  return out;
}

std::string_view to_string(DefectCode c) {
  switch (c) {
    case DefectCode::Unparseable: return "UNPARSEABLE";
    case DefectCode::MissingActions: return "MISSING_ACTIONS";
    case DefectCode::NoActions: return "NO_ACTIONS";
    case DefectCode::TooManyActions: return "TOO_MANY_ACTIONS";
    case DefectCode::InvalidAction: return "INVALID_ACTION";
    case DefectCode::UnknownActionType: return "UNKNOWN_ACTION_TYPE";
    case DefectCode::MissingObjectives: return "MISSING_OBJECTIVES";
    case DefectCode::MissingConstraints: return "MISSING_CONSTRAINTS";
    case DefectCode::MissingRationale: return "MISSING_RATIONALE";
    case DefectCode::EmptyEvidence: return "EMPTY_EVIDENCE";
    case DefectCode::UnknownField: return "UNKNOWN_FIELD";
    case DefectCode::UnknownConstraintLayer: return "UNKNOWN_CONSTRAINT_LAYER";
    case DefectCode::ExtraConstraintEntry: return "EXTRA_CONSTRAINT_ENTRY";
    case DefectCode::InvalidConstraintEntry: return "INVALID_CONSTRAINT_ENTRY";
    case DefectCode::InvalidParameters: return "INVALID_PARAMETERS";
    case DefectCode::InvalidParameterValue: return "INVALID_PARAMETER_VALUE";
    case DefectCode::InvalidEvidence: return "INVALID_EVIDENCE";
  }
  return "UNKNOWN";
}

bool is_hard(DefectCode c) {
  switch (c) {
    case DefectCode::Unparseable:
    case DefectCode::MissingActions:
    case DefectCode::NoActions:
    case DefectCode::TooManyActions:
    case DefectCode::InvalidAction:
    case DefectCode::UnknownActionType:
      return true;
    default:
      return false;
  }
}

ParseOutcome parse_policy(std::string_view document, const ParseOptions& options) {
  try {
    return Parser(options).run(document);
  } catch (const std::exception& e) {
    // allocation failure or a library exception we did not anticipate
    ParseOutcome out;
    out.defects.push_back({DefectCode::Unparseable, "", e.what()});
    return out;
  }
}

std::string serialize_policy(const PolicyAction& policy) {
  ordered_json doc;
  doc["objectives"] = policy.objectives;
  ordered_json ledger = ordered_json::object();
  const auto put = [&](const char* key, const std::optional<std::string>& v) {
    if (v) ledger[key] = *v;
  };
  put("legal_regulations", policy.constraints.legal_regulations);
  put("vehicle_limits", policy.constraints.vehicle_limits);
  put("driver_preferences", policy.constraints.driver_preferences);
  put("contextual_evidence", policy.constraints.contextual_evidence);
  doc["constraints"] = std::move(ledger);

  ordered_json actions = ordered_json::array();
  for (const auto& a : policy.actions) {
    ordered_json act;
    act["type"] = std::string(to_string(a.type));
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : a.parameters) params[k] = param_json(v);
    act["parameters"] = std::move(params);
    act["rationale"] = a.rationale;
    ordered_json ev;
    ev["in_cabin_text"] = a.evidence.in_cabin_text;
    ev["out_of_vehicle_text"] = a.evidence.out_of_vehicle_text;
    ev["objects"] = a.evidence.objects;
    ev["labels"] = a.evidence.labels;
    act["evidence"] = std::move(ev);
    actions.push_back(std::move(act));
  }
  doc["actions"] = std::move(actions);
  return doc.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

double structural_score(const std::vector<StructuralDefect>& defects,
                        const PenaltyTable& penalties) {
  double objectives = 0.0;
  double constraints = 0.0;
  double rationale = 0.0;
  double evidence = 0.0;
  double other = 0.0;
  for (const auto& d : defects) {
    switch (d.code) {
      case DefectCode::MissingObjectives: objectives = penalties.missing_objectives; break;
      case DefectCode::MissingConstraints: constraints = penalties.missing_constraints; break;
      case DefectCode::MissingRationale: rationale += penalties.missing_rationale; break;
      case DefectCode::EmptyEvidence: evidence += penalties.empty_evidence; break;
      default:
        if (is_hard(d.code)) return 0.0;
        other += penalties.other_soft;
    }
  }
  rationale = std::min(rationale, penalties.rationale_cap);
  evidence = std::min(evidence, penalties.evidence_cap);
  const double s = 1.0 - objectives - constraints - rationale - evidence - other;
  return std::clamp(s, 0.0, 1.0);
}

double structural_score(const ParseOutcome& outcome, const PenaltyTable& penalties) {
  if (!outcome.valid()) return 0.0;
  return structural_score(outcome.defects, penalties);
}

}  // namespace ecpo
