#include "ecpo/json_io.hpp"

#include <fstream>

#include "ecpo/error.hpp"
#include "ecpo/text.hpp"

namespace ecpo::io {

std::string dump(const ojson& j) { return j.dump(-1, ' ', false, ojson::error_handler_t::replace); }

json parse_line(const std::string& line) {
  json j = json::parse(line, nullptr, false, true);
  if (j.is_discarded()) throw Error("BAD_JSON", "malformed JSON record");
  return j;
}

std::vector<json> read_jsonl(std::istream& in) {
  std::vector<json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false, true);
    if (j.is_discarded()) throw Error("BAD_JSON", "line " + std::to_string(n) + ": malformed JSON");
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<json> read_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("BAD_PATH", "cannot open " + path);
  try {
    return read_jsonl(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message());
  }
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error("BAD_RECORD", what); }

const json* field(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string req_string(const json& j, const char* key) {
  const auto* v = field(j, key);
  if (v == nullptr || !v->is_string()) bad(std::string("'") + key + "' must be a string");
  return v->get<std::string>();
}

std::string opt_string(const json& j, const char* key) {
  const auto* v = field(j, key);
  if (v == nullptr) return {};
  if (!v->is_string()) bad(std::string("'") + key + "' must be a string");
  return v->get<std::string>();
}

std::string scalar_string(const json& v, const char* key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  bad(std::string("'") + key + "' must be a string or number");
}

std::vector<std::string> string_list(const json& j, const char* key) {
  const auto* v = field(j, key);
  std::vector<std::string> out;
  if (v == nullptr) return out;
  if (!v->is_array()) bad(std::string("'") + key + "' must be an array of strings");
  for (const auto& x : *v) {
    if (!x.is_string()) bad(std::string("'") + key + "' must be an array of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

std::set<std::string> string_set(const json& j, const char* key) {
  const auto v = string_list(j, key);
  return {v.begin(), v.end()};
}

double req_number(const json& j, const char* key) {
  const auto* v = field(j, key);
  if (v == nullptr || !v->is_number()) bad(std::string("'") + key + "' must be a number");
  return v->get<double>();
}

bool opt_bool(const json& j, const char* key) {
  const auto* v = field(j, key);
  if (v == nullptr) return false;
  if (!v->is_boolean()) bad(std::string("'") + key + "' must be a boolean");
  return v->get<bool>();
}

ActionType action_type_of(const json& v) {
  if (!v.is_string()) bad("action type must be a string");
  const auto t = parse_action_type(v.get<std::string>());
  if (!t) bad("unknown action type '" + v.get<std::string>() + "'");
  return *t;
}

std::set<ActionType> action_type_set(const json& j, const char* key) {
  std::set<ActionType> out;
  const auto* v = field(j, key);
  if (v == nullptr) return out;
  if (!v->is_array()) bad(std::string("'") + key + "' must be an array");
  for (const auto& x : *v) out.insert(action_type_of(x));
  return out;
}

std::vector<ParameterBound> bound_list(const json& j, const char* key) {
  std::vector<ParameterBound> out;
  const auto* v = field(j, key);
  if (v == nullptr) return out;
  if (!v->is_array()) bad(std::string("'") + key + "' must be an array");
  for (const auto& x : *v) out.push_back(bound_from_json(x));
  return out;
}

ojson type_list(const std::set<ActionType>& s) {
  ojson out = ojson::array();
  for (auto t : s) out.push_back(std::string(to_string(t)));
  return out;
}

ojson string_array(const auto& items) {
  ojson out = ojson::array();
  for (const auto& x : items) out.push_back(x);
  return out;
}

}  // namespace

ParameterBound bound_from_json(const json& j) {
  if (!j.is_object()) bad("parameter bound must be an object");
  ParameterBound b;
  const auto* t = field(j, "action_type");
  if (t == nullptr) bad("'action_type' is required");
  b.action_type = action_type_of(*t);
  b.key = text::snake_key(req_string(j, "key"));
  b.min = req_number(j, "min");
  b.max = req_number(j, "max");
  return b;
}

ojson to_json(const ParameterBound& b) {
  ojson j;
  j["action_type"] = std::string(to_string(b.action_type));
  j["key"] = b.key;
  j["min"] = b.min;
  j["max"] = b.max;
  return j;
}

Assertions assertions_from_json(const json& j) {
  if (!j.is_object()) bad("'assertions' must be an object");
  Assertions a;
  a.forbidden_action_types = action_type_set(j, "forbidden_action_types");
  a.parameter_bounds = bound_list(j, "parameter_bounds");
  if (field(j, "required_modalities") != nullptr) {
    std::set<std::string> mods;
    for (const auto& m : string_list(j, "required_modalities")) mods.insert(text::lower(text::trim(m)));
    a.required_modalities = std::move(mods);
  }
  a.forbidden_keywords = string_list(j, "forbidden_keywords");
  for (const auto& m : string_list(j, "forbidden_modalities")) a.forbidden_modalities.insert(text::lower(text::trim(m)));
  if (const auto* g = field(j, "when_sensitivity")) {
    SensitivityGate gate;
    gate.key = text::snake_key(req_string(*g, "key"));
    const auto lvl = parse_sensitivity_level(req_string(*g, "level"));
    if (!lvl) bad("unknown sensitivity level in 'when_sensitivity'");
    gate.level = *lvl;
    a.when_sensitivity = gate;
  }
  check_assertions(a);
  return a;
}

ojson to_json(const Assertions& a) {
  ojson j;
  j["forbidden_action_types"] = type_list(a.forbidden_action_types);
  ojson bounds = ojson::array();
  for (const auto& b : a.parameter_bounds) bounds.push_back(to_json(b));
  j["parameter_bounds"] = std::move(bounds);
  j["required_modalities"] = a.required_modalities ? string_array(*a.required_modalities) : ojson();
  j["forbidden_keywords"] = string_array(a.forbidden_keywords);
  j["forbidden_modalities"] = string_array(a.forbidden_modalities);
  if (a.when_sensitivity) {
    j["when_sensitivity"] = {{"key", a.when_sensitivity->key},
                             {"level", std::string(to_string(a.when_sensitivity->level))}};
  } else {
    j["when_sensitivity"] = nullptr;
  }
  return j;
}

ConstraintSnippet snippet_from_json(const json& j) {
  if (!j.is_object()) bad("snippet must be an object");
  ConstraintSnippet s;
  s.snippet_id = req_string(j, "snippet_id");
  const auto layer = parse_snippet_layer(req_string(j, "layer"));
  if (!layer) bad("snippet '" + s.snippet_id + "' has an unknown layer");
  s.layer = *layer;
  if (field(j, "jurisdiction") != nullptr) s.jurisdiction = req_string(j, "jurisdiction");
  if (field(j, "vehicle_config") != nullptr) s.vehicle_config = req_string(j, "vehicle_config");
  s.clause_id = opt_string(j, "clause_id");
  s.text = req_string(j, "text");
  if (const auto* a = field(j, "assertions")) s.assertions = assertions_from_json(*a);
  if (const auto* v = field(j, "version")) {
    if (!v->is_number_unsigned()) bad("'version' must be a non-negative integer");
    s.version = v->get<std::uint64_t>();
  }
  return s;
}

ojson to_json(const ConstraintSnippet& s) {
  ojson j;
  j["snippet_id"] = s.snippet_id;
  j["layer"] = std::string(to_string(s.layer));
  j["jurisdiction"] = s.jurisdiction ? ojson(*s.jurisdiction) : ojson();
  j["vehicle_config"] = s.vehicle_config ? ojson(*s.vehicle_config) : ojson();
  j["clause_id"] = s.clause_id;
  j["text"] = s.text;
  j["assertions"] = s.assertions ? to_json(*s.assertions) : ojson();
  j["version"] = s.version;
  return j;
}

PerceptionSummary perception_from_json(const json& j) {
  if (!j.is_object()) bad("'z' must be an object");
  PerceptionSummary z;
  z.driver_labels = string_set(j, "driver_labels");
  z.scene_labels = string_set(j, "scene_labels");
  if (const auto* s = field(j, "summary")) {
    z.summary_initial = opt_string(*s, "initial");
    z.summary_transition = opt_string(*s, "transition");
    z.summary_final = opt_string(*s, "final");
  }
  if (field(j, "summary_initial")) z.summary_initial = opt_string(j, "summary_initial");
  if (field(j, "summary_transition")) z.summary_transition = opt_string(j, "summary_transition");
  if (field(j, "summary_final")) z.summary_final = opt_string(j, "summary_final");
  z.objects = string_list(j, "objects");
  return z;
}

ojson to_json(const PerceptionSummary& z) {
  ojson j;
  j["driver_labels"] = string_array(z.driver_labels);
  j["scene_labels"] = string_array(z.scene_labels);
  j["summary_initial"] = z.summary_initial;
  j["summary_transition"] = z.summary_transition;
  j["summary_final"] = z.summary_final;
  j["objects"] = string_array(z.objects);
  return j;
}

DriverProfile driver_from_json(const json& j) {
  DriverProfile d;
  if (j.is_null()) return d;
  if (!j.is_object()) bad("'driver' must be an object");
  d.alert_modality_preference = opt_string(j, "alert_modality_preference");
  d.alert_frequency = opt_string(j, "alert_frequency");
  d.style_preference = opt_string(j, "style_preference");
  if (const auto* s = field(j, "sensitivities")) {
    if (!s->is_object()) bad("'sensitivities' must be an object");
    for (const auto& [k, v] : s->items()) {
      if (!v.is_string()) bad("sensitivity '" + k + "' must be a level string");
      const auto lvl = parse_sensitivity_level(v.get<std::string>());
      if (!lvl) bad("sensitivity '" + k + "' has an unknown level");
      d.sensitivities[text::snake_key(k)] = *lvl;
    }
  }
  if (const auto* c = field(j, "cabin_preferences")) {
    if (!c->is_object()) bad("'cabin_preferences' must be an object");
    for (const auto& [k, v] : c->items()) d.cabin_preferences[text::snake_key(k)] = scalar_string(v, "cabin_preferences");
  }
  return d;
}

ojson to_json(const DriverProfile& d) {
  ojson j;
  j["alert_modality_preference"] = d.alert_modality_preference;
  j["alert_frequency"] = d.alert_frequency;
  ojson s = ojson::object();
  for (const auto& [k, v] : d.sensitivities) s[k] = std::string(to_string(v));
  j["sensitivities"] = std::move(s);
  j["style_preference"] = d.style_preference;
  ojson c = ojson::object();
  for (const auto& [k, v] : d.cabin_preferences) c[k] = v;
  j["cabin_preferences"] = std::move(c);
  return j;
}

VehicleProfile vehicle_from_json(const json& j) {
  VehicleProfile v;
  if (j.is_null()) return v;
  if (!j.is_object()) bad("'vehicle' must be an object");
  v.jurisdiction = opt_string(j, "jurisdiction");
  v.operating_mode = opt_string(j, "operating_mode");
  v.available_actuators = action_type_set(j, "available_actuators");
  v.capability_limits = bound_list(j, "capability_limits");
  check_vehicle_profile(v);
  return v;
}

ojson to_json(const VehicleProfile& v) {
  ojson j;
  j["jurisdiction"] = v.jurisdiction;
  j["operating_mode"] = v.operating_mode;
  j["available_actuators"] = type_list(v.available_actuators);
  ojson limits = ojson::array();
  for (const auto& b : v.capability_limits) limits.push_back(to_json(b));
  j["capability_limits"] = std::move(limits);
  return j;
}

StrategyPrompt prompt_from_json(const json& j) {
  if (!j.is_object()) bad("prompt must be an object");
  StrategyPrompt p;
  p.prompt_id = req_string(j, "prompt_id");
  if (const auto* z = field(j, "z")) p.z = perception_from_json(*z);
  if (const auto* d = field(j, "driver")) p.driver = driver_from_json(*d);
  if (const auto* v = field(j, "vehicle")) p.vehicle = vehicle_from_json(*v);
  if (const auto* c = field(j, "constraints")) {
    if (!c->is_array()) bad("'constraints' must be an array of snippets");
    for (const auto& s : *c) p.constraints.push_back(snippet_from_json(s));
  }
  return p;
}

ojson to_json(const StrategyPrompt& p) {
  ojson j;
  j["prompt_id"] = p.prompt_id;
  j["z"] = to_json(p.z);
  j["driver"] = to_json(p.driver);
  j["vehicle"] = to_json(p.vehicle);
  ojson c = ojson::array();
  for (const auto& s : p.constraints) c.push_back(to_json(s));
  j["constraints"] = std::move(c);
  return j;
}

HeadLabels head_labels_from_json(const json& j) {
  HeadLabels out;
  if (j.is_null()) return out;
  if (!j.is_object()) bad("'ground_truth_labels' must be an object");
  for (const auto& [head, v] : j.items()) {
    auto& dst = out[normalize_label(head)];
    if (v.is_string()) {
      dst.insert(v.get<std::string>());
    } else if (v.is_array()) {
      for (const auto& x : v) {
        if (!x.is_string()) bad("labels of head '" + head + "' must be strings");
        dst.insert(x.get<std::string>());
      }
    } else {
      bad("labels of head '" + head + "' must be a string or an array");
    }
  }
  return out;
}

ojson to_json(const HeadLabels& h) {
  ojson j = ojson::object();
  for (const auto& [k, v] : h) j[k] = string_array(v);
  return j;
}

namespace {

Split split_of(const json& j) {
  const auto s = parse_split(opt_string(j, "split").empty() ? "train" : opt_string(j, "split"));
  if (!s) bad("unknown split '" + opt_string(j, "split") + "'");
  return *s;
}

}  // namespace

HalfSample half_sample_from_json(const json& j) {
  if (!j.is_object()) bad("sample must be an object");
  HalfSample s;
  s.sample_id = req_string(j, "sample_id");
  s.split = split_of(j);
  if (const auto* z = field(j, "z")) s.z = perception_from_json(*z);
  if (const auto* g = field(j, "ground_truth_labels")) s.ground_truth_labels = head_labels_from_json(*g);
  return s;
}

std::string document_text(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

SampleRecord sample_from_json(const json& j) {
  if (!j.is_object()) bad("sample record must be an object");
  SampleRecord r;
  if (const auto* p = field(j, "prompt")) r.prompt = prompt_from_json(*p);
  else if (field(j, "prompt_id")) r.prompt.prompt_id = req_string(j, "prompt_id");
  if (const auto* ref = field(j, "reference_policy")) {
    auto outcome = parse_policy(document_text(*ref));
    if (!outcome.valid()) bad("reference_policy of '" + r.prompt.prompt_id + "' is schema-invalid");
    r.reference_policy = std::move(*outcome.policy);
  }
  r.split = split_of(j);
  if (const auto* g = field(j, "ground_truth_labels")) r.ground_truth_labels = head_labels_from_json(*g);
  return r;
}

ojson to_json(const SampleRecord& r) {
  ojson j;
  j["prompt"] = to_json(r.prompt);
  j["reference_policy"] = r.reference_policy ? ojson::parse(serialize_policy(*r.reference_policy)) : ojson();
  j["split"] = std::string(to_string(r.split));
  j["ground_truth_labels"] = to_json(r.ground_truth_labels);
  return j;
}

ojson to_json(const MixedPair& p) {
  ojson j;
  j["in_id"] = p.in_id;
  j["out_ids"] = string_array(p.out_ids);
  j["split"] = std::string(to_string(p.split));
  j["record"] = to_json(p.record);
  return j;
}

ojson to_json(const CheckResult& c) {
  ojson j;
  j["check_id"] = c.check_id;
  j["layer"] = std::string(to_string(c.layer));
  j["passed"] = c.passed;
  j["applicable"] = c.applicable;
  j["detail"] = c.detail;
  j["clause_ref"] = c.clause_ref ? ojson(*c.clause_ref) : ojson();
  return j;
}

ojson to_json(const EcpoReport& r) {
  ojson j;
  j["schema_valid"] = r.schema_valid;
  j["ecpo"] = r.ecpo;
  j["s_core"] = r.s_core;
  j["s_evd"] = r.s_evd;
  j["s_str"] = r.s_str;
  j["severity"] = r.violation.severity;
  j["violation_count"] = r.violation.count;
  j["weights"] = {r.weights_used.core, r.weights_used.evidence, r.weights_used.structure};
  j["low_level"] = r.low_level();
  ojson defects = ojson::array();
  for (const auto& d : r.defects) {
    defects.push_back({{"code", std::string(to_string(d.code))}, {"path", d.path}, {"message", d.message}});
  }
  j["defects"] = std::move(defects);
  ojson checks = ojson::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  j["checks"] = std::move(checks);
  ojson low = ojson::array();
  for (const auto& m : r.low_level_matches) {
    low.push_back({{"action_index", m.action_index},
                   {"field", m.field},
                   {"pattern", m.matched_pattern},
                   {"text", m.matched_text}});
  }
  j["low_level_matches"] = std::move(low);
  j["hazards_truth"] = string_array(r.hazards_truth);
  j["hazards_addressed"] = string_array(r.hazards_addressed);
  return j;
}

ojson to_json(const PreferencePair& p) {
  ojson j;
  j["prompt_id"] = p.prompt_id;
  j["plus_id"] = p.plus_id;
  j["minus_id"] = p.minus_id;
  j["gap"] = p.gap;
  j["weight"] = p.weight;
  return j;
}

ojson to_json(const PreferenceRecord& r) {
  ojson j;
  j["prompt_id"] = r.prompt_id;
  j["prompt"] = r.prompt ? to_json(*r.prompt) : ojson();
  j["chosen"] = r.chosen;
  j["rejected"] = r.rejected;
  j["gap"] = r.gap;
  j["weight"] = r.weight;
  j["chosen_id"] = r.chosen_id;
  j["rejected_id"] = r.rejected_id;
  return j;
}

LabelSetSample label_set_from_json(const json& j) {
  if (!j.is_object()) bad("label-set sample must be an object");
  return {string_set(j, "truth"), string_set(j, "prediction")};
}

RaterVotes votes_from_json(const json& j) {
  if (!j.is_object()) bad("rating must be an object");
  return {opt_bool(j, "no_violation"), opt_bool(j, "safe"), opt_bool(j, "evidence_supported")};
}

namespace {

std::optional<std::vector<RaterVotes>> ratings_of(const json& j) {
  const auto* r = field(j, "ratings");
  if (r == nullptr) return std::nullopt;
  if (!r->is_array()) bad("'ratings' must be an array");
  std::vector<RaterVotes> out;
  for (const auto& x : *r) out.push_back(votes_from_json(x));
  return out;
}

std::string seed_of(const json& j) {
  const auto* s = field(j, "seed");
  return s == nullptr ? std::string{} : scalar_string(*s, "seed");
}

}  // namespace

StrategyEvalRecord eval_record_from_json(const json& j) {
  if (!j.is_object()) bad("evaluation record must be an object");
  const json& src = field(j, "report") != nullptr ? j["report"] : j;
  StrategyEvalRecord r;
  r.prompt_id = opt_string(j, "prompt_id");
  r.schema_valid = opt_bool(src, "schema_valid");
  r.low_level = opt_bool(src, "low_level");
  if (const auto* s = field(src, "violation_severity")) r.violation_severity = s->get<int>();
  else if (const auto* s2 = field(src, "severity")) r.violation_severity = s2->get<int>();
  if (r.violation_severity < 0 || r.violation_severity > 4) bad("severity must be in 0..4");
  r.hazards_truth = string_set(src, "hazards_truth");
  r.hazards_addressed = string_set(src, "hazards_addressed");
  r.ratings = ratings_of(j);
  r.seed = seed_of(j);
  return r;
}

RatedItem rated_item_from_json(const json& j) {
  if (!j.is_object()) bad("rated item must be an object");
  RatedItem it;
  it.prompt_id = opt_string(j, "prompt_id");
  it.seed = seed_of(j);
  auto r = ratings_of(j);
  if (!r) bad("rated item '" + it.prompt_id + "' has no 'ratings'");
  it.raters = std::move(*r);
  return it;
}

ojson to_json(const MetricReport& r) {
  ojson metrics = ojson::object();
  ojson reasons = ojson::object();
  for (const auto& [k, v] : r.metrics) {
    metrics[k] = v.value ? ojson(*v.value) : ojson();
    if (!v.value) reasons[k] = v.na_reason;
  }
  ojson counts = ojson::object();
  for (const auto& [k, v] : r.counts) counts[k] = v;
  ojson config = ojson::object();
  for (const auto& [k, v] : r.config) config[k] = v;
  ojson j;
  j["metrics"] = std::move(metrics);
  j["na_reasons"] = std::move(reasons);
  j["counts"] = std::move(counts);
  j["config"] = std::move(config);
  return j;
}

ojson to_json(const RetrievalResult& r) {
  ojson j;
  j["store_version"] = r.store_version;
  j["scorer"] = std::string(to_string(r.scorer_kind));
  ojson ranked = ojson::array();
  for (const auto& x : r.ranked) ranked.push_back({{"snippet_id", x.snippet_id}, {"score", x.score}});
  j["ranked"] = std::move(ranked);
  return j;
}

ojson to_json(const ConstraintSummary& s) {
  ojson j;
  j["tokens_used"] = s.tokens_used;
  ojson entries = ojson::array();
  for (const auto& e : s.entries) {
    ojson x;
    x["snippet_id"] = e.snippet_id;
    x["clause_id"] = e.clause_id;
    x["layer"] = std::string(to_string(e.layer));
    x["score"] = e.score;
    x["tokens"] = e.tokens;
    entries.push_back(std::move(x));
  }
  j["entries"] = std::move(entries);
  j["text"] = s.render();
  return j;
}

}  // namespace ecpo::io
