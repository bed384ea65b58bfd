#include "ecpo/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "ecpo/error.hpp"
#include "ecpo/text.hpp"

namespace ecpo {

namespace fs = std::filesystem;
using io::json;
using io::ojson;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error("BAD_CONFIG", what); }

double number(const json& v, const std::string& key) {
  if (!v.is_number()) bad("'" + key + "' must be a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& key, std::size_t min) {
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() < min) {
    bad("'" + key + "' must be an integer >= " + std::to_string(min));
  }
  return static_cast<std::size_t>(v.get<std::uint64_t>());
}

std::string resolve_path(const json& v, const std::string& key, const std::string& base_dir) {
  if (!v.is_string()) bad("'" + key + "' must be a path string");
  fs::path p(v.get<std::string>());
  if (p.is_relative()) p = fs::path(base_dir) / p;
  if (!fs::exists(p)) throw Error("MISSING_PATH", "'" + key + "' does not exist: " + p.string());
  return p.lexically_normal().string();
}

EcpoWeights weights_from(const json& v) {
  EcpoWeights w;
  if (v.is_array() && v.size() == 3) {
    w = {number(v[0], "ecpo_weights"), number(v[1], "ecpo_weights"), number(v[2], "ecpo_weights")};
  } else if (v.is_object()) {
    for (const auto& [k, x] : v.items()) {
      if (k == "core") w.core = number(x, "ecpo_weights.core");
      else if (k == "evidence") w.evidence = number(x, "ecpo_weights.evidence");
      else if (k == "structure") w.structure = number(x, "ecpo_weights.structure");
      else bad("unknown key 'ecpo_weights." + k + "'");
    }
  } else {
    bad("'ecpo_weights' must be [core, evidence, structure] or an object");
  }
  check_weights(w);
  return w;
}

PenaltyTable penalties_from(const json& v) {
  if (!v.is_object()) bad("'penalty_table' must be an object");
  PenaltyTable t;
  for (const auto& [k, x] : v.items()) {
    const double d = number(x, "penalty_table." + k);
    if (d < 0.0) bad("'penalty_table." + k + "' must be non-negative");
    if (k == "missing_objectives") t.missing_objectives = d;
    else if (k == "missing_constraints") t.missing_constraints = d;
    else if (k == "missing_rationale") t.missing_rationale = d;
    else if (k == "rationale_cap") t.rationale_cap = d;
    else if (k == "empty_evidence") t.empty_evidence = d;
    else if (k == "evidence_cap") t.evidence_cap = d;
    else if (k == "other_soft") t.other_soft = d;
    else bad("unknown key 'penalty_table." + k + "'");
  }
  return t;
}

}  // namespace

RunConfig RunConfig::parse(std::string_view json_text, const std::string& base_dir) {
  const auto doc = json::parse(json_text, nullptr, false, true);
  if (doc.is_discarded() || !doc.is_object()) bad("config must be a JSON object");
  RunConfig c;
  for (const auto& [k, v] : doc.items()) {
    if (v.is_null()) continue;
    if (k == "ecpo_weights") c.weights = weights_from(v);
    else if (k == "penalty_table") c.penalties = penalties_from(v);
    else if (k == "lexicon_path") c.lexicon_path = resolve_path(v, k, base_dir);
    else if (k == "hazard_rules_path") c.hazard_rules_path = resolve_path(v, k, base_dir);
    else if (k == "maneuvers_path") c.maneuvers_path = resolve_path(v, k, base_dir);
    else if (k == "label_vocab_path") c.label_vocab_path = resolve_path(v, k, base_dir);
    else if (k == "match_threshold") c.match_threshold = number(v, k);
    else if (k == "epsilon") c.epsilon = number(v, k);
    else if (k == "j_max") c.j_max = count(v, k, 1);
    else if (k == "beta") c.training.beta = number(v, k);
    else if (k == "lambda_ecpo") c.training.lambda_ecpo = number(v, k);
    else if (k == "psi_floor") c.training.psi.floor = number(v, k);
    else if (k == "psi_ceiling") c.training.psi.ceiling = number(v, k);
    else if (k == "gap_min") c.training.gap_min = number(v, k);
    else if (k == "top_k") c.top_k = count(v, k, 1);
    else if (k == "token_budget") c.token_budget = count(v, k, 1);
    else if (k == "block_size") c.block_size = count(v, k, 1);
    else if (k == "seeds") {
      if (!v.is_array() || v.empty()) bad("'seeds' must be a non-empty integer list");
      c.seeds.clear();
      for (const auto& s : v) {
        if (!s.is_number_unsigned()) bad("'seeds' must contain non-negative integers");
        c.seeds.push_back(s.get<std::uint64_t>());
      }
    } else {
      bad("unknown key '" + k + "'");
    }
  }
  c.check();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("MISSING_PATH", "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto dir = fs::path(path).parent_path().string();
  return parse(ss.str(), dir.empty() ? "." : dir);
}

void RunConfig::check() const {
  check_weights(weights);
  if (!(match_threshold >= 0.0 && match_threshold <= 1.0)) bad("'match_threshold' must be in [0, 1]");
  if (!(epsilon > 0.0)) bad("'epsilon' must be positive");
  if (j_max < 1) bad("'j_max' must be at least 1");
  if (top_k < 1) bad("'top_k' must be at least 1");
  if (token_budget < 1) bad("'token_budget' must be at least 1");
  if (block_size < 1) bad("'block_size' must be at least 1");
  if (seeds.empty()) bad("'seeds' must be non-empty");
  try {
    check_training_config(training, false);
  } catch (const Error& e) {
    bad(e.what());
  }
}

ValidatorConfig RunConfig::validator_config() const {
  ValidatorConfig v;
  v.weights = weights;
  v.penalties = penalties;
  v.parse.j_max = j_max;
  v.evidence.threshold = match_threshold;
  if (lexicon_path) v.lexicon = std::make_shared<const ControlLexicon>(ControlLexicon::load(*lexicon_path));
  if (hazard_rules_path) v.hazards = std::make_shared<const HazardRules>(HazardRules::load(*hazard_rules_path));
  if (maneuvers_path) v.maneuvers = std::make_shared<const ManeuverVocabulary>(ManeuverVocabulary::load(*maneuvers_path));
  return v;
}

LabelVocabulary RunConfig::vocabulary() const {
  return label_vocab_path ? LabelVocabulary::load(*label_vocab_path) : LabelVocabulary::builtin();
}

ojson RunConfig::echo() const {
  ojson j;
  j["ecpo_weights"] = {weights.core, weights.evidence, weights.structure};
  j["penalty_table"] = {{"missing_objectives", penalties.missing_objectives},
                        {"missing_constraints", penalties.missing_constraints},
                        {"missing_rationale", penalties.missing_rationale},
                        {"rationale_cap", penalties.rationale_cap},
                        {"empty_evidence", penalties.empty_evidence},
                        {"evidence_cap", penalties.evidence_cap},
                        {"other_soft", penalties.other_soft}};
  const auto path = [](const std::optional<std::string>& p) { return p ? ojson(*p) : ojson(); };
  j["lexicon_path"] = path(lexicon_path);
  j["hazard_rules_path"] = path(hazard_rules_path);
  j["maneuvers_path"] = path(maneuvers_path);
  j["label_vocab_path"] = path(label_vocab_path);
  j["match_threshold"] = match_threshold;
  j["epsilon"] = epsilon;
  j["j_max"] = j_max;
  j["beta"] = training.beta ? ojson(*training.beta) : ojson();
  j["lambda_ecpo"] = training.lambda_ecpo ? ojson(*training.lambda_ecpo) : ojson();
  j["psi_floor"] = training.psi.floor;
  j["psi_ceiling"] = training.psi.ceiling;
  j["gap_min"] = training.gap_min;
  j["top_k"] = top_k;
  j["token_budget"] = token_budget;
  j["seeds"] = seeds;
  j["block_size"] = block_size;
  return j;
}

EcpoWeights parse_weights(std::string_view s) {
  std::vector<double> v;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = std::min(s.find(',', start), s.size());
    const auto part = text::trim(s.substr(start, end - start));
    double d = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), d);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw Error("BAD_WEIGHTS", "cannot parse weight '" + part + "'");
    }
    v.push_back(d);
    start = end + 1;
  }
  if (v.size() != 3) throw Error("BAD_WEIGHTS", "expected three comma-separated weights");
  EcpoWeights w{v[0], v[1], v[2]};
  check_weights(w);
  return w;
}

}  // namespace ecpo
