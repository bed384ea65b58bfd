#include "commands.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "ecpo/config.hpp"
#include "ecpo/constraint_store.hpp"
#include "ecpo/error.hpp"
#include "ecpo/json_io.hpp"
#include "ecpo/metrics.hpp"
#include "ecpo/perception.hpp"
#include "ecpo/preference.hpp"
#include "ecpo/text.hpp"
#include "ecpo/validator.hpp"

namespace ecpo::cli {

namespace {

using io::json;
using io::ojson;

struct Globals {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> top_k;
  std::string weights;
};

bool is_config_code(std::string_view code) {
  static const std::set<std::string_view> codes = {
      "BAD_CONFIG", "BAD_WEIGHTS", "MISSING_PATH", "BAD_TRAINING_CONFIG",
      "BAD_LEXICON", "BAD_RULE", "BAD_VOCABULARY", "BAD_TOP_K", "BAD_BUDGET", "BAD_BLOCK_SIZE"};
  return codes.contains(code);
}

RunConfig resolve_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : RunConfig::load(g.config_path);
  if (!g.weights.empty()) c.weights = parse_weights(g.weights);
  if (g.top_k) c.top_k = *g.top_k;
  if (g.seed) c.seeds = {*g.seed};
  c.check();
  return c;
}

std::map<std::string, StrategyPrompt> load_prompts(const std::string& path) {
  std::map<std::string, StrategyPrompt> out;
  for (const auto& j : io::read_jsonl_file(path)) {
    auto p = io::prompt_from_json(j);
    auto id = p.prompt_id;
    if (!out.emplace(id, std::move(p)).second) throw Error("DUPLICATE_ID", "prompt '" + id + "' appears twice");
  }
  return out;
}

const StrategyPrompt& prompt_for(const std::map<std::string, StrategyPrompt>& prompts, const std::string& id) {
  const auto it = prompts.find(id);
  if (it == prompts.end()) throw Error("UNKNOWN_PROMPT", "no prompt with id '" + id + "'");
  return it->second;
}

std::string str_field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
    throw Error("BAD_RECORD", std::string("'") + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

// ---- commands ---------------------------------------------------------------

std::string cmd_validate(const RunConfig& cfg, const std::string& prompts_path,
                         const std::string& policies_path, std::ostream& err) {
  const auto prompts = load_prompts(prompts_path);
  const auto vcfg = cfg.validator_config();
  std::string out;
  std::size_t n = 0, valid = 0;
  for (const auto& j : io::read_jsonl_file(policies_path)) {
    const auto prompt_id = str_field(j, "prompt_id");
    if (!j.contains("document")) throw Error("BAD_RECORD", "policy record lacks 'document'");
    const auto report = validate(io::document_text(j["document"]), prompt_for(prompts, prompt_id), vcfg);
    ojson rec;
    rec["prompt_id"] = prompt_id;
    rec["candidate_id"] = j.contains("candidate_id") ? ojson(io::document_text(j["candidate_id"])) : ojson();
    rec["report"] = io::to_json(report);
    out += io::dump(rec) + "\n";
    ++n;
    valid += report.schema_valid ? 1 : 0;
  }
  err << "validated " << n << " policies; Valid% "
      << (n == 0 ? std::string("N/A") : fmt(100.0 * static_cast<double>(valid) / static_cast<double>(n)))
      << "\n";
  return out;
}

std::string cmd_pairs(const RunConfig& cfg, const std::string& prompts_path,
                      const std::string& candidates_path, std::ostream& err) {
  const auto prompts = load_prompts(prompts_path);
  const auto vcfg = cfg.validator_config();
  std::vector<CandidateSet> sets;
  for (const auto& j : io::read_jsonl_file(candidates_path)) {
    CandidateSet set;
    set.prompt_id = str_field(j, "prompt_id");
    const auto& prompt = prompt_for(prompts, set.prompt_id);
    if (!j.contains("candidates") || !j["candidates"].is_array()) {
      throw Error("BAD_RECORD", "candidate set '" + set.prompt_id + "' lacks a 'candidates' array");
    }
    std::set<std::string> ids;
    for (const auto& c : j["candidates"]) {
      Candidate cand;
      cand.candidate_id = str_field(c, "candidate_id");
      if (!ids.insert(cand.candidate_id).second) {
        throw Error("DUPLICATE_ID", "candidate '" + cand.candidate_id + "' repeated in '" + set.prompt_id + "'");
      }
      if (!c.contains("document")) throw Error("BAD_RECORD", "candidate lacks 'document'");
      cand.document = io::document_text(c["document"]);
      if (c.contains("log_score") && c["log_score"].is_number()) cand.log_score = c["log_score"].get<double>();
      cand.report = validate(cand.document, prompt, vcfg);
      set.candidates.push_back(std::move(cand));
    }
    sets.push_back(std::move(set));
  }

  std::vector<PreferencePair> pairs;
  for (const auto& s : sets) {
    auto p = select_pair(s, cfg.training.gap_min, cfg.training.psi);
    if (!p) {
      err << "skipped prompt '" << s.prompt_id << "': no ECPO gap above gap_min\n";
      continue;
    }
    pairs.push_back(std::move(*p));
  }
  const auto lookup = index_candidates(sets);
  const auto records = export_preference_dataset(pairs, lookup, prompts);
  std::string out;
  for (const auto& r : records) out += io::dump(io::to_json(r)) + "\n";

  if (cfg.training.beta && !pairs.empty()) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& p : pairs) {
      const auto* a = lookup.at({p.prompt_id, p.plus_id});
      const auto* b = lookup.at({p.prompt_id, p.minus_id});
      if (!a->log_score || !b->log_score) continue;
      sum += pairwise_loss(*a->log_score, *b->log_score, *cfg.training.beta, p.weight);
      ++n;
    }
    if (n > 0) err << "l_ecpo over " << n << " scored pairs: " << sum / static_cast<double>(n) << "\n";
  }
  err << "emitted " << records.size() << " pairs from " << sets.size() << " candidate sets\n";
  return out;
}

MetricReport eval_report(const RunConfig& cfg, const std::string& kind, const std::vector<json>& rows,
                         const std::vector<std::string>& classes) {
  MetricReport rep;
  rep.config["epsilon"] = cfg.epsilon;
  if (kind == "strategy") {
    std::vector<StrategyEvalRecord> recs;
    for (const auto& j : rows) recs.push_back(io::eval_record_from_json(j));
    return strategy_metrics(recs, cfg.epsilon);
  }
  if (kind == "labelset") {
    std::vector<LabelSetSample> s;
    for (const auto& j : rows) s.push_back(io::label_set_from_json(j));
    const auto r = multilabel_metrics(s, cfg.epsilon);
    rep.set("iou", MetricValue::of(r.iou));
    rep.set("emr", MetricValue::of(r.emr));
    rep.set("f1", MetricValue::of(r.f1));
    rep.counts["eligible"] = r.eligible;
    rep.counts["excluded_empty"] = r.excluded;
    return rep;
  }
  if (kind == "class") {
    std::vector<std::string> t, p;
    for (const auto& j : rows) {
      t.push_back(str_field(j, "truth"));
      p.push_back(str_field(j, "prediction"));
    }
    const auto r = classification_metrics(t, p, {classes.begin(), classes.end()});
    rep.set("accuracy", MetricValue::of(r.accuracy));
    rep.set("macro_f1", MetricValue::of(r.macro_f1));
    rep.counts["samples"] = t.size();
    return rep;
  }
  if (kind == "text") {
    std::vector<TokenSeq> refs, hyps;
    for (const auto& j : rows) {
      refs.push_back(metric_tokens(str_field(j, "reference")));
      hyps.push_back(metric_tokens(str_field(j, "hypothesis")));
    }
    rep.set("bleu4", MetricValue::of(bleu4(refs, hyps, cfg.epsilon)));
    rep.set("rouge_l", MetricValue::of(rouge_l(refs, hyps)));
    rep.counts["pairs"] = refs.size();
    return rep;
  }
  if (kind == "has") {
    std::vector<RatedItem> items;
    for (const auto& j : rows) items.push_back(io::rated_item_from_json(j));
    const auto r = has_aggregate(items);
    rep.set("has_mean", MetricValue::of(r.mean));
    rep.set("has_std", MetricValue::of(r.std));
    for (const auto& [seed, v] : r.per_seed) rep.set("has_seed_" + seed, MetricValue::of(v));
    rep.counts["items"] = items.size();
    return rep;
  }
  if (kind == "corr") {
    std::vector<double> x, y;
    for (const auto& j : rows) {
      if (!j.contains("x") || !j["x"].is_number() || !j.contains("y") || !j["y"].is_number()) {
        throw Error("BAD_RECORD", "correlation rows need numeric 'x' and 'y'");
      }
      x.push_back(j["x"].get<double>());
      y.push_back(j["y"].get<double>());
    }
    const auto r = spearman(x, y);
    rep.set("spearman", r ? MetricValue::of(*r) : MetricValue::na("DEGENERATE"));
    rep.counts["points"] = x.size();
    return rep;
  }
  throw Error("BAD_CONFIG", "unknown eval kind '" + kind + "'");
}

std::string cmd_eval(const RunConfig& cfg, const std::string& kind, const std::string& records_path,
                     const std::vector<std::string>& classes, bool table) {
  const auto rows = io::read_jsonl_file(records_path);
  const auto rep = eval_report(cfg, kind, rows, classes);
  if (table) return rep.table();
  ojson j;
  j["kind"] = kind;
  j["report"] = io::to_json(rep);
  j["config"] = cfg.echo();
  return io::dump(j) + "\n";
}

ConstraintStore load_store(const std::string& path) {
  ConstraintStore store;
  std::vector<ConstraintSnippet> pending;
  std::vector<std::string> removals;
  bool dirty = false;
  const auto commit = [&] {
    store = store.update(std::move(pending), removals);
    pending.clear();
    removals.clear();
    dirty = false;
  };
  for (const auto& j : io::read_jsonl_file(path)) {
    if (j.is_object() && j.contains("commit")) {
      commit();
    } else if (j.is_object() && j.contains("remove")) {
      if (!j["remove"].is_array()) throw Error("BAD_RECORD", "'remove' must be an array of ids");
      for (const auto& id : j["remove"]) {
        if (!id.is_string()) throw Error("BAD_RECORD", "'remove' must be an array of ids");
        removals.push_back(id.get<std::string>());
      }
      dirty = true;
    } else {
      pending.push_back(io::snippet_from_json(j));
      dirty = true;
    }
  }
  if (dirty) commit();
  return store;
}

EmbeddingIndex load_query_vectors(const std::string& path) { return EmbeddingIndex::load(path); }

std::string cmd_retrieve(const RunConfig& cfg, const std::string& store_path, const std::string& prompts_path,
                         std::optional<std::uint64_t> version, std::optional<std::size_t> budget,
                         const std::string& embeddings_path, const std::string& query_embeddings_path,
                         std::ostream& err) {
  auto store = load_store(store_path);
  if (version) store = store.at_version(*version);
  std::optional<EmbeddingIndex> snippet_vecs, query_vecs;
  if (!embeddings_path.empty()) {
    if (query_embeddings_path.empty()) throw Error("BAD_CONFIG", "--embeddings requires --query-embeddings");
    snippet_vecs = EmbeddingIndex::load(embeddings_path);
    query_vecs = load_query_vectors(query_embeddings_path);
  }
  const std::size_t token_budget = budget.value_or(cfg.token_budget);
  std::string out;
  std::size_t n = 0;
  for (const auto& j : io::read_jsonl_file(prompts_path)) {
    const auto prompt = io::prompt_from_json(j);
    const auto query = build_query(prompt.z, prompt.driver, prompt.vehicle);
    Scorer scorer = Scorer::lexical();
    if (snippet_vecs) scorer = Scorer::embedding(*snippet_vecs, query_vecs->find(prompt.prompt_id));
    const auto result = retrieve(store, query, cfg.top_k, scorer);
    const auto summary = compress(resolve(store, result), token_budget);
    ojson rec;
    rec["prompt_id"] = prompt.prompt_id;
    rec["query"] = {{"jurisdiction", query.jurisdiction},
                    {"operating_mode", query.operating_mode},
                    {"sensitivity_terms", query.sensitivity_terms},
                    {"situation_terms", query.situation_terms}};
    rec["retrieval"] = io::to_json(result);
    rec["summary"] = io::to_json(summary);
    out += io::dump(rec) + "\n";
    ++n;
  }
  err << "retrieved for " << n << " prompts at store version " << store.version() << "\n";
  return out;
}

std::string cmd_mixpair(const RunConfig& cfg, const std::string& in_path, const std::string& out_path,
                        std::ostream& err) {
  std::vector<HalfSample> in, outside;
  for (const auto& j : io::read_jsonl_file(in_path)) in.push_back(io::half_sample_from_json(j));
  for (const auto& j : io::read_jsonl_file(out_path)) outside.push_back(io::half_sample_from_json(j));
  const auto pairs = pair_mixed(in, outside, cfg.seeds.front(), cfg.block_size);
  std::string out;
  for (const auto& p : pairs) out += io::dump(io::to_json(p)) + "\n";
  err << "paired " << pairs.size() << " in-cabin samples (seed " << cfg.seeds.front() << ", block "
      << cfg.block_size << ")\n";
  return out;
}

std::string cmd_stratify(const RunConfig& cfg, const std::string& records_path, std::ostream& err) {
  const auto vocab = cfg.vocabulary();
  std::map<ScenarioGroup, std::size_t> counts;
  std::string out;
  std::size_t i = 0;
  for (const auto& j : io::read_jsonl_file(records_path)) {
    const auto rec = io::sample_from_json(j);
    const auto g = classify_scenario(rec.ground_truth_labels, vocab);
    ++counts[g];
    ojson line;
    line["index"] = i++;
    line["prompt_id"] = rec.prompt.prompt_id;
    line["group"] = std::string(to_string(g));
    out += io::dump(line) + "\n";
  }
  for (auto g : {ScenarioGroup::DriverCritical, ScenarioGroup::EnvCritical,
                 ScenarioGroup::InteractionCritical, ScenarioGroup::Nominal}) {
    err << to_string(g) << ": " << counts[g] << "\n";
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Validate, pair, score and evaluate structured driving policies"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_option("--out", g.out_path, "write data here instead of standard output");
  app.add_option("--seed", g.seed, "overrides the configured seeds");
  app.add_option("--top-k", g.top_k, "retrieval depth")->check(CLI::PositiveNumber);
  app.add_option("--weights", g.weights, "w_core,w_evd,w_str");

  std::string prompts, policies, candidates, records, kind = "strategy", store, embeddings, query_embeddings,
                                                 in_cabin, out_of_vehicle;
  std::vector<std::string> classes;
  bool table = false;
  std::optional<std::uint64_t> version;
  std::optional<std::size_t> budget;

  auto* validate_cmd = app.add_subcommand("validate", "score policy documents against their prompts");
  validate_cmd->add_option("--prompts", prompts)->required();
  validate_cmd->add_option("--policies", policies)->required();

  auto* pairs_cmd = app.add_subcommand("pairs", "build the preference dataset from candidate sets");
  pairs_cmd->add_option("--prompts", prompts)->required();
  pairs_cmd->add_option("--candidates", candidates)->required();

  auto* eval_cmd = app.add_subcommand("eval", "compute offline metrics");
  eval_cmd->add_option("--kind", kind)->check(CLI::IsMember({"strategy", "labelset", "class", "text", "has", "corr"}));
  eval_cmd->add_option("--records", records)->required();
  eval_cmd->add_option("--classes", classes)->delimiter(',');
  eval_cmd->add_flag("--table", table);

  auto* retrieve_cmd = app.add_subcommand("retrieve", "retrieve and compress constraint snippets");
  retrieve_cmd->add_option("--store", store)->required();
  retrieve_cmd->add_option("--prompts", prompts)->required();
  retrieve_cmd->add_option("--version", version);
  retrieve_cmd->add_option("--budget", budget)->check(CLI::PositiveNumber);
  retrieve_cmd->add_option("--embeddings", embeddings);
  retrieve_cmd->add_option("--query-embeddings", query_embeddings);

  auto* mixpair_cmd = app.add_subcommand("mixpair", "split-preserving pairing of in-cabin and outside samples");
  mixpair_cmd->add_option("--in-cabin", in_cabin)->required();
  mixpair_cmd->add_option("--out-of-vehicle", out_of_vehicle)->required();

  auto* stratify_cmd = app.add_subcommand("stratify", "assign records to scenario groups");
  stratify_cmd->add_option("--records", records)->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> argv_storage{"ecpo"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    const auto cfg = resolve_config(g);
    std::string data;
    if (validate_cmd->parsed()) data = cmd_validate(cfg, prompts, policies, err);
    else if (pairs_cmd->parsed()) data = cmd_pairs(cfg, prompts, candidates, err);
    else if (eval_cmd->parsed()) data = cmd_eval(cfg, kind, records, classes, table);
    else if (retrieve_cmd->parsed())
      data = cmd_retrieve(cfg, store, prompts, version, budget, embeddings, query_embeddings, err);
    else if (mixpair_cmd->parsed()) data = cmd_mixpair(cfg, in_cabin, out_of_vehicle, err);
    else if (stratify_cmd->parsed()) data = cmd_stratify(cfg, records, err);

    if (g.out_path.empty()) {
      out << data;
    } else {
      std::ofstream f(g.out_path, std::ios::binary);
      if (!f) throw Error("BAD_PATH", "cannot write " + g.out_path);
      f << data;
    }
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_config_code(e.code()) ? kConfigError : kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInvariantBreach;
  }
}

}  // namespace ecpo::cli
