#include "ecpo/constraint_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ecpo/error.hpp"
#include "ecpo/low_level.hpp"
#include "ecpo/text.hpp"
#include "json.hpp"

namespace ecpo {

// ---- snippet helpers ----------------------------------------------------------

std::string_view to_string(SnippetLayer l) {
  switch (l) {
    case SnippetLayer::Legal: return "legal";
    case SnippetLayer::Vehicle: return "vehicle";
    case SnippetLayer::Driver: return "driver";
  }
  return "legal";
}

std::optional<SnippetLayer> parse_snippet_layer(std::string_view s) {
  const auto k = text::snake_key(s);
  if (k == "legal" || k == "legal_regulations") return SnippetLayer::Legal;
  if (k == "vehicle" || k == "vehicle_limits") return SnippetLayer::Vehicle;
  if (k == "driver" || k == "driver_preferences") return SnippetLayer::Driver;
  return std::nullopt;
}

std::string_view to_string(SensitivityLevel l) {
  switch (l) {
    case SensitivityLevel::None: return "none";
    case SensitivityLevel::Low: return "low";
    case SensitivityLevel::Medium: return "medium";
    case SensitivityLevel::High: return "high";
  }
  return "none";
}

std::optional<SensitivityLevel> parse_sensitivity_level(std::string_view s) {
  const auto k = text::lower(text::trim(s));
  if (k == "none") return SensitivityLevel::None;
  if (k == "low") return SensitivityLevel::Low;
  if (k == "medium") return SensitivityLevel::Medium;
  if (k == "high") return SensitivityLevel::High;
  return std::nullopt;
}

void check_assertions(const Assertions& a) {
  for (const auto& b : a.parameter_bounds) {
    if (b.min > b.max) throw Error("BAD_ASSERTION", "bound on '" + b.key + "' has min > max");
  }
  for (const auto& k : a.forbidden_keywords) {
    try {
      compile_word_pattern(k);
    } catch (const std::regex_error& e) {
      throw Error("BAD_ASSERTION", "keyword pattern '" + k + "' does not compile");
    }
  }
}

int priority(SnippetLayer l) {
  switch (l) {
    case SnippetLayer::Legal: return 3;
    case SnippetLayer::Vehicle: return 2;
    case SnippetLayer::Driver: return 1;
  }
  return 0;
}

// ---- store --------------------------------------------------------------------

ConstraintStore::ConstraintStore()
    : history_(std::make_shared<const History>(History{std::make_shared<const Snapshot>()})),
      index_(0) {}

std::span<const ConstraintSnippet> ConstraintStore::snippets() const {
  return *(*history_)[index_];
}

const ConstraintSnippet* ConstraintStore::find(std::string_view snippet_id) const {
  const auto s = snippets();
  const auto it = std::lower_bound(
      s.begin(), s.end(), snippet_id,
      [](const ConstraintSnippet& a, std::string_view id) { return a.snippet_id < id; });
  return (it != s.end() && it->snippet_id == snippet_id) ? &*it : nullptr;
}

ConstraintStore ConstraintStore::at_version(std::uint64_t v) const {
  if (v >= history_->size()) {
    throw Error("UNKNOWN_VERSION", "store has no version " + std::to_string(v));
  }
  return ConstraintStore(history_, v);
}

ConstraintStore ConstraintStore::update(std::vector<ConstraintSnippet> additions,
                                        const std::vector<std::string>& removals) const {
  const auto current = snippets();
  std::set<std::string, std::less<>> live;
  for (const auto& s : current) live.insert(s.snippet_id);

  std::set<std::string> removed;
  for (const auto& id : removals) {
    if (!live.contains(id) || removed.contains(id)) {
      throw Error("UNKNOWN_REMOVAL_ID", "no snippet '" + id + "' to remove");
    }
    removed.insert(id);
  }
  for (const auto& id : removed) live.erase(id);

  const std::uint64_t next_version = index_ + 1;
  for (auto& s : additions) {
    if (s.clause_id.empty()) throw Error("BAD_SNIPPET", "snippet '" + s.snippet_id + "' has no clause_id");
    if (s.assertions) check_assertions(*s.assertions);
    if (!live.insert(s.snippet_id).second) {
      throw Error("DUPLICATE_ID", "snippet id '" + s.snippet_id + "' already present");
    }
    s.version = next_version;
  }

  auto snap = std::make_shared<Snapshot>();
  snap->reserve(live.size());
  for (const auto& s : current) {
    if (!removed.contains(s.snippet_id)) snap->push_back(s);
  }
  for (auto& s : additions) snap->push_back(std::move(s));
  std::sort(snap->begin(), snap->end(),
            [](const auto& a, const auto& b) { return a.snippet_id < b.snippet_id; });

  // Versions after this one (if this value pins an older version) are not
  // part of the new lineage.
  auto history = std::make_shared<History>(history_->begin(),
                                           history_->begin() + static_cast<std::ptrdiff_t>(index_ + 1));
  history->push_back(std::move(snap));
  return ConstraintStore(std::move(history), next_version);
}

// ---- query --------------------------------------------------------------------

RetrievalQuery build_query(const PerceptionSummary& z, const DriverProfile& driver,
                           const VehicleProfile& vehicle) {
  RetrievalQuery q;
  q.jurisdiction = vehicle.jurisdiction;
  q.operating_mode = vehicle.operating_mode;

  std::vector<std::string> sens;
  for (const auto& [key, level] : driver.sensitivities) {
    if (level >= SensitivityLevel::Medium) sens.push_back(key);
  }
  for (const auto* pref : {&driver.alert_modality_preference, &driver.alert_frequency,
                           &driver.style_preference}) {
    if (auto t = text::trim(*pref); !t.empty()) sens.push_back(std::move(t));
  }
  for (const auto& [key, value] : driver.cabin_preferences) sens.push_back(key);
  q.sensitivity_terms = text::dedupe(sens);

  std::vector<std::string> sit;
  const auto add = [&](std::string_view s) {
    for (auto& t : text::content_tokens(s)) sit.push_back(std::move(t));
  };
  for (const auto& l : z.scene_labels) add(l);
  for (const auto& l : z.driver_labels) add(l);
  add(z.summary_initial);
  add(z.summary_transition);
  add(z.summary_final);
  q.situation_terms = text::dedupe(sit);

  if (q.sensitivity_terms.empty() && q.situation_terms.empty()) {
    q.situation_terms.emplace_back("general");
  }
  return q;
}

std::vector<std::string> query_tokens(const RetrievalQuery& q) {
  std::vector<std::string> out;
  const auto add = [&](std::string_view s) {
    for (auto& t : text::content_tokens(s)) out.push_back(std::move(t));
  };
  add(q.jurisdiction);
  add(q.operating_mode);
  for (const auto& t : q.sensitivity_terms) add(t);
  for (const auto& t : q.situation_terms) add(t);
  return out;
}

std::string_view to_string(ScorerKind k) {
  return k == ScorerKind::Lexical ? "lexical" : "embedding";
}

// ---- embeddings ---------------------------------------------------------------

void EmbeddingIndex::add(std::string id, std::vector<double> vec) {
  if (vec.empty()) throw Error("BAD_EMBEDDING", "empty vector for '" + id + "'");
  if (dim_ != 0 && vec.size() != dim_) {
    throw Error("BAD_EMBEDDING", "dimension mismatch for '" + id + "'");
  }
  double sq = 0.0;
  for (double x : vec) sq += x * x;
  if (std::abs(std::sqrt(sq) - 1.0) > kNormTolerance) {
    throw Error("BAD_EMBEDDING", "vector for '" + id + "' is not unit-norm");
  }
  dim_ = vec.size();
  vectors_[std::move(id)] = std::move(vec);
}

const std::vector<double>* EmbeddingIndex::find(std::string_view id) const {
  const auto it = vectors_.find(id);
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingIndex EmbeddingIndex::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("BAD_EMBEDDING", "cannot open " + path);
  EmbeddingIndex index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("vector") || !j["vector"].is_array()) {
      throw Error("BAD_EMBEDDING", path + ":" + std::to_string(lineno) + ": expected {id, vector}");
    }
    std::vector<double> v;
    for (const auto& x : j["vector"]) {
      if (!x.is_number()) throw Error("BAD_EMBEDDING", path + ":" + std::to_string(lineno) + ": non-numeric component");
      v.push_back(x.get<double>());
    }
    index.add(j["id"].get<std::string>(), std::move(v));
  }
  return index;
}

// ---- retrieval ----------------------------------------------------------------

double lexical_cosine(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string_view, double> ta;
  std::map<std::string_view, double> tb;
  for (const auto& t : a) ta[t] += 1.0;
  for (const auto& t : b) tb[t] += 1.0;
  if (ta.empty() || tb.empty()) return 0.0;
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [t, c] : ta) {
    na += c * c;
    if (const auto it = tb.find(t); it != tb.end()) dot += c * it->second;
  }
  for (const auto& [t, c] : tb) nb += c * c;
  const double cos = dot / std::sqrt(na * nb);
  return std::clamp(cos, 0.0, 1.0);
}

RetrievalResult retrieve(const ConstraintStore& store, const RetrievalQuery& query,
                         std::size_t top_k, const Scorer& scorer) {
  if (top_k < 1) throw Error("BAD_TOP_K", "top_k must be at least 1");
  const auto snippets = store.snippets();
  if (snippets.empty()) throw Error("EMPTY_STORE", "store version " + std::to_string(store.version()) + " has no snippets");

  RetrievalResult result;
  result.scorer_kind = scorer.kind;
  result.store_version = store.version();
  result.ranked.reserve(snippets.size());

  if (scorer.kind == ScorerKind::Lexical) {
    const auto q = query_tokens(query);
    for (const auto& s : snippets) {
      result.ranked.push_back({s.snippet_id, lexical_cosine(q, text::content_tokens(s.text))});
    }
  } else {
    if (scorer.query_vector == nullptr || scorer.snippet_vectors == nullptr) {
      throw Error("MISSING_EMBEDDING", "embedding scorer has no query vector");
    }
    const auto& qv = *scorer.query_vector;
    for (const auto& s : snippets) {
      const auto* v = scorer.snippet_vectors->find(s.snippet_id);
      if (v == nullptr) throw Error("MISSING_EMBEDDING", "no vector for snippet '" + s.snippet_id + "'");
      if (v->size() != qv.size()) throw Error("MISSING_EMBEDDING", "query/snippet dimension mismatch");
      double dot = 0.0;
      for (std::size_t i = 0; i < qv.size(); ++i) dot += qv[i] * (*v)[i];
      result.ranked.push_back({s.snippet_id, std::clamp(dot, -1.0, 1.0)});
    }
  }

  std::stable_sort(result.ranked.begin(), result.ranked.end(),
                   [](const RankedSnippet& a, const RankedSnippet& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.snippet_id < b.snippet_id;
                   });
  if (result.ranked.size() > top_k) result.ranked.resize(top_k);
  return result;
}

// ---- compression --------------------------------------------------------------

std::string ConstraintSummary::render() const {
  std::string out;
  for (const auto& e : entries) {
    out += "[";
    out += to_string(e.layer);
    out += " ";
    out += e.clause_id;
    out += "] ";
    out += e.text;
    out += "\n";
  }
  return out;
}

ConstraintSummary compress(std::vector<ScoredSnippet> ranked, std::size_t token_budget) {
  if (token_budget < 1) throw Error("BAD_BUDGET", "token_budget must be at least 1");
  std::stable_sort(ranked.begin(), ranked.end(), [](const ScoredSnippet& a, const ScoredSnippet& b) {
    const int pa = priority(a.snippet.layer);
    const int pb = priority(b.snippet.layer);
    if (pa != pb) return pa > pb;
    if (a.score != b.score) return a.score > b.score;
    return a.snippet.snippet_id < b.snippet.snippet_id;
  });

  ConstraintSummary summary;
  for (auto& s : ranked) {
    const auto n = text::whitespace_token_count(s.snippet.text);
    if (summary.tokens_used + n > token_budget) break;
    summary.tokens_used += n;
    summary.entries.push_back({s.snippet.snippet_id, s.snippet.clause_id, s.snippet.layer,
                               s.snippet.text, s.score, n});
  }
  return summary;
}

std::vector<ScoredSnippet> resolve(const ConstraintStore& store, const RetrievalResult& result) {
  const auto pinned = store.at_version(result.store_version);
  std::vector<ScoredSnippet> out;
  out.reserve(result.ranked.size());
  for (const auto& r : result.ranked) {
    const auto* s = pinned.find(r.snippet_id);
    if (s == nullptr) throw Error("UNKNOWN_SNIPPET", "snippet '" + r.snippet_id + "' not in store");
    out.push_back({*s, r.score});
  }
  return out;
}

}  // namespace ecpo
