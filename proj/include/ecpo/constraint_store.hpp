#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecpo/perception.hpp"
#include "ecpo/snippet.hpp"

namespace ecpo {

/// Versioned, append-only snippet store. Every value pins one version; updates
/// return a new value and leave all earlier versions readable through
/// at_version(). Copies share history.
class ConstraintStore {
public:
  /// Empty store at version 0.
  ConstraintStore();

  std::uint64_t version() const { return index_; }
  std::uint64_t latest_version() const { return history_->size() - 1; }

  /// Snippets of this version, sorted by snippet_id.
  std::span<const ConstraintSnippet> snippets() const;
  const ConstraintSnippet* find(std::string_view snippet_id) const;
  bool empty() const { return snippets().empty(); }

  /// Throws Error("UNKNOWN_VERSION").
  ConstraintStore at_version(std::uint64_t v) const;

  /// New store with version() + 1. Removals apply before additions; added
  /// snippets get their `version` field set to the new version. Throws
  /// Error("DUPLICATE_ID") or Error("UNKNOWN_REMOVAL_ID"); this value is
  /// unchanged either way.
  ConstraintStore update(std::vector<ConstraintSnippet> additions,
                         const std::vector<std::string>& removals) const;

private:
  using Snapshot = std::vector<ConstraintSnippet>;
  using History = std::vector<std::shared_ptr<const Snapshot>>;

  ConstraintStore(std::shared_ptr<const History> history, std::uint64_t index)
      : history_(std::move(history)), index_(index) {}

  std::shared_ptr<const History> history_;
  std::uint64_t index_ = 0;
};

inline ConstraintStore update_store(const ConstraintStore& store,
                                    std::vector<ConstraintSnippet> additions,
                                    const std::vector<std::string>& removals) {
  return store.update(std::move(additions), removals);
}

struct RetrievalQuery {
  std::string jurisdiction;
  std::string operating_mode;
  std::vector<std::string> sensitivity_terms;
  std::vector<std::string> situation_terms;

  bool operator==(const RetrievalQuery&) const = default;
};

/// jurisdiction/mode from the vehicle; sensitivity terms are the driver's
/// sensitivity keys at medium or above followed by declared preferences;
/// situation terms are the content tokens of scene labels, driver labels and the
/// three summary stages, de-duplicated in that order. Falls back to the single
/// situation term "general" when both term lists would be empty.
RetrievalQuery build_query(const PerceptionSummary& z, const DriverProfile& driver,
                           const VehicleProfile& vehicle);

/// All content tokens of the query, in field order (jurisdiction, mode,
/// sensitivity terms, situation terms), duplicates kept as term frequency.
std::vector<std::string> query_tokens(const RetrievalQuery& q);

enum class ScorerKind { Lexical, Embedding };

std::string_view to_string(ScorerKind k);

/// Precomputed unit-norm vectors for snippets and (separately) queries.
class EmbeddingIndex {
public:
  static constexpr double kNormTolerance = 1e-6;

  /// Throws Error("BAD_EMBEDDING") for empty vectors, mismatched dimensions or
  /// norms farther than kNormTolerance from 1.
  void add(std::string id, std::vector<double> vec);
  const std::vector<double>* find(std::string_view id) const;
  std::size_t size() const { return vectors_.size(); }

  /// JSONL lines {"id": ..., "vector": [...]}.
  static EmbeddingIndex load(const std::string& path);

private:
  std::map<std::string, std::vector<double>, std::less<>> vectors_;
  std::size_t dim_ = 0;
};

struct Scorer {
  ScorerKind kind = ScorerKind::Lexical;
  const EmbeddingIndex* snippet_vectors = nullptr;  // embedding mode only
  const std::vector<double>* query_vector = nullptr;

  static Scorer lexical() { return {}; }
  static Scorer embedding(const EmbeddingIndex& snippets, const std::vector<double>* query) {
    return {ScorerKind::Embedding, &snippets, query};
  }
};

struct RankedSnippet {
  std::string snippet_id;
  double score = 0.0;

  bool operator==(const RankedSnippet&) const = default;
};

struct RetrievalResult {
  std::vector<RankedSnippet> ranked;
  ScorerKind scorer_kind = ScorerKind::Lexical;
  std::uint64_t store_version = 0;
};

/// Cosine of term-frequency vectors; 0 when either side is empty.
double lexical_cosine(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Top-k by score, ties by snippet_id ascending. Throws Error("EMPTY_STORE"),
/// Error("MISSING_EMBEDDING") or Error("BAD_TOP_K").
RetrievalResult retrieve(const ConstraintStore& store, const RetrievalQuery& query,
                         std::size_t top_k, const Scorer& scorer = Scorer::lexical());

struct SummaryEntry {
  std::string snippet_id;
  std::string clause_id;
  SnippetLayer layer = SnippetLayer::Legal;
  std::string text;
  double score = 0.0;
  std::size_t tokens = 0;

  bool operator==(const SummaryEntry&) const = default;
};

struct ConstraintSummary {
  std::vector<SummaryEntry> entries;
  std::size_t tokens_used = 0;

  /// One line per entry: "[layer clause_id] text".
  std::string render() const;
};

struct ScoredSnippet {
  ConstraintSnippet snippet;
  double score = 0.0;
};

/// Reorders by layer priority (legal > vehicle > driver), then score
/// descending, then snippet_id; appends whole snippets until the next one
/// would exceed the budget. Throws Error("BAD_BUDGET") for budget 0.
ConstraintSummary compress(std::vector<ScoredSnippet> ranked, std::size_t token_budget);

/// Resolves a retrieval result against the store it came from.
std::vector<ScoredSnippet> resolve(const ConstraintStore& store, const RetrievalResult& result);

}  // namespace ecpo
