#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecpo/perception.hpp"
#include "ecpo/validator.hpp"

namespace ecpo {

struct Candidate {
  std::string candidate_id;
  std::string document;
  EcpoReport report;
  std::optional<double> log_score;  // f_theta(u, y), supplied by the trainer
};

struct CandidateSet {
  std::string prompt_id;
  std::vector<Candidate> candidates;
};

struct PreferencePair {
  std::string prompt_id;
  std::string plus_id;
  std::string minus_id;
  double gap = 0.0;
  double weight = 0.0;

  bool operator==(const PreferencePair&) const = default;
};

struct PsiConfig {
  double floor = 0.05;
  double ceiling = 1.0;
};

/// beta and lambda_ecpo have no defaults; callers must set them.
struct TrainingConfig {
  std::optional<double> beta;
  std::optional<double> lambda_ecpo;
  PsiConfig psi;
  double gap_min = 0.0;
};

/// Throws Error("BAD_TRAINING_CONFIG").
void check_training_config(const TrainingConfig& cfg, bool require_loss_terms = true);

/// Highest and lowest ECPO candidates, ties by candidate_id ascending. nullopt
/// when max - min <= gap_min. Throws Error("EMPTY_SET").
std::optional<PreferencePair> select_pair(const CandidateSet& set, double gap_min = 0.0,
                                          const PsiConfig& psi = {});

/// Clipped linear map min(ceiling, max(floor, gap)).
double weight(double gap, const PsiConfig& psi = {});

/// -w * log sigmoid(beta * (f_plus - f_minus)), stable for large |beta * diff|.
double pairwise_loss(double f_plus, double f_minus, double beta, double w);

/// Mean weighted loss over pairs whose candidates carry log scores.
double ecpo_loss(std::span<const PreferencePair> pairs,
                 const std::map<std::string, double>& log_scores, double beta);

double combined_objective(double l_sft, double l_ecpo, double lambda_ecpo);

struct PreferenceRecord {
  std::string prompt_id;
  std::optional<StrategyPrompt> prompt;
  std::string chosen;
  std::string rejected;
  std::string chosen_id;
  std::string rejected_id;
  double gap = 0.0;
  double weight = 0.0;
};

/// Candidate lookup keyed by (prompt_id, candidate_id).
using CandidateLookup = std::map<std::pair<std::string, std::string>, const Candidate*>;

CandidateLookup index_candidates(std::span<const CandidateSet> sets);

/// One record per pair, sorted by prompt_id (stable for equal ids). Throws
/// Error("DANGLING_ID") when a pair names an unknown candidate.
std::vector<PreferenceRecord> export_preference_dataset(
    std::span<const PreferencePair> pairs, const CandidateLookup& candidates,
    const std::map<std::string, StrategyPrompt>& prompts = {});

}  // namespace ecpo
