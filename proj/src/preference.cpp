#include "ecpo/preference.hpp"

#include <algorithm>
#include <cmath>

#include "ecpo/error.hpp"

namespace ecpo {

void check_training_config(const TrainingConfig& cfg, bool require_loss_terms) {
  if (require_loss_terms && !cfg.beta) throw Error("BAD_TRAINING_CONFIG", "beta must be set");
  if (require_loss_terms && !cfg.lambda_ecpo) throw Error("BAD_TRAINING_CONFIG", "lambda_ecpo must be set");
  if (cfg.beta && !(*cfg.beta > 0.0 && std::isfinite(*cfg.beta))) {
    throw Error("BAD_TRAINING_CONFIG", "beta must be positive");
  }
  if (cfg.lambda_ecpo && !(*cfg.lambda_ecpo >= 0.0 && std::isfinite(*cfg.lambda_ecpo))) {
    throw Error("BAD_TRAINING_CONFIG", "lambda_ecpo must be non-negative");
  }
  if (!(cfg.psi.floor <= cfg.psi.ceiling)) throw Error("BAD_TRAINING_CONFIG", "psi floor exceeds ceiling");
  if (!(cfg.gap_min >= 0.0)) throw Error("BAD_TRAINING_CONFIG", "gap_min must be non-negative");
}

std::optional<PreferencePair> select_pair(const CandidateSet& set, double gap_min,
                                          const PsiConfig& psi) {
  if (set.candidates.empty()) throw Error("EMPTY_SET", "candidate set '" + set.prompt_id + "' is empty");
  const Candidate* best = &set.candidates.front();
  const Candidate* worst = best;
  for (const auto& c : set.candidates) {
    const double s = c.report.ecpo;
    if (s > best->report.ecpo || (s == best->report.ecpo && c.candidate_id < best->candidate_id)) best = &c;
    if (s < worst->report.ecpo || (s == worst->report.ecpo && c.candidate_id < worst->candidate_id)) worst = &c;
  }
  const double gap = best->report.ecpo - worst->report.ecpo;
  if (gap <= gap_min) return std::nullopt;
  return PreferencePair{set.prompt_id, best->candidate_id, worst->candidate_id, gap, weight(gap, psi)};
}

double weight(double gap, const PsiConfig& psi) {
  return std::min(psi.ceiling, std::max(psi.floor, gap));
}

double pairwise_loss(double f_plus, double f_minus, double beta, double w) {
  const double x = beta * (f_plus - f_minus);
  // -log sigmoid(x) = max(-x, 0) + log1p(exp(-|x|))
  return w * (std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x))));
}

double ecpo_loss(std::span<const PreferencePair> pairs,
                 const std::map<std::string, double>& log_scores, double beta) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& p : pairs) {
    const auto a = log_scores.find(p.plus_id);
    const auto b = log_scores.find(p.minus_id);
    if (a == log_scores.end() || b == log_scores.end()) continue;
    total += pairwise_loss(a->second, b->second, beta, p.weight);
    ++n;
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

double combined_objective(double l_sft, double l_ecpo, double lambda_ecpo) {
  return l_sft + lambda_ecpo * l_ecpo;
}

CandidateLookup index_candidates(std::span<const CandidateSet> sets) {
  CandidateLookup out;
  for (const auto& s : sets) {
    for (const auto& c : s.candidates) out[{s.prompt_id, c.candidate_id}] = &c;
  }
  return out;
}

std::vector<PreferenceRecord> export_preference_dataset(
    std::span<const PreferencePair> pairs, const CandidateLookup& candidates,
    const std::map<std::string, StrategyPrompt>& prompts) {
  std::vector<PreferenceRecord> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto plus = candidates.find({p.prompt_id, p.plus_id});
    const auto minus = candidates.find({p.prompt_id, p.minus_id});
    if (plus == candidates.end()) throw Error("DANGLING_ID", "unknown candidate " + p.prompt_id + "/" + p.plus_id);
    if (minus == candidates.end()) throw Error("DANGLING_ID", "unknown candidate " + p.prompt_id + "/" + p.minus_id);
    PreferenceRecord r;
    r.prompt_id = p.prompt_id;
    if (const auto it = prompts.find(p.prompt_id); it != prompts.end()) r.prompt = it->second;
    r.chosen = plus->second->document;
    r.rejected = minus->second->document;
    r.chosen_id = p.plus_id;
    r.rejected_id = p.minus_id;
    r.gap = p.gap;
    r.weight = p.weight;
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PreferenceRecord& a, const PreferenceRecord& b) { return a.prompt_id < b.prompt_id; });
  return out;
}

}  // namespace ecpo
