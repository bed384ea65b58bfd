#include "ecpo/perception.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ecpo/defaults.hpp"
#include "ecpo/error.hpp"
#include "ecpo/text.hpp"
#include "json.hpp"

namespace ecpo {

std::vector<std::string> PerceptionSummary::empty_stages() const {
  std::vector<std::string> out;
  if (text::trim(summary_initial).empty()) out.emplace_back("initial");
  if (text::trim(summary_transition).empty()) out.emplace_back("transition");
  if (text::trim(summary_final).empty()) out.emplace_back("final");
  return out;
}

std::optional<std::pair<double, double>> parse_band(std::string_view s) {
  // Pull the first two numbers out of the string; anything between them is
  // treated as the range separator.
  std::vector<double> nums;
  std::size_t i = 0;
  while (i < s.size() && nums.size() < 2) {
    const char c = s[i];
    const bool starts = (c >= '0' && c <= '9') ||
                        (c == '-' && nums.empty() && i + 1 < s.size() && s[i + 1] >= '0' &&
                         s[i + 1] <= '9' && (i == 0 || s[i - 1] == ' '));
    if (!starts) {
      ++i;
      continue;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
    if (ec != std::errc()) return std::nullopt;
    nums.push_back(v);
    i = static_cast<std::size_t>(ptr - s.data());
  }
  if (nums.size() != 2) return std::nullopt;
  return std::pair{std::min(nums[0], nums[1]), std::max(nums[0], nums[1])};
}

void check_vehicle_profile(const VehicleProfile& v) {
  for (const auto& b : v.capability_limits) {
    if (!v.available_actuators.contains(b.action_type)) {
      throw Error("BAD_PROFILE", "capability bound on '" + b.key + "' names unavailable actuator " +
                                     std::string(to_string(b.action_type)));
    }
    if (b.min > b.max) throw Error("BAD_PROFILE", "capability bound on '" + b.key + "' has min > max");
  }
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view s) {
  const auto k = text::lower(text::trim(s));
  if (k == "train") return Split::Train;
  if (k == "val" || k == "valid" || k == "validation" || k == "dev") return Split::Val;
  if (k == "test") return Split::Test;
  return std::nullopt;
}

std::string normalize_label(std::string_view label) { return text::snake_key(label); }

LabelVocabulary LabelVocabulary::parse(std::string_view json_text) {
  const auto doc = nlohmann::json::parse(json_text, nullptr, false, true);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("heads") ||
      !doc["heads"].is_array()) {
    throw Error("BAD_VOCABULARY", "expected an object with a 'heads' array");
  }
  LabelVocabulary vocab;
  for (const auto& h : doc["heads"]) {
    if (!h.is_object() || !h.contains("name") || !h["name"].is_string()) {
      throw Error("BAD_VOCABULARY", "every head needs a string 'name'");
    }
    Head head;
    head.name = normalize_label(h["name"].get<std::string>());
    head.group = h.value("group", std::string{});
    if (h.contains("labels")) {
      if (!h["labels"].is_array()) throw Error("BAD_VOCABULARY", "'labels' must be an array");
      for (const auto& l : h["labels"]) {
        if (!l.is_string()) throw Error("BAD_VOCABULARY", "labels must be strings");
        head.labels.insert(normalize_label(l.get<std::string>()));
      }
    }
    if (h.contains("nominal") && !h["nominal"].is_null()) {
      if (!h["nominal"].is_string()) throw Error("BAD_VOCABULARY", "'nominal' must be a string");
      head.nominal = normalize_label(h["nominal"].get<std::string>());
      if (!head.labels.empty() && !head.labels.contains(*head.nominal)) {
        throw Error("BAD_VOCABULARY", "nominal label of head '" + head.name + "' is not in its labels");
      }
      head.labels.insert(*head.nominal);
    }
    vocab.heads_.push_back(std::move(head));
  }
  return vocab;
}

LabelVocabulary LabelVocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("BAD_VOCABULARY", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const LabelVocabulary& LabelVocabulary::builtin() {
  static const LabelVocabulary vocab = parse(defaults::kLabelVocabulary);
  return vocab;
}

const LabelVocabulary::Head* LabelVocabulary::find(std::string_view head) const {
  const auto key = normalize_label(head);
  for (const auto& h : heads_) {
    if (h.name == key) return &h;
  }
  return nullptr;
}

bool LabelVocabulary::is_known(std::string_view label) const {
  if (const auto colon = label.find(':'); colon != std::string_view::npos) {
    const auto* head = find(label.substr(0, colon));
    return head != nullptr && head->labels.contains(normalize_label(label.substr(colon + 1)));
  }
  const auto key = normalize_label(label);
  return std::any_of(heads_.begin(), heads_.end(),
                     [&](const Head& h) { return h.labels.contains(key); });
}

std::vector<std::string> LabelVocabulary::unknown_labels(const PerceptionSummary& z) const {
  std::vector<std::string> out;
  for (const auto* labels : {&z.driver_labels, &z.scene_labels}) {
    for (const auto& l : *labels) {
      if (!is_known(l)) out.push_back(l);
    }
  }
  return out;
}

// ---- Mixed pairing ----------------------------------------------------------

std::uint32_t Lcg64::below(std::uint32_t n) {
  if (n <= 1) return 0;
  const std::uint64_t range = std::uint64_t{1} << 32;
  const std::uint64_t limit = range - (range % n);
  std::uint64_t r = next();
  while (r >= limit) r = next();
  return static_cast<std::uint32_t>(r % n);
}

std::uint64_t split_seed(std::uint64_t seed, Split split) {
  return seed ^ (static_cast<std::uint64_t>(split) * 0x9E3779B97F4A7C15ULL);
}

namespace {

void append_text(std::string& dst, const std::string& src) {
  if (text::trim(src).empty()) return;
  if (!dst.empty()) dst.push_back(' ');
  dst += src;
}

void merge_heads(HeadLabels& dst, const HeadLabels& src) {
  for (const auto& [head, labels] : src) dst[head].insert(labels.begin(), labels.end());
}

SampleRecord merge(const HalfSample& in, const std::vector<const HalfSample*>& outs) {
  SampleRecord rec;
  rec.split = in.split;
  auto& z = rec.prompt.z;
  z = in.z;
  std::string id = in.sample_id + "|";
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const auto& o = *outs[i];
    if (i > 0) id += "+";
    id += o.sample_id;
    z.scene_labels.insert(o.z.scene_labels.begin(), o.z.scene_labels.end());
    z.driver_labels.insert(o.z.driver_labels.begin(), o.z.driver_labels.end());
    append_text(z.summary_initial, o.z.summary_initial);
    append_text(z.summary_transition, o.z.summary_transition);
    append_text(z.summary_final, o.z.summary_final);
    z.objects.insert(z.objects.end(), o.z.objects.begin(), o.z.objects.end());
  }
  z.objects = text::dedupe(z.objects);
  rec.prompt.prompt_id = std::move(id);
  rec.ground_truth_labels = in.ground_truth_labels;
  for (const auto* o : outs) merge_heads(rec.ground_truth_labels, o->ground_truth_labels);
  return rec;
}

}  // namespace

std::vector<MixedPair> pair_mixed(std::span<const HalfSample> in_samples,
                                  std::span<const HalfSample> out_samples, std::uint64_t seed,
                                  std::size_t block_size) {
  if (block_size < 1) throw Error("BAD_BLOCK_SIZE", "block_size must be at least 1");

  std::map<Split, std::vector<const HalfSample*>> pools;
  for (const auto& s : out_samples) pools[s.split].push_back(&s);
  for (auto& [split, pool] : pools) {
    Lcg64 rng(split_seed(seed, split));
    seeded_shuffle(pool, rng);
  }

  std::map<Split, std::size_t> cursor;
  std::vector<MixedPair> out;
  out.reserve(in_samples.size());
  for (const auto& in : in_samples) {
    const auto pool_it = pools.find(in.split);
    if (pool_it == pools.end() || pool_it->second.empty()) {
      throw Error("EMPTY_SPLIT", "no out-of-cabin samples in split '" +
                                     std::string(to_string(in.split)) + "'");
    }
    const auto& pool = pool_it->second;
    const std::size_t k = cursor[in.split]++;
    std::vector<const HalfSample*> block;
    for (std::size_t t = 0; t < block_size; ++t) block.push_back(pool[(k * block_size + t) % pool.size()]);

    MixedPair pair;
    pair.in_id = in.sample_id;
    pair.split = in.split;
    for (const auto* b : block) pair.out_ids.push_back(b->sample_id);
    pair.record = merge(in, block);
    out.push_back(std::move(pair));
  }
  return out;
}

// ---- Scenario stratification -----------------------------------------------

std::string_view to_string(ScenarioGroup g) {
  switch (g) {
    case ScenarioGroup::DriverCritical: return "driver_critical";
    case ScenarioGroup::EnvCritical: return "env_critical";
    case ScenarioGroup::InteractionCritical: return "interaction_critical";
    case ScenarioGroup::Nominal: return "nominal";
  }
  return "nominal";
}

namespace {

bool head_critical(const HeadLabels& labels, const std::string& head_name,
                   const LabelVocabulary& vocab) {
  const auto key = normalize_label(head_name);
  const std::set<std::string>* values = nullptr;
  for (const auto& [h, v] : labels) {
    if (normalize_label(h) == key) values = &v;
  }
  if (values == nullptr || values->empty()) {
    throw Error("MISSING_HEAD", "record lacks head '" + head_name + "'");
  }
  const auto* head = vocab.find(key);
  if (head == nullptr || !head->nominal) {
    throw Error("MISSING_NOMINAL", "no nominal label declared for head '" + head_name + "'");
  }
  return std::any_of(values->begin(), values->end(),
                     [&](const std::string& v) { return normalize_label(v) != *head->nominal; });
}

}  // namespace

ScenarioGroup classify_scenario(const HeadLabels& labels, const LabelVocabulary& vocab,
                                const StratifyHeads& heads) {
  bool driver = false;
  bool env = false;
  // evaluate every head so a missing one is always reported
  for (const auto& h : heads.driver_heads) driver = head_critical(labels, h, vocab) || driver;
  for (const auto& h : heads.env_heads) env = head_critical(labels, h, vocab) || env;
  if (driver && env) return ScenarioGroup::InteractionCritical;
  if (driver) return ScenarioGroup::DriverCritical;
  if (env) return ScenarioGroup::EnvCritical;
  return ScenarioGroup::Nominal;
}

std::map<ScenarioGroup, std::vector<SampleRecord>> stratify(std::span<const SampleRecord> records,
                                                            const LabelVocabulary& vocab,
                                                            const StratifyHeads& heads) {
  std::map<ScenarioGroup, std::vector<SampleRecord>> out;
  for (auto g : {ScenarioGroup::DriverCritical, ScenarioGroup::EnvCritical,
                 ScenarioGroup::InteractionCritical, ScenarioGroup::Nominal}) {
    out[g];
  }
  for (const auto& r : records) {
    out[classify_scenario(r.ground_truth_labels, vocab, heads)].push_back(r);
  }
  return out;
}

}  // namespace ecpo
