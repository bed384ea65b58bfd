#pragma once

#include <istream>
#include <string>
#include <vector>

#include "ecpo/constraint_store.hpp"
#include "ecpo/metrics.hpp"
#include "ecpo/perception.hpp"
#include "ecpo/preference.hpp"
#include "ecpo/validator.hpp"
#include "json.hpp"

// JSON mapping of the domain types. Readers throw Error("BAD_RECORD") with the
// offending field in the message; writers emit keys in a fixed order.

namespace ecpo::io {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

/// Canonical single-line dump (UTF-8 errors replaced).
std::string dump(const ojson& j);

/// Parses one JSONL line; Error("BAD_JSON") on syntax errors.
json parse_line(const std::string& line);

/// Non-blank lines of a stream, each parsed. Error("BAD_JSON") names the line.
std::vector<json> read_jsonl(std::istream& in);
std::vector<json> read_jsonl_file(const std::string& path);

ParameterBound bound_from_json(const json& j);
ojson to_json(const ParameterBound& b);

Assertions assertions_from_json(const json& j);
ojson to_json(const Assertions& a);

ConstraintSnippet snippet_from_json(const json& j);
ojson to_json(const ConstraintSnippet& s);

PerceptionSummary perception_from_json(const json& j);
ojson to_json(const PerceptionSummary& z);

DriverProfile driver_from_json(const json& j);
ojson to_json(const DriverProfile& d);

VehicleProfile vehicle_from_json(const json& j);
ojson to_json(const VehicleProfile& v);

StrategyPrompt prompt_from_json(const json& j);
ojson to_json(const StrategyPrompt& p);

HeadLabels head_labels_from_json(const json& j);
ojson to_json(const HeadLabels& h);

HalfSample half_sample_from_json(const json& j);
SampleRecord sample_from_json(const json& j);
ojson to_json(const SampleRecord& r);
ojson to_json(const MixedPair& p);

/// A policy document given either as a string or as an inline object.
std::string document_text(const json& j);

ojson to_json(const CheckResult& c);
ojson to_json(const EcpoReport& r);

ojson to_json(const PreferencePair& p);
ojson to_json(const PreferenceRecord& r);

LabelSetSample label_set_from_json(const json& j);
RaterVotes votes_from_json(const json& j);
StrategyEvalRecord eval_record_from_json(const json& j);
RatedItem rated_item_from_json(const json& j);
ojson to_json(const MetricReport& r);

ojson to_json(const RetrievalResult& r);
ojson to_json(const ConstraintSummary& s);

}  // namespace ecpo::io
