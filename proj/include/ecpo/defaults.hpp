#pragma once

#include <string_view>

// Built-in rule and vocabulary files. The copies under data/ are the editable
// versions of the same text; a test keeps them in sync.
namespace ecpo::defaults {

extern const std::string_view kControlLexicon;
extern const std::string_view kHazardRules;
extern const std::string_view kManeuverTerms;
extern const std::string_view kLabelVocabulary;

}  // namespace ecpo::defaults
