#pragma once

#include <cstddef>
#include <istream>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "ecpo/policy.hpp"

namespace ecpo {

struct LowLevelMatch {
  std::size_t action_index = 0;
  std::string field;  // "rationale" or "parameters/<key>"
  std::string matched_pattern;
  std::string matched_text;

  bool operator==(const LowLevelMatch&) const = default;
};

/// Compiled set of impermissible control-language patterns. Each pattern is a
/// case-insensitive ECMAScript regex anchored at word boundaries; a literal
/// space in a pattern matches any run of whitespace.
class ControlLexicon {
public:
  ControlLexicon() = default;
  explicit ControlLexicon(const std::vector<std::string>& patterns);

  /// One pattern per line, '#' starts a comment. Throws Error("BAD_LEXICON").
  static ControlLexicon parse(std::istream& in);
  static ControlLexicon load(const std::string& path);
  static const ControlLexicon& builtin();

  const std::vector<std::string>& patterns() const { return patterns_; }

  /// Every (pattern, occurrence) pair found in `text`, ordered by pattern then position.
  std::vector<std::pair<std::string, std::string>> scan(std::string_view text) const;

private:
  std::vector<std::string> patterns_;
  std::vector<std::regex> compiled_;
};

/// Scans every action's string parameters (sorted key order) and rationale.
std::vector<LowLevelMatch> detect_low_level_control(const PolicyAction& policy,
                                                    const ControlLexicon& lexicon);

/// Builds a word-boundary anchored, case-insensitive regex from a lexicon or
/// keyword pattern. Throws std::regex_error on bad syntax.
std::regex compile_word_pattern(std::string_view pattern);

}  // namespace ecpo
