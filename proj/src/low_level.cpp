#include "ecpo/low_level.hpp"

#include <fstream>
#include <sstream>

#include "ecpo/defaults.hpp"
#include "ecpo/error.hpp"
#include "ecpo/text.hpp"

namespace ecpo {

std::regex compile_word_pattern(std::string_view pattern) {
  std::string body;
  for (char c : pattern) {
    if (c == ' ') {
      if (body.size() < 3 || body.compare(body.size() - 3, 3, "\\s+") != 0) body += "\\s+";
    } else {
      body.push_back(c);
    }
  }
  return std::regex("\\b(?:" + body + ")\\b", std::regex::ECMAScript | std::regex::icase);
}

ControlLexicon::ControlLexicon(const std::vector<std::string>& patterns) {
  for (const auto& p : patterns) {
    const auto t = text::trim(p);
    if (t.empty()) continue;
    try {
      compiled_.push_back(compile_word_pattern(t));
    } catch (const std::regex_error& e) {
      throw Error("BAD_LEXICON", "pattern '" + t + "' does not compile: " + e.what());
    }
    patterns_.push_back(t);
  }
}

ControlLexicon ControlLexicon::parse(std::istream& in) {
  std::vector<std::string> patterns;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto t = text::trim(line);
    if (!t.empty()) patterns.push_back(std::move(t));
  }
  return ControlLexicon(patterns);
}

ControlLexicon ControlLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("BAD_LEXICON", "cannot open " + path);
  return parse(in);
}

const ControlLexicon& ControlLexicon::builtin() {
  static const ControlLexicon lexicon = [] {
    std::istringstream in{std::string(defaults::kControlLexicon)};
    return parse(in);
  }();
  return lexicon;
}

std::vector<std::pair<std::string, std::string>> ControlLexicon::scan(std::string_view text) const {
  std::vector<std::pair<std::string, std::string>> out;
  const std::string s(text);
  for (std::size_t i = 0; i < compiled_.size(); ++i) {
    for (auto it = std::sregex_iterator(s.begin(), s.end(), compiled_[i]);
         it != std::sregex_iterator(); ++it) {
      out.emplace_back(patterns_[i], it->str());
    }
  }
  return out;
}

std::vector<LowLevelMatch> detect_low_level_control(const PolicyAction& policy,
                                                    const ControlLexicon& lexicon) {
  std::vector<LowLevelMatch> out;
  for (std::size_t i = 0; i < policy.actions.size(); ++i) {
    const auto& action = policy.actions[i];
    const auto record = [&](const std::string& field, std::string_view text) {
      for (auto& [pattern, matched] : lexicon.scan(text)) {
        out.push_back({i, field, std::move(pattern), std::move(matched)});
      }
    };
    for (const auto& [key, value] : action.parameters) {
      if (const auto* s = std::get_if<std::string>(&value)) record("parameters/" + key, *s);
    }
    record("rationale", action.rationale);
  }
  return out;
}

}  // namespace ecpo
