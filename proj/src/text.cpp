#include "ecpo/text.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <unordered_set>

namespace ecpo::text {

namespace {

// Fixed English stopword list shipped with the toolkit. Changing it changes
// every lexical score, so it is versioned with the code.
constexpr std::string_view kStopwords[] = {
    "a",       "about",   "above",  "after",   "again",  "against", "all",    "am",
    "an",      "and",     "any",    "are",     "as",     "at",      "be",     "because",
    "been",    "before",  "being",  "below",   "between", "both",   "but",    "by",
    "can",     "could",   "did",    "do",      "does",   "doing",   "down",   "during",
    "each",    "e",       "eg",     "etc",     "few",    "for",     "from",   "further",
    "had",     "has",     "have",   "having",  "he",     "her",     "here",   "hers",
    "him",     "his",     "how",    "i",       "if",     "in",      "into",   "is",
    "it",      "its",     "itself", "just",    "me",     "more",    "most",   "my",
    "no",      "nor",     "not",    "now",     "of",     "off",     "on",     "once",
    "only",    "or",      "other",  "our",     "ours",   "out",     "over",   "own",
    "please",  "s",       "same",   "she",     "should", "so",      "some",   "such",
    "than",    "that",    "the",    "their",   "them",   "then",    "there",  "these",
    "they",    "this",    "those",  "through", "to",     "too",     "under",  "until",
    "up",      "very",    "was",    "we",      "were",   "what",    "when",   "where",
    "which",   "while",   "who",    "whom",    "why",    "will",    "with",   "would",
    "you",     "your",
};

bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || is_ascii_alnum(c)) {
      cur.push_back(ascii_lower(ch));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_stopword(std::string_view token) {
  static const std::unordered_set<std::string_view> set(std::begin(kStopwords), std::end(kStopwords));
  return set.contains(token);
}

std::vector<std::string> content_tokens(std::string_view s) {
  auto toks = tokenize(s);
  std::erase_if(toks, [](const std::string& t) { return is_stopword(t); });
  return toks;
}

std::string stem(std::string_view token) {
  std::string t(token);
  for (std::string_view suffix : {"ing", "ed", "es", "s", "y"}) {
    if (suffix == "s" && ends_with(t, "ss")) break;
    if (ends_with(t, suffix) && t.size() - suffix.size() >= 3) {
      t.resize(t.size() - suffix.size());
      break;
    }
  }
  if (t.size() > 3 && t.back() == 'e') t.pop_back();
  return t;
}

std::vector<std::string> stems(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(stem(t));
  return out;
}

bool contains_sequence(const std::vector<std::string>& haystack,
                       const std::vector<std::string>& needle) {
  if (needle.empty()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = ascii_lower(c);
  return out;
}

std::string trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::string snake_key(std::string_view s) {
  std::string out;
  bool pending_sep = false;
  for (char ch : trim(s)) {
    if (ch == ' ' || ch == '-' || ch == '_' || ch == '\t') {
      pending_sep = true;
      continue;
    }
    if (pending_sep && !out.empty()) out.push_back('_');
    pending_sep = false;
    out.push_back(ascii_lower(ch));
  }
  return out;
}

std::size_t whitespace_token_count(std::string_view s) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : s) {
    const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!ws && !in_token) ++n;
    in_token = !ws;
  }
  return n;
}

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return false;
    }
    i += len;
  }
  return true;
}

std::vector<std::string> dedupe(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& it : items) {
    if (seen.insert(it).second) out.push_back(it);
  }
  return out;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace ecpo::text
