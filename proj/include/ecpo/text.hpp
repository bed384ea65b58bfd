#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ecpo::text {

// Token normalization shared by retrieval, evidence matching and hazard rules:
// ASCII letters are lower-cased, every ASCII character that is not a letter or
// digit separates tokens, and bytes >= 0x80 (UTF-8 sequences) stay inside
// tokens untouched.

/// All tokens of `s` in source order, stopwords kept.
std::vector<std::string> tokenize(std::string_view s);

/// Tokens of `s` with the fixed stopword list removed.
std::vector<std::string> content_tokens(std::string_view s);

bool is_stopword(std::string_view token);

/// Light suffix stripping used for trigger matching ("rainy", "raining" and
/// "rain" share a stem; so do "reversing" and "reverse").
std::string stem(std::string_view token);

std::vector<std::string> stems(const std::vector<std::string>& tokens);

/// True if `needle` occurs as a contiguous run inside `haystack`.
bool contains_sequence(const std::vector<std::string>& haystack,
                       const std::vector<std::string>& needle);

std::string lower(std::string_view s);
std::string trim(std::string_view s);

/// "In Cabin Text" -> "in_cabin_text". Runs of spaces, hyphens and
/// underscores collapse to a single underscore.
std::string snake_key(std::string_view s);

/// Whitespace-delimited unit count, as used for summary token budgets.
std::size_t whitespace_token_count(std::string_view s);

bool is_valid_utf8(std::string_view s);

/// Order-preserving de-duplication.
std::vector<std::string> dedupe(const std::vector<std::string>& items);

/// |A ∩ B| / |A ∪ B| over token sets; 0 when both are empty.
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace ecpo::text
