#pragma once
// Token and pattern utilities: value normalization, tokenization and the
// glob-with-alternation pattern language used by knowledge rules.

#include <string>
#include <vector>

namespace cupmem {

// Lowercases, trims, collapses internal whitespace runs to '_'.
// Throws ValidationError on empty results.
std::string normalize_value(const std::string& raw);

// Lowercase alphanumeric runs; '_' and every other character separate tokens.
std::vector<std::string> tokenize(const std::string& text);

// Sorted, deduplicated token set.
std::vector<std::string> token_set(const std::string& text);

// Full-value match of a single glob ('*' wildcard only).
bool glob_match(const std::string& pattern, const std::string& value);

// Pattern language of knowledge rules: '|'-separated globs, total over the
// value alphabet (a pattern either matches or does not, never errors).
bool pattern_match(const std::string& pattern, const std::string& value);

}  // namespace cupmem
