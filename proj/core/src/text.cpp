#include "cupmem/text.hpp"

#include <algorithm>
#include <cctype>

#include "cupmem/errors.hpp"

namespace cupmem {

namespace {

bool is_word(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

char lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

}  // namespace

std::string normalize_value(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_sep = false;
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!out.empty()) pending_sep = true;
            continue;
        }
        if (pending_sep) {
            out.push_back('_');
            pending_sep = false;
        }
        out.push_back(lower(c));
    }
    if (out.empty()) throw ValidationError("empty value after normalization");
    return out;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (is_word(c)) {
            cur.push_back(lower(c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::vector<std::string> token_set(const std::string& text) {
    auto tokens = tokenize(text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    return tokens;
}

bool glob_match(const std::string& pattern, const std::string& value) {
    // Iterative '*' matcher with backtracking over the last star.
    std::size_t p = 0, v = 0;
    std::size_t star = std::string::npos, mark = 0;
    while (v < value.size()) {
        if (p < pattern.size() && (pattern[p] == value[v])) {
            ++p;
            ++v;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = v;
        } else if (star != std::string::npos) {
            p = star + 1;
            v = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

bool pattern_match(const std::string& pattern, const std::string& value) {
    std::size_t begin = 0;
    while (begin <= pattern.size()) {
        std::size_t end = pattern.find('|', begin);
        if (end == std::string::npos) end = pattern.size();
        if (glob_match(pattern.substr(begin, end - begin), value)) return true;
        begin = end + 1;
    }
    return false;
}

}  // namespace cupmem
