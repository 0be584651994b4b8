#pragma once
// Internal JSON helpers (strict-mode field checking, typed accessors).
// Not part of the installed API.

#include <initializer_list>
#include <string>

#include <json.hpp>

#include "cupmem/errors.hpp"

namespace cupmem::detail {

using nlohmann::json;

inline json parse_json(const std::string& text, const std::string& what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ParseError("malformed " + what);
    return doc;
}

// Strict mode: any key outside `allowed` is a validation error.
inline void expect_keys(const json& obj, std::initializer_list<const char*> allowed,
                        const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + " is not an object");
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) throw ValidationError("unknown field '" + key + "' in " + where);
    }
}

inline const json& require_field(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError("missing field '" + std::string(key) + "' in " + where);
    return *it;
}

inline std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require_field(obj, key, where);
    if (!v.is_string()) throw ValidationError("field '" + std::string(key) + "' in " + where + " is not a string");
    return v.get<std::string>();
}

}  // namespace cupmem::detail
