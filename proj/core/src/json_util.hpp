// Internal helpers for loader validation: collect readable errors instead of
// throwing, and reject unknown keys everywhere (config typos should not pass
// silently). Not installed.
#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "qhpc/json.hpp"

namespace qhpc::jsonutil {

inline Json load_json_file(const std::filesystem::path& path, std::vector<std::string>& errors) {
    std::ifstream in(path);
    if (!in) {
        errors.push_back("cannot open file: " + path.string());
        return Json();
    }
    try {
        return Json::parse(in);
    } catch (const std::exception& e) {
        errors.push_back(path.string() + ": " + e.what());
        return Json();
    }
}

inline bool require_object(const Json& v, const std::string& ctx,
                           std::vector<std::string>& errors) {
    if (v.is_object()) return true;
    errors.push_back(ctx + ": expected a JSON object");
    return false;
}

inline void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                                const std::string& ctx, std::vector<std::string>& errors) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) errors.push_back(ctx + ": unknown key '" + key + "'");
    }
}

inline std::optional<std::string> get_string(const Json& obj, const char* key,
                                             const std::string& ctx,
                                             std::vector<std::string>& errors,
                                             bool required = true) {
    if (!obj.contains(key)) {
        if (required) errors.push_back(ctx + ": missing key '" + key + "'");
        return std::nullopt;
    }
    const Json& v = obj.at(key);
    if (!v.is_string()) {
        errors.push_back(ctx + ": '" + key + "' must be a string");
        return std::nullopt;
    }
    return v.get<std::string>();
}

inline std::optional<double> get_number(const Json& obj, const char* key, const std::string& ctx,
                                        std::vector<std::string>& errors, bool required = true) {
    if (!obj.contains(key)) {
        if (required) errors.push_back(ctx + ": missing key '" + key + "'");
        return std::nullopt;
    }
    const Json& v = obj.at(key);
    if (!v.is_number()) {
        errors.push_back(ctx + ": '" + key + "' must be a number");
        return std::nullopt;
    }
    return v.get<double>();
}

inline std::optional<std::int64_t> get_int(const Json& obj, const char* key,
                                           const std::string& ctx,
                                           std::vector<std::string>& errors,
                                           bool required = true) {
    if (!obj.contains(key)) {
        if (required) errors.push_back(ctx + ": missing key '" + key + "'");
        return std::nullopt;
    }
    const Json& v = obj.at(key);
    if (!v.is_number_integer()) {
        errors.push_back(ctx + ": '" + key + "' must be an integer");
        return std::nullopt;
    }
    return v.get<std::int64_t>();
}

inline const Json* get_array(const Json& obj, const char* key, const std::string& ctx,
                             std::vector<std::string>& errors, bool required = true) {
    if (!obj.contains(key)) {
        if (required) errors.push_back(ctx + ": missing key '" + key + "'");
        return nullptr;
    }
    const Json& v = obj.at(key);
    if (!v.is_array()) {
        errors.push_back(ctx + ": '" + key + "' must be an array");
        return nullptr;
    }
    return &v;
}

}  // namespace qhpc::jsonutil
