#pragma once

#include "sagui/errors.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace sagui {

/// Ordered "key = value" text with optional "[section]" headers; a key inside a
/// section is stored as "section.key". '#' starts a comment.
class KeyValues {
public:
    static KeyValues parse(std::istream& in) {
        KeyValues kv;
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            if (!section.empty()) key = section + "." + key;
            kv.set(key, trim(line.substr(eq + 1)));
        }
        return kv;
    }

    static KeyValues parse(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    void set(const std::string& key, std::string value) {
        if (auto it = index_.find(key); it != index_.end()) {
            entries_[it->second].second = std::move(value);
        } else {
            index_[key] = entries_.size();
            entries_.emplace_back(key, std::move(value));
        }
    }

    bool has(const std::string& key) const { return index_.count(key) != 0; }

    const std::string& get(const std::string& key) const {
        const auto it = index_.find(key);
        if (it == index_.end()) throw ConfigError("missing key '" + key + "'");
        return entries_[it->second].second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? get(key) : fallback;
    }

    double number(const std::string& key) const { return to_double(key, get(key)); }
    double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
    long long integer(const std::string& key) const { return static_cast<long long>(to_double(key, get(key))); }
    long long integer_or(const std::string& key, long long fallback) const { return has(key) ? integer(key) : fallback; }
    bool flag_or(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = get(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("key '" + key + "' expects a boolean, got '" + v + "'");
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    /// Semicolon-separated groups of comma-separated numbers: "1,2;3,4".
    static std::vector<std::vector<double>> parse_groups(const std::string& text) {
        std::vector<std::vector<double>> groups;
        std::stringstream outer(text);
        std::string group;
        while (std::getline(outer, group, ';')) {
            group = trim(group);
            if (group.empty()) continue;
            std::vector<double> values;
            std::stringstream inner(group);
            std::string item;
            while (std::getline(inner, item, ',')) values.push_back(to_double(text, trim(item)));
            groups.push_back(std::move(values));
        }
        return groups;
    }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

private:
    static double to_double(const std::string& key, const std::string& value) {
        double x = 0.0;
        const auto res = std::from_chars(value.data(), value.data() + value.size(), x);
        if (res.ec != std::errc() || res.ptr != value.data() + value.size())
            throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
        return x;
    }

    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
};

} // namespace sagui
