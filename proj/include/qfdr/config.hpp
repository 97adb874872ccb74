// config.hpp - flat key = value experiment configuration.
//
// File syntax: one `key = value` per line, `#` starts a comment, blank lines
// ignored. Lists are comma separated. Later sources (command-line overrides)
// replace earlier ones.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qfdr/errors.hpp"

namespace qfdr {

struct ConfigEntry {
    std::string value;
    std::string origin;  // "file:12", "flag", "default"
};

class Config {
  public:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static Config parse(std::istream& in, const std::string& source = "config") {
        Config c;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            const std::string where = source + ":" + std::to_string(lineno);
            if (eq == std::string::npos) throw ValidationError(where, "expected key = value");
            const std::string key = trim(line.substr(0, eq));
            if (key.empty()) throw ValidationError(where, "empty key");
            if (c.entries_.count(key)) throw ValidationError(where, "duplicate key '" + key + "'");
            c.entries_[key] = ConfigEntry{trim(line.substr(eq + 1)), where};
        }
        return c;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ValidationError("config", "cannot open " + path);
        return parse(in, path);
    }

    // "key=value" from the command line.
    void override_with(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw ValidationError("--set", "expected key=value, got '" + assignment + "'");
        const std::string key = trim(assignment.substr(0, eq));
        if (key.empty()) throw ValidationError("--set", "empty key");
        entries_[key] = ConfigEntry{trim(assignment.substr(eq + 1)), "flag"};
    }

    void set(const std::string& key, const std::string& value, const std::string& origin = "flag") {
        entries_[key] = ConfigEntry{value, origin};
    }

    void set_default(const std::string& key, const std::string& value) {
        if (!entries_.count(key)) entries_[key] = ConfigEntry{value, "default"};
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    // Rejects keys outside `allowed`.
    void restrict_to(const std::set<std::string>& allowed) const {
        for (const auto& [k, e] : entries_) {
            if (!allowed.count(k)) throw ValidationError(k, "unknown key (" + e.origin + ")");
        }
    }

    std::string text(const std::string& key) const { return entry(key).value; }

    double number(const std::string& key) const { return to_double(key, entry(key).value); }

    double positive(const std::string& key) const {
        const double v = number(key);
        if (!(v > 0.0)) throw ValidationError(key, "must be > 0, got " + entry(key).value);
        return v;
    }

    long integer(const std::string& key) const { return to_long(key, entry(key).value); }

    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        for (const auto& item : split(entry(key).value)) out.push_back(to_double(key, item));
        return out;
    }

    std::vector<long> integers(const std::string& key) const {
        std::vector<long> out;
        for (const auto& item : split(entry(key).value)) out.push_back(to_long(key, item));
        return out;
    }

    std::string choice(const std::string& key, const std::set<std::string>& options) const {
        const std::string v = text(key);
        if (!options.count(v)) {
            std::string list;
            for (const auto& o : options) list += (list.empty() ? "" : "|") + o;
            throw ValidationError(key, "expected one of " + list + ", got '" + v + "'");
        }
        return v;
    }

    // Sorted key=value lines; stable across file layout and flag order.
    std::string canonical() const {
        std::string s;
        for (const auto& [k, e] : entries_) s += k + "=" + e.value + "\n";
        return s;
    }

    const std::map<std::string, ConfigEntry>& entries() const { return entries_; }

  private:
    const ConfigEntry& entry(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw ValidationError(key, "missing");
        return it->second;
    }

    static std::vector<std::string> split(const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    static double to_double(const std::string& key, const std::string& s) {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw ValidationError(key, "not a number: '" + s + "'");
        if (!std::isfinite(v)) throw ValidationError(key, "not finite: '" + s + "'");
        return v;
    }

    static long to_long(const std::string& key, const std::string& s) {
        long v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw ValidationError(key, "not an integer: '" + s + "'");
        return v;
    }

    std::map<std::string, ConfigEntry> entries_;
};

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

} // namespace qfdr
