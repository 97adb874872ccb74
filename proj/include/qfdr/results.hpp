// results.hpp - result tables and their CSV / JSON writers.

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qfdr/errors.hpp"

namespace qfdr {

inline constexpr const char* kArtifactVersion = "0.1.0";

// %.17g round-trips doubles, so reruns give byte-identical bodies.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class ResultTable {
  public:
    explicit ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(std::vector<double> row) {
        if (row.size() != columns_.size()) {
            throw ContractViolation("ResultTable: row has " + std::to_string(row.size()) + " cells, expected " +
                                    std::to_string(columns_.size()));
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!std::isfinite(row[i])) {
                throw ConvergenceError("ResultTable: non-finite value in column " + columns_[i]);
            }
        }
        rows_.push_back(std::move(row));
    }

    // Scalar results reported next to the table (CSV header and JSON sidecar).
    void add_summary(const std::string& key, double value) { summary_.emplace_back(key, value); }
    void add_note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }
    const std::vector<std::pair<std::string, double>>& summary() const { return summary_; }
    const std::vector<std::pair<std::string, std::string>>& notes() const { return notes_; }

    double summary_value(const std::string& key) const {
        for (const auto& [k, v] : summary_)
            if (k == key) return v;
        throw ContractViolation("ResultTable: no summary entry " + key);
    }

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < columns_.size(); ++i)
            if (columns_[i] == name) return i;
        throw ContractViolation("ResultTable: no column " + name);
    }

    std::string body() const {
        std::string s;
        for (std::size_t i = 0; i < columns_.size(); ++i) s += (i ? "," : "") + columns_[i];
        s += "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + format_number(r[i]);
            s += "\n";
        }
        return s;
    }

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::pair<std::string, double>> summary_;
    std::vector<std::pair<std::string, std::string>> notes_;
};

struct RunMetadata {
    std::string command;
    std::string config_hash;
    std::string canonical_config;
    double wall_time_s = 0.0;
    unsigned threads = 1;
    unsigned long long seed = 0;
};

inline void write_csv(const std::filesystem::path& path, const ResultTable& t, const RunMetadata& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("out", "cannot write " + path.string());
    out << "# artifact_version=" << kArtifactVersion << "\n";
    out << "# command=" << meta.command << "\n";
    out << "# config_hash=" << meta.config_hash << "\n";
    out << "# wall_time_s=" << format_number(meta.wall_time_s) << "\n";
    out << "# threads=" << meta.threads << "\n";
    out << "# seed=" << meta.seed << "\n";
    for (const auto& [k, v] : t.summary()) out << "# summary." << k << "=" << format_number(v) << "\n";
    for (const auto& [k, v] : t.notes()) out << "# note." << k << "=" << v << "\n";
    out << t.body();
}

inline nlohmann::ordered_json to_json(const ResultTable& t, const RunMetadata& meta) {
    nlohmann::ordered_json j;
    j["artifact_version"] = kArtifactVersion;
    j["command"] = meta.command;
    j["config_hash"] = meta.config_hash;
    j["wall_time_s"] = meta.wall_time_s;
    j["threads"] = meta.threads;
    j["seed"] = meta.seed;
    j["config"] = nlohmann::ordered_json::object();
    std::size_t pos = 0;
    const std::string& c = meta.canonical_config;
    while (pos < c.size()) {
        const auto nl = c.find('\n', pos);
        const std::string line = c.substr(pos, nl - pos);
        const auto eq = line.find('=');
        j["config"][line.substr(0, eq)] = line.substr(eq + 1);
        pos = nl + 1;
    }
    j["columns"] = t.columns();
    j["rows"] = t.rows().size();
    j["summary"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.summary()) j["summary"][k] = v;
    for (const auto& [k, v] : t.notes()) j["notes"][k] = v;
    return j;
}

inline void write_json(const std::filesystem::path& path, const ResultTable& t, const RunMetadata& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("out", "cannot write " + path.string());
    out << to_json(t, meta).dump(2) << "\n";
}

} // namespace qfdr
