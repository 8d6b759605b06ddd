// Scenario output: a table of per-run records, summary statistics and the
// pass/fail claims a run checks, plus CSV and JSON writers.

#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "laserstate/common.hpp"
#include "laserstate/laser.hpp"

namespace laserstate::scenarios {

using ordered_json = nlohmann::ordered_json;
using Cell = std::variant<std::int64_t, double, std::string>;

struct Claim {
    std::string name;
    bool pass = false;
    std::string detail;
    ordered_json values = ordered_json::object();
};

struct ScenarioResult {
    std::string scenario;
    ordered_json config = ordered_json::object();
    std::uint64_t seed = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> records;
    ordered_json summaries = ordered_json::object();
    std::vector<Claim> claims;

    void add_record(std::vector<Cell> row) {
        if (row.size() != columns.size())
            throw DimensionError("ScenarioResult: record has " + std::to_string(row.size()) + " cells, expected " +
                                 std::to_string(columns.size()));
        records.push_back(std::move(row));
    }

    Claim& claim(std::string name, bool pass, std::string detail, ordered_json values = ordered_json::object()) {
        claims.push_back({std::move(name), pass, std::move(detail), std::move(values)});
        return claims.back();
    }

    bool all_pass() const {
        for (const auto& c : claims)
            if (!c.pass) return false;
        return true;
    }
};

inline ordered_json engine_versions() {
    return ordered_json{{"laserstate", std::string(engine_version)},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                      std::to_string(EIGEN_MINOR_VERSION)}};
}

inline ordered_json params_echo(const laser::LaserParams& p) {
    return ordered_json{{"alpha_mag", p.alpha_mag}, {"kappa", p.kappa},
                        {"T", p.T},                 {"D", p.D},
                        {"n_packets", p.n_packets}, {"z0_over_c", p.z0_over_c},
                        {"omega0", p.omega0},       {"cavity_roundtrip", p.cavity_roundtrip}};
}

/// mean, standard error and 5/50/95% quantiles.
inline ordered_json summarize(const std::vector<double>& xs) {
    auto m = moments(xs);
    ordered_json j{{"n", m.n}, {"mean", m.mean}, {"se", m.se_mean}, {"variance", m.variance}};
    if (!xs.empty()) {
        j["q05"] = quantile(xs, 0.05);
        j["q50"] = quantile(xs, 0.5);
        j["q95"] = quantile(xs, 0.95);
    }
    return j;
}

// --- CSV ------------------------------------------------------------------------

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error("format_double: conversion failed");
    return std::string(buf, end);
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string format_cell(const Cell& c) {
    if (auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (auto* d = std::get_if<double>(&c)) return format_double(*d);
    return csv_escape(std::get<std::string>(c));
}

inline void write_csv(std::ostream& out, const ScenarioResult& r) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << csv_escape(r.columns[i]);
    out << "\r\n";
    for (const auto& row : r.records) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
        out << "\r\n";
    }
}

/// RFC-4180 reader: returns every row, header included, as raw strings.
inline std::vector<std::vector<std::string>> read_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    char c;
    auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        any = false;
    };
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (in.peek() == '\n') in.get(c);
            end_row();
        } else if (c == '\n') {
            end_row();
        } else {
            field += c;
        }
    }
    if (quoted) throw Error("read_csv: unterminated quoted field");
    if (any) end_row();
    return rows;
}

inline double parse_double(const std::string& s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw Error("parse_double: '" + s + "' is not a number");
    return v;
}

// --- JSON summary ---------------------------------------------------------------

inline ordered_json summary_json(const ScenarioResult& r) {
    ordered_json claims = ordered_json::array();
    for (const auto& c : r.claims)
        claims.push_back(ordered_json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}, {"values", c.values}});
    return ordered_json{{"scenario", r.scenario},
                        {"seed", r.seed},
                        {"engine_versions", engine_versions()},
                        {"config", r.config},
                        {"n_records", r.records.size()},
                        {"summaries", r.summaries},
                        {"claims", claims},
                        {"all_pass", r.all_pass()}};
}

}  // namespace laserstate::scenarios
