#ifndef HYPISS_JSON_IO_HPP
#define HYPISS_JSON_IO_HPP

// JSON (de)serialization for system descriptions, certificates and reports.
// A coefficient is either a plain number, {"expr": "..."} in the variable x,
// or {"samples": [[x, value], ...]}.

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "hypiss/certifier.hpp"
#include "hypiss/errors.hpp"
#include "hypiss/model.hpp"
#include "hypiss/sim.hpp"

namespace hypiss {

using nlohmann::json;

inline Coefficient coefficient_from_json(const json& j) {
    if (j.is_number()) return Coefficient(j.get<double>());
    if (j.is_object() && j.contains("expr"))
        return Coefficient(Expr::parse(j.at("expr").get<std::string>()));
    if (j.is_object() && j.contains("samples")) {
        SampleTable t;
        for (const auto& row : j.at("samples")) {
            if (!row.is_array() || row.size() != 2)
                throw ParseError("sample rows must be [x, value] pairs");
            t.x.push_back(row[0].get<double>());
            t.v.push_back(row[1].get<double>());
        }
        return Coefficient(std::move(t));
    }
    throw ParseError("coefficient must be a number, {\"expr\":...} or {\"samples\":...}");
}

inline json coefficient_to_json(const Coefficient& c) {
    if (c.is_constant()) return json(c(0.0));
    if (c.is_expression()) return json{{"expr", c.expr().text()}};
    json rows = json::array();
    const SampleTable& t = c.samples();
    for (size_t k = 0; k < t.x.size(); ++k) rows.push_back({t.x[k], t.v[k]});
    return json{{"samples", rows}};
}

inline SystemSpec system_from_json(const json& j) {
    SystemSpec raw;
    try {
        raw.n = j.at("n").get<int>();
        raw.m = j.at("m").get<int>();
        raw.L = j.at("L").get<double>();
        for (const auto& e : j.at("lambda")) raw.lambda.push_back(coefficient_from_json(e));
        for (const auto& row : j.at("source_jacobian")) {
            std::vector<Coefficient> r;
            for (const auto& e : row) r.push_back(coefficient_from_json(e));
            raw.source_jacobian.push_back(std::move(r));
        }
        const auto& bj = j.at("boundary_jacobian");
        raw.boundary_jacobian.resize(static_cast<long>(bj.size()),
                                     bj.empty() ? 0 : static_cast<long>(bj[0].size()));
        for (size_t r = 0; r < bj.size(); ++r)
            for (size_t q = 0; q < bj[r].size(); ++q)
                raw.boundary_jacobian(static_cast<long>(r), static_cast<long>(q)) =
                    bj[r][q].get<double>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed system JSON: ") + e.what());
    }
    return build_system(std::move(raw));
}

inline SystemSpec load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return system_from_json(j);
}

inline json gains_to_json(const IssGains& g) {
    return json{{"C1", g.C1},
                {"C2", g.C2},
                {"gamma", g.gamma},
                {"rate_certified", g.rate_certified}};
}

inline json certificate_to_json(const Certificate& c) {
    json grid = json::array();
    for (double x : c.f.grid.points) grid.push_back(x);
    json f = json::array();
    for (int i = 0; i < c.f.components(); ++i) {
        json row = json::array();
        for (int j = 0; j < c.f.values.cols(); ++j) row.push_back(c.f.values(i, j));
        f.push_back(row);
    }
    json delta = json::array();
    for (int i = 0; i < c.delta.size(); ++i) delta.push_back(c.delta(i));
    return json{{"mode", c.mode},     {"theta", c.theta}, {"alpha", c.alpha},
                {"mu", c.mu},         {"ratio", c.ratio}, {"delta", delta},
                {"grid", grid},       {"f", f},           {"gains", gains_to_json(c.gains)}};
}

inline json report_to_json(const ConditionReport& r) {
    return json{{"holds", r.holds}, {"margin", r.margin}, {"worst_location", r.worst_location}};
}

inline json envelope_report_to_json(const EnvelopeReport& r) {
    json j{{"holds", r.holds},
           {"worst_time", r.worst_time},
           {"worst_ratio", r.worst_ratio},
           {"note", r.note}};
    if (r.fitted) j["fitted"] = gains_to_json(*r.fitted);
    return j;
}

// Atomic write: serialize to a temp file in the same directory, then rename.
inline void write_text_atomic(const std::string& path, const std::string& text) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp);
        out << text;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("cannot rename " + tmp + " to " + path);
}

inline void write_json_atomic(const std::string& path, const json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

} // namespace hypiss

#endif
