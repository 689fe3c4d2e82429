#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "adjusted.hpp"
#include "logic.hpp"
#include "resampling.hpp"
#include "schedule.hpp"
#include "simulate.hpp"
#include "tree.hpp"
#include "universe.hpp"

namespace seqrej::io {

using json = nlohmann::json;

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_probability(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": not a number: '" + text + "'");
    }
    if (used != text.size())
        throw std::invalid_argument(what + ": not a number: '" + text + "'");
    if (!(v >= 0.0) || !(v <= 1.0))
        throw std::invalid_argument(what + ": value " + text + " outside [0, 1]");
    return v;
}

inline double parse_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": not a number: '" + text + "'");
    }
    if (used != text.size())
        throw std::invalid_argument(what + ": not a number: '" + text + "'");
    return v;
}

inline std::ifstream open_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// p-value tables (CSV, columns: label, p)

struct PvalueTable {
    Universe universe;
    std::vector<double> pvalues;
};

inline PvalueTable parse_pvalue_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("p-value CSV: empty file");
    std::vector<std::string> header = detail::split_csv_line(line);
    std::optional<std::size_t> label_col, p_col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "label") label_col = i;
        if (header[i] == "p") p_col = i;
    }
    if (!label_col || !p_col)
        throw std::invalid_argument("p-value CSV: header must name columns 'label' and 'p'");
    std::vector<std::string> labels;
    std::vector<double> pvalues;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() <= std::max(*label_col, *p_col))
            throw std::invalid_argument("p-value CSV: short row: '" + line + "'");
        labels.push_back(cells[*label_col]);
        pvalues.push_back(
            detail::parse_probability(cells[*p_col], "p-value for " + cells[*label_col]));
    }
    if (labels.empty()) throw std::invalid_argument("p-value CSV: no hypotheses");
    return PvalueTable{Universe(std::move(labels)), std::move(pvalues)};
}

inline PvalueTable read_pvalue_csv(const std::string& path) {
    std::ifstream in = detail::open_file(path);
    return parse_pvalue_csv(in);
}

// ---------------------------------------------------------------------------
// data matrices (CSV with header; one optional group-label column)

inline DataMatrix parse_data_csv(std::istream& in, const std::string& group_col = "") {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("data CSV: empty file");
    std::vector<std::string> header = detail::split_csv_line(line);
    std::optional<std::size_t> group_idx;
    std::vector<std::size_t> value_cols;
    std::vector<std::string> value_names;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!group_col.empty() && header[i] == group_col) {
            group_idx = i;
        } else {
            value_cols.push_back(i);
            value_names.push_back(header[i]);
        }
    }
    if (!group_col.empty() && !group_idx)
        throw std::invalid_argument("data CSV: no column named '" + group_col + "'");
    if (value_cols.empty()) throw std::invalid_argument("data CSV: no value columns");

    DataMatrix m;
    m.cols = value_cols.size();
    m.column_names = value_names;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("data CSV: ragged row: '" + line + "'");
        for (std::size_t c : value_cols)
            m.values.push_back(detail::parse_double(cells[c], "data column " + header[c]));
        if (group_idx) m.row_groups.push_back(cells[*group_idx]);
        ++m.rows;
    }
    if (m.rows == 0) throw std::invalid_argument("data CSV: no observations");
    m.validate();
    return m;
}

inline DataMatrix read_data_csv(const std::string& path, const std::string& group_col = "") {
    std::ifstream in = detail::open_file(path);
    return parse_data_csv(in, group_col);
}

// ---------------------------------------------------------------------------
// logical structures, families, trees (JSON)

inline Universe parse_labels(const json& j) {
    if (!j.contains("labels") || !j["labels"].is_array())
        throw std::invalid_argument("structure: 'labels' array required");
    std::vector<std::string> labels;
    for (const auto& l : j["labels"]) {
        if (!l.is_string()) throw std::invalid_argument("structure: labels must be strings");
        labels.push_back(l.get<std::string>());
    }
    return Universe(std::move(labels));
}

inline LogicalStructure parse_structure(const json& j) {
    Universe u = parse_labels(j);
    if (j.value("free", false)) {
        if (j.contains("atoms"))
            throw std::invalid_argument("structure: 'free' and 'atoms' are mutually exclusive");
        return LogicalStructure::free_form(std::move(u));
    }
    if (!j.contains("atoms") || !j["atoms"].is_array())
        throw std::invalid_argument("structure: 'atoms' array (or \"free\": true) required");
    std::vector<IndexSet> atoms;
    for (const auto& a : j["atoms"]) {
        if (!a.is_array()) throw std::invalid_argument("structure: each atom is an index array");
        IndexSet t(u.size());
        for (const auto& idx : a) {
            if (!idx.is_number_unsigned())
                throw std::invalid_argument("structure: atom entries are hypothesis indices");
            std::size_t i = idx.get<std::size_t>();
            if (i >= u.size())
                throw std::invalid_argument("structure: atom index outside universe");
            if (t.test(i))
                throw std::invalid_argument("structure: duplicate index inside one atom");
            t.set(i);
        }
        atoms.push_back(std::move(t));
    }
    return LogicalStructure::with_atoms(std::move(u), std::move(atoms));
}

inline LogicalStructure read_structure(const std::string& path) {
    std::ifstream in = detail::open_file(path);
    json j = json::parse(in);
    return parse_structure(j);
}

// families as ordered label lists: either a bare [[...]] array or {"families": [[...]]}
inline std::vector<std::vector<std::string>> parse_family_labels(const json& j) {
    const json* arr = nullptr;
    if (j.is_array()) {
        arr = &j;
    } else if (j.contains("families") && j["families"].is_array()) {
        arr = &j["families"];
    } else {
        throw std::invalid_argument("families: expected [[labels]] or {\"families\": [[labels]]}");
    }
    std::vector<std::vector<std::string>> out;
    for (const auto& fam : *arr) {
        if (!fam.is_array()) throw std::invalid_argument("families: each family is a label array");
        std::vector<std::string> labels;
        for (const auto& l : fam) {
            if (!l.is_string()) throw std::invalid_argument("families: labels must be strings");
            labels.push_back(l.get<std::string>());
        }
        out.push_back(std::move(labels));
    }
    if (out.empty()) throw std::invalid_argument("families: at least one family required");
    return out;
}

inline std::vector<IndexSet> resolve_families(const Universe& u,
                                              const std::vector<std::vector<std::string>>& fams) {
    std::vector<IndexSet> out;
    for (const auto& fam : fams) {
        IndexSet g(u.size());
        for (const std::string& l : fam) g.set(u.index_of(l));
        out.push_back(std::move(g));
    }
    return out;
}

inline std::vector<IndexSet> read_families(const std::string& path, const Universe& u) {
    std::ifstream in = detail::open_file(path);
    json j = json::parse(in);
    return resolve_families(u, parse_family_labels(j));
}

// "{A,B}" (or a bare single label) -> the labelled subset
inline IndexSet parse_label_set(const std::string& key, const Universe& u) {
    std::string body = detail::trim(key);
    if (!body.empty() && body.front() == '{') {
        if (body.back() != '}')
            throw std::invalid_argument("label set: unbalanced braces in '" + key + "'");
        body = body.substr(1, body.size() - 2);
    }
    IndexSet s(u.size());
    std::istringstream in(body);
    std::string part;
    while (std::getline(in, part, ',')) {
        std::string label = detail::trim(part);
        if (label.empty()) continue;
        s.set(u.index_of(label));
    }
    if (s.empty()) throw std::invalid_argument("label set: empty set in '" + key + "'");
    return s;
}

inline std::string label_set_key(const IndexSet& s, const Universe& u) {
    std::vector<std::string> parts;
    s.for_each_member([&](std::size_t i) { parts.push_back(u.label(i)); });
    std::sort(parts.begin(), parts.end());
    if (parts.size() == 1) return parts.front();
    std::string out = "{";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ",";
        out += parts[i];
    }
    out += "}";
    return out;
}

// {"{A,B}": p, "C": p} -> set-keyed p-value table
inline std::map<IndexSet, double> parse_local_pvalues(const json& j, const Universe& u) {
    const json* obj = nullptr;
    if (j.is_object() && j.contains("local_pvalues")) {
        obj = &j["local_pvalues"];
    } else if (j.is_object()) {
        obj = &j;
    } else {
        throw std::invalid_argument("local_pvalues: expected an object of set -> p");
    }
    std::map<IndexSet, double> out;
    for (auto it = obj->begin(); it != obj->end(); ++it) {
        if (!it.value().is_number())
            throw std::invalid_argument("local_pvalues: values must be numbers");
        double p = it.value().get<double>();
        if (!(p >= 0.0) || !(p <= 1.0))
            throw std::invalid_argument("local_pvalues: p outside [0, 1] for key " + it.key());
        IndexSet s = parse_label_set(it.key(), u);
        if (!out.emplace(s, p).second)
            throw std::invalid_argument("local_pvalues: duplicate set " + it.key());
    }
    if (out.empty()) throw std::invalid_argument("local_pvalues: empty table");
    return out;
}

inline HypothesisTree parse_tree(const json& j) {
    Universe u = parse_labels(j);
    if (!j.contains("parent") || !j["parent"].is_object())
        throw std::invalid_argument("tree: 'parent' object (child -> parent) required");
    std::vector<std::optional<std::size_t>> parent(u.size());
    for (auto it = j["parent"].begin(); it != j["parent"].end(); ++it) {
        if (!it.value().is_string())
            throw std::invalid_argument("tree: parent values must be labels");
        parent[u.index_of(it.key())] = u.index_of(it.value().get<std::string>());
    }
    return HypothesisTree(std::move(u), std::move(parent));
}

inline HypothesisTree read_tree(const std::string& path) {
    std::ifstream in = detail::open_file(path);
    json j = json::parse(in);
    return parse_tree(j);
}

// ---------------------------------------------------------------------------
// report serialization

inline json index_set_to_json(const IndexSet& s, const Universe& u) {
    json arr = json::array();
    s.for_each_member([&](std::size_t i) { arr.push_back(u.label(i)); });
    return arr;
}

inline IndexSet index_set_from_json(const json& arr, const Universe& u) {
    IndexSet s(u.size());
    for (const auto& l : arr) s.set(u.index_of(l.get<std::string>()));
    return s;
}

inline json trace_to_json(const ProcedureTrace& trace, const Universe& u) {
    json steps = json::array();
    for (const TraceStep& st : trace.steps) {
        json critical = json::object();
        for (const auto& [h, c] : st.critical_values) critical[u.label(h)] = c;
        steps.push_back(json{{"rejected_before", index_set_to_json(st.rejected_before, u)},
                             {"newly_rejected", index_set_to_json(st.newly_rejected, u)},
                             {"critical_values", critical}});
    }
    json meta = json::object();
    for (const auto& [k, v] : trace.metadata) meta[k] = v;
    return json{{"steps", steps}, {"final", index_set_to_json(trace.final, u)},
                {"metadata", meta}};
}

inline ProcedureTrace trace_from_json(const json& j, const Universe& u) {
    ProcedureTrace trace;
    for (const auto& st : j.at("steps")) {
        TraceStep step;
        step.rejected_before = index_set_from_json(st.at("rejected_before"), u);
        step.newly_rejected = index_set_from_json(st.at("newly_rejected"), u);
        for (auto it = st.at("critical_values").begin(); it != st.at("critical_values").end();
             ++it)
            step.critical_values.emplace_back(u.index_of(it.key()), it.value().get<double>());
        std::sort(step.critical_values.begin(), step.critical_values.end());
        trace.steps.push_back(std::move(step));
    }
    trace.final = index_set_from_json(j.at("final"), u);
    if (j.contains("metadata"))
        for (auto it = j["metadata"].begin(); it != j["metadata"].end(); ++it)
            trace.metadata[it.key()] = it.value().get<std::string>();
    return trace;
}

inline json adjusted_to_json(const AdjustedReport& report, const Universe& u,
                             const std::vector<double>& raw) {
    json per = json::object();
    for (std::size_t h = 0; h < u.size(); ++h)
        per[u.label(h)] = json{{"raw", raw[h]}, {"adjusted", report.adjusted[h]}};
    json sets = json::array();
    for (const IndexSet& s : report.final_sets) sets.push_back(index_set_to_json(s, u));
    return json{{"hypotheses", per}, {"breakpoints", report.breakpoints},
                {"final_sets", sets}};
}

inline std::string adjusted_to_csv(const AdjustedReport& report, const Universe& u,
                                   const std::vector<double>& raw, double level) {
    std::ostringstream out;
    out << "label,raw_p,adjusted_p,rejected_at_alpha\n";
    out.precision(17);
    for (std::size_t h = 0; h < u.size(); ++h)
        out << u.label(h) << ',' << raw[h] << ',' << report.adjusted[h] << ','
            << (report.adjusted[h] <= level ? "true" : "false") << '\n';
    return out.str();
}

inline json fwer_to_json(const FwerEstimate& e) {
    return json{{"replications", e.replications},
                {"events", e.events},
                {"estimate", e.estimate},
                {"wilson95", {e.wilson_low, e.wilson_high}}};
}

}  // namespace seqrej::io
