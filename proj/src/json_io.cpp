// Copyright (c) ppsa contributors.
// SPDX-License-Identifier: Apache-2.0
#include "pps/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "pps/common.hpp"

namespace pps::io {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json constraint_to_json(const semialg::Constraint& c,
                        const std::vector<std::string>& names) {
    return json{{"poly", c.r.to_string(17, names)},
                {"cmp", c.cmp == semialg::Cmp::Lt ? "<" : "<="}};
}

semialg::Constraint constraint_from_json(const json& j,
                                         const std::vector<std::string>& names) {
    semialg::Constraint c;
    c.r = poly::parse_polynomial(j.at("poly").get<std::string>(), names);
    std::string cmp = j.at("cmp").get<std::string>();
    if (cmp == "<")
        c.cmp = semialg::Cmp::Lt;
    else if (cmp == "<=")
        c.cmp = semialg::Cmp::Le;
    else
        throw Error("bounds json: unknown comparator '" + cmp + "'");
    return c;
}

json set_to_json(const semialg::SemiAlgSet& set, const std::vector<std::string>& names) {
    json arr = json::array();
    for (const auto& c : set.constraints()) arr.push_back(constraint_to_json(c, names));
    return arr;
}

semialg::SemiAlgSet set_from_json(const json& j, int dimension,
                                  const std::vector<std::string>& names) {
    semialg::SemiAlgSet set(dimension);
    for (const auto& item : j) set.add(constraint_from_json(item, names));
    return set;
}

json bound_array(const analysis::BoundVector& w) {
    json arr = json::array();
    for (double v : w.values) arr.push_back(number_to_json(v));
    return arr;
}

} // namespace

json number_to_json(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    if (std::isnan(v)) throw Error("refusing to serialize NaN");
    return v;
}

double number_from_json(const json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        throw Error("unknown numeric literal '" + s + "'");
    }
    return j.get<double>();
}

json system_to_json(const semialg::PpsSystem& sys) {
    std::vector<std::string> names = sys.display_names();
    json j;
    j["dimension"] = sys.dimension;
    j["variables"] = names;
    j["init"] = json{{"constraints", set_to_json(sys.init, names)}};
    if (sys.init_box) {
        json box = json::array();
        for (const auto& [a, b] : sys.init_box->ranges) box.push_back(json::array({a, b}));
        j["init"]["box"] = box;
    }
    j["guard"] = json{{"constraints", set_to_json(sys.guard, names)}};
    json cells = json::array();
    json updates = json::array();
    for (size_t i = 0; i < sys.partition.size(); ++i) {
        cells.push_back(json{{"constraints", set_to_json(sys.partition.cell(i), names)}});
        json components = json::array();
        for (const auto& t : sys.updates[i]) components.push_back(t.to_string(17, names));
        updates.push_back(components);
    }
    j["cells"] = cells;
    j["updates"] = updates;
    return j;
}

semialg::PpsSystem system_from_json(const json& j) {
    semialg::PpsSystem sys;
    sys.dimension = j.at("dimension").get<int>();
    sys.variables = j.at("variables").get<std::vector<std::string>>();
    if (static_cast<int>(sys.variables.size()) != sys.dimension)
        throw Error("system json: variables/dimension mismatch");
    sys.init = set_from_json(j.at("init").at("constraints"), sys.dimension, sys.variables);
    if (j.at("init").contains("box")) {
        semialg::Box box;
        for (const auto& pair : j.at("init").at("box"))
            box.ranges.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        sys.init_box = box;
    }
    sys.guard = set_from_json(j.at("guard").at("constraints"), sys.dimension, sys.variables);
    std::vector<semialg::SemiAlgSet> cells;
    for (const auto& cell : j.at("cells"))
        cells.push_back(set_from_json(cell.at("constraints"), sys.dimension, sys.variables));
    sys.partition = semialg::Partition(std::move(cells));
    for (const auto& comps : j.at("updates")) {
        std::vector<poly::Polynomial> update;
        for (const auto& t : comps)
            update.push_back(poly::parse_polynomial(t.get<std::string>(), sys.variables));
        sys.updates.push_back(std::move(update));
    }
    sys.validate();
    return sys;
}

json bounds_to_json(const analysis::TemplateBasis& basis,
                    const analysis::BoundVector& w,
                    const std::vector<std::string>& variables) {
    if (w.size() != basis.size()) throw Error("bounds json: size mismatch");
    json j;
    j["variables"] = variables;
    json templates = json::array();
    for (const auto& t : basis.polys()) templates.push_back(t.to_string(17, variables));
    j["templates"] = templates;
    json values = json::array();
    for (double v : w.values) values.push_back(number_to_json(v));
    j["values"] = values;
    return j;
}

std::pair<analysis::TemplateBasis, analysis::BoundVector>
bounds_from_json(const json& j) {
    std::vector<std::string> variables = j.at("variables").get<std::vector<std::string>>();
    std::vector<poly::Polynomial> templates;
    for (const auto& t : j.at("templates"))
        templates.push_back(poly::parse_polynomial(t.get<std::string>(), variables));
    analysis::BoundVector w;
    for (const auto& v : j.at("values")) w.values.push_back(number_from_json(v));
    if (w.size() != templates.size()) throw Error("bounds json: size mismatch");
    return {analysis::TemplateBasis(std::move(templates)), std::move(w)};
}

json trace_to_json(const analysis::IterationTrace& trace,
                   const analysis::TemplateBasis& basis,
                   const std::vector<std::string>& variables, int degree,
                   bool include_times) {
    json j;
    j["degree"] = degree;
    j["variables"] = variables;
    json templates = json::array();
    for (const auto& t : basis.polys()) templates.push_back(t.to_string(17, variables));
    j["templates"] = templates;
    j["labels"] = basis.labels();
    j["termination"] = analysis::to_string(trace.termination);
    j["improvements"] = trace.improvements;
    j["final_bounds"] = bound_array(trace.final_bounds);
    if (!trace.note.empty()) j["note"] = trace.note;
    json records = json::array();
    for (const auto& rec : trace.records) {
        json r;
        r["w"] = bound_array(rec.w);
        r["fw"] = bound_array(rec.fw);
        r["distance"] = number_to_json(rec.distance);
        json policy = json::array();
        for (const auto& e : rec.policy) {
            json p;
            p["cell"] = e.cell + 1;
            p["template"] = basis.labels()[static_cast<size_t>(e.tmpl)];
            p["value"] = number_to_json(e.value);
            p["raw_value"] = number_to_json(e.raw_value);
            p["residual"] = e.residual;
            p["lambda"] = e.lambda;
            policy.push_back(std::move(p));
        }
        r["policy"] = std::move(policy);
        if (rec.lp) {
            json lp;
            json lb = json::array();
            for (long i = 0; i < rec.lp->lower_bounds.size(); ++i)
                lb.push_back(number_to_json(rec.lp->lower_bounds[i]));
            lp["lower_bounds"] = std::move(lb);
            json rows = json::array();
            for (const auto& row : rec.lp->rows) {
                json rj;
                rj["coeffs"] = std::vector<double>(row.coeffs.data(),
                                                   row.coeffs.data() + row.coeffs.size());
                rj["constant"] = row.constant;
                rj["target"] = basis.labels()[static_cast<size_t>(row.target)];
                if (!row.note.empty()) rj["note"] = row.note;
                rows.push_back(std::move(rj));
            }
            lp["rows"] = std::move(rows);
            r["lp"] = std::move(lp);
        }
        if (rec.lp_solution.size() > 0) r["solution"] = bound_array(rec.lp_solution);
        if (include_times) r["seconds"] = rec.wall_seconds;
        records.push_back(std::move(r));
    }
    j["records"] = std::move(records);
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << content;
    if (!out) throw Error("error while writing '" + path + "'");
}

} // namespace pps::io
