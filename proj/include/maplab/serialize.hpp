#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "maplab/map_spec.hpp"

namespace maplab {

using nlohmann::json;

inline json to_json(const JumpFamily& f) {
    json j;
    if (const auto* pm = std::get_if<PointMass>(&f)) {
        j["type"] = "point_mass";
        j["value"] = pm->value;
    } else if (const auto* e = std::get_if<Exponential>(&f)) {
        j["type"] = "exponential";
        j["rate"] = e->rate;
        j["sign"] = e->sign;
    } else if (const auto* t = std::get_if<TwoSidedExponential>(&f)) {
        j["type"] = "two_sided_exponential";
        j["rate_plus"] = t->rate_plus;
        j["rate_minus"] = t->rate_minus;
        j["prob_plus"] = t->prob_plus;
    } else if (const auto* u = std::get_if<Uniform>(&f)) {
        j["type"] = "uniform";
        j["lo"] = u->lo;
        j["hi"] = u->hi;
    } else {
        const auto& p = std::get<Pareto>(f);
        j["type"] = "pareto";
        j["index"] = p.index;
        j["cutoff"] = p.cutoff;
        j["sign"] = p.sign;
    }
    return j;
}

inline JumpFamily jump_family_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "point_mass") return PointMass{j.at("value").get<double>()};
    if (type == "exponential")
        return Exponential{j.at("rate").get<double>(), j.value("sign", 1)};
    if (type == "two_sided_exponential")
        return TwoSidedExponential{j.at("rate_plus").get<double>(),
                                   j.at("rate_minus").get<double>(), j.value("prob_plus", 0.5)};
    if (type == "uniform") return Uniform{j.at("lo").get<double>(), j.at("hi").get<double>()};
    if (type == "pareto")
        return Pareto{j.at("index").get<double>(), j.at("cutoff").get<double>(),
                      j.value("sign", 1)};
    throw std::invalid_argument("unknown jump law type: " + type);
}

inline json to_json(const JumpLaw& law) {
    json comps = json::array();
    for (const auto& c : law.components()) {
        json jc;
        jc["weight"] = c.weight;
        jc["shift"] = c.shift;
        jc["family"] = to_json(c.family);
        comps.push_back(jc);
    }
    return json{{"components", comps}};
}

inline JumpLaw jump_law_from_json(const json& j) {
    if (j.contains("components")) {
        std::vector<JumpLaw::Component> comps;
        for (const auto& jc : j.at("components"))
            comps.push_back({jc.value("weight", 1.0), jc.value("shift", 0.0),
                             jump_family_from_json(jc.at("family"))});
        if (comps.size() == 1) return JumpLaw(comps[0].family, comps[0].shift);
        return JumpLaw::mixture(std::move(comps));
    }
    // compact single-family form, with an optional shift
    return JumpLaw(jump_family_from_json(j), j.value("shift", 0.0));
}

inline json to_json(const MapSpec& spec) {
    const std::size_t n = spec.num_states();
    json states = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = spec.component(i);
        json js;
        js["drift"] = c.drift;
        js["sigma2"] = c.sigma2;
        js["jump_rate"] = c.jump_rate;
        if (c.jump_rate > 0.0) js["jump_law"] = to_json(c.jump_law);
        js["kill_rate"] = c.kill_rate;
        states.push_back(js);
    }
    json trans = json::array();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (i != k && !spec.transition_jump(i, k).is_zero())
                trans.push_back(json{{"from", i}, {"to", k}, {"law", to_json(spec.transition_jump(i, k))}});
    json j;
    j["rate_matrix"] = spec.rate_matrix();
    j["states"] = states;
    if (!trans.empty()) j["transition_jumps"] = trans;
    return j;
}

inline MapSpec map_spec_from_json(const json& j) {
    auto q = j.at("rate_matrix").get<std::vector<std::vector<double>>>();
    std::vector<LevyComponent> comps;
    for (const auto& js : j.at("states")) {
        LevyComponent c;
        c.drift = js.value("drift", 0.0);
        c.sigma2 = js.value("sigma2", 0.0);
        c.jump_rate = js.value("jump_rate", 0.0);
        if (js.contains("jump_law")) c.jump_law = jump_law_from_json(js.at("jump_law"));
        c.kill_rate = js.value("kill_rate", 0.0);
        comps.push_back(std::move(c));
    }
    const std::size_t n = comps.size();
    std::vector<std::vector<JumpLaw>> d(n, std::vector<JumpLaw>(n, JumpLaw::point_mass(0.0)));
    if (j.contains("transition_jumps")) {
        for (const auto& jt : j.at("transition_jumps")) {
            std::size_t from = jt.at("from").get<std::size_t>();
            std::size_t to = jt.at("to").get<std::size_t>();
            if (from >= n || to >= n)
                throw std::invalid_argument("transition jump index out of range");
            d[from][to] = jump_law_from_json(jt.at("law"));
        }
    }
    return MapSpec(std::move(q), std::move(comps), std::move(d));
}

inline MapSpec load_map_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file: " + path);
    json j;
    in >> j;
    return map_spec_from_json(j.contains("model") ? j.at("model") : j);
}

// CSV output with full double precision.
inline std::string csv_format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
        columns_ = header.size();
    }

    void row(const std::vector<double>& values) {
        if (values.size() != columns_) throw std::invalid_argument("csv row width mismatch");
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << csv_format(values[i]);
        out_ << "\n";
    }

private:
    std::ofstream out_;
    std::size_t columns_ = 0;
};

}  // namespace maplab
