#pragma once

// JSON schemas for problems and results. Every document carries
// "spec_version": 1 and unknown fields are rejected.

#include "apps.hpp"
#include "core.hpp"
#include "dynamic.hpp"
#include "errors.hpp"
#include "functions.hpp"
#include "posset.hpp"
#include "solver.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace infodesign::io {

using json = nlohmann::ordered_json;

inline constexpr int kSpecVersion = 1;

// *******************************************************
// Field access
// *******************************************************

inline void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
}

inline void check_fields(const json& j, std::span<const std::string_view> allowed, const std::string& where) {
    expect_object(j, where);
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (auto a : allowed) ok = ok || it.key() == a;
        if (!ok) throw SchemaError(where + ": unknown field '" + it.key() + "'");
    }
}

inline void check_fields(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    check_fields(j, std::span<const std::string_view>(allowed.begin(), allowed.size()), where);
}

inline const json& field(const json& j, const std::string& key, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) throw SchemaError(where + ": missing field '" + key + "'");
    return *it;
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw SchemaError(where + ": expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw SchemaError(where + ": expected a finite number");
    return x;
}

inline std::size_t count(const json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<long long>() < 0) throw SchemaError(where + ": expected a nonnegative integer");
    return static_cast<std::size_t>(j.get<long long>());
}

inline bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) throw SchemaError(where + ": expected true or false");
    return j.get<bool>();
}

inline std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) throw SchemaError(where + ": expected a string");
    return j.get<std::string>();
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::vector<std::vector<double>> matrix(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + ": expected an array of rows");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(numbers(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

template <class T>
std::optional<T> optional_field(const json& j, const std::string& key, const std::string& where,
                                T (*read)(const json&, const std::string&)) {
    const auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    return read(*it, where + "." + key);
}

/// Library constructors report bad values with invalid_argument.
template <class F>
auto guarded(const std::string& where, F&& build) {
    try {
        return build();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

inline void check_version(const json& j) {
    expect_object(j, "document");
    const json& v = field(j, "spec_version", "document");
    if (!v.is_number_integer() || v.get<long long>() != kSpecVersion)
        throw SchemaError("document: spec_version must be " + std::to_string(kSpecVersion));
}

// *******************************************************
// Library types
// *******************************************************

inline Belief belief_from_json(const json& j, const std::string& where) {
    const auto p = numbers(j, where);
    double total = 0.0;
    for (double x : p) total += x;
    if (std::abs(total - 1.0) > 1e-9) throw SchemaError(where + ": probabilities must sum to one");
    return guarded(where, [&] { return Belief(p); });
}

inline json to_json(const Belief& b) { return json(b.probs()); }

inline std::size_t coordinate_field(const json& j, const std::string& where) {
    const auto c = optional_field<std::size_t>(j, "coordinate", where, count);
    return c.value_or(1);
}

/**
 *   {"kind": "decision", "payoffs": [[u(a, x) ...] ...]}
 *   {"kind": "entropy"}
 *   {"kind": "indicator", "threshold": t, "coordinate": i}
 *   {"kind": "pwl", "knots": [[x, y] ...], "coordinate": i}
 *   {"kind": "table", "states": k, "resolution": d, "values": [...]}
 * Every kind also accepts "label".
 */
inline ValueFunction value_function_from_json(const json& j, const std::string& where) {
    expect_object(j, where);
    const std::string kind = text(field(j, "kind", where), where + ".kind");
    const std::string label = j.contains("label") ? text(j["label"], where + ".label") : std::string();
    return guarded(where, [&] {
        if (kind == "decision") {
            check_fields(j, {"kind", "label", "payoffs"}, where);
            return ValueFunction::decision(matrix(field(j, "payoffs", where), where + ".payoffs"), label);
        }
        if (kind == "entropy") {
            check_fields(j, {"kind", "label"}, where);
            return ValueFunction::entropy(label);
        }
        if (kind == "indicator") {
            check_fields(j, {"kind", "label", "threshold", "coordinate"}, where);
            return ValueFunction::indicator(number(field(j, "threshold", where), where + ".threshold"),
                                            coordinate_field(j, where), label);
        }
        if (kind == "pwl") {
            check_fields(j, {"kind", "label", "knots", "coordinate"}, where);
            std::vector<std::pair<double, double>> knots;
            for (const auto& row : matrix(field(j, "knots", where), where + ".knots")) {
                if (row.size() != 2) throw SchemaError(where + ".knots: each knot is an [x, y] pair");
                knots.emplace_back(row[0], row[1]);
            }
            return ValueFunction::piecewise_linear(std::move(knots), coordinate_field(j, where), label);
        }
        if (kind == "table") {
            check_fields(j, {"kind", "label", "states", "resolution", "values"}, where);
            const SimplexGrid grid(count(field(j, "states", where), where + ".states"),
                                   count(field(j, "resolution", where), where + ".resolution"));
            return ValueFunction::tabulated(grid, numbers(field(j, "values", where), where + ".values"), label);
        }
        throw SchemaError(where + ": unknown value function kind '" + kind + "'");
    });
}

inline std::vector<ValueFunction> value_functions_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw SchemaError(where + ": expected a nonempty array of value functions");
    std::vector<ValueFunction> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(value_function_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

/**
 *   {"kind": "linear", "coeffs": [...], "constant": c}
 *   {"kind": "quadratic", "q": [[...] ...], "b": [...], "c": c}   (v'Qv + b.v + c)
 *   {"kind": "custom-expression", "expr": "v1 - 2*(v2 - 0.3)^2"}
 */
inline RealFunction real_function_from_json(const json& j, std::size_t dims, const std::string& where) {
    expect_object(j, where);
    const std::string kind = text(field(j, "kind", where), where + ".kind");
    RealFunction f = guarded(where, [&] {
        if (kind == "linear") {
            check_fields(j, {"kind", "coeffs", "constant"}, where);
            return RealFunction::linear(numbers(field(j, "coeffs", where), where + ".coeffs"),
                                        optional_field<double>(j, "constant", where, number).value_or(0.0));
        }
        if (kind == "quadratic") {
            check_fields(j, {"kind", "q", "b", "c"}, where);
            return RealFunction::quadratic(matrix(field(j, "q", where), where + ".q"),
                                           numbers(field(j, "b", where), where + ".b"),
                                           optional_field<double>(j, "c", where, number).value_or(0.0));
        }
        if (kind == "custom-expression") {
            check_fields(j, {"kind", "expr"}, where);
            return RealFunction::expression(text(field(j, "expr", where), where + ".expr"), dims);
        }
        throw SchemaError(where + ": unknown function kind '" + kind + "'");
    });
    if (f.dimension() != dims)
        throw SchemaError(where + ": function has dimension " + std::to_string(f.dimension()) + ", expected " +
                          std::to_string(dims));
    return f;
}

/**
 *   {"kind": "linear", "slope": a, "intercept": b}
 *   {"kind": "power", "scale": s, "exponent": p}
 *   {"kind": "custom-expression", "expr": "0.5*x^2"}
 */
inline InformationCost cost_from_json(const json& j, const std::string& where) {
    expect_object(j, where);
    const std::string kind = text(field(j, "kind", where), where + ".kind");
    return guarded(where, [&] {
        if (kind == "linear") {
            check_fields(j, {"kind", "slope", "intercept"}, where);
            return InformationCost::linear(number(field(j, "slope", where), where + ".slope"),
                                           optional_field<double>(j, "intercept", where, number).value_or(0.0));
        }
        if (kind == "power") {
            check_fields(j, {"kind", "scale", "exponent"}, where);
            return InformationCost::power(number(field(j, "scale", where), where + ".scale"),
                                          number(field(j, "exponent", where), where + ".exponent"));
        }
        if (kind == "custom-expression") {
            check_fields(j, {"kind", "expr"}, where);
            return InformationCost::expression(text(field(j, "expr", where), where + ".expr"));
        }
        throw SchemaError(where + ": unknown cost kind '" + kind + "'");
    });
}

inline json to_json(const SignalStructure& p) {
    json out = json::array();
    for (const auto& a : p.atoms()) out.push_back(json{{"weight", a.weight}, {"posterior", to_json(a.posterior)}});
    return out;
}

inline SignalStructure structure_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw SchemaError(where + ": expected a nonempty array of atoms");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        check_fields(j[i], {"weight", "posterior"}, w);
        atoms.push_back({number(field(j[i], "weight", w), w + ".weight"),
                         belief_from_json(field(j[i], "posterior", w), w + ".posterior")});
    }
    return guarded(where, [&] { return SignalStructure(std::move(atoms)); });
}

/// Non-finite diagnostics are written as null.
inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double number_or_inf(const json& j, const std::string& where) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : number(j, where);
}

inline json to_json(const Solution& s) {
    json out;
    out["value"] = s.value;
    out["v_star"] = s.v_star;
    out["structure"] = to_json(s.structure);
    if (s.multipliers)
        out["multipliers"] = json{{"lambda", s.multipliers->lambda}, {"eta", s.multipliers->eta}, {"gamma", s.multipliers->gamma}};
    else
        out["multipliers"] = nullptr;
    const auto& d = s.diagnostics;
    out["diagnostics"] = json{{"method", d.method},
                              {"iterations", d.iterations},
                              {"stationarity_gap", finite_or_null(d.stationarity_gap)},
                              {"feasibility_residual", finite_or_null(d.feasibility_residual)},
                              {"sandwich_gap", finite_or_null(d.sandwich_gap)},
                              {"objective_gap", finite_or_null(d.objective_gap)},
                              {"fallback", d.fallback},
                              {"note", d.note}};
    return out;
}

inline Solution solution_from_json(const json& j, const std::string& where = "solution") {
    check_fields(j, {"value", "v_star", "structure", "multipliers", "diagnostics"}, where);
    Solution s;
    s.value = number(field(j, "value", where), where + ".value");
    s.v_star = numbers(field(j, "v_star", where), where + ".v_star");
    s.structure = structure_from_json(field(j, "structure", where), where + ".structure");
    const json& m = field(j, "multipliers", where);
    if (!m.is_null()) {
        const std::string w = where + ".multipliers";
        check_fields(m, {"lambda", "eta", "gamma"}, w);
        s.multipliers = Multipliers{numbers(field(m, "lambda", w), w + ".lambda"), number(field(m, "eta", w), w + ".eta"),
                                    numbers(field(m, "gamma", w), w + ".gamma")};
    }
    const std::string w = where + ".diagnostics";
    const json& d = field(j, "diagnostics", where);
    check_fields(d, {"method", "iterations", "stationarity_gap", "feasibility_residual", "sandwich_gap", "objective_gap",
                     "fallback", "note"},
                 w);
    s.diagnostics.method = text(field(d, "method", w), w + ".method");
    s.diagnostics.iterations = count(field(d, "iterations", w), w + ".iterations");
    s.diagnostics.stationarity_gap = number_or_inf(field(d, "stationarity_gap", w), w + ".stationarity_gap");
    s.diagnostics.feasibility_residual = number_or_inf(field(d, "feasibility_residual", w), w + ".feasibility_residual");
    s.diagnostics.sandwich_gap = number_or_inf(field(d, "sandwich_gap", w), w + ".sandwich_gap");
    s.diagnostics.objective_gap = number_or_inf(field(d, "objective_gap", w), w + ".objective_gap");
    s.diagnostics.fallback = boolean(field(d, "fallback", w), w + ".fallback");
    s.diagnostics.note = text(field(d, "note", w), w + ".note");
    return s;
}

// *******************************************************
// Problems
// *******************************************************

/**
 *   {"kind": "none"}
 *   {"kind": "nonneg-tail", "m": k}
 *   {"kind": "sublevel", "g": <function>}   (feasible where g >= 0)
 */
inline Constraint constraint_from_json(const json& j, std::size_t dims, const std::string& where) {
    expect_object(j, where);
    const std::string kind = text(field(j, "kind", where), where + ".kind");
    if (kind == "none") {
        check_fields(j, {"kind"}, where);
        return NoConstraint{};
    }
    if (kind == "nonneg-tail") {
        check_fields(j, {"kind", "m"}, where);
        return NonnegTail{count(field(j, "m", where), where + ".m")};
    }
    if (kind == "sublevel") {
        check_fields(j, {"kind", "g"}, where);
        return Sublevel{real_function_from_json(field(j, "g", where), dims, where + ".g")};
    }
    throw SchemaError(where + ": unknown constraint kind '" + kind + "'");
}

/// Fields shared by the solve and profile documents.
inline constexpr std::array<std::string_view, 10> kProblemFields = {
    "spec_version", "prior", "values", "objective", "constraint", "objective_quasiconcave", "constraint_quasiconcave",
    "method", "resolution", "directions"};

inline ProblemSpec problem_from_json(const json& j) {
    const std::string w = "document";
    ProblemSpec spec;
    spec.mu = belief_from_json(field(j, "prior", w), "prior");
    spec.vfuncs = value_functions_from_json(field(j, "values", w), "values");
    spec.objective = real_function_from_json(field(j, "objective", w), spec.vfuncs.size(), "objective");
    if (j.contains("constraint")) spec.constraint = constraint_from_json(j["constraint"], spec.vfuncs.size(), "constraint");
    spec.objective_quasiconcave = optional_field<bool>(j, "objective_quasiconcave", w, boolean).value_or(false);
    spec.constraint_quasiconcave = optional_field<bool>(j, "constraint_quasiconcave", w, boolean).value_or(false);
    for (const auto& v : spec.vfuncs)
        if (const auto* t = std::get_if<Tabulated>(&v.kind()); t && t->grid.states() != spec.mu.size())
            throw SchemaError("values: table lives on a different state space than the prior");
    guarded("document", [&] {
        spec.validate();
        return 0;
    });
    return spec;
}

inline DynamicSpec dynamic_from_json(const json& j) {
    const std::string w = "document";
    check_fields(j, {"spec_version", "stop_payoff", "entropy", "cost", "discount", "capacity", "states", "resolution",
                     "tol", "max_iters"},
                 w);
    DynamicSpec spec;
    spec.stop_payoff = value_function_from_json(field(j, "stop_payoff", w), "stop_payoff");
    if (j.contains("entropy")) spec.entropy_fn = value_function_from_json(j["entropy"], "entropy");
    spec.cost = cost_from_json(field(j, "cost", w), "cost");
    spec.discount = number(field(j, "discount", w), "discount");
    if (j.contains("capacity") && !j["capacity"].is_null()) spec.capacity = number(j["capacity"], "capacity");
    spec.states = optional_field<std::size_t>(j, "states", w, count).value_or(2);
    spec.resolution = optional_field<std::size_t>(j, "resolution", w, count).value_or(40);
    return spec;
}

inline VoterSpec voters_from_json(const json& j) {
    const std::string w = "document";
    check_fields(j, {"spec_version", "prior", "required", "voters"}, w);
    VoterSpec spec;
    spec.mu = number(field(j, "prior", w), "prior");
    spec.required = count(field(j, "required", w), "required");
    const json& vs = field(j, "voters", w);
    if (!vs.is_array()) throw SchemaError("voters: expected an array");
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const std::string vw = "voters[" + std::to_string(i) + "]";
        check_fields(vs[i], {"utility", "cost", "threshold"}, vw);
        spec.voters.push_back(Voter{value_function_from_json(field(vs[i], "utility", vw), vw + ".utility"),
                                    number(field(vs[i], "cost", vw), vw + ".cost"),
                                    number(field(vs[i], "threshold", vw), vw + ".threshold")});
    }
    spec.validate();
    return spec;
}

inline ScreenSpec screen_from_json(const json& j) {
    const std::string w = "document";
    check_fields(j, {"spec_version", "prior", "types", "resolution", "atoms_cap"}, w);
    ScreenSpec spec;
    spec.mu = belief_from_json(field(j, "prior", w), "prior");
    const json& ts = field(j, "types", w);
    if (!ts.is_array()) throw SchemaError("types: expected an array");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::string tw = "types[" + std::to_string(i) + "]";
        check_fields(ts[i], {"receiver", "sender", "probability"}, tw);
        spec.types.push_back(ScreenType{value_function_from_json(field(ts[i], "receiver", tw), tw + ".receiver"),
                                        value_function_from_json(field(ts[i], "sender", tw), tw + ".sender"),
                                        number(field(ts[i], "probability", tw), tw + ".probability")});
    }
    spec.validate();
    return spec;
}

} // namespace infodesign::io
