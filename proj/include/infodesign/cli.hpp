#pragma once

// Command dispatch for the infodesign executable: read a problem document,
// run one solver, and render JSON (plus CSV plot data for cav, set, bellman
// and profile).
//
// Exit codes: 0 success, 2 infeasible problem, 3 schema error, 4 numerical
// failure. Nothing is written unless the command succeeds.

#include "apps.hpp"
#include "concavify.hpp"
#include "dynamic.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "posset.hpp"
#include "solver.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace infodesign::cli {

using io::json;

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"cav", "set", "solve", "bellman", "ri", "voters", "screen", "profile"};
    return names;
}

enum class Format { Json, Csv, Both };

struct RunConfig {
    std::string command;
    std::string input;
    /// JSON goes here; CSV goes next to it with the extension .csv. Empty
    /// means standard output.
    std::string output;
    std::optional<std::size_t> grid_d;
    std::optional<std::size_t> directions;
    std::optional<double> tol;
    std::uint64_t seed = 0;
    Format format = Format::Both;
};

struct Rendered {
    json document;
    std::optional<std::string> csv;
};

inline bool has_csv(const std::string& command) {
    return command == "cav" || command == "set" || command == "bellman" || command == "profile";
}

inline std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string belief_header(std::size_t states) {
    std::string h;
    for (std::size_t x = 0; x < states; ++x) h += "mu" + std::to_string(x) + ",";
    return h;
}

namespace detail {

inline json header(const RunConfig& cfg) {
    return json{{"spec_version", io::kSpecVersion}, {"command", cfg.command}, {"seed", cfg.seed}};
}

inline Rendered run_cav(const RunConfig& cfg, const json& doc) {
    io::check_fields(doc, {"spec_version", "prior", "value", "resolution", "include_knots"}, "document");
    const Belief mu = io::belief_from_json(io::field(doc, "prior", "document"), "prior");
    const ValueFunction w = io::value_function_from_json(io::field(doc, "value", "document"), "value");
    ConcavifyOptions opt;
    opt.resolution = cfg.grid_d.value_or(io::optional_field<std::size_t>(doc, "resolution", "document", io::count).value_or(40));
    opt.include_knots = io::optional_field<bool>(doc, "include_knots", "document", io::boolean).value_or(true);
    const CavResult r = io::guarded("document", [&] { return concavify(w, mu, opt); });

    Rendered out{header(cfg), std::nullopt};
    out.document["resolution"] = opt.resolution;
    out.document["value"] = r.value;
    out.document["structure"] = io::to_json(r.structure);
    out.document["lp_outcome"] = to_string(r.lp_status);

    const SimplexGrid grid(mu.size(), opt.resolution);
    const ValueTable cav = concave_envelope_table(w, grid);
    std::string csv = belief_header(mu.size()) + "value,envelope\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
        for (double p : grid.point(g).probs()) csv += num(p) + ",";
        csv += num(w(grid.point(g))) + "," + num(cav.values[g]) + "\n";
    }
    out.csv = std::move(csv);
    return out;
}

inline Rendered run_set(const RunConfig& cfg, const json& doc) {
    io::check_fields(doc, {"spec_version", "prior", "values", "directions", "resolution"}, "document");
    const Belief mu = io::belief_from_json(io::field(doc, "prior", "document"), "prior");
    const auto vfuncs = io::value_functions_from_json(io::field(doc, "values", "document"), "values");
    ConcavifyOptions opt;
    opt.resolution = cfg.grid_d.value_or(io::optional_field<std::size_t>(doc, "resolution", "document", io::count).value_or(40));
    const std::size_t n = vfuncs.size();
    const std::size_t dirs = cfg.directions.value_or(
        io::optional_field<std::size_t>(doc, "directions", "document", io::count).value_or(default_direction_count(n)));
    const SetApprox a = io::guarded("document", [&] { return approximate_set(mu, vfuncs, dirs, opt); });

    Rendered out{header(cfg), std::nullopt};
    out.document["resolution"] = opt.resolution;
    out.document["directions"] = dirs;
    json samples = json::array();
    for (const auto& s : a.samples)
        samples.push_back(json{{"direction", s.direction}, {"h", s.h}, {"point", s.point}, {"witness", io::to_json(s.witness)}});
    out.document["samples"] = std::move(samples);
    json inner = json::array();
    for (std::size_t i = 0; i < a.inner_vertices.size(); ++i)
        inner.push_back(json{{"point", a.inner_vertices[i]}, {"witness", io::to_json(a.witnesses[i])}});
    out.document["inner_vertices"] = std::move(inner);
    out.document["sandwich_gap"] = io::finite_or_null(a.sandwich_gap());

    std::string csv;
    for (std::size_t i = 0; i < n; ++i) csv += "lambda" + std::to_string(i + 1) + ",";
    csv += "h";
    for (std::size_t i = 0; i < n; ++i) csv += ",v" + std::to_string(i + 1);
    csv += "\n";
    for (const auto& s : a.samples) {
        for (double x : s.direction) csv += num(x) + ",";
        csv += num(s.h);
        for (double x : s.point) csv += "," + num(x);
        csv += "\n";
    }
    out.csv = std::move(csv);
    return out;
}

inline SolveOptions solve_options(const RunConfig& cfg, const json& doc) {
    SolveOptions opt;
    opt.grid.resolution =
        cfg.grid_d.value_or(io::optional_field<std::size_t>(doc, "resolution", "document", io::count).value_or(40));
    opt.directions = cfg.directions.value_or(io::optional_field<std::size_t>(doc, "directions", "document", io::count).value_or(0));
    if (cfg.tol) opt.fw.gap_tol = *cfg.tol;
    return opt;
}

/// "auto" picks the slack solver for nonneg-tail constraints, the Lagrangian
/// solver when f and g are declared quasiconcave, and the generic one otherwise.
inline Solution dispatch_solve(const ProblemSpec& spec, const std::string& method, const SolveOptions& opt) {
    if (method == "generic") return solve_generic(spec, opt);
    if (method == "smooth") return solve_smooth(spec, opt);
    if (method == "slack") return solve_with_slack(spec, opt);
    if (method == "convex") return solve_convex_constrained(spec, opt);
    if (method != "auto") throw SchemaError("method: expected auto, generic, smooth, slack or convex");
    if (std::holds_alternative<NonnegTail>(spec.constraint)) return solve_with_slack(spec, opt);
    if (std::holds_alternative<Sublevel>(spec.constraint) && spec.objective_quasiconcave && spec.constraint_quasiconcave)
        return solve_convex_constrained(spec, opt);
    return solve_generic(spec, opt);
}

inline Rendered run_solve(const RunConfig& cfg, const json& doc) {
    io::check_fields(doc, io::kProblemFields, "document");
    const ProblemSpec spec = io::problem_from_json(doc);
    const std::string method = doc.contains("method") ? io::text(doc["method"], "method") : "auto";
    const SolveOptions opt = solve_options(cfg, doc);
    const Solution s = io::guarded("document", [&] { return dispatch_solve(spec, method, opt); });
    Rendered out{header(cfg), std::nullopt};
    out.document["solution"] = io::to_json(s);
    return out;
}

inline Rendered run_profile(const RunConfig& cfg, const json& doc) {
    std::vector<std::string_view> allowed(io::kProblemFields.begin(), io::kProblemFields.end());
    allowed.push_back("priors");
    io::check_fields(doc, allowed, "document");
    const ProblemSpec spec = io::problem_from_json(doc);
    const json& pj = io::field(doc, "priors", "document");
    if (!pj.is_array() || pj.empty()) throw SchemaError("priors: expected a nonempty array of beliefs");
    std::vector<Belief> priors;
    for (std::size_t i = 0; i < pj.size(); ++i) {
        priors.push_back(io::belief_from_json(pj[i], "priors[" + std::to_string(i) + "]"));
        if (priors.back().size() != spec.mu.size()) throw SchemaError("priors: state count differs from the prior");
    }
    const auto entries = value_profile(spec, priors, solve_options(cfg, doc));

    Rendered out{header(cfg), std::nullopt};
    json list = json::array();
    std::string csv = belief_header(spec.mu.size()) + "value\n";
    for (const auto& e : entries) {
        json item{{"prior", io::to_json(e.mu)}};
        for (double p : e.mu.probs()) csv += num(p) + ",";
        if (e.solution) {
            item["value"] = e.solution->value;
            item["v_star"] = e.solution->v_star;
            item["structure"] = io::to_json(e.solution->structure);
            csv += num(e.solution->value);
        } else {
            item["error"] = e.error;
        }
        csv += "\n";
        list.push_back(std::move(item));
    }
    out.document["profile"] = std::move(list);
    out.csv = std::move(csv);
    return out;
}

inline Rendered run_bellman(const RunConfig& cfg, const json& doc) {
    DynamicSpec spec = io::dynamic_from_json(doc);
    if (cfg.grid_d) spec.resolution = *cfg.grid_d;
    io::guarded("document", [&] {
        spec.validate();
        return 0;
    });
    const double tol = cfg.tol.value_or(io::optional_field<double>(doc, "tol", "document", io::number).value_or(1e-8));
    const std::size_t max_iters = io::optional_field<std::size_t>(doc, "max_iters", "document", io::count).value_or(10000);
    const ValueIteration vi = value_iterate(spec, tol, max_iters);

    Rendered out{header(cfg), std::nullopt};
    const auto& grid = vi.table.grid;
    out.document["states"] = spec.states;
    out.document["resolution"] = spec.resolution;
    out.document["iterations"] = vi.iterations;
    out.document["final_step"] = vi.steps.empty() ? 0.0 : vi.steps.back();
    json values = json::array(), stop = json::array();
    std::string csv = belief_header(spec.states) + "value,stop\n";
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double v = vi.table.values[g];
        const bool stops = v <= spec.stop_payoff(grid.point(g)) + 1e-9;
        values.push_back(v);
        stop.push_back(stops);
        for (double p : grid.point(g).probs()) csv += num(p) + ",";
        csv += num(v) + "," + (stops ? "1" : "0") + "\n";
    }
    out.document["values"] = std::move(values);
    out.document["stop"] = std::move(stop);
    out.csv = std::move(csv);
    return out;
}

inline Rendered run_ri(const RunConfig& cfg, const json& doc) {
    io::check_fields(doc, {"spec_version", "prior", "payoff", "entropy", "cost", "resolution", "max_iters"}, "document");
    const Belief mu = io::belief_from_json(io::field(doc, "prior", "document"), "prior");
    const ValueFunction payoff = io::value_function_from_json(io::field(doc, "payoff", "document"), "payoff");
    const ValueFunction h = doc.contains("entropy") ? io::value_function_from_json(doc["entropy"], "entropy") : ValueFunction::entropy();
    const InformationCost cost = io::cost_from_json(io::field(doc, "cost", "document"), "cost");
    const std::size_t d = cfg.grid_d.value_or(io::optional_field<std::size_t>(doc, "resolution", "document", io::count).value_or(40));
    const std::size_t iters = io::optional_field<std::size_t>(doc, "max_iters", "document", io::count).value_or(200);
    const RiResult r = io::guarded("document", [&] { return ri_solve(payoff, h, cost, mu, d, iters); });

    Rendered out{header(cfg), std::nullopt};
    out.document["resolution"] = d;
    out.document["value"] = r.value;
    out.document["structure"] = io::to_json(r.structure);
    out.document["information"] = r.information;
    out.document["multiplier"] = r.multiplier;
    out.document["residual"] = r.residual;
    out.document["iterations"] = r.iterations;
    out.document["bisection"] = r.bisection;
    return out;
}

inline Rendered run_voters(const RunConfig& cfg, const json& doc) {
    const VoterSpec spec = io::voters_from_json(doc);
    const VoterResult r = voters_solve(spec);
    Rendered out{header(cfg), std::nullopt};
    out.document["mu_star"] = r.mu_star;
    out.document["value"] = r.value;
    out.document["structure"] = io::to_json(r.structure);
    out.document["selected"] = r.selected;
    json critical = json::array();
    for (const auto& c : r.critical) critical.push_back(c ? json(*c) : json(nullptr));
    out.document["critical"] = std::move(critical);
    return out;
}

inline Rendered run_screen(const RunConfig& cfg, const json& doc) {
    const ScreenSpec spec = io::screen_from_json(doc);
    const std::size_t d = cfg.grid_d.value_or(io::optional_field<std::size_t>(doc, "resolution", "document", io::count).value_or(40));
    const std::size_t cap = io::optional_field<std::size_t>(doc, "atoms_cap", "document", io::count).value_or(0);
    const ScreenResult r = io::guarded("document", [&] { return screening_solve(spec, d, cap); });
    Rendered out{header(cfg), std::nullopt};
    out.document["resolution"] = d;
    out.document["value"] = r.value;
    out.document["pooled_value"] = r.pooled_value;
    json menu = json::array();
    for (const auto& p : r.menu) menu.push_back(io::to_json(p));
    out.document["menu"] = std::move(menu);
    out.document["ic_slack"] = r.ic_slack;
    out.document["nodes"] = r.nodes;
    return out;
}

} // namespace detail

/// Runs one command on a parsed document.
inline Rendered execute(const RunConfig& cfg, const json& doc) {
    io::check_version(doc);
    if (cfg.command == "cav") return detail::run_cav(cfg, doc);
    if (cfg.command == "set") return detail::run_set(cfg, doc);
    if (cfg.command == "solve") return detail::run_solve(cfg, doc);
    if (cfg.command == "bellman") return detail::run_bellman(cfg, doc);
    if (cfg.command == "ri") return detail::run_ri(cfg, doc);
    if (cfg.command == "voters") return detail::run_voters(cfg, doc);
    if (cfg.command == "screen") return detail::run_screen(cfg, doc);
    if (cfg.command == "profile") return detail::run_profile(cfg, doc);
    throw SchemaError("unknown command '" + cfg.command + "'");
}

inline std::string csv_path(const std::string& output) {
    return std::filesystem::path(output).replace_extension(".csv").string();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << content;
    if (!f) throw std::runtime_error("failed writing " + path);
}

/**
 * Reads cfg.input, runs the command and writes the results. Diagnostics go
 * to `err`; with no output path the JSON (or, for --format csv, the CSV) goes
 * to `out`.
 */
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        std::ifstream in(cfg.input, std::ios::binary);
        if (!in) throw SchemaError("cannot read input file '" + cfg.input + "'");
        const std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        json doc;
        try {
            doc = json::parse(raw);
        } catch (const json::parse_error& e) {
            throw SchemaError(std::string("malformed JSON: ") + e.what());
        }
        const Rendered r = execute(cfg, doc);
        const std::string text = r.document.dump(2) + "\n";
        const bool want_csv = r.csv && cfg.format != Format::Json;
        if (cfg.output.empty()) {
            out << (want_csv && cfg.format == Format::Csv ? *r.csv : text);
        } else {
            write_file(cfg.output, text);
            if (want_csv) write_file(csv_path(cfg.output), *r.csv);
        }
        return 0;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
        return 3;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const MaxIterations& e) {
        err << "numerical error: " << e.what() << " (residual " << e.residual() << ")\n";
        return 4;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const json::exception& e) {
        err << "schema error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "schema error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace infodesign::cli
