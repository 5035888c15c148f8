#include <infodesign/cli.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char** argv) {
    using namespace infodesign::cli;
    CLI::App app{"Information design solvers: concavification, achievable sets, constrained design, dynamic "
                 "acquisition, voters and screening"};
    RunConfig cfg;
    std::size_t grid_d = 0, directions = 0;
    double tol = 0.0;
    app.add_option("command", cfg.command, "cav | set | solve | bellman | ri | voters | screen | profile")
        ->required()
        ->check(CLI::IsMember(commands()));
    app.add_option("-i,--input", cfg.input, "Problem JSON")->required();
    app.add_option("-o,--output", cfg.output, "Result JSON path; CSV is written next to it (default: stdout)");
    auto* d_opt = app.add_option("--grid-d", grid_d, "Grid resolution d")->check(CLI::PositiveNumber);
    auto* dir_opt = app.add_option("--directions", directions, "Number of support directions")->check(CLI::PositiveNumber);
    auto* tol_opt = app.add_option("--tol", tol, "Stopping tolerance")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "Recorded in the output; every algorithm is deterministic");
    const std::map<std::string, Format> formats{{"json", Format::Json}, {"csv", Format::Csv}, {"both", Format::Both}};
    app.add_option("--format", cfg.format, "json | csv | both")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }
    if (*d_opt) cfg.grid_d = grid_d;
    if (*dir_opt) cfg.directions = directions;
    if (*tol_opt) cfg.tol = tol;
    return run(cfg, std::cout, std::cerr);
}
