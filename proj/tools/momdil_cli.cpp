// momdil: command line front end.
//
//   momdil check    --scenario FILE | --kind K --d D --n N --k K [--slack S]
//   momdil norms    --poly TEXT [--d D] [--levels L]
//   momdil calculus --poly TEXT (--scenario FILE | generator flags) [--rgrid r1,r2,...]
//   momdil generate --kind K --d D --n N --k K --seed S [--slack S] --out FILE
//
// Exit codes: 0 pass, 2 mathematical failure, 3 bad input, 4 capacity.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "momdil/momdil.hpp"

namespace {

using momdil::Report;
using momdil::RunConfig;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw momdil::ValidationError("cannot write '" + path + "'");
    out << text;
}

void emit(const Report& rep, const std::string& out_path, const std::string& csv_path) {
    if (out_path.empty()) std::cout << rep.text() << '\n';
    else write_text(out_path, rep.text() + "\n");
    if (!csv_path.empty()) write_text(csv_path, rep.csv);
}

void add_common(CLI::App* cmd, RunConfig& c, std::string& out, std::string& csv) {
    cmd->add_option("--depth", c.N, "word depth N")->check(CLI::PositiveNumber);
    cmd->add_option("--fock", c.M_fock, "Fock truncation level");
    cmd->add_option("--tol", c.check_tol, "tolerance for the identity and inequality checks");
    cmd->add_option("--pd-tol", c.pd_tol, "relative tolerance of the positivity checks");
    cmd->add_option("--rank-tol", c.rank_tol, "relative rank cut of the factorization");
    cmd->add_option("--seed", c.seed, "seed for generators and random probes");
    cmd->add_option("--out", out, "write the report here instead of stdout");
    cmd->add_option("--csv", csv, "write the table as CSV");
}

void add_ensemble(CLI::App* cmd, RunConfig& c, std::string& scenario) {
    cmd->add_option("--scenario", scenario, "scenario file");
    cmd->add_option("--kind", c.generator.kind, "generator: row_contraction or coisometry");
    cmd->add_option("--d", c.generator.d, "tuple size");
    cmd->add_option("--n", c.generator.n, "matrix dimension");
    cmd->add_option("--k", c.generator.k, "number of scenarios");
    cmd->add_option("--slack", c.generator.slack, "row contraction slack in (0,1)");
}

int exit_code_for(const momdil::Error& e) {
    if (dynamic_cast<const momdil::CapacityExceeded*>(&e)) return momdil::kExitCapacity;
    if (dynamic_cast<const momdil::SyntaxError*>(&e) || dynamic_cast<const momdil::ParseError*>(&e) ||
        dynamic_cast<const momdil::ValidationError*>(&e) || dynamic_cast<const momdil::EmptyInput*>(&e) ||
        dynamic_cast<const momdil::GeneratorOutOfRange*>(&e) || dynamic_cast<const momdil::AlphabetMismatch*>(&e) ||
        dynamic_cast<const momdil::RangeError*>(&e) || dynamic_cast<const momdil::DepthExceeded*>(&e))
        return momdil::kExitInputFail;
    return momdil::kExitMathFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moment kernels, dilations and the free functional calculus of random operator tuples"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string out, csv, scenario, rgrid;
    int poly_d = 0;

    auto* check = app.add_subcommand("check", "run the dilation pipeline on an ensemble");
    add_common(check, cfg, out, csv);
    add_ensemble(check, cfg, scenario);
    check->add_option("--vn-polys", cfg.vn_polys, "number of random polynomials in the von Neumann suite");

    auto* norms = app.add_subcommand("norms", "Fock norm convergence table of a polynomial");
    add_common(norms, cfg, out, csv);
    norms->add_option("--poly", cfg.poly, "polynomial text, e.g. \"Z1 + (0.5-1i)*Z2*Z1\"")->required();
    norms->add_option("--d", poly_d, "alphabet size (default: largest generator index)");
    norms->add_option("--levels", cfg.levels, "number of levels above deg p");

    auto* calc = app.add_subcommand("calculus", "functional calculus diagnostics for one polynomial");
    add_common(calc, cfg, out, csv);
    add_ensemble(calc, cfg, scenario);
    calc->add_option("--poly", cfg.poly, "polynomial text")->required();
    calc->add_option("--rgrid", rgrid, "comma separated radii in (0,1)");
    calc->add_option("--rpoints", cfg.r_points, "use r_j = 1 - 2^-j, j = 1..rpoints");

    auto* gen = app.add_subcommand("generate", "write a generated ensemble as a scenario file");
    add_common(gen, cfg, out, csv);
    add_ensemble(gen, cfg, scenario);
    std::string gen_out;
    gen->add_option("--file", gen_out, "scenario file to write (defaults to --out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return momdil::kExitInputFail;
    }

    bool fock_set = false;
    for (auto* sub : {check, calc, gen, norms})
        if (sub->parsed() && sub->count("--fock") > 0) fock_set = true;
    if (!fock_set) cfg.M_fock = std::max(cfg.M_fock, cfg.N);
    if (!scenario.empty()) cfg.scenario_path = scenario;
    if (poly_d > 0) cfg.poly_alphabet = poly_d;

    try {
        Report rep;
        if (check->parsed()) {
            rep = momdil::run_check(cfg);
        } else if (norms->parsed()) {
            rep = momdil::run_norms(cfg);
        } else if (calc->parsed()) {
            if (!rgrid.empty()) {
                std::stringstream ss(rgrid);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    try {
                        cfg.r_grid.push_back(std::stod(tok));
                    } catch (const std::exception&) {
                        throw momdil::ParseError("--rgrid: '" + tok + "' is not a number");
                    }
                }
            }
            rep = momdil::run_calculus(cfg);
        } else {
            const std::string path = gen_out.empty() ? out : gen_out;
            if (path.empty()) throw momdil::ValidationError("generate: --out is required");
            rep = momdil::run_generate(cfg, path);
            std::cout << rep.text() << '\n';
            return rep.exit_code;
        }
        emit(rep, out, csv);
        return rep.exit_code;
    } catch (const momdil::Error& e) {
        const int code = exit_code_for(e);
        std::cerr << (code == momdil::kExitInputFail ? "input: " : code == momdil::kExitCapacity ? "capacity: " : "error: ")
                  << e.what() << '\n';
        return code;
    }
}
