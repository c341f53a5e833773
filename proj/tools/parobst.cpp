#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "parobst/acceptance.hpp"
#include "parobst/exact.hpp"
#include "parobst/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitScenario = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitAcceptance = 3;

int cmd_run(const std::string& file, const std::string& out, const std::string& formats, int threads) {
    parobst::Scenario s;
    parobst::EmitFormats fm;
    try {
        s = parobst::load_scenario(file);
        fm = parobst::parse_formats(formats);
    } catch (const std::exception& e) {
        std::cerr << "parobst: " << e.what() << "\n";
        return kExitScenario;
    }
    const parobst::RunReport rep = parobst::run(s, {threads, true});
    const std::string dir = out.empty() ? s.output_dir : out;
    try {
        for (const auto& path : parobst::emit(rep, dir, fm)) std::cout << path << "\n";
    } catch (const std::exception& e) {
        std::cerr << "parobst: " << e.what() << "\n";
        return kExitScenario;
    }
    for (const auto& f : rep.failures) std::cerr << "parobst: " << f << "\n";
    return rep.solver.converged ? kExitOk : kExitNoConvergence;
}

int cmd_verify() {
    bool ok = true;
    for (const auto& r : parobst::run_acceptance()) {
        std::cout << parobst::format_result(r) << std::endl;
        ok = ok && r.passed;
    }
    return ok ? kExitOk : kExitAcceptance;
}

int cmd_list_exact() {
    for (const auto& e : parobst::exact_registry())
        std::cout << e.tag << "\t" << e.formula << "\tdefault params: " << (e.default_params.empty() ? "(none)" : e.default_params)
                  << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-difference no-sign parabolic obstacle problem: solver and free boundary diagnostics"};
    app.require_subcommand(1);

    std::string file, out, formats = "json,csv,svg";
    int threads = 1;
    auto* run = app.add_subcommand("run", "solve a scenario and write its report");
    run->add_option("scenario", file, "scenario file (key = value lines)")->required();
    run->add_option("--out", out, "output directory (default: output.dir of the scenario)");
    run->add_option("--formats", formats, "comma separated subset of json,csv,svg");
    run->add_option("--threads", threads, "worker threads for the diagnostics")->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "run the built-in acceptance criteria 1-12");
    auto* list = app.add_subcommand("list-exact", "print the exact-solution registry");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitScenario;
    }
    if (*run) return cmd_run(file, out, formats, threads);
    if (*verify) return cmd_verify();
    if (*list) return cmd_list_exact();
    return kExitScenario;
}
