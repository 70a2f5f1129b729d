// Command-line front end: scenario runs plus ad-hoc spectrum / poincare /
// rigidity / cd / trace queries. Exit codes: 0 all verdicts pass, 1 a task
// failed, 2 usage or input errors.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "freeprob/mc.hpp"
#include "freeprob/parse.hpp"
#include "freeprob/scenario.hpp"

using namespace freeprob;

namespace {

struct CommonOpts {
    int n = 2;
    int degree = 4;
    std::string model_file;
    std::string out_dir = "report";
    double tol = 1e-8;
    uint64_t seed = 1;
    bool canonical = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_nd = true) {
    if (with_nd) {
        cmd->add_option("-n,--gens", o.n, "generator count");
        cmd->add_option("-d,--degree", o.degree, "truncation degree");
    }
    cmd->add_option("--model", o.model_file, "covariance model JSON file ({\"n\",\"C\"} or {\"n\",\"A\"})");
    cmd->add_option("--tol", o.tol, "eigenvalue/verdict tolerance");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_flag("--canonical", o.canonical, "byte-reproducible reports (no timestamps)");
}

Scenario scenario_from_opts(const CommonOpts& o, std::vector<std::string> tasks) {
    Scenario sc;
    if (!o.model_file.empty()) {
        sc.model = model_from_file(o.model_file);
        sc.n = sc.model.gens();
    } else {
        sc.n = o.n;
        sc.model = CovarianceModel::standard(o.n);
    }
    sc.degree = o.degree;
    sc.tasks = std::move(tasks);
    sc.seed = o.seed;
    sc.out_dir = o.out_dir;
    sc.canonical = o.canonical;
    sc.tols.eig = o.tol;
    return sc;
}

int finish(const RunResult& res) {
    for (const auto& task : res.report["tasks"]) {
        std::cout << task["name"].get<std::string>() << ": "
                  << task["verdict"].get<std::string>();
        if (task.contains("statement")) std::cout << "  [" << task["statement"].get<std::string>() << "]";
        if (task.contains("error")) std::cout << "  error: " << task["error"].get<std::string>();
        std::cout << "\n";
    }
    return res.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symbolic-numeric calculus for free-probability operators"};
    app.require_subcommand(1);

    // run <scenario>
    std::string scenario_path;
    CommonOpts run_opts;
    std::string run_out;
    CLI::App* run = app.add_subcommand("run", "run a scenario file (TOML or JSON)");
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->add_option("--out", run_out, "override the scenario's output directory");
    bool run_canonical = false;
    run->add_flag("--canonical", run_canonical, "byte-reproducible reports");

    CommonOpts spec_opts, poin_opts, rig_opts, cd_opts;
    CLI::App* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues of the free Laplacian");
    add_common(spectrum_cmd, spec_opts);
    CLI::App* poincare_cmd = app.add_subcommand("poincare", "free Poincare constant with certificate");
    add_common(poincare_cmd, poin_opts);
    CLI::App* rigidity_cmd = app.add_subcommand("rigidity", "the full Obata splitting pipeline");
    add_common(rigidity_cmd, rig_opts);
    CLI::App* cd_cmd = app.add_subcommand("cd", "curvature-dimension certificate");
    add_common(cd_cmd, cd_opts);
    std::string cd_potential;
    cd_cmd->add_option("--potential", cd_potential, "self-adjoint potential (text syntax)");

    // trace <polynomial>
    std::string trace_text;
    CommonOpts trace_opts;
    bool trace_mc = false;
    CLI::App* trace_cmd = app.add_subcommand("trace", "exact trace of a polynomial");
    trace_cmd->add_option("polynomial", trace_text, "polynomial in text syntax")->required();
    trace_cmd->add_option("-n,--gens", trace_opts.n, "generator count (default: inferred)");
    trace_cmd->add_option("--model", trace_opts.model_file, "covariance model JSON file");
    trace_cmd->add_flag("--mc", trace_mc, "also report the Monte-Carlo estimate");
    trace_cmd->add_option("--seed", trace_opts.seed, "Monte-Carlo seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            Scenario sc = load_scenario(scenario_path);
            if (!run_out.empty()) sc.out_dir = run_out;
            if (run_canonical) sc.canonical = true;
            return finish(run_scenario(sc));
        }
        if (*spectrum_cmd) return finish(run_scenario(scenario_from_opts(spec_opts, {"spectrum"})));
        if (*poincare_cmd) return finish(run_scenario(scenario_from_opts(poin_opts, {"poincare"})));
        if (*rigidity_cmd) return finish(run_scenario(scenario_from_opts(rig_opts, {"rigidity"})));
        if (*cd_cmd) {
            Scenario sc = scenario_from_opts(cd_opts, {"cd"});
            if (!cd_potential.empty()) sc.potential = parse_poly(cd_potential, sc.n);
            return finish(run_scenario(sc));
        }
        if (*trace_cmd) {
            CovarianceModel model = trace_opts.model_file.empty()
                                        ? CovarianceModel::standard(
                                              trace_cmd->count("-n") ? trace_opts.n
                                                                     : detail::infer_gens(trace_text))
                                        : model_from_file(trace_opts.model_file);
            NcPoly p = parse_poly(trace_text, model.gens());
            Rational t = model.trace(p);
            std::cout << "tau(" << p.str() << ") = " << to_string(t) << "\n";
            if (trace_mc) {
                McConfig cfg;
                cfg.seed = trace_opts.seed;
                cfg.model = model;
                McEstimate est = mc_trace(p, cfg);
                std::cout << "mc  (N=" << cfg.N << ", T=" << cfg.T << ", seed=" << cfg.seed
                          << ") = " << est.value << " +- " << est.std_error << "\n";
            }
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error at position " << e.pos << ":\n"
                  << caret_diagnostic(trace_text.empty() ? cd_potential : trace_text, e) << "\n";
        return 2;
    } catch (const toml::TomlError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
