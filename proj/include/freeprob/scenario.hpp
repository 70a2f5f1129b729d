#pragma once

// Scenario-driven verification: a scenario names a model, a truncation degree
// and a task list; running it executes the tasks in order and emits
// report.json plus per-task CSVs. Scenarios are TOML (primary) or JSON.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "freeprob/curvature.hpp"
#include "freeprob/io.hpp"
#include "freeprob/mc.hpp"
#include "freeprob/parse.hpp"
#include "freeprob/random_gen.hpp"
#include "freeprob/rigidity.hpp"
#include "freeprob/toml_lite.hpp"

namespace freeprob {

inline const std::set<std::string>& known_tasks() {
    static const std::set<std::string> tasks = {"leibniz-suite", "trace-crosscheck", "spectrum",
                                                "poincare",      "cd",              "bl",
                                                "rigidity",      "jacobian-symmetry"};
    return tasks;
}

struct Scenario {
    int n = 2;
    int degree = 4;
    std::vector<std::string> tasks;
    uint64_t seed = 1;
    CovarianceModel model = CovarianceModel::standard(2);
    std::optional<NcPoly> potential;
    std::string out_dir = "report";
    bool canonical = false;
    int mc_size = 300;
    int mc_trials = 50;
    Tolerances tols;
    double resolvent_tol = 1e-10;
    std::string source;  // file the scenario came from, if any

    void validate() const {
        if (degree < 1) throw std::invalid_argument("scenario: degree must be at least 1");
        if (tasks.empty()) throw std::invalid_argument("scenario: task list must be non-empty");
        for (const std::string& t : tasks)
            if (!known_tasks().count(t)) throw std::invalid_argument("scenario: unknown task '" + t + "'");
        if (model.gens() != n) throw std::invalid_argument("scenario: model dimension differs from n");
        if (potential && potential->gens() != n)
            throw std::invalid_argument("scenario: potential generator count differs from n");
        if (potential && !is_self_adjoint(*potential))
            throw std::invalid_argument("scenario: potential must be self-adjoint");
    }
};

namespace detail {

inline RatMatrix rat_matrix_from_toml(const toml::Value& rows) {
    const auto& arr = rows.as_array();
    if (arr.empty()) throw std::invalid_argument("scenario: empty matrix");
    int n = int(arr.size());
    int m = int(arr[0].as_array().size());
    RatMatrix out(n, m);
    for (int i = 0; i < n; ++i) {
        const auto& row = arr[i].as_array();
        if (int(row.size()) != m) throw std::invalid_argument("scenario: ragged matrix rows");
        for (int j = 0; j < m; ++j) {
            const toml::Value& cell = row[j];
            if (cell.is_string())
                out(i, j) = parse_rational(cell.as_string());
            else if (cell.is_int())
                out(i, j) = Rational(long(cell.as_int()));
            else
                throw std::invalid_argument("scenario: matrix entries must be rational strings or integers");
        }
    }
    return out;
}

inline Scenario scenario_from_toml(const toml::Value& root) {
    Scenario sc;
    bool n_given = false;
    if (const toml::Value* v = root.find("n")) {
        sc.n = int(v->as_int());
        n_given = true;
    }
    if (const toml::Value* v = root.find("degree")) sc.degree = int(v->as_int());
    if (const toml::Value* v = root.find("seed")) sc.seed = uint64_t(v->as_int());
    if (const toml::Value* v = root.find("tasks")) {
        for (const toml::Value& t : v->as_array()) sc.tasks.push_back(t.as_string());
    }
    if (const toml::Value* v = root.find("out")) sc.out_dir = v->as_string();
    if (const toml::Value* v = root.find("canonical")) sc.canonical = v->as_bool();
    if (const toml::Value* v = root.find("mc_size")) sc.mc_size = int(v->as_int());
    if (const toml::Value* v = root.find("mc_trials")) sc.mc_trials = int(v->as_int());

    const toml::Value* cov = root.find("covariance");
    const toml::Value* qf = root.find("quadratic_form");
    const toml::Value* name = root.find("model");
    if ((cov != nullptr) + (qf != nullptr) + (name != nullptr) > 1)
        throw std::invalid_argument("scenario: give exactly one of model/covariance/quadratic_form");
    if (cov)
        sc.model = CovarianceModel::from_covariance(rat_matrix_from_toml(*cov));
    else if (qf)
        sc.model = CovarianceModel::from_quadratic_form(rat_matrix_from_toml(*qf));
    else if (name && name->as_string() != "standard")
        throw std::invalid_argument("scenario: unknown model name '" + name->as_string() + "'");
    else
        sc.model = CovarianceModel::standard(sc.n);
    if (!n_given) sc.n = sc.model.gens();

    if (const toml::Value* v = root.find("potential")) sc.potential = parse_poly(v->as_string(), sc.n);

    if (const toml::Value* tol = root.find("tolerances")) {
        if (const toml::Value* v = tol->find("eig")) sc.tols.eig = v->as_double();
        if (const toml::Value* v = tol->find("orth")) sc.tols.orth = v->as_double();
        if (const toml::Value* v = tol->find("affine")) sc.tols.affine = v->as_double();
        if (const toml::Value* v = tol->find("moment")) sc.tols.moment = v->as_double();
        if (const toml::Value* v = tol->find("resolvent")) sc.resolvent_tol = v->as_double();
    }
    return sc;
}

inline toml::Value toml_from_json(const json& j) {
    using toml::Value;
    if (j.is_string()) return Value(Value::Storage(j.get<std::string>()));
    if (j.is_boolean()) return Value(Value::Storage(j.get<bool>()));
    if (j.is_number_integer()) return Value(Value::Storage(j.get<int64_t>()));
    if (j.is_number_float()) return Value(Value::Storage(j.get<double>()));
    if (j.is_array()) {
        toml::Array arr;
        for (const json& e : j) arr.push_back(toml_from_json(e));
        return Value(Value::Storage(std::move(arr)));
    }
    if (j.is_object()) {
        toml::Table t;
        for (auto it = j.begin(); it != j.end(); ++it) t.emplace(it.key(), toml_from_json(it.value()));
        return Value(Value::Storage(std::move(t)));
    }
    throw std::invalid_argument("unsupported JSON value in scenario");
}

}  // namespace detail

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    Scenario sc;
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        sc = detail::scenario_from_toml(detail::toml_from_json(json::parse(text)));
    } else {
        sc = detail::scenario_from_toml(toml::parse(text));
    }
    sc.source = path;
    sc.validate();
    return sc;
}

struct RunResult {
    bool all_passed = false;
    json report;
};

namespace detail {

struct TaskContext {
    const Scenario& sc;
    RandomGen rng;
    std::optional<TruncatedSpace> space;  // built on demand, shared across tasks
    json mc_section;

    explicit TaskContext(const Scenario& s) : sc(s), rng(s.seed) {}

    const TruncatedSpace& get_space() {
        if (!space) space.emplace(sc.model, sc.degree);
        return *space;
    }

    std::vector<NcPoly> conjugates() const {
        if (sc.potential) return conjugates_from_potential(PotentialSpec(*sc.potential));
        return sc.model.conjugates();
    }
};

inline json task_leibniz_suite(TaskContext& ctx) {
    const int n = ctx.sc.n;
    json out;
    int reps = 200;
    bool ok = true;
    for (int rep = 0; rep < reps && ok; ++rep) {
        NcPoly p = ctx.rng.poly(n, 5), q = ctx.rng.poly(n, 5);
        int i = ctx.rng.uniform(1, n), j = ctx.rng.uniform(1, n);
        TensorPoly2 lhs = fdq(i, p * q);
        TensorPoly2 rhs = bimodule_act(NcPoly::unit(n), fdq(i, p), q) +
                          bimodule_act(p, fdq(i, q), NcPoly::unit(n));
        ok = ok && lhs == rhs;
        ok = ok && fdq(i, star(p)) == dagger(fdq(i, p));
        ok = ok && second_fdq_left(j, i, p) == second_fdq_right(i, j, p);
    }
    out["samples"] = reps;
    out["identities"] = {"leibniz", "realness", "coassociativity"};
    int commutator_reps = 100;
    for (int rep = 0; rep < commutator_reps && ok; ++rep) {
        NcPoly V = ctx.rng.self_adjoint_poly(n, 6);
        NcPoly c(n);
        for (int i = 1; i <= n; ++i) c += commutator(cyclic_grad(i, V), NcPoly::generator(i, n));
        ok = ok && c.is_zero();
    }
    out["commutation_samples"] = commutator_reps;
    out["tolerance"] = "exact";
    out["verdict"] = ok ? "pass" : "fail";
    return out;
}

inline json task_jacobian_symmetry(TaskContext& ctx) {
    const int n = ctx.sc.n;
    json out;
    bool ok = true;
    int reps = ctx.sc.potential ? 1 : 50;
    for (int rep = 0; rep < reps && ok; ++rep) {
        NcPoly V = ctx.sc.potential ? *ctx.sc.potential : ctx.rng.potential(n);
        PotentialSpec spec(V);
        std::vector<NcPoly> xi = conjugates_from_potential(spec);
        JacobianTensor J = jacobian(xi, true);
        ok = ok && J.symmetries_hold();
        for (int j = 1; j <= n && ok; ++j)
            ok = ok && is_zero(clark_ocone_residual_sq(j, xi, J, ctx.sc.model));
    }
    out["samples"] = reps;
    out["identities"] = {"schwarz", "star", "dagger", "clark-ocone"};
    out["tolerance"] = "exact";
    out["verdict"] = ok ? "pass" : "fail";
    return out;
}

inline std::vector<Word> crosscheck_corpus(int n) {
    std::vector<Word> corpus;
    if (n == 1) {
        for (int k = 1; k <= 8; ++k) corpus.push_back(Word(std::vector<int>(size_t(k), 1)));
        return corpus;
    }
    // two degree-8 chains (shared prefixes keep the evaluation cheap) + extras
    std::vector<int> c1 = {1, 2, 1, 1, 2, 2, 1, 2}, c2 = {2, 2, 1, 2, 1, 2, 2, 1};
    for (int k = 1; k <= 8; ++k) corpus.push_back(Word(std::vector<int>(c1.begin(), c1.begin() + k)));
    for (int k = 1; k <= 8; ++k) corpus.push_back(Word(std::vector<int>(c2.begin(), c2.begin() + k)));
    corpus.push_back(Word({1, 1}));
    corpus.push_back(Word({1, 1, 1, 1}));
    corpus.push_back(Word({2, 1, 2, 1}));
    corpus.push_back(Word({1, 1, 2, 2}));
    return corpus;
}

inline json task_trace_crosscheck(TaskContext& ctx) {
    McConfig cfg;
    cfg.N = ctx.sc.mc_size;
    cfg.T = ctx.sc.mc_trials;
    cfg.seed = ctx.sc.seed;
    cfg.model = ctx.sc.model;
    std::vector<Word> corpus = crosscheck_corpus(ctx.sc.n);
    std::vector<McEstimate> est = mc_trace_words(corpus, cfg);
    json words = json::array();
    int failures = 0;
    for (size_t i = 0; i < corpus.size(); ++i) {
        double exact = to_double(ctx.sc.model.trace_word(corpus[i]));
        double err = std::abs(est[i].value - exact);
        double allow = 4.0 * (est[i].std_error + 1.0 / cfg.N);
        bool ok = err <= allow;
        if (!ok) ++failures;
        json w;
        w["word"] = corpus[i].str();
        w["mc"] = est[i].value;
        w["std_error"] = est[i].std_error;
        w["exact"] = to_string(ctx.sc.model.trace_word(corpus[i]));
        w["abs_error"] = err;
        w["allowance"] = allow;
        w["within"] = ok;
        words.push_back(w);
    }
    json out;
    out["N"] = cfg.N;
    out["T"] = cfg.T;
    out["seed"] = cfg.seed;
    out["corpus_size"] = corpus.size();
    out["failures"] = failures;
    out["tolerance"] = "4*(std_error + 1/N), at most 1 corpus failure";
    out["words"] = words;
    out["verdict"] = failures <= 1 ? "pass" : "fail";
    ctx.mc_section = out;
    return out;
}

inline json task_spectrum(TaskContext& ctx) {
    const TruncatedSpace& space = ctx.get_space();
    std::vector<NcPoly> xi = ctx.sc.model.conjugates();
    OperatorMatrix L = laplacian(space, xi);
    Eigensystem es = eigensystem(L, space.gram());

    // Delta(1) = 0 and tau o Delta = 0, both exact.
    bool unit_ok = true;
    for (int r = 0; r < L.rows(); ++r) unit_ok = unit_ok && is_zero(L.mat(r, 0));
    bool trace_ok = true;
    for (int j = 0; j < L.cols() && trace_ok; ++j) {
        Rational s(0);
        for (int i = 0; i < L.rows(); ++i) {
            if (is_zero(L.mat(i, j))) continue;
            s += ctx.sc.model.trace_word(space.basis()[i]) * L.mat(i, j);
        }
        trace_ok = is_zero(s);
    }
    int zero_dim = 0;
    for (int i = 0; i < es.values.size(); ++i)
        if (std::abs(es.values(i)) <= ctx.sc.tols.eig) ++zero_dim;
    bool kernel_ok = zero_dim == 1;

    // Resolvent family properties at a few scales.
    json resolvents = json::array();
    bool res_ok = true;
    for (double alpha : {1.0, 10.0, 100.0}) {
        ResolventResult rr = resolvent(alpha, L, space);
        bool okr = rr.unital_residual <= ctx.sc.resolvent_tol &&
                   rr.trace_residual <= ctx.sc.resolvent_tol &&
                   rr.contraction_excess <= ctx.sc.resolvent_tol && rr.max_deviation_ratio <= 2.0;
        res_ok = res_ok && okr;
        json e;
        e["alpha"] = alpha;
        e["unital_residual"] = rr.unital_residual;
        e["trace_residual"] = rr.trace_residual;
        e["contraction_excess"] = rr.contraction_excess;
        e["max_deviation_ratio"] = rr.max_deviation_ratio;
        resolvents.push_back(e);
    }

    std::filesystem::create_directories(ctx.sc.out_dir);
    write_spectrum_csv(ctx.sc.out_dir + "/spectrum.csv", es, space, ctx.sc.tols.eig);

    json clusters = json::array();
    for (const EigenCluster& c : cluster_eigenvalues(es.values, ctx.sc.tols.eig)) {
        json e;
        e["value"] = c.value;
        e["multiplicity"] = c.multiplicity;
        clusters.push_back(e);
    }
    json out;
    out["dimension"] = space.dim();
    out["clusters"] = clusters;
    out["unit_in_kernel"] = unit_ok;
    out["trace_annihilated"] = trace_ok;
    out["kernel_dimension"] = zero_dim;
    out["resolvents"] = resolvents;
    out["resolvent_tolerance"] = ctx.sc.resolvent_tol;
    out["tolerance"] = ctx.sc.tols.eig;
    out["csv"] = "spectrum.csv";
    out["verdict"] = (unit_ok && trace_ok && kernel_ok && res_ok) ? "pass" : "fail";
    return out;
}

inline json task_poincare(TaskContext& ctx) {
    const TruncatedSpace& space = ctx.get_space();
    PoincareResult pr = poincare_constant(space);
    json out;
    out["constant"] = pr.constant;
    out["spectral_gap"] = pr.gap;
    out["coarse_bound"] = pr.coarse_bound;
    json coeffs = json::array();
    for (int i = 0; i < pr.minimizer.size(); ++i) coeffs.push_back(pr.minimizer(i));
    out["minimizer"] = coeffs;
    out["tolerance"] = ctx.sc.tols.eig;
    bool ok = pr.gap > 0 && pr.constant <= pr.coarse_bound + ctx.sc.tols.eig;
    out["verdict"] = ok ? "pass" : "fail";
    return out;
}

inline json task_cd(TaskContext& ctx) {
    std::vector<NcPoly> xi = ctx.conjugates();
    JacobianTensor J = jacobian(xi, ctx.sc.potential.has_value());
    TensorSpace2 space2(ctx.sc.model, std::max(1, ctx.sc.degree - 1));
    CdCertificate cert = cd_certificate(J, space2);
    json out;
    out["min_eigenvalue"] = cert.min_eigenvalue;
    out["degree"] = cert.degree;
    out["label"] = cert.label;
    out["jacobian"] = jacobian_to_json(J);
    out["tolerance"] = ctx.sc.tols.eig;
    out["verdict"] = cert.min_eigenvalue > 0 ? "pass" : "fail";
    return out;
}

inline json task_bl(TaskContext& ctx) {
    const TruncatedSpace& space = ctx.get_space();
    std::vector<NcPoly> xi = ctx.sc.model.conjugates();
    JacobianTensor J = jacobian(xi);
    const double tol = 1e-8;
    json samples = json::array();
    bool ok = true;
    double c = 0;
    for (int rep = 0; rep < 20; ++rep) {
        NcPoly y = ctx.rng.poly(ctx.sc.n, ctx.sc.degree);
        if (y.is_zero()) continue;
        BlBound b = bl_bound(y, J, space);
        c = b.c;
        bool chain = b.variance <= b.bl_value + tol && b.bl_value <= b.plain_bound + tol;
        ok = ok && chain;
        json s;
        s["variance"] = b.variance;
        s["bl_value"] = b.bl_value;
        s["plain_bound"] = b.plain_bound;
        s["chain_holds"] = chain;
        samples.push_back(s);
    }
    json out;
    out["samples"] = samples;
    out["c"] = c;
    out["tolerance"] = tol;
    out["verdict"] = ok ? "pass" : "fail";
    return out;
}

inline json task_rigidity(TaskContext& ctx) {
    const TruncatedSpace& space = ctx.get_space();
    std::vector<NcPoly> xi = ctx.sc.model.conjugates();
    RigidityReport rep = obata_report(ctx.sc.model, xi, space, ctx.sc.tols);

    std::filesystem::create_directories(ctx.sc.out_dir);
    write_saturators_csv(ctx.sc.out_dir + "/saturators.csv", rep);
    write_moments_csv(ctx.sc.out_dir + "/moments.csv", rep);

    json stages = json::array();
    for (const StageResult& s : rep.stages) {
        json e;
        e["name"] = s.name;
        e["passed"] = s.passed;
        e["residual"] = s.residual;
        e["note"] = s.note;
        stages.push_back(e);
    }
    json out;
    out["r"] = rep.r;
    out["cd_min_eigenvalue"] = rep.cd_value;
    json sat = json::array();
    for (auto& u : rep.saturators) sat.push_back(u);
    out["saturators"] = sat;
    json variances = json::array();
    for (auto& v : rep.y_variances) variances.push_back(to_string(v));
    out["y_variances"] = variances;
    out["freeness_residual"] = to_string(rep.freeness_residual);
    out["stages"] = stages;
    out["verdict"] = rep.passed ? "pass" : "fail";
    out["statement"] = rep.verdict;
    out["truncation_note"] = rep.truncation_note;
    out["tolerance"] = {{"eig", ctx.sc.tols.eig},
                        {"orth", ctx.sc.tols.orth},
                        {"affine", ctx.sc.tols.affine},
                        {"moment", "exact"}};
    out["csv"] = {"saturators.csv", "moments.csv"};
    return out;
}

}  // namespace detail

inline RunResult run_scenario(const Scenario& sc) {
    sc.validate();
    detail::TaskContext ctx(sc);
    json report;
    json scenario_echo;
    scenario_echo["n"] = sc.n;
    scenario_echo["degree"] = sc.degree;
    scenario_echo["seed"] = sc.seed;
    scenario_echo["model"] = model_to_json(sc.model);
    if (sc.potential) scenario_echo["potential"] = sc.potential->str();
    scenario_echo["tasks"] = sc.tasks;
    report["scenario"] = scenario_echo;
    if (!sc.canonical) {
        auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        report["meta"] = {{"timestamp", static_cast<int64_t>(now)}};
    }

    json tasks = json::array();
    bool all = true;
    for (const std::string& name : sc.tasks) {
        json data;
        try {
            if (name == "leibniz-suite") data = detail::task_leibniz_suite(ctx);
            else if (name == "jacobian-symmetry") data = detail::task_jacobian_symmetry(ctx);
            else if (name == "trace-crosscheck") data = detail::task_trace_crosscheck(ctx);
            else if (name == "spectrum") data = detail::task_spectrum(ctx);
            else if (name == "poincare") data = detail::task_poincare(ctx);
            else if (name == "cd") data = detail::task_cd(ctx);
            else if (name == "bl") data = detail::task_bl(ctx);
            else if (name == "rigidity") data = detail::task_rigidity(ctx);
        } catch (const std::exception& e) {
            data["verdict"] = "fail";
            data["error"] = e.what();
        }
        data["name"] = name;
        all = all && data["verdict"] == "pass";
        tasks.push_back(data);
    }
    report["tasks"] = tasks;
    if (!ctx.mc_section.is_null()) report["mc_crosscheck"] = ctx.mc_section;

    std::filesystem::create_directories(sc.out_dir);
    std::ofstream out(sc.out_dir + "/report.json");
    out << report.dump(2) << "\n";
    return RunResult{all, std::move(report)};
}

}  // namespace freeprob
