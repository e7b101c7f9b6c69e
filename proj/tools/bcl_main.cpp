// Command-line front end: minimum description lengths, sequence
// simulations, fitting against observed learning times, statistics,
// self-checks and benchmarks.
//
// Exit codes: 0 ok, 1 usage error, 2 domain error, 3 selftest failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bcl/experiment.hpp"
#include "bcl/learner.hpp"
#include "bcl/mass_tables.hpp"
#include "bcl/selftest.hpp"

namespace {

using namespace bcl;

struct CommonOptions {
    std::string language = "pxor";
    int max_size = 19;
    double alpha = 0.9;
    double xor_prior = kDefaultXorPrior;
    std::uint64_t seed = 0;
    std::string grammar_file;
    bool paper_defaults = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_alpha = true) {
    cmd->add_option("--language", opts.language, "grammar language: p or pxor")
        ->check(CLI::IsMember({"p", "pxor"}));
    cmd->add_option("--max-size", opts.max_size, "largest formula size enumerated (odd)");
    if (with_alpha) cmd->add_option("--alpha", opts.alpha, "cardinality weight in the difficulty score");
    cmd->add_option("--xor-prior", opts.xor_prior, "initial pseudo-count of the xor rule (pxor only)");
    cmd->add_option("--seed", opts.seed, "seed for the per-trial variable randomization");
    cmd->add_option("--grammar", opts.grammar_file, "JSON grammar config overriding language and pseudo-counts");
    cmd->add_flag("--paper-defaults", opts.paper_defaults,
                  "pin language=pxor, max-size=19, alpha=0.9, xor-prior=1e-4");
}

PcfgState make_state(const CommonOptions& opts) {
    if (!opts.grammar_file.empty()) return load_state_file(opts.grammar_file);
    Language lang = *language_from_string(opts.language);
    if (lang == Language::P) return default_initial_state(lang);
    return default_initial_state(lang, opts.xor_prior);
}

CommonOptions apply_paper_defaults(CommonOptions opts) {
    if (opts.paper_defaults) {
        opts.language = "pxor";
        opts.max_size = 19;
        opts.alpha = 0.9;
        opts.xor_prior = kDefaultXorPrior;
        opts.grammar_file.clear();
    }
    return opts;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run_mdl(const CommonOptions& raw, const std::string& concept_text) {
    CommonOptions opts = apply_paper_defaults(raw);
    TruthTable16 concept_table = parse_concept(concept_text);
    Language lang = opts.grammar_file.empty() ? *language_from_string(opts.language)
                                              : load_state_file(opts.grammar_file).language();
    auto result = mdl(concept_table, lang, opts.max_size);
    if (!result) {
        std::cout << "not expressible <= " << opts.max_size << "\n";
        return 2;
    }
    std::cout << *result << "\n";
    return 0;
}

int run_simulate(const CommonOptions& raw, const std::string& group_text, const std::string& model_text,
                 const std::string& weighting_text, const std::string& out_base, const std::string& format,
                 const std::string& cache_dir) {
    CommonOptions opts = apply_paper_defaults(raw);
    Group group = *group_from_string(group_text);
    ModelKind model = *model_from_string(model_text);
    UpdateWeighting weighting =
        weighting_text == "prior" ? UpdateWeighting::Prior : UpdateWeighting::Posterior;
    PcfgState state = make_state(opts);
    auto sequence = build_sequence(group, opts.seed);
    SimulationTrace trace = simulate(sequence, state, model, opts.max_size, opts.alpha, weighting, cache_dir);
    trace.group = to_string(group);
    trace.seed = opts.seed;
    if (!out_base.empty()) {
        write_file(out_base + ".json", trace_to_json(trace));
        write_file(out_base + ".csv", trace_to_csv(trace));
        std::cerr << "wrote " << out_base << ".json and " << out_base << ".csv\n";
    } else {
        std::cout << (format == "json" ? trace_to_json(trace) : trace_to_csv(trace));
    }
    return 0;
}

int run_fit(const CommonOptions& raw, const std::string& data_path, const std::string& model_text,
            bool grid_alpha, bool shared_beta, const std::string& out_base, const std::string& format,
            const std::string& cache_dir) {
    CommonOptions opts = apply_paper_defaults(raw);
    ModelKind model = *model_from_string(model_text);
    PcfgState state = make_state(opts);
    ObservedTimes times = ingest_times(data_path);
    for (const auto& r : times.rejected)
        std::cerr << "rejected line " << r.line << ": " << r.reason << "\n";
    std::cerr << "accepted rows: target " << times.count(Group::Target) << ", control "
              << times.count(Group::Control) << "\n";

    std::map<Group, SimulationTrace> traces;
    for (Group g : {Group::Target, Group::Control}) {
        traces[g] = simulate(build_sequence(g, opts.seed), state, model, opts.max_size, opts.alpha,
                             UpdateWeighting::Posterior, cache_dir);
        traces[g].group = to_string(g);
    }
    FitResult fit = fit_scale(traces, times, grid_alpha ? FitMode::GridAlpha : FitMode::FixedAlpha, opts.alpha,
                              shared_beta);
    if (!out_base.empty()) {
        write_file(out_base + ".json", fit_to_json(fit));
        write_file(out_base + ".csv", fit_to_csv(fit));
        std::cerr << "wrote " << out_base << ".json and " << out_base << ".csv\n";
    } else {
        std::cout << (format == "csv" ? fit_to_csv(fit) : fit_to_json(fit));
    }
    return 0;
}

int run_ttest(const std::string& data_path, const std::string& concept_label) {
    ObservedTimes times = ingest_times(data_path);
    TTestResult r = two_sample_t(times, concept_label);
    std::printf("concept %s: t(%d) = %.4f, two-sided p = %.6g (target n=%d mean=%.2f, control n=%d mean=%.2f)\n",
                concept_label.c_str(), r.df, r.t, r.p, r.n_a, r.mean_a, r.n_b, r.mean_b);
    return 0;
}

int run_selftest() {
    bool all_pass = true;
    for (const auto& check : selftest::run_quick_suite()) {
        std::printf("[%s] %s: %s\n", check.pass ? "PASS" : "FAIL", check.name.c_str(), check.detail.c_str());
        all_pass = all_pass && check.pass;
    }
    return all_pass ? 0 : 3;
}

int run_bench(const CommonOptions& raw) {
    CommonOptions opts = apply_paper_defaults(raw);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> a(kNumTables), b(kNumTables);
    for (auto& v : a) v = unif(rng);
    for (auto& v : b) v = unif(rng);

    for (BinaryOp op : {BinaryOp::And, BinaryOp::Or, BinaryOp::Xor}) {
        auto t0 = std::chrono::steady_clock::now();
        auto fast = convolve(a, b, op);
        double fast_s = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        auto slow = convolve_naive(a, b, op);
        double slow_s = seconds_since(t0);
        std::printf("convolve %c (n=65536): transform %.4f s, pairwise %.2f s, speedup %.0fx\n",
                    op_symbol(op), fast_s, slow_s, slow_s / fast_s);
    }

    PcfgState state = make_state(opts);
    auto t0 = std::chrono::steady_clock::now();
    MassTables tables = build_mass_tables(state, opts.max_size);
    double build_s = seconds_since(t0);
    std::printf("mass tables %s M=%d: %.2f s, captured generation mass %.6f\n",
                to_string(state.language()).c_str(), opts.max_size, build_s, tables.total_mass_diagnostic());

    t0 = std::chrono::steady_clock::now();
    build_reach_tables(state.language(), opts.max_size);
    std::printf("reachability %s M=%d: %.2f s\n", to_string(state.language()).c_str(), opts.max_size,
                seconds_since(t0));
    return 0;
}

int run_sensitivity(const CommonOptions& raw, const std::string& group_text, const std::string& model_text,
                    std::vector<int> sizes) {
    CommonOptions opts = apply_paper_defaults(raw);
    Group group = *group_from_string(group_text);
    ModelKind model = *model_from_string(model_text);
    if (sizes.empty()) sizes = {17, 19, 21};
    std::cout << "max_size,trial,concept,expected_length,difficulty\n";
    for (int size : sizes) {
        PcfgState state = make_state(opts);
        SimulationTrace trace = simulate(build_sequence(group, opts.seed), state, model, size, opts.alpha);
        for (const auto& t : trace.trials) {
            std::printf("%d,%d,%s,%.12g,%.12g\n", size, t.trial, t.label.c_str(), t.stats.expected_length,
                        t.stats.difficulty);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian concept-learning engine over propositional grammars"};
    app.require_subcommand(1);

    CommonOptions opts;

    auto* mdl_cmd = app.add_subcommand("mdl", "minimum description length of a concept");
    std::string concept_text;
    mdl_cmd->add_option("--concept", concept_text, "concept as 0x mask or formula text")->required();
    add_common(mdl_cmd, opts, false);

    auto* sim_cmd = app.add_subcommand("simulate", "run a concept sequence through the learner");
    std::string group_text = "target", model_text = "static", weighting_text = "posterior";
    std::string out_base, format = "csv", cache_dir;
    sim_cmd->add_option("--group", group_text, "concept sequence: target or control")
        ->check(CLI::IsMember({"target", "control"}));
    sim_cmd->add_option("--model", model_text, "static or dynamic")->check(CLI::IsMember({"static", "dynamic"}));
    sim_cmd->add_option("--update-weighting", weighting_text, "dynamic update weighting: posterior or prior")
        ->check(CLI::IsMember({"posterior", "prior"}));
    sim_cmd->add_option("--out", out_base, "write <out>.json and <out>.csv instead of stdout");
    sim_cmd->add_option("--format", format, "stdout format: csv or json")->check(CLI::IsMember({"csv", "json"}));
    sim_cmd->add_option("--cache-dir", cache_dir, "directory for mass-table cache files");
    add_common(sim_cmd, opts);

    auto* fit_cmd = app.add_subcommand("fit", "fit the time scale against observed learning times");
    std::string data_path;
    bool grid_alpha = false, shared_beta = false;
    fit_cmd->add_option("--data", data_path, "CSV: participant,group,trial,concept,time_s")->required();
    fit_cmd->add_option("--model", model_text, "static or dynamic")->check(CLI::IsMember({"static", "dynamic"}));
    fit_cmd->add_flag("--grid-alpha", grid_alpha, "scan alpha over [0,3] step 0.01 instead of fixing it");
    fit_cmd->add_flag("--shared-beta", shared_beta, "fit one scale across both groups");
    fit_cmd->add_option("--out", out_base, "write <out>.json and <out>.csv instead of stdout");
    fit_cmd->add_option("--format", format, "stdout format: csv or json")->check(CLI::IsMember({"csv", "json"}));
    fit_cmd->add_option("--cache-dir", cache_dir, "directory for mass-table cache files");
    add_common(fit_cmd, opts);

    auto* ttest_cmd = app.add_subcommand("ttest", "two-sample t-test between groups for one concept");
    std::string ttest_concept = "C5";
    ttest_cmd->add_option("--data", data_path, "CSV: participant,group,trial,concept,time_s")->required();
    ttest_cmd->add_option("--concept", ttest_concept, "concept label, e.g. C5");

    auto* selftest_cmd = app.add_subcommand("selftest", "run the built-in consistency checks");

    auto* bench_cmd = app.add_subcommand("bench", "time the convolution paths and a full table build");
    add_common(bench_cmd, opts);

    auto* sens_cmd = app.add_subcommand("sensitivity", "difficulties across several size bounds");
    std::vector<int> sens_sizes;
    sens_cmd->add_option("--group", group_text, "target or control")->check(CLI::IsMember({"target", "control"}));
    sens_cmd->add_option("--model", model_text, "static or dynamic")->check(CLI::IsMember({"static", "dynamic"}));
    sens_cmd->add_option("--sizes", sens_sizes, "size bounds to compare (default 17 19 21)");
    add_common(sens_cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (mdl_cmd->parsed()) return run_mdl(opts, concept_text);
        if (sim_cmd->parsed())
            return run_simulate(opts, group_text, model_text, weighting_text, out_base, format, cache_dir);
        if (fit_cmd->parsed())
            return run_fit(opts, data_path, model_text, grid_alpha, shared_beta, out_base, format, cache_dir);
        if (ttest_cmd->parsed()) return run_ttest(data_path, ttest_concept);
        if (selftest_cmd->parsed()) return run_selftest();
        if (bench_cmd->parsed()) return run_bench(opts);
        if (sens_cmd->parsed()) return run_sensitivity(opts, group_text, model_text, sens_sizes);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
