#include "bcl/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "bcl/experiment.hpp"
#include "bcl/learner.hpp"
#include "bcl/mass_tables.hpp"
#include "bcl/transforms.hpp"

namespace bcl::selftest {

namespace {

std::string format(const char* fmt, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return buf;
}

}  // namespace

CheckResult check_transform_agreement(int pairs_per_op, int full_length_pairs, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (BinaryOp op : {BinaryOp::And, BinaryOp::Or, BinaryOp::Xor}) {
        for (int pair = 0; pair < pairs_per_op; ++pair) {
            std::size_t n = pair < full_length_pairs ? kNumTables : 1024;
            std::vector<double> a(n), b(n);
            for (auto& v : a) v = unif(rng);
            for (auto& v : b) v = unif(rng);
            auto fast = convolve(a, b, op);
            auto slow = convolve_naive(a, b, op);
            for (std::size_t i = 0; i < n; ++i) {
                double rel = std::abs(fast[i] - slow[i]) / slow[i];
                worst = std::max(worst, rel);
            }
        }
    }
    bool pass = worst < 1e-10;
    return {"transform agreement", pass, format("max relative error %.3g (tolerance 1e-10)", worst)};
}

CheckResult check_design_mdl(int max_size) {
    ReachTables reach_p = build_reach_tables(Language::P, max_size);
    ReachTables reach_pxor = build_reach_tables(Language::PXor, max_size);
    std::string failures;
    for (Group group : {Group::Target, Group::Control}) {
        auto sequence = build_sequence(group, 0);
        const auto& specs = sequence_specs(group);
        for (std::size_t i = 0; i < specs.size(); ++i) {
            auto got_p = mdl(sequence[i].table, reach_p);
            auto got_pxor = mdl(sequence[i].table, reach_pxor);
            if (!got_p || *got_p != specs[i].mdl_p)
                failures += " " + specs[i].label + ":p=" + (got_p ? std::to_string(*got_p) : "none") +
                            "!=" + std::to_string(specs[i].mdl_p);
            if (!got_pxor || *got_pxor != specs[i].mdl_pxor)
                failures += " " + specs[i].label + ":pxor=" + (got_pxor ? std::to_string(*got_pxor) : "none") +
                            "!=" + std::to_string(specs[i].mdl_pxor);
        }
    }
    if (failures.empty()) return {"design MDL values", true, "all 12 rows match under both languages"};
    return {"design MDL values", false, "mismatches:" + failures};
}

CheckResult check_oracle_equivalence(Language lang, int max_size, double tolerance) {
    PcfgState state = default_initial_state(lang);
    MassTables dp = build_mass_tables(state, max_size);
    MassTables oracle = naive_enumerate(state, max_size);
    double worst = 0.0;
    std::uint64_t zero_violations = 0;
    auto compare = [&](double got, double want) {
        if (want == 0.0) {
            if (got != 0.0) ++zero_violations;
            return;
        }
        worst = std::max(worst, std::abs(got - want) / want);
    };
    for (int size = 1; size <= max_size; size += 2) {
        for (std::uint32_t t = 0; t < kNumTables; ++t) {
            TruthTable16 table{static_cast<std::uint16_t>(t)};
            compare(dp.z_at(size, table), oracle.z_at(size, table));
            for (RuleId rule : dp.tracked) compare(dp.w_at(size, rule, table), oracle.w_at(size, rule, table));
        }
    }
    bool pass = worst < tolerance && zero_violations == 0;
    std::string detail = format("max relative error %.3g", worst) + ", off-support violations " +
                         std::to_string(zero_violations) + " (language " + to_string(lang) + ", max size " +
                         std::to_string(max_size) + ")";
    return {"oracle equivalence", pass, detail};
}

CheckResult check_ast_counts(Language lang, int max_size) {
    PcfgState state = default_initial_state(lang);
    std::vector<std::uint64_t> counts;
    naive_enumerate(state, max_size, &counts);
    // Catalan(k-1) shapes * ops^(k-1) * 8^k literal choices for k leaves.
    const std::uint64_t n_ops = lang == Language::P ? 2 : 3;
    std::string failures;
    for (int size = 1; size <= max_size; size += 2) {
        int k = (size + 1) / 2;
        std::uint64_t catalan = 1;
        for (int i = 0; i < k - 1; ++i) catalan = catalan * 2 * (2 * i + 1) / (i + 2);
        std::uint64_t expect = catalan;
        for (int i = 0; i < k - 1; ++i) expect *= n_ops;
        for (int i = 0; i < k; ++i) expect *= 8;
        std::uint64_t got = counts[static_cast<std::size_t>(MassTables::size_index(size))];
        if (got != expect)
            failures += " size " + std::to_string(size) + ": " + std::to_string(got) + " != " + std::to_string(expect);
    }
    if (failures.empty())
        return {"AST counts", true, "enumerated totals match the closed form up to size " + std::to_string(max_size)};
    return {"AST counts", false, "mismatches:" + failures};
}

CheckResult check_dirichlet_mass_identity(int max_size) {
    PcfgState state = default_initial_state(Language::PXor);
    auto sequence = build_sequence(Group::Target, 7);
    SimulationTrace trace = simulate(sequence, state, ModelKind::Dynamic, max_size, 0.9);
    double worst = 0.0;
    for (const auto& trial : trace.trials) {
        double added = 0.0;
        for (RuleId id : rules_of(Language::PXor))
            added += trial.state_after.param(id) - trial.state_before.param(id);
        double want = 3.0 * (trial.stats.expected_length + 1.0) / 2.0;
        worst = std::max(worst, std::abs(added - want) / want);
    }
    bool pass = worst < 1e-10;
    return {"Dirichlet mass identity", pass,
            format("max relative deviation %.3g over 6 dynamic trials (tolerance 1e-10)", worst)};
}

std::vector<CheckResult> run_quick_suite() {
    std::vector<CheckResult> results;
    results.push_back(check_transform_agreement(12, 1, 20240917));
    results.push_back(check_design_mdl(19));
    results.push_back(check_oracle_equivalence(Language::P, 7, 1e-12));
    results.push_back(check_oracle_equivalence(Language::PXor, 7, 1e-12));
    results.push_back(check_ast_counts(Language::PXor, 7));
    results.push_back(check_dirichlet_mass_identity(11));
    return results;
}

}  // namespace bcl::selftest
