#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "bcl/experiment.hpp"
#include "bcl/learner.hpp"

using namespace bcl;

namespace {

// Observations laid out per participant so the canonical schema invariants hold.
std::string synth_csv(const std::map<Group, std::map<std::string, std::vector<double>>>& data) {
    std::ostringstream out;
    out.precision(17);
    out << "participant,group,trial,concept,time_s\n";
    int pid = 0;
    for (const auto& [group, by_concept] : data) {
        std::size_t rows = 0;
        for (const auto& [label, values] : by_concept) rows = std::max(rows, values.size());
        for (std::size_t r = 0; r < rows; ++r) {
            ++pid;
            int trial = 1;
            for (const auto& [label, values] : by_concept) {
                if (r < values.size())
                    out << "p" << pid << "," << to_string(group) << "," << trial << "," << label << ","
                        << values[r] << "\n";
                ++trial;
            }
        }
    }
    return out.str();
}

}  // namespace

TEST_CASE("design tables carry the published minimum description lengths") {
    ReachTables reach_p = build_reach_tables(Language::P, 19);
    ReachTables reach_pxor = build_reach_tables(Language::PXor, 19);
    std::vector<std::pair<int, int>> target_expect = {{1, 1}, {3, 7}, {5, 19}, {3, 7}, {5, 9}, {5, 5}};
    std::vector<std::pair<int, int>> control_expect = {{1, 1}, {3, 3}, {5, 5}, {3, 3}, {5, 9}, {5, 5}};
    for (Group group : {Group::Target, Group::Control}) {
        const auto& expect = group == Group::Target ? target_expect : control_expect;
        const auto& specs = sequence_specs(group);
        auto sequence = build_sequence(group, 42);
        for (std::size_t i = 0; i < specs.size(); ++i) {
            CHECK(specs[i].mdl_pxor == expect[i].first);
            CHECK(specs[i].mdl_p == expect[i].second);
            CHECK(mdl(sequence[i].table, reach_pxor) == expect[i].first);
            CHECK(mdl(sequence[i].table, reach_p) == expect[i].second);
        }
    }
}

TEST_CASE("sequences are deterministic per seed and share the common trials") {
    auto target_a = build_sequence(Group::Target, 7);
    auto target_b = build_sequence(Group::Target, 7);
    auto control = build_sequence(Group::Control, 7);
    for (std::size_t i = 0; i < target_a.size(); ++i) CHECK(target_a[i].table == target_b[i].table);
    // Trials 1, 5 and 6 are shared between the designs.
    CHECK(target_a[0].table == control[0].table);
    CHECK(target_a[4].table == control[4].table);
    CHECK(target_a[5].table == control[5].table);

    auto other_seed = build_sequence(Group::Target, 8);
    bool any_different = false;
    for (std::size_t i = 0; i < target_a.size(); ++i)
        any_different = any_different || !(other_seed[i].table == target_a[i].table);
    CHECK(any_different);
    // Different seeds produce relabelings of the same templates: some
    // variable permutation maps each trial's table onto the other draw.
    for (std::size_t i = 0; i < target_a.size(); ++i) {
        bool related = false;
        VariablePermutation perm = kIdentityPermutation;
        std::sort(perm.begin(), perm.end());
        do {
            related = related || relabel(target_a[i].table, perm) == other_seed[i].table;
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(related);
    }
}

TEST_CASE("static group predictions are seed invariant") {
    // The initial state treats all literals alike, so a static run sees
    // relabeled concepts as identical.
    PcfgState state = default_initial_state(Language::PXor);
    SimulationTrace a = simulate(build_sequence(Group::Target, 1), state, ModelKind::Static, 11, 0.9);
    SimulationTrace b = simulate(build_sequence(Group::Target, 2), state, ModelKind::Static, 11, 0.9);
    for (std::size_t i = 0; i < a.trials.size(); ++i)
        CHECK(a.trials[i].stats.difficulty == doctest::Approx(b.trials[i].stats.difficulty).epsilon(1e-11));
}

TEST_CASE("dynamic runs depend on the drawn variables only through literal overlap") {
    // Updates boost the specific literals seen, so later trials react to
    // how much the fresh draw overlaps earlier ones.  Trial 1 difficulty
    // is still draw independent, and trial 2 depends only on the update
    // from the symmetric trial-1 concept.
    PcfgState state = default_initial_state(Language::PXor);
    SimulationTrace a = simulate(build_sequence(Group::Target, 1), state, ModelKind::Dynamic, 11, 0.9);
    SimulationTrace b = simulate(build_sequence(Group::Target, 2), state, ModelKind::Dynamic, 11, 0.9);
    CHECK(a.trials[0].stats.difficulty == doctest::Approx(b.trials[0].stats.difficulty).epsilon(1e-11));
    double spread = 0.0;
    for (std::size_t i = 1; i < a.trials.size(); ++i)
        spread = std::max(spread,
                          std::abs(a.trials[i].stats.difficulty - b.trials[i].stats.difficulty) /
                              a.trials[i].stats.difficulty);
    CHECK(spread < 0.05);  // a few percent at the default settings
}

TEST_CASE("ingestion accepts the canonical schema") {
    ObservedTimes times = ingest_times_text(
        "participant,group,trial,concept,time_s\n"
        "p1,target,1,C1,42.5\n"
        "p2,control,1,C1,99\n");
    CHECK(times.rows.size() == 2);
    CHECK(times.rejected.empty());
    CHECK(times.count(Group::Target) == 1);
    CHECK(times.count(Group::Control) == 1);
}

TEST_CASE("ingestion itemizes rejected rows") {
    ObservedTimes times = ingest_times_text(
        "participant,group,trial,concept,time_s\n"
        "p1,target,1,C1,-1\n"
        "p2,middle,1,C1,10\n"
        "p3,target,9,C1,10\n"
        "p4,target,2,C9x,10\n"
        "p5,target,2,C2x,abc\n"
        "p6,target,2\n"
        "p7,target,3,C3x,12.5\n");
    CHECK(times.rows.size() == 1);
    REQUIRE(times.rejected.size() == 6);
    CHECK(times.rejected[0].line == 2);
    CHECK(times.rejected[0].reason.find("positive") != std::string::npos);
    CHECK(times.rejected[1].reason.find("group") != std::string::npos);
    CHECK(times.rejected[2].reason.find("out of range") != std::string::npos);
    CHECK(times.rejected[3].reason.find("concept") != std::string::npos);
    CHECK(times.rejected[4].reason.find("number") != std::string::npos);
    CHECK(times.rejected[5].reason.find("fields") != std::string::npos);
}

TEST_CASE("duplicate keys and cross-group participants are hard errors") {
    CHECK_THROWS_WITH_AS(ingest_times_text("participant,group,trial,concept,time_s\n"
                                           "p1,target,1,C1,10\n"
                                           "p1,target,1,C1,11\n"),
                         doctest::Contains("(p1, 1)"), std::runtime_error);
    CHECK_THROWS_AS(ingest_times_text("participant,group,trial,concept,time_s\n"
                                      "p1,target,1,C1,10\n"
                                      "p1,control,2,C2c,11\n"),
                    std::runtime_error);
    CHECK_THROWS_AS(ingest_times_text("time_s\n"), std::runtime_error);
}

TEST_CASE("noiseless synthetic times recover the scale exactly") {
    PcfgState state = default_initial_state(Language::PXor);
    std::map<Group, SimulationTrace> traces;
    traces[Group::Target] = simulate(build_sequence(Group::Target, 11), state, ModelKind::Dynamic, 11, 0.9);
    traces[Group::Control] = simulate(build_sequence(Group::Control, 11), state, ModelKind::Dynamic, 11, 0.9);

    const double beta0 = 12.5;
    std::map<Group, std::map<std::string, std::vector<double>>> data;
    for (Group g : {Group::Target, Group::Control})
        for (const auto& t : traces[g].trials)
            data[g][t.label] = {beta0 * t.stats.difficulty, beta0 * t.stats.difficulty};
    ObservedTimes times = ingest_times_text(synth_csv(data));

    FitResult fit = fit_scale(traces, times, FitMode::FixedAlpha, 0.9);
    for (Group g : {Group::Target, Group::Control}) {
        CHECK(fit.groups[g].beta == doctest::Approx(beta0).epsilon(1e-9));
        CHECK(fit.groups[g].r_squared == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(fit.groups[g].n_concepts == 6);
    }

    // The alpha grid lands on the generating value.
    FitResult grid = fit_scale(traces, times, FitMode::GridAlpha, 0.0);
    CHECK(grid.alpha == doctest::Approx(0.9).epsilon(1e-9));

    // Rescaling every time by a constant rescales beta and nothing else.
    std::map<Group, std::map<std::string, std::vector<double>>> scaled;
    for (auto& [g, by_label] : data)
        for (auto& [label, values] : by_label)
            for (double v : values) scaled[g][label].push_back(3.0 * v);
    FitResult fit3 = fit_scale(traces, ingest_times_text(synth_csv(scaled)), FitMode::FixedAlpha, 0.9);
    for (Group g : {Group::Target, Group::Control}) {
        CHECK(fit3.groups[g].beta == doctest::Approx(3.0 * beta0).epsilon(1e-9));
        CHECK(fit3.groups[g].r_squared == doctest::Approx(fit.groups[g].r_squared).epsilon(1e-9));
    }
}

TEST_CASE("permuting the labels of a noiseless set breaks the perfect fit") {
    PcfgState state = default_initial_state(Language::PXor);
    std::map<Group, SimulationTrace> traces;
    traces[Group::Target] = simulate(build_sequence(Group::Target, 11), state, ModelKind::Dynamic, 11, 0.9);

    std::vector<double> difficulties;
    for (const auto& t : traces[Group::Target].trials) difficulties.push_back(t.stats.difficulty);
    std::map<Group, std::map<std::string, std::vector<double>>> data;
    for (std::size_t i = 0; i < traces[Group::Target].trials.size(); ++i) {
        // Shift each concept's synthetic time onto the next trial's label.
        const auto& label = traces[Group::Target].trials[i].label;
        double wrong = 10.0 * difficulties[(i + 1) % difficulties.size()];
        data[Group::Target][label] = {wrong, wrong};
    }
    FitResult fit = fit_scale(traces, ingest_times_text(synth_csv(data)), FitMode::FixedAlpha, 0.9);
    CHECK(fit.groups[Group::Target].r_squared < 1.0 - 1e-3);
}

TEST_CASE("fit is refused without at least two distinct concepts") {
    PcfgState state = default_initial_state(Language::PXor);
    std::map<Group, SimulationTrace> traces;
    traces[Group::Target] = simulate(build_sequence(Group::Target, 11), state, ModelKind::Static, 9, 0.9);
    ObservedTimes times = ingest_times_text(
        "participant,group,trial,concept,time_s\n"
        "p1,target,1,C1,10\n"
        "p2,target,1,C1,12\n");
    CHECK_THROWS_AS(fit_scale(traces, times, FitMode::FixedAlpha, 0.9), std::invalid_argument);
}

TEST_CASE("pooled t statistic matches the textbook formula") {
    TTestResult same = two_sample_t({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0});
    CHECK(same.t == 0.0);
    CHECK(same.df == 4);
    CHECK(same.p == doctest::Approx(1.0).epsilon(1e-12));

    // {1,2,3} against the same sample shifted by 1: pooled variance 1,
    // standard error sqrt(2/3), so t = -sqrt(3/2).
    TTestResult shifted = two_sample_t({1.0, 2.0, 3.0}, {2.0, 3.0, 4.0});
    CHECK(shifted.t == doctest::Approx(-std::sqrt(1.5)).epsilon(1e-12));
    CHECK(shifted.df == 4);
    CHECK(shifted.p > 0.2);
    CHECK(shifted.p < 0.4);

    CHECK_THROWS_AS(two_sample_t({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("t statistic on grouped observations pulls the right rows") {
    ObservedTimes times = ingest_times_text(
        "participant,group,trial,concept,time_s\n"
        "p1,target,5,C5,100\n"
        "p2,target,5,C5,120\n"
        "p3,control,5,C5,200\n"
        "p4,control,5,C5,230\n"
        "p5,control,1,C1,5\n");
    TTestResult r = two_sample_t(times, "C5");
    CHECK(r.n_a == 2);
    CHECK(r.n_b == 2);
    CHECK(r.mean_a == doctest::Approx(110.0));
    CHECK(r.mean_b == doctest::Approx(215.0));
    CHECK(r.t < 0.0);
    CHECK(r.df == 2);
}

TEST_CASE("fit exports are tidy") {
    PcfgState state = default_initial_state(Language::PXor);
    std::map<Group, SimulationTrace> traces;
    traces[Group::Target] = simulate(build_sequence(Group::Target, 11), state, ModelKind::Static, 9, 0.9);
    std::map<Group, std::map<std::string, std::vector<double>>> data;
    for (const auto& t : traces[Group::Target].trials)
        data[Group::Target][t.label] = {7.0 * t.stats.difficulty};
    FitResult fit = fit_scale(traces, ingest_times_text(synth_csv(data)), FitMode::FixedAlpha, 0.9);

    std::string csv = fit_to_csv(fit);
    CHECK(csv.rfind("group,concept,observed_mean,observed_sem,predicted_difficulty,predicted_time", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    std::string json = fit_to_json(fit);
    CHECK(json.find("\"r_squared\"") != std::string::npos);
    CHECK(json.find("\"target\"") != std::string::npos);
}
