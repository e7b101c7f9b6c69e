#include "bcl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bcl {

std::optional<int> mdl(TruthTable16 concept_table, const ReachTables& reach) {
    return reach.min_compatible_size(concept_table);
}

std::optional<int> mdl(TruthTable16 concept_table, Language lang, int max_size) {
    return mdl(concept_table, build_reach_tables(lang, max_size));
}

InexpressibleConceptError::InexpressibleConceptError(TruthTable16 c, Language lang, int max_size, int trial_index)
    : std::runtime_error("concept " + format_mask(c) + " has no compatible formula in language " +
                         to_string(lang) + " within size " + std::to_string(max_size) +
                         (trial_index >= 0 ? " (trial " + std::to_string(trial_index) + ")" : "")),
      concept_table(c),
      trial(trial_index) {}

MassUnderflowError::MassUnderflowError(TruthTable16 c, int min_size, int max_size)
    : std::runtime_error("concept " + format_mask(c) + " is expressible (minimal size " +
                         std::to_string(min_size) + ") but its prior mass within size " +
                         std::to_string(max_size) + " underflows double precision under this grammar state"),
      concept_table(c) {}

ConceptStats concept_stats(TruthTable16 concept_table, const MassTables& tables, const ReachTables& reach,
                           double alpha) {
    if (reach.language != tables.state.language() || reach.max_size != tables.max_size)
        throw std::invalid_argument("reachability tables do not match the mass tables");
    auto min_size = reach.min_compatible_size(concept_table);
    if (!min_size)
        throw InexpressibleConceptError(concept_table, tables.state.language(), tables.max_size);

    ConceptStats stats;
    stats.concept_table = concept_table;
    stats.min_size = *min_size;
    stats.cardinality_term = concept_cardinality_term(concept_table);
    stats.alpha = alpha;

    double weighted_size = 0.0;
    for (int size = *min_size; size <= tables.max_size; size += 2) {
        if (!reach.reachable_at(size, concept_table)) continue;
        double mass = std::max(tables.z_at(size, concept_table), 0.0);
        stats.mass_by_size.emplace_back(size, mass);
        stats.total_mass += mass;
        weighted_size += size * mass;
    }
    if (!(stats.total_mass > 0.0)) throw MassUnderflowError(concept_table, *min_size, tables.max_size);
    stats.expected_length = weighted_size / stats.total_mass;
    stats.difficulty = stats.expected_length + alpha * stats.cardinality_term;

    stats.expected_rule_counts.fill(0.0);
    stats.expected_rule_counts[static_cast<std::size_t>(static_cast<int>(RuleId::Start))] = 1.0;
    double tracked_sum = 0.0;
    for (std::size_t k = 0; k < tables.tracked.size(); ++k) {
        double acc = 0.0;
        for (const auto& [size, mass] : stats.mass_by_size) {
            if (mass == 0.0) continue;
            acc += std::max(tables.w_at(size, tables.tracked[k], concept_table), 0.0);
        }
        double value = acc / stats.total_mass;
        stats.expected_rule_counts[static_cast<std::size_t>(static_cast<int>(tables.tracked[k]))] = value;
        tracked_sum += value;
    }

    // Every size-s formula uses exactly 3(s+1)/2 rules, one of them START,
    // so the tracked expectations must total 3(E+1)/2 - 1.  Enforce the
    // conservation law exactly; the raw ratio is kept as a diagnostic.
    double target = 3.0 * (stats.expected_length + 1.0) / 2.0 - 1.0;
    if (tracked_sum > 0.0) {
        stats.rule_count_consistency = tracked_sum / target;
        double scale = target / tracked_sum;
        for (RuleId id : tables.tracked)
            stats.expected_rule_counts[static_cast<std::size_t>(static_cast<int>(id))] *= scale;
    }
    return stats;
}

PcfgState apply_dirichlet_update(const PcfgState& state, const ConceptStats& stats, UpdateWeighting weighting) {
    std::array<double, kRuleSlots> delta{};
    for (RuleId id : rules_of(state.language())) {
        double expected = stats.expected_rule_counts[static_cast<std::size_t>(static_cast<int>(id))];
        delta[static_cast<std::size_t>(static_cast<int>(id))] =
            weighting == UpdateWeighting::Posterior ? expected : expected * stats.total_mass;
    }
    return state.with_added(delta);
}

PcfgState dirichlet_update(const PcfgState& state, TruthTable16 concept_table, int max_size,
                           UpdateWeighting weighting) {
    MassTables tables = build_mass_tables(state, max_size);
    ReachTables reach = build_reach_tables(state.language(), max_size);
    ConceptStats stats = concept_stats(concept_table, tables, reach, 0.0);
    return apply_dirichlet_update(state, stats, weighting);
}

std::string to_string(ModelKind model) { return model == ModelKind::Static ? "static" : "dynamic"; }

std::optional<ModelKind> model_from_string(const std::string& text) {
    if (text == "static") return ModelKind::Static;
    if (text == "dynamic") return ModelKind::Dynamic;
    return std::nullopt;
}

SimulationTrace simulate(const std::vector<TrialConcept>& sequence, const PcfgState& initial_state,
                         ModelKind model, int max_size, double alpha, UpdateWeighting weighting,
                         const std::string& cache_dir) {
    SimulationTrace trace;
    trace.model = model;
    trace.language = initial_state.language();
    trace.max_size = max_size;
    trace.alpha = alpha;
    trace.weighting = weighting;

    ReachTables reach = build_reach_tables(initial_state.language(), max_size);
    PcfgState state = initial_state;
    std::optional<MassTables> tables;  // static: built once; dynamic: rebuilt per trial

    for (std::size_t i = 0; i < sequence.size(); ++i) {
        int trial = static_cast<int>(i) + 1;
        if (!tables || model == ModelKind::Dynamic)
            tables = build_mass_tables_cached(state, max_size, cache_dir);
        ConceptStats stats;
        try {
            stats = concept_stats(sequence[i].table, *tables, reach, alpha);
        } catch (const InexpressibleConceptError& e) {
            throw InexpressibleConceptError(e.concept_table, state.language(), max_size, trial);
        }
        TrialRecord record{trial, sequence[i].label, stats, state,
                           model == ModelKind::Dynamic ? apply_dirichlet_update(state, stats, weighting) : state};
        state = record.state_after;
        trace.trials.push_back(std::move(record));
    }
    return trace;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

nlohmann::json params_to_json(const PcfgState& state) {
    nlohmann::json j = nlohmann::json::object();
    for (RuleId id : rules_of(state.language())) j[to_string(id)] = state.param(id);
    return j;
}

}  // namespace

std::string trace_to_json(const SimulationTrace& trace) {
    nlohmann::json j;
    j["model"] = to_string(trace.model);
    j["language"] = to_string(trace.language);
    j["max_size"] = trace.max_size;
    j["alpha"] = trace.alpha;
    j["update_weighting"] = trace.weighting == UpdateWeighting::Posterior ? "posterior" : "prior";
    if (!trace.group.empty()) j["group"] = trace.group;
    if (trace.seed) j["seed"] = *trace.seed;
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : trace.trials) {
        nlohmann::json jt;
        jt["trial"] = t.trial;
        jt["concept"] = t.label;
        jt["mask"] = format_mask(t.stats.concept_table);
        jt["min_size"] = t.stats.min_size;
        jt["cardinality"] = t.stats.cardinality_term;
        jt["expected_length"] = t.stats.expected_length;
        jt["difficulty"] = t.stats.difficulty;
        jt["total_mass"] = t.stats.total_mass;
        nlohmann::json mass = nlohmann::json::object();
        for (const auto& [size, m] : t.stats.mass_by_size) mass[std::to_string(size)] = m;
        jt["mass_by_size"] = mass;
        nlohmann::json counts = nlohmann::json::object();
        for (RuleId id : rules_of(trace.language))
            counts[to_string(id)] = t.stats.expected_rule_counts[static_cast<std::size_t>(static_cast<int>(id))];
        jt["expected_rule_counts"] = counts;
        jt["D_before"] = params_to_json(t.state_before);
        jt["D_after"] = params_to_json(t.state_after);
        trials.push_back(jt);
    }
    j["trials"] = trials;
    return j.dump(2) + "\n";
}

std::string trace_to_csv(const SimulationTrace& trace) {
    std::ostringstream out;
    out << "group,model,trial,concept,mask,expected_length,cardinality,difficulty";
    for (RuleId id : rules_of(trace.language)) out << ",D_" << to_string(id);
    out << "\n";
    for (const auto& t : trace.trials) {
        out << trace.group << ',' << to_string(trace.model) << ',' << t.trial << ',' << t.label << ','
            << format_mask(t.stats.concept_table) << ',' << format_double(t.stats.expected_length) << ','
            << t.stats.cardinality_term << ',' << format_double(t.stats.difficulty);
        for (RuleId id : rules_of(trace.language)) out << ',' << format_double(t.state_after.param(id));
        out << "\n";
    }
    return out.str();
}

}  // namespace bcl
