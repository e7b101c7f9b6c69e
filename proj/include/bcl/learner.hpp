#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcl/grammar.hpp"
#include "bcl/mass_tables.hpp"
#include "bcl/truth_table.hpp"

namespace bcl {

// Minimum description length: smallest size of a compatible formula, or
// nullopt when none exists within the bound.
std::optional<int> mdl(TruthTable16 concept_table, Language lang, int max_size);
std::optional<int> mdl(TruthTable16 concept_table, const ReachTables& reach);

struct InexpressibleConceptError : std::runtime_error {
    InexpressibleConceptError(TruthTable16 concept_table, Language lang, int max_size, int trial = -1);
    TruthTable16 concept_table;
    int trial;  // -1 outside a simulation
};

// The concept is exactly expressible, but its prior mass is below the
// double-precision resolution of the transform-built tables (it needs
// several near-zero-probability rules).  Raised instead of returning
// garbage statistics.
struct MassUnderflowError : std::runtime_error {
    MassUnderflowError(TruthTable16 concept_table, int min_size, int max_size);
    TruthTable16 concept_table;
};

// Posterior summary for one concept under one grammar state, with the
// compatible-formula likelihood (indicator on the concept's table).
struct ConceptStats {
    TruthTable16 concept_table;
    int min_size = 0;                                   // exact, from reachability
    int cardinality_term = 0;                           // min(#C, 16-#C)
    std::vector<std::pair<int, double>> mass_by_size;   // (odd size, prior mass at concept)
    double total_mass = 0.0;
    double expected_length = 0.0;
    double alpha = 0.0;
    double difficulty = 0.0;                            // expected_length + alpha*cardinality_term
    std::array<double, kRuleSlots> expected_rule_counts{};  // posterior mean uses per rule

    // Raw DP consistency of sum-of-rule-uses against 3*(E+1)/2 before
    // the conserving normalization; 1.0 up to accumulated float error.
    double rule_count_consistency = 1.0;
};

// Restricts all sums to the concept's table entry across sizes.  Sizes at
// which the concept is not exactly reachable contribute nothing (their
// stored mass is pure transform residue).  Expected rule counts are
// normalized so that, together with START's single use, they add up to
// 3*(expected_length+1)/2, the per-formula total lifted through the
// posterior.  Throws InexpressibleConceptError when no compatible formula
// exists within the bound.
ConceptStats concept_stats(TruthTable16 concept_table, const MassTables& tables, const ReachTables& reach,
                           double alpha);

// Pseudo-count increments: the posterior-normalized expected rule uses
// (default), or the raw prior-mass-weighted sums.
enum class UpdateWeighting { Posterior, Prior };

// D_i += weighted expected uses of rule i over the compatible set;
// advances the trial index.
PcfgState apply_dirichlet_update(const PcfgState& state, const ConceptStats& stats,
                                 UpdateWeighting weighting = UpdateWeighting::Posterior);

// Convenience: builds the mass and reachability tables internally.
PcfgState dirichlet_update(const PcfgState& state, TruthTable16 concept_table, int max_size,
                           UpdateWeighting weighting = UpdateWeighting::Posterior);

enum class ModelKind { Static, Dynamic };

std::string to_string(ModelKind model);
std::optional<ModelKind> model_from_string(const std::string& text);

struct TrialConcept {
    std::string label;
    TruthTable16 table;
};

struct TrialRecord {
    int trial = 0;  // 1-based
    std::string label;
    ConceptStats stats;
    PcfgState state_before;
    PcfgState state_after;  // equals state_before for the static model
};

struct SimulationTrace {
    ModelKind model = ModelKind::Static;
    Language language = Language::P;
    int max_size = 0;
    double alpha = 0.0;
    UpdateWeighting weighting = UpdateWeighting::Posterior;
    std::string group;                  // optional annotation, e.g. "target"
    std::optional<std::uint64_t> seed;  // optional annotation
    std::vector<TrialRecord> trials;
};

// Static: per-trial stats under the unchanged initial state.  Dynamic:
// stats under the current state, then the Dirichlet update.  The mass
// tables are rebuilt from scratch whenever the state changes; a nonempty
// cache_dir short-circuits rebuilds for previously seen states.
SimulationTrace simulate(const std::vector<TrialConcept>& sequence, const PcfgState& initial_state,
                         ModelKind model, int max_size, double alpha,
                         UpdateWeighting weighting = UpdateWeighting::Posterior,
                         const std::string& cache_dir = "");

std::string trace_to_json(const SimulationTrace& trace);
std::string trace_to_csv(const SimulationTrace& trace);

}  // namespace bcl
