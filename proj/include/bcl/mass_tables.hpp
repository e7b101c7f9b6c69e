#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcl/grammar.hpp"
#include "bcl/transforms.hpp"
#include "bcl/truth_table.hpp"

namespace bcl {

// Exact aggregates over every formula of each odd size up to max_size:
//   z[s][t]      = sum of prior_probability over formulas of size s whose
//                  table is t;
//   w[s][rule][t] = same sum with each formula weighted by how often it
//                  uses `rule`.
// The START expansion is used exactly once per formula, so its weighted
// table equals z and is not stored.
struct MassTables {
    PcfgState state;  // snapshot of the grammar state the masses were built under
    int max_size;
    std::vector<RuleId> tracked;  // rules with stored weighted tables (all but START)

    // Outer index: (size-1)/2.  Inner vectors have kNumTables entries.
    std::vector<std::vector<double>> z;
    std::vector<std::vector<std::vector<double>>> w;  // [size][tracked index][table]

    static int size_index(int size) { return (size - 1) / 2; }
    int num_sizes() const { return static_cast<int>(z.size()); }

    double z_at(int size, TruthTable16 t) const;
    double w_at(int size, RuleId rule, TruthTable16 t) const;
    int tracked_index(RuleId rule) const;  // -1 for START

    // Total generation probability captured within the size bound,
    // sum over sizes and tables of z.  May be well below 1 when the
    // grammar state favors deep recursion; reported as a diagnostic,
    // never used to renormalize.
    double total_mass_diagnostic() const;
};

// Dynamic program over truth tables: each size is produced from smaller
// sizes with one OR/AND/XOR convolution per operator and split, carried
// out pointwise in the matching transform domain.
MassTables build_mass_tables(const PcfgState& state, int max_size);

// Correctness oracle: explicitly enumerates every AST up to max_size
// (capped at 9; about 3.7e7 ASTs at the cap) and accumulates the same
// aggregates term by term.  Optionally reports the number of ASTs per
// size index.
MassTables naive_enumerate(const PcfgState& state, int max_size,
                           std::vector<std::uint64_t>* ast_counts_by_size = nullptr);

// Which tables have at least one compatible formula at each size.
// Computed from the formula-count recurrence over two Mersenne-prime
// fields, so membership is exact: per-table counts stay below the
// product of the moduli for every supported size bound.
struct ReachTables {
    Language language;
    int max_size;
    std::vector<std::vector<bool>> reachable;  // [size index][table]
    std::vector<std::int8_t> min_size;         // [table]; -1 if unreachable within bound

    bool reachable_at(int size, TruthTable16 t) const;
    std::optional<int> min_compatible_size(TruthTable16 t) const;
};

inline constexpr int kMaxExactReachSize = 29;

ReachTables build_reach_tables(Language lang, int max_size);

// Binary cache keyed by (language, state parameter hash, max_size); a
// state whose parameters changed simply misses.
std::string mass_tables_cache_name(const PcfgState& state, int max_size);
void save_mass_tables(const MassTables& tables, const std::string& path);
std::optional<MassTables> load_mass_tables(const std::string& path, const PcfgState& state, int max_size);

// Plain build when cache_dir is empty; otherwise load on hit, build and
// store on miss.
MassTables build_mass_tables_cached(const PcfgState& state, int max_size, const std::string& cache_dir);

}  // namespace bcl
