#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcl/grammar.hpp"

namespace bcl::selftest {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Fast transforms against the direct quadratic convolution on random
// dense inputs; `full_length_pairs` of them run at the production length
// of 65536, the rest at 1024.
CheckResult check_transform_agreement(int pairs_per_op, int full_length_pairs, std::uint64_t seed);

// Engine-computed minimum description lengths against the stored design
// values, both languages.
CheckResult check_design_mdl(int max_size);

// build_mass_tables against the explicit AST enumeration, entry by
// entry: exact zero agreement off-support, relative error on-support.
CheckResult check_oracle_equivalence(Language lang, int max_size, double tolerance);

// Enumerated AST totals per size against the closed-form count.
CheckResult check_ast_counts(Language lang, int max_size);

// Pseudo-count conservation at every trial of a dynamic run on the
// xor-heavy sequence.
CheckResult check_dirichlet_mass_identity(int max_size);

// Reduced-strength suite for the CLI; the acceptance binary runs the
// full-strength settings.
std::vector<CheckResult> run_quick_suite();

}  // namespace bcl::selftest
