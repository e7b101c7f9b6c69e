#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcl/formula.hpp"

namespace bcl {

// P: {and, or, not-on-atoms}.  PXor adds the exclusive-or expansion.
enum class Language { P, PXor };

std::string to_string(Language lang);
std::optional<Language> language_from_string(const std::string& text);

enum class Nonterminal { Start, Bool, Atom };

// Stable rule identifiers; array slots are fixed so PXor states and P
// states index the same way (P simply has no Xor slot in its rule set).
enum class RuleId : int {
    Start = 0,     // START -> BOOL
    And = 1,       // BOOL -> (BOOL & BOOL)
    Or = 2,        // BOOL -> (BOOL | BOOL)
    Xor = 3,       // BOOL -> (BOOL ^ BOOL), PXor only
    Atom = 4,      // BOOL -> ATOM
    X1 = 5,        // ATOM -> x1
    NotX1 = 6,     // ATOM -> !x1
    X2 = 7,
    NotX2 = 8,
    X3 = 9,
    NotX3 = 10,
    X4 = 11,
    NotX4 = 12,
};

inline constexpr int kRuleSlots = 13;

std::string to_string(RuleId id);
std::optional<RuleId> rule_from_string(const std::string& text);
Nonterminal rule_lhs(RuleId id);
std::string rule_rhs_description(RuleId id);

// 12 rules for P, 13 for PXor, in RuleId order.
const std::vector<RuleId>& rules_of(Language lang);
bool language_has_rule(Language lang, RuleId id);

RuleId op_rule(BinaryOp op);
RuleId literal_rule(int variable, bool negated);

using RuleCounts = std::array<int, kRuleSlots>;

// Grammar state: one positive pseudo-count per rule.  Within each
// left-hand-side group, a rule's probability is its pseudo-count
// normalized by the group sum.  Immutable value; updates build new states.
class PcfgState {
public:
    PcfgState(Language lang, std::array<double, kRuleSlots> params, int trial = 0);

    Language language() const { return language_; }
    int trial() const { return trial_; }
    double param(RuleId id) const;
    const std::array<double, kRuleSlots>& params() const { return params_; }

    double rule_probability(RuleId id) const;

    // Returns a copy with `delta` added slot-wise and the trial index
    // advanced.  Deltas must keep every parameter positive.
    PcfgState with_added(const std::array<double, kRuleSlots>& delta) const;

    // FNV-1a over language, trial-independent parameter bits; used as a
    // cache key component.
    std::uint64_t param_hash() const;

private:
    Language language_;
    std::array<double, kRuleSlots> params_;
    int trial_;
};

inline constexpr double kDefaultXorPrior = 1e-4;

// All pseudo-counts 1, except the Xor expansion which starts at
// `xor_prior` (PXor only; defaults to 1e-4 so the operator is available
// but practically unused).  Supplying an Xor prior for P is an error.
PcfgState default_initial_state(Language lang, std::optional<double> xor_prior = std::nullopt);

// Number of uses of each rule in the unique derivation of `formula`.
// Totals 3*(size+1)/2.
RuleCounts count_rule_uses(const Formula& formula);

// Product of rule probabilities over the derivation.  Throws if the
// formula uses an operator outside the state's language.
double prior_probability(const Formula& formula, const PcfgState& state);

// Exchangeable Dirichlet-multinomial marginal of the same derivation
// (ratios of gamma functions per group).  Provided as an alternative
// scoring mode for single formulas; the enumeration pipeline uses the
// mean-parameter product above.
double marginal_prior_probability(const Formula& formula, const PcfgState& state);

// JSON config round-trip for initial states:
// {"language": "pxor", "rules": [{"id","lhs","rhs","D0"}, ...]}
std::string state_to_json(const PcfgState& state);
PcfgState state_from_json(const std::string& json_text);
PcfgState load_state_file(const std::string& path);
void save_state_file(const PcfgState& state, const std::string& path);

}  // namespace bcl
