#include <doctest.h>

#include <cmath>
#include <random>

#include "bcl/grammar.hpp"
#include "bcl/mass_tables.hpp"
#include "test_util.hpp"

using namespace bcl;

namespace {

double param_of(const PcfgState& s, RuleId id) { return s.param(id); }

}  // namespace

TEST_CASE("rule inventory sizes") {
    CHECK(rules_of(Language::P).size() == 12);
    CHECK(rules_of(Language::PXor).size() == 13);
    CHECK_FALSE(language_has_rule(Language::P, RuleId::Xor));
    CHECK(language_has_rule(Language::PXor, RuleId::Xor));
}

TEST_CASE("default initial states") {
    PcfgState pxor = default_initial_state(Language::PXor);
    CHECK(param_of(pxor, RuleId::Xor) == doctest::Approx(1e-4).epsilon(1e-12));
    for (RuleId id : rules_of(Language::PXor))
        if (id != RuleId::Xor) CHECK(param_of(pxor, id) == 1.0);

    PcfgState p = default_initial_state(Language::P);
    for (RuleId id : rules_of(Language::P)) CHECK(param_of(p, id) == 1.0);

    CHECK_THROWS_AS(default_initial_state(Language::P, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(default_initial_state(Language::PXor, -1.0), std::invalid_argument);

    PcfgState uniform = default_initial_state(Language::PXor, 1.0);
    CHECK(uniform.rule_probability(RuleId::Xor) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("rule probabilities normalize within each lhs group") {
    CHECK(default_initial_state(Language::P).rule_probability(RuleId::Start) == 1.0);
    PcfgState pxor = default_initial_state(Language::PXor);
    CHECK(pxor.rule_probability(RuleId::Xor) == doctest::Approx(1e-4 / (3.0 + 1e-4)).epsilon(1e-14));
    CHECK(pxor.rule_probability(RuleId::X3) == doctest::Approx(1.0 / 8.0).epsilon(1e-15));

    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        for (Language lang : {Language::P, Language::PXor}) {
            PcfgState state = testutil::random_state(rng, lang);
            for (Nonterminal lhs : {Nonterminal::Start, Nonterminal::Bool, Nonterminal::Atom}) {
                double total = 0.0;
                for (RuleId id : rules_of(lang))
                    if (rule_lhs(id) == lhs) total += state.rule_probability(id);
                CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("prior probability of single literals, by hand") {
    PcfgState pxor = default_initial_state(Language::PXor);
    double expected = 1.0 / (3.0 + 1e-4) / 8.0;
    CHECK(prior_probability(parse_formula("x1"), pxor) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(0.041665).epsilon(1e-4));

    PcfgState p = default_initial_state(Language::P);
    CHECK(prior_probability(parse_formula("x1"), p) == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
}

TEST_CASE("prior probability of a xor pair, by hand") {
    PcfgState pxor = default_initial_state(Language::PXor);
    double p_xor = 1e-4 / (3.0 + 1e-4);
    double p_leaf = 1.0 / (3.0 + 1e-4) / 8.0;
    CHECK(prior_probability(parse_formula("(x1 ^ x2)"), pxor) ==
          doctest::Approx(p_xor * p_leaf * p_leaf).epsilon(1e-13));
}

TEST_CASE("formulas outside the language are rejected") {
    PcfgState p = default_initial_state(Language::P);
    CHECK_THROWS_AS(prior_probability(parse_formula("(x1 ^ x2)"), p), std::invalid_argument);
    CHECK_THROWS_AS(p.param(RuleId::Xor), std::invalid_argument);
}

TEST_CASE("rule use counts of the worked examples") {
    RuleCounts c1 = count_rule_uses(parse_formula("x1"));
    CHECK(c1[static_cast<int>(RuleId::Start)] == 1);
    CHECK(c1[static_cast<int>(RuleId::Atom)] == 1);
    CHECK(c1[static_cast<int>(RuleId::X1)] == 1);
    int total1 = 0;
    for (int c : c1) total1 += c;
    CHECK(total1 == 3);

    RuleCounts c2 = count_rule_uses(parse_formula("(x1 ^ x2)"));
    CHECK(c2[static_cast<int>(RuleId::Xor)] == 1);
    CHECK(c2[static_cast<int>(RuleId::Atom)] == 2);
    int total2 = 0;
    for (int c : c2) total2 += c;
    CHECK(total2 == 6);

    RuleCounts c3 = count_rule_uses(parse_formula("((x1 & !x2) | (x2 & !x1))"));
    int total3 = 0;
    for (int c : c3) total3 += c;
    CHECK(total3 == 12);
}

TEST_CASE("rule use totals equal 3(size+1)/2 on random formulas") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 300; ++i) {
        Formula f = testutil::random_formula(rng, 1 + 2 * static_cast<int>(rng() % 10));
        RuleCounts counts = count_rule_uses(f);
        int total = 0;
        for (int c : counts) total += c;
        CHECK(total == 3 * (f.size() + 1) / 2);
    }
}

TEST_CASE("prior equals the product of rule probabilities to their use counts") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        Language lang = rng() % 2 ? Language::P : Language::PXor;
        PcfgState state = testutil::random_state(rng, lang);
        Formula f = testutil::random_formula(rng, 1 + 2 * static_cast<int>(rng() % 8), lang);
        RuleCounts counts = count_rule_uses(f);
        double product = 1.0;
        for (RuleId id : rules_of(lang)) {
            int uses = counts[static_cast<std::size_t>(static_cast<int>(id))];
            for (int u = 0; u < uses; ++u) product *= state.rule_probability(id);
        }
        CHECK(prior_probability(f, state) == doctest::Approx(product).epsilon(1e-11));
    }
}

TEST_CASE("the largest prior shrinks with every extra size step") {
    // Greedy rule choice attains the per-size maximum: the op factor and
    // one leaf factor multiply in per extra step, both below one.
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 10; ++trial) {
        Language lang = trial % 2 ? Language::P : Language::PXor;
        PcfgState state = testutil::random_state(rng, lang);
        double p_op_max = 0.0;
        for (RuleId id : {RuleId::And, RuleId::Or, RuleId::Xor})
            if (language_has_rule(lang, id)) p_op_max = std::max(p_op_max, state.rule_probability(id));
        double p_lit_max = 0.0;
        for (int v = 1; v <= 4; ++v)
            for (bool neg : {false, true})
                p_lit_max = std::max(p_lit_max, state.rule_probability(literal_rule(v, neg)));

        std::vector<double> max_prior;
        for (int size = 1; size <= 9; size += 2) {
            int leaves = (size + 1) / 2;
            double best = std::pow(p_op_max, leaves - 1) *
                          std::pow(state.rule_probability(RuleId::Atom) * p_lit_max, leaves);
            for (int i = 0; i < 200; ++i) {
                Formula f = testutil::random_formula(rng, size, lang);
                CHECK(prior_probability(f, state) <= best * (1 + 1e-9));
            }
            max_prior.push_back(best);
        }
        for (std::size_t i = 1; i < max_prior.size(); ++i) CHECK(max_prior[i] < max_prior[i - 1]);
    }
}

TEST_CASE("dirichlet-multinomial marginal agrees with the mean product on a singleton group") {
    // With one observation per group draw, the marginal equals the mean
    // parameter; more uses shrink it below the product (rich get richer
    // only after the pseudo-counts update).
    PcfgState state = default_initial_state(Language::PXor);
    Formula lit = parse_formula("x1");
    CHECK(marginal_prior_probability(lit, state) == doctest::Approx(prior_probability(lit, state)).epsilon(1e-12));

    Formula two = parse_formula("(x1 & x1)");
    // Second draw of x1 from the atom group: (D+1)/(sum+1) > D/sum.
    double mean_product = prior_probability(two, state);
    double marginal = marginal_prior_probability(two, state);
    CHECK(marginal > mean_product);
}

TEST_CASE("grammar config JSON round-trips") {
    PcfgState state = default_initial_state(Language::PXor, 0.25);
    PcfgState reloaded = state_from_json(state_to_json(state));
    CHECK(reloaded.language() == Language::PXor);
    for (RuleId id : rules_of(Language::PXor)) CHECK(reloaded.param(id) == state.param(id));

    CHECK_THROWS(state_from_json("{\"language\": \"pxor\", \"rules\": []}"));
    CHECK_THROWS(state_from_json("{\"language\": \"qq\", \"rules\": []}"));
}

TEST_CASE("shipped grammar configs load to the default states") {
    PcfgState p = load_state_file(std::string(BCL_SOURCE_DIR) + "/data/grammar_p.json");
    CHECK(p.language() == Language::P);
    for (RuleId id : rules_of(Language::P)) CHECK(p.param(id) == 1.0);

    PcfgState pxor = load_state_file(std::string(BCL_SOURCE_DIR) + "/data/grammar_pxor.json");
    CHECK(pxor.language() == Language::PXor);
    CHECK(pxor.param(RuleId::Xor) == doctest::Approx(1e-4).epsilon(1e-12));
}

TEST_CASE("parameter hash tracks parameter changes") {
    PcfgState a = default_initial_state(Language::PXor);
    PcfgState b = default_initial_state(Language::PXor, 2e-4);
    CHECK(a.param_hash() != b.param_hash());
    CHECK(a.param_hash() == default_initial_state(Language::PXor).param_hash());
}
