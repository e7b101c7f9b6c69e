#include <doctest.h>

#include <random>

#include "bcl/formula.hpp"
#include "bcl/truth_table.hpp"
#include "test_util.hpp"

using namespace bcl;

TEST_CASE("variable tables follow the valuation index convention") {
    CHECK(variable_table(1).mask == 0xAAAA);
    CHECK(variable_table(2).mask == 0xCCCC);
    CHECK(variable_table(3).mask == 0xF0F0);
    CHECK(variable_table(4).mask == 0xFF00);
}

TEST_CASE("complement and cardinality split the sixteen valuations") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        TruthTable16 t{static_cast<std::uint16_t>(rng())};
        CHECK(t.complement().mask == (t.mask ^ 0xFFFF));
        CHECK(t.cardinality() + t.complement().cardinality() == 16);
    }
}

TEST_CASE("eval of the running examples") {
    CHECK(parse_formula("x1").eval().mask == 0xAAAA);
    auto conj = parse_formula("(x1 & x2)").eval();
    CHECK(conj.mask == 0x8888);
    CHECK(conj.cardinality() == 4);
    CHECK(parse_formula("(x1 ^ x2)").eval().mask == 0x6666);
}

TEST_CASE("eval composes bitwise over the operators") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 300; ++i) {
        Formula left = testutil::random_formula(rng, 1 + 2 * static_cast<int>(rng() % 5));
        Formula right = testutil::random_formula(rng, 1 + 2 * static_cast<int>(rng() % 5));
        CHECK(Formula::binary(BinaryOp::And, left, right).eval().mask == (left.eval().mask & right.eval().mask));
        CHECK(Formula::binary(BinaryOp::Or, left, right).eval().mask == (left.eval().mask | right.eval().mask));
        CHECK(Formula::binary(BinaryOp::Xor, left, right).eval().mask == (left.eval().mask ^ right.eval().mask));
    }
}

TEST_CASE("size counts literals plus operators") {
    CHECK(parse_formula("x1").size() == 1);
    CHECK(parse_formula("!x3").size() == 1);
    CHECK(parse_formula("(x1 ^ x2)").size() == 3);
    CHECK(parse_formula("((x1 & !x2) | (x2 & !x1))").size() == 7);
}

TEST_CASE("size is odd and equals two literals minus one") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
        int literals = 1 + static_cast<int>(rng() % 10);
        Formula f = testutil::random_formula(rng, 2 * literals - 1);
        CHECK(f.size() == 2 * literals - 1);
        CHECK(f.size() % 2 == 1);
    }
}

TEST_CASE("concept cardinality term") {
    CHECK(concept_cardinality_term(TruthTable16{0x8888}) == 4);
    CHECK(concept_cardinality_term(TruthTable16{0x0000}) == 0);
    CHECK(concept_cardinality_term(TruthTable16{0xAAAA}) == 8);
    CHECK(concept_cardinality_term(TruthTable16{0xFFFF}) == 0);
}

TEST_CASE("relabel permutes variable roles") {
    CHECK(relabel(TruthTable16{0xAAAA}, kIdentityPermutation).mask == 0xAAAA);
    CHECK(relabel(TruthTable16{0xAAAA}, {2, 1, 3, 4}).mask == 0xCCCC);
    // x1 & x2 with roles 1 and 3 swapped reads x3 & x2.
    CHECK(relabel(parse_formula("(x1 & x2)").eval(), {3, 2, 1, 4}) == parse_formula("(x3 & x2)").eval());
}

TEST_CASE("relabel round-trips through the inverse and keeps cardinality") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 300; ++i) {
        TruthTable16 t{static_cast<std::uint16_t>(rng())};
        VariablePermutation perm = kIdentityPermutation;
        for (int j = 3; j >= 1; --j)
            std::swap(perm[static_cast<std::size_t>(j)], perm[rng() % static_cast<std::uint64_t>(j + 1)]);
        REQUIRE(is_valid_permutation(perm));
        CHECK(relabel(relabel(t, perm), inverse_permutation(perm)) == t);
        CHECK(relabel(t, perm).cardinality() == t.cardinality());
    }
}

TEST_CASE("parser reads the concrete syntax") {
    Formula f = parse_formula("x1");
    CHECK(f.root().is_literal);
    CHECK(f.root().variable == 1);
    CHECK_FALSE(f.root().negated);

    Formula g = parse_formula("(x1 ^ x2)");
    CHECK_FALSE(g.root().is_literal);
    CHECK(g.root().op == BinaryOp::Xor);

    CHECK(parse_formula("((x1 & !x2) | (x2 & !x1))").size() == 7);
    CHECK(parse_formula("  ( x1 &x2 )  ") == parse_formula("(x1 & x2)"));
}

TEST_CASE("parser reports the offending position") {
    CHECK_THROWS_AS(parse_formula("(x1 &"), ParseError);
    CHECK_THROWS_AS(parse_formula("x5"), ParseError);
    CHECK_THROWS_AS(parse_formula("(x1 % x2)"), ParseError);
    CHECK_THROWS_AS(parse_formula("(x1 & x2) extra"), ParseError);
    try {
        parse_formula("(x1 % x2)");
    } catch (const ParseError& e) {
        CHECK(e.position == 4);
    }
}

TEST_CASE("parse then print round-trips random formulas") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        int size = 1 + 2 * static_cast<int>(rng() % 10);  // up to 19
        Formula f = testutil::random_formula(rng, size);
        CHECK(parse_formula(f.print()) == f);
    }
}

TEST_CASE("concept inputs accept masks and formulas") {
    CHECK(parse_concept("0x8888").mask == 0x8888);
    CHECK(parse_concept("0xfff0").mask == 0xFFF0);
    CHECK(parse_concept("(x1 & x2)").mask == 0x8888);
    CHECK_THROWS(parse_concept("0x88"));      // masks must have 4 hex digits
    CHECK_THROWS(parse_concept("0x88880"));
    CHECK(parse_mask("8888") == std::nullopt);  // prefix required
}
