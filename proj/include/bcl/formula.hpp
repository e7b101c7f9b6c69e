#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "bcl/truth_table.hpp"

namespace bcl {

// `and`, `or`, `xor` are alternative tokens in C++, hence the casing.
enum class BinaryOp { And, Or, Xor };

inline constexpr int kNumBinaryOps = 3;

char op_symbol(BinaryOp op);

// Immutable formula AST. Negation lives on the leaves only: the grammar
// expands atoms directly to x_i or !x_i, so there is no unary node and
// size accounting stays literal-count based.
class Formula {
public:
    struct Node {
        bool is_literal;
        // literal
        int variable = 0;  // 1..4
        bool negated = false;
        // binary
        BinaryOp op = BinaryOp::And;
        std::shared_ptr<const Node> left, right;
    };

    static Formula literal(int variable, bool negated);
    static Formula binary(BinaryOp op, Formula left, Formula right);

    const Node& root() const { return *root_; }
    std::shared_ptr<const Node> root_ptr() const { return root_; }

    TruthTable16 eval() const;

    // Number of literals plus number of binary operators; always odd.
    int size() const;

    // Structural equality.
    bool operator==(const Formula& other) const;

    // Concrete syntax: `x1..x4`, `!` on atoms, `&`, `|`, `^`, fully
    // parenthesized binaries, e.g. "((x1 & !x2) | (x2 & !x1))".
    std::string print() const;

private:
    explicit Formula(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
    std::shared_ptr<const Node> root_;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& message, std::size_t position);
    std::size_t position;  // 0-based offset into the input
};

// Inverse of Formula::print on canonical text; accepts extra whitespace.
Formula parse_formula(const std::string& text);

// Concept inputs accept either a 4-hex-digit mask ("0x8888") or a
// formula in the concrete syntax, evaluated to its table.
TruthTable16 parse_concept(const std::string& text);

}  // namespace bcl
