#include "bcl/formula.hpp"

#include <sstream>

namespace bcl {

char op_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::And: return '&';
        case BinaryOp::Or: return '|';
        case BinaryOp::Xor: return '^';
    }
    throw std::logic_error("bad BinaryOp");
}

Formula Formula::literal(int variable, bool negated) {
    if (variable < 1 || variable > 4) throw std::invalid_argument("variable index must be 1..4");
    auto node = std::make_shared<Node>();
    node->is_literal = true;
    node->variable = variable;
    node->negated = negated;
    return Formula(std::move(node));
}

Formula Formula::binary(BinaryOp op, Formula left, Formula right) {
    auto node = std::make_shared<Node>();
    node->is_literal = false;
    node->op = op;
    node->left = left.root_ptr();
    node->right = right.root_ptr();
    return Formula(std::move(node));
}

namespace {

TruthTable16 eval_node(const Formula::Node& node) {
    if (node.is_literal) {
        TruthTable16 t = variable_table(node.variable);
        return node.negated ? t.complement() : t;
    }
    TruthTable16 l = eval_node(*node.left);
    TruthTable16 r = eval_node(*node.right);
    switch (node.op) {
        case BinaryOp::And: return TruthTable16{static_cast<std::uint16_t>(l.mask & r.mask)};
        case BinaryOp::Or: return TruthTable16{static_cast<std::uint16_t>(l.mask | r.mask)};
        case BinaryOp::Xor: return TruthTable16{static_cast<std::uint16_t>(l.mask ^ r.mask)};
    }
    throw std::logic_error("bad BinaryOp");
}

int size_node(const Formula::Node& node) {
    if (node.is_literal) return 1;
    return 1 + size_node(*node.left) + size_node(*node.right);
}

bool equal_nodes(const Formula::Node& a, const Formula::Node& b) {
    if (a.is_literal != b.is_literal) return false;
    if (a.is_literal) return a.variable == b.variable && a.negated == b.negated;
    return a.op == b.op && equal_nodes(*a.left, *b.left) && equal_nodes(*a.right, *b.right);
}

void print_node(const Formula::Node& node, std::string& out) {
    if (node.is_literal) {
        if (node.negated) out += '!';
        out += 'x';
        out += static_cast<char>('0' + node.variable);
        return;
    }
    out += '(';
    print_node(*node.left, out);
    out += ' ';
    out += op_symbol(node.op);
    out += ' ';
    print_node(*node.right, out);
    out += ')';
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    Formula parse() {
        Formula f = parse_formula();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input after formula");
        return f;
    }

private:
    Formula parse_formula() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input, expected formula");
        if (text_[pos_] == '(') {
            ++pos_;
            Formula left = parse_formula();
            skip_ws();
            BinaryOp op = parse_op();
            Formula right = parse_formula();
            skip_ws();
            expect(')');
            return Formula::binary(op, std::move(left), std::move(right));
        }
        return parse_literal();
    }

    Formula parse_literal() {
        bool negated = false;
        if (text_[pos_] == '!') {
            negated = true;
            ++pos_;
            skip_ws();
        }
        if (pos_ >= text_.size() || text_[pos_] != 'x') fail("expected literal 'x1'..'x4'");
        ++pos_;
        if (pos_ >= text_.size() || text_[pos_] < '1' || text_[pos_] > '4')
            fail("expected variable index 1..4 after 'x'");
        int var = text_[pos_] - '0';
        ++pos_;
        return Formula::literal(var, negated);
    }

    BinaryOp parse_op() {
        if (pos_ >= text_.size()) fail("unexpected end of input, expected operator");
        char c = text_[pos_];
        ++pos_;
        switch (c) {
            case '&': return BinaryOp::And;
            case '|': return BinaryOp::Or;
            case '^': return BinaryOp::Xor;
        }
        --pos_;
        fail("expected operator '&', '|' or '^'");
    }

    void expect(char c) {
        if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }

    [[noreturn]] void fail(const std::string& message) { throw ParseError(message, pos_); }

    const std::string& text_;
    std::size_t pos_ = 0;
};

}  // namespace

TruthTable16 Formula::eval() const { return eval_node(*root_); }

int Formula::size() const { return size_node(*root_); }

bool Formula::operator==(const Formula& other) const { return equal_nodes(*root_, *other.root_); }

std::string Formula::print() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

ParseError::ParseError(const std::string& message, std::size_t pos)
    : std::runtime_error(message + " (at position " + std::to_string(pos) + ")"), position(pos) {}

Formula parse_formula(const std::string& text) { return Parser(text).parse(); }

TruthTable16 parse_concept(const std::string& text) {
    if (auto mask = parse_mask(text)) return *mask;
    return parse_formula(text).eval();
}

}  // namespace bcl
