#include "bcl/grammar.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace bcl {

namespace {

const std::array<const char*, kRuleSlots> kRuleNames = {
    "start", "and", "or", "xor", "atom",
    "x1", "not_x1", "x2", "not_x2", "x3", "not_x3", "x4", "not_x4"};

std::size_t slot(RuleId id) { return static_cast<std::size_t>(static_cast<int>(id)); }

}  // namespace

std::string to_string(Language lang) { return lang == Language::P ? "p" : "pxor"; }

std::optional<Language> language_from_string(const std::string& text) {
    if (text == "p") return Language::P;
    if (text == "pxor") return Language::PXor;
    return std::nullopt;
}

std::string to_string(RuleId id) { return kRuleNames[slot(id)]; }

std::optional<RuleId> rule_from_string(const std::string& text) {
    for (int i = 0; i < kRuleSlots; ++i)
        if (text == kRuleNames[static_cast<std::size_t>(i)]) return static_cast<RuleId>(i);
    return std::nullopt;
}

Nonterminal rule_lhs(RuleId id) {
    switch (id) {
        case RuleId::Start: return Nonterminal::Start;
        case RuleId::And:
        case RuleId::Or:
        case RuleId::Xor:
        case RuleId::Atom: return Nonterminal::Bool;
        default: return Nonterminal::Atom;
    }
}

std::string rule_rhs_description(RuleId id) {
    switch (id) {
        case RuleId::Start: return "BOOL";
        case RuleId::And: return "(BOOL & BOOL)";
        case RuleId::Or: return "(BOOL | BOOL)";
        case RuleId::Xor: return "(BOOL ^ BOOL)";
        case RuleId::Atom: return "ATOM";
        default: {
            int i = static_cast<int>(id) - static_cast<int>(RuleId::X1);
            std::string s = (i % 2 == 1) ? "!x" : "x";
            s += static_cast<char>('1' + i / 2);
            return s;
        }
    }
}

const std::vector<RuleId>& rules_of(Language lang) {
    static const std::vector<RuleId> p_rules = [] {
        std::vector<RuleId> r;
        for (int i = 0; i < kRuleSlots; ++i)
            if (static_cast<RuleId>(i) != RuleId::Xor) r.push_back(static_cast<RuleId>(i));
        return r;
    }();
    static const std::vector<RuleId> pxor_rules = [] {
        std::vector<RuleId> r;
        for (int i = 0; i < kRuleSlots; ++i) r.push_back(static_cast<RuleId>(i));
        return r;
    }();
    return lang == Language::P ? p_rules : pxor_rules;
}

bool language_has_rule(Language lang, RuleId id) {
    return id != RuleId::Xor || lang == Language::PXor;
}

RuleId op_rule(BinaryOp op) {
    switch (op) {
        case BinaryOp::And: return RuleId::And;
        case BinaryOp::Or: return RuleId::Or;
        case BinaryOp::Xor: return RuleId::Xor;
    }
    throw std::logic_error("bad BinaryOp");
}

RuleId literal_rule(int variable, bool negated) {
    return static_cast<RuleId>(static_cast<int>(RuleId::X1) + 2 * (variable - 1) + (negated ? 1 : 0));
}

PcfgState::PcfgState(Language lang, std::array<double, kRuleSlots> params, int trial)
    : language_(lang), params_(params), trial_(trial) {
    for (RuleId id : rules_of(lang)) {
        double v = params_[slot(id)];
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("pseudo-count for rule '" + to_string(id) + "' must be positive and finite");
    }
    if (lang == Language::P) params_[slot(RuleId::Xor)] = 0.0;  // unused slot
}

double PcfgState::param(RuleId id) const {
    if (!language_has_rule(language_, id))
        throw std::invalid_argument("rule '" + to_string(id) + "' is not part of language " + to_string(language_));
    return params_[slot(id)];
}

double PcfgState::rule_probability(RuleId id) const {
    double own = param(id);
    Nonterminal lhs = rule_lhs(id);
    double total = 0.0;
    for (RuleId r : rules_of(language_))
        if (rule_lhs(r) == lhs) total += params_[slot(r)];
    return own / total;
}

PcfgState PcfgState::with_added(const std::array<double, kRuleSlots>& delta) const {
    std::array<double, kRuleSlots> next = params_;
    for (RuleId id : rules_of(language_)) next[slot(id)] += delta[slot(id)];
    return PcfgState(language_, next, trial_ + 1);
}

std::uint64_t PcfgState::param_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
        for (int i = 0; i < 8; ++i) {
            h ^= (x >> (8 * i)) & 0xFF;
            h *= 1099511628211ull;
        }
    };
    mix(language_ == Language::P ? 0 : 1);
    for (RuleId id : rules_of(language_)) {
        std::uint64_t bits;
        double v = params_[slot(id)];
        static_assert(sizeof bits == sizeof v);
        std::memcpy(&bits, &v, sizeof bits);
        mix(bits);
    }
    return h;
}

PcfgState default_initial_state(Language lang, std::optional<double> xor_prior) {
    std::array<double, kRuleSlots> params;
    params.fill(1.0);
    if (lang == Language::P) {
        if (xor_prior.has_value())
            throw std::invalid_argument("language p has no xor rule to assign a prior to");
    } else {
        double prior = xor_prior.value_or(kDefaultXorPrior);
        if (!(prior > 0.0)) throw std::invalid_argument("xor prior must be positive");
        params[slot(RuleId::Xor)] = prior;
    }
    return PcfgState(lang, params, 0);
}

namespace {

void count_node(const Formula::Node& node, RuleCounts& counts) {
    if (node.is_literal) {
        ++counts[static_cast<std::size_t>(static_cast<int>(RuleId::Atom))];
        ++counts[static_cast<std::size_t>(static_cast<int>(literal_rule(node.variable, node.negated)))];
        return;
    }
    ++counts[static_cast<std::size_t>(static_cast<int>(op_rule(node.op)))];
    count_node(*node.left, counts);
    count_node(*node.right, counts);
}

}  // namespace

RuleCounts count_rule_uses(const Formula& formula) {
    RuleCounts counts{};
    counts[static_cast<std::size_t>(static_cast<int>(RuleId::Start))] = 1;
    count_node(formula.root(), counts);
    return counts;
}

double prior_probability(const Formula& formula, const PcfgState& state) {
    RuleCounts counts = count_rule_uses(formula);
    if (state.language() == Language::P && counts[slot(RuleId::Xor)] > 0)
        throw std::invalid_argument("formula uses '^' which is not in language p");
    double p = 1.0;
    for (RuleId id : rules_of(state.language())) {
        int uses = counts[slot(id)];
        if (uses == 0) continue;
        p *= std::pow(state.rule_probability(id), uses);
    }
    return p;
}

double marginal_prior_probability(const Formula& formula, const PcfgState& state) {
    RuleCounts counts = count_rule_uses(formula);
    if (state.language() == Language::P && counts[slot(RuleId::Xor)] > 0)
        throw std::invalid_argument("formula uses '^' which is not in language p");
    // Per lhs group: B(D + M) / B(D) with B the multivariate beta.
    double log_p = 0.0;
    for (Nonterminal lhs : {Nonterminal::Start, Nonterminal::Bool, Nonterminal::Atom}) {
        double d_total = 0.0, m_total = 0.0;
        for (RuleId id : rules_of(state.language())) {
            if (rule_lhs(id) != lhs) continue;
            double d = state.param(id);
            int m = counts[slot(id)];
            d_total += d;
            m_total += m;
            if (m > 0) log_p += std::lgamma(d + m) - std::lgamma(d);
        }
        if (m_total > 0) log_p += std::lgamma(d_total) - std::lgamma(d_total + m_total);
    }
    return std::exp(log_p);
}

std::string state_to_json(const PcfgState& state) {
    nlohmann::json j;
    j["language"] = to_string(state.language());
    nlohmann::json rules = nlohmann::json::array();
    for (RuleId id : rules_of(state.language())) {
        nlohmann::json r;
        r["id"] = to_string(id);
        switch (rule_lhs(id)) {
            case Nonterminal::Start: r["lhs"] = "START"; break;
            case Nonterminal::Bool: r["lhs"] = "BOOL"; break;
            case Nonterminal::Atom: r["lhs"] = "ATOM"; break;
        }
        r["rhs"] = rule_rhs_description(id);
        r["D0"] = state.param(id);
        rules.push_back(r);
    }
    j["rules"] = rules;
    return j.dump(2) + "\n";
}

PcfgState state_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    auto lang = language_from_string(j.at("language").get<std::string>());
    if (!lang) throw std::invalid_argument("unknown language tag in grammar config");
    std::array<double, kRuleSlots> params;
    params.fill(0.0);
    std::array<bool, kRuleSlots> present{};
    for (const auto& r : j.at("rules")) {
        auto id = rule_from_string(r.at("id").get<std::string>());
        if (!id) throw std::invalid_argument("unknown rule id '" + r.at("id").get<std::string>() + "'");
        if (!language_has_rule(*lang, *id))
            throw std::invalid_argument("rule '" + to_string(*id) + "' does not belong to language " + to_string(*lang));
        if (present[static_cast<std::size_t>(static_cast<int>(*id))])
            throw std::invalid_argument("duplicate rule id '" + to_string(*id) + "'");
        present[static_cast<std::size_t>(static_cast<int>(*id))] = true;
        params[static_cast<std::size_t>(static_cast<int>(*id))] = r.at("D0").get<double>();
    }
    for (RuleId id : rules_of(*lang))
        if (!present[static_cast<std::size_t>(static_cast<int>(id))])
            throw std::invalid_argument("grammar config is missing rule '" + to_string(id) + "'");
    if (*lang == Language::P) params[static_cast<std::size_t>(static_cast<int>(RuleId::Xor))] = 0.0;
    return PcfgState(*lang, params, 0);
}

PcfgState load_state_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open grammar config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return state_from_json(buf.str());
}

void save_state_file(const PcfgState& state, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write grammar config: " + path);
    out << state_to_json(state);
}

}  // namespace bcl
