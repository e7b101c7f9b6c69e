#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>

namespace bcl {

// A concept over four Boolean variables, stored as a 16-bit mask.
// Bit b is set iff the valuation with index b satisfies the concept,
// where index(v) = v(x1)*1 + v(x2)*2 + v(x3)*4 + v(x4)*8.
// Under this convention the variable tables are the classic constants
// 0xAAAA, 0xCCCC, 0xF0F0, 0xFF00.
struct TruthTable16 {
    std::uint16_t mask = 0;

    constexpr bool operator==(const TruthTable16&) const = default;

    constexpr TruthTable16 complement() const {
        return TruthTable16{static_cast<std::uint16_t>(mask ^ 0xFFFFu)};
    }
    int cardinality() const { return std::popcount(mask); }
};

inline constexpr int kNumVariables = 4;
inline constexpr int kNumValuations = 16;
inline constexpr std::size_t kNumTables = 1u << kNumValuations;  // 65536

// Table of x_i for i in 1..4.
constexpr TruthTable16 variable_table(int var) {
    constexpr std::array<std::uint16_t, 4> masks = {0xAAAA, 0xCCCC, 0xF0F0, 0xFF00};
    return TruthTable16{masks[static_cast<std::size_t>(var - 1)]};
}

// min(#C, #complement(C)); ranges over 0..8.
inline int concept_cardinality_term(TruthTable16 c) {
    int n = c.cardinality();
    return n <= kNumValuations - n ? n : kNumValuations - n;
}

// A bijection of {1,2,3,4}; perm[i-1] is the variable that takes over
// the role of x_i.
using VariablePermutation = std::array<int, 4>;

inline constexpr VariablePermutation kIdentityPermutation = {1, 2, 3, 4};

bool is_valid_permutation(const VariablePermutation& perm);
VariablePermutation inverse_permutation(const VariablePermutation& perm);

// Permutes variable roles: if C = eval(phi) then
// relabel(C, perm) = eval(phi with every x_i replaced by x_perm[i-1]).
TruthTable16 relabel(TruthTable16 c, const VariablePermutation& perm);

// "0x8888" (4 hex digits, case-insensitive). Returns nullopt on any
// other shape; formula text is handled by the formula parser.
std::optional<TruthTable16> parse_mask(const std::string& text);

std::string format_mask(TruthTable16 c);

}  // namespace bcl
