#include "bcl/truth_table.hpp"

#include <cctype>
#include <cstdio>

namespace bcl {

bool is_valid_permutation(const VariablePermutation& perm) {
    std::array<bool, 4> seen = {};
    for (int v : perm) {
        if (v < 1 || v > 4 || seen[static_cast<std::size_t>(v - 1)]) return false;
        seen[static_cast<std::size_t>(v - 1)] = true;
    }
    return true;
}

VariablePermutation inverse_permutation(const VariablePermutation& perm) {
    VariablePermutation inv{};
    for (int i = 1; i <= 4; ++i) inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(i - 1)] - 1)] = i;
    return inv;
}

TruthTable16 relabel(TruthTable16 c, const VariablePermutation& perm) {
    // Valuation b maps to b' with bit(perm[i]-1) of b' = bit(i-1) of b.
    std::uint16_t out = 0;
    for (int b = 0; b < kNumValuations; ++b) {
        if (!(c.mask >> b & 1)) continue;
        int bp = 0;
        for (int i = 0; i < 4; ++i)
            if (b >> i & 1) bp |= 1 << (perm[static_cast<std::size_t>(i)] - 1);
        out |= static_cast<std::uint16_t>(1u << bp);
    }
    return TruthTable16{out};
}

std::optional<TruthTable16> parse_mask(const std::string& text) {
    if (text.size() != 6 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) return std::nullopt;
    std::uint16_t value = 0;
    for (std::size_t i = 2; i < 6; ++i) {
        char ch = text[i];
        int digit;
        if (ch >= '0' && ch <= '9')
            digit = ch - '0';
        else if (ch >= 'a' && ch <= 'f')
            digit = ch - 'a' + 10;
        else if (ch >= 'A' && ch <= 'F')
            digit = ch - 'A' + 10;
        else
            return std::nullopt;
        value = static_cast<std::uint16_t>(value << 4 | digit);
    }
    return TruthTable16{value};
}

std::string format_mask(TruthTable16 c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%04X", c.mask);
    return buf;
}

}  // namespace bcl
