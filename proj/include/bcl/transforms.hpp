#pragma once

#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include "bcl/formula.hpp"

namespace bcl {

// Modular integers over a Mersenne prime 2^Bits - 1.  Used to run the
// formula-count recurrence exactly: a per-table count is zero iff it is
// zero modulo enough primes, which gives a noise-free reachability test
// that double arithmetic cannot provide.
template <int Bits>
struct MersenneInt {
    static_assert(Bits == 31 || Bits == 61);
    static constexpr std::uint64_t modulus = (std::uint64_t{1} << Bits) - 1;

    std::uint64_t value = 0;

    static MersenneInt from(std::uint64_t x) { return MersenneInt{x % modulus}; }

    friend MersenneInt operator+(MersenneInt a, MersenneInt b) {
        std::uint64_t s = a.value + b.value;
        if (s >= modulus) s -= modulus;
        return MersenneInt{s};
    }
    friend MersenneInt operator-(MersenneInt a, MersenneInt b) {
        std::uint64_t s = a.value + modulus - b.value;
        if (s >= modulus) s -= modulus;
        return MersenneInt{s};
    }
    friend MersenneInt operator*(MersenneInt a, MersenneInt b) {
        unsigned __int128 p = static_cast<unsigned __int128>(a.value) * b.value;
        std::uint64_t folded = static_cast<std::uint64_t>(p & modulus) + static_cast<std::uint64_t>(p >> Bits);
        if (folded >= modulus) folded -= modulus;
        return MersenneInt{folded};
    }
    MersenneInt& operator+=(MersenneInt o) { return *this = *this + o; }
    MersenneInt& operator-=(MersenneInt o) { return *this = *this - o; }
    MersenneInt& operator*=(MersenneInt o) { return *this = *this * o; }
    bool operator==(const MersenneInt&) const = default;

    static MersenneInt pow(MersenneInt base, std::uint64_t exp) {
        MersenneInt r{1};
        while (exp) {
            if (exp & 1) r *= base;
            base *= base;
            exp >>= 1;
        }
        return r;
    }
    // 2^Bits == 1 (mod modulus), so inverses of powers of two are powers of two.
    static MersenneInt inverse_pow2(int k) { return pow(MersenneInt{2}, static_cast<std::uint64_t>(Bits - k % Bits)); }
};

// In-place fast transforms over arrays indexed by 16-bit truth tables.
// subset zeta/moebius diagonalize OR-convolution, the superset pair
// diagonalizes AND-convolution, and Walsh-Hadamard diagonalizes
// XOR-convolution.  All are O(N log N) with N = 65536.

template <typename T>
void zeta_subset(std::span<T> f) {
    for (std::size_t bit = 1; bit < f.size(); bit <<= 1) {
        for (std::size_t s = 0; s < f.size(); ++s)
            if (s & bit) f[s] += f[s ^ bit];
    }
}

template <typename T>
void moebius_subset(std::span<T> f) {
    for (std::size_t bit = 1; bit < f.size(); bit <<= 1) {
        for (std::size_t s = 0; s < f.size(); ++s)
            if (s & bit) f[s] -= f[s ^ bit];
    }
}

template <typename T>
void zeta_superset(std::span<T> f) {
    for (std::size_t bit = 1; bit < f.size(); bit <<= 1) {
        for (std::size_t s = 0; s < f.size(); ++s)
            if (!(s & bit)) f[s] += f[s | bit];
    }
}

template <typename T>
void moebius_superset(std::span<T> f) {
    for (std::size_t bit = 1; bit < f.size(); bit <<= 1) {
        for (std::size_t s = 0; s < f.size(); ++s)
            if (!(s & bit)) f[s] -= f[s | bit];
    }
}

template <typename T>
void walsh_hadamard(std::span<T> f) {
    for (std::size_t half = 1; half < f.size(); half <<= 1) {
        for (std::size_t block = 0; block < f.size(); block += 2 * half) {
            for (std::size_t i = block; i < block + half; ++i) {
                T a = f[i], b = f[i + half];
                f[i] = a + b;
                f[i + half] = a - b;
            }
        }
    }
}

// Forward transform for the given operator (applied to both factors and
// to the accumulated pointwise products).
template <typename T>
void op_transform(std::span<T> f, BinaryOp op) {
    switch (op) {
        case BinaryOp::Or: zeta_subset(f); break;
        case BinaryOp::And: zeta_superset(f); break;
        case BinaryOp::Xor: walsh_hadamard(f); break;
    }
}

template <typename T>
void op_inverse_transform(std::span<T> f, BinaryOp op) {
    switch (op) {
        case BinaryOp::Or: moebius_subset(f); break;
        case BinaryOp::And: moebius_superset(f); break;
        case BinaryOp::Xor: {
            walsh_hadamard(f);
            if constexpr (std::is_floating_point_v<T>) {
                T scale = T(1) / static_cast<T>(f.size());
                for (auto& x : f) x *= scale;
            } else {
                int k = 0;
                while ((std::size_t{1} << k) < f.size()) ++k;
                T scale = T::inverse_pow2(k);
                for (auto& x : f) x *= scale;
            }
            break;
        }
    }
}

// c[t] = sum over t1 op t2 == t of a[t1]*b[t2], via the fast transforms.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b, BinaryOp op);

// Same contract, computed by the direct pairwise loop (zero entries of
// `a` are skipped, which changes nothing for nonnegative inputs).
// Quadratic; used as the transform oracle and in benchmarks.
std::vector<double> convolve_naive(std::span<const double> a, std::span<const double> b, BinaryOp op);

}  // namespace bcl
