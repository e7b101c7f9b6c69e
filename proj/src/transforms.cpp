#include "bcl/transforms.hpp"

#include <stdexcept>

namespace bcl {

namespace {

void check_sizes(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("convolution inputs must have equal length");
    if (a.empty() || (a.size() & (a.size() - 1)) != 0)
        throw std::invalid_argument("convolution length must be a power of two");
}

}  // namespace

std::vector<double> convolve(std::span<const double> a, std::span<const double> b, BinaryOp op) {
    check_sizes(a, b);
    std::vector<double> fa(a.begin(), a.end());
    std::vector<double> fb(b.begin(), b.end());
    op_transform(std::span<double>(fa), op);
    op_transform(std::span<double>(fb), op);
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
    op_inverse_transform(std::span<double>(fa), op);
    return fa;
}

std::vector<double> convolve_naive(std::span<const double> a, std::span<const double> b, BinaryOp op) {
    check_sizes(a, b);
    std::vector<double> out(a.size(), 0.0);
    for (std::size_t t1 = 0; t1 < a.size(); ++t1) {
        double av = a[t1];
        if (av == 0.0) continue;
        switch (op) {
            case BinaryOp::And:
                for (std::size_t t2 = 0; t2 < b.size(); ++t2) out[t1 & t2] += av * b[t2];
                break;
            case BinaryOp::Or:
                for (std::size_t t2 = 0; t2 < b.size(); ++t2) out[t1 | t2] += av * b[t2];
                break;
            case BinaryOp::Xor:
                for (std::size_t t2 = 0; t2 < b.size(); ++t2) out[t1 ^ t2] += av * b[t2];
                break;
        }
    }
    return out;
}

}  // namespace bcl
