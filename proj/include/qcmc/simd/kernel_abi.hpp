#pragma once

// Plain-data views shared by every kernel variant. Kept free of standard-library
// containers so the AVX2 translation unit never instantiates inline library code.

#include <cstddef>

namespace qcmc::simd {

/// Per-face linear maps from image edge vectors to complex derivatives:
///   fz    = a1 * e1 + a2 * e2
///   fzbar = b1 * e1 + b2 * e2
/// with e1 = z2 - z1 and e2 = z3 - z1. Structure of arrays, one entry per face.
struct BasisView {
    std::size_t count;
    const double* a1_re;
    const double* a1_im;
    const double* a2_re;
    const double* a2_im;
    const double* b1_re;
    const double* b1_im;
    const double* b2_re;
    const double* b2_im;
    const double* area;
};

struct EdgeView {
    const double* e1_re;
    const double* e1_im;
    const double* e2_re;
    const double* e2_im;
};

struct ComplexIn {
    const double* re;
    const double* im;
};

struct ComplexOut {
    double* re;
    double* im;
};

struct KernelTable {
    const char* name;

    // fz and fzbar per face.
    void (*derivatives)(const BasisView& basis, const EdgeView& edges, ComplexOut fz, ComplexOut fzbar);

    // out = num / den elementwise. Entries with den == 0 produce non-finite values.
    void (*ratio)(std::size_t count, ComplexIn num, ComplexIn den, ComplexOut out);

    // sum over faces of area * |fzbar - mu * fz|^2.
    double (*residual_energy)(const BasisView& basis, const EdgeView& edges, ComplexIn mu);

    // sum over entries of weight * |a - b|.
    double (*weighted_abs_diff)(std::size_t count, const double* weight, ComplexIn a, ComplexIn b);
};

const KernelTable& scalar_kernel_table() noexcept;
// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernel_table() noexcept;

} // namespace qcmc::simd
