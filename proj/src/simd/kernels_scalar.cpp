#include <cmath>

#include "qcmc/simd/kernel_abi.hpp"

namespace qcmc::simd {
namespace {

void derivatives_scalar(const BasisView& b, const EdgeView& e, ComplexOut fz, ComplexOut fzbar) {
    for (std::size_t j = 0; j < b.count; ++j) {
        const double e1r = e.e1_re[j];
        const double e1i = e.e1_im[j];
        const double e2r = e.e2_re[j];
        const double e2i = e.e2_im[j];
        fz.re[j] = b.a1_re[j] * e1r - b.a1_im[j] * e1i + b.a2_re[j] * e2r - b.a2_im[j] * e2i;
        fz.im[j] = b.a1_re[j] * e1i + b.a1_im[j] * e1r + b.a2_re[j] * e2i + b.a2_im[j] * e2r;
        fzbar.re[j] = b.b1_re[j] * e1r - b.b1_im[j] * e1i + b.b2_re[j] * e2r - b.b2_im[j] * e2i;
        fzbar.im[j] = b.b1_re[j] * e1i + b.b1_im[j] * e1r + b.b2_re[j] * e2i + b.b2_im[j] * e2r;
    }
}

void ratio_scalar(std::size_t n, ComplexIn num, ComplexIn den, ComplexOut out) {
    for (std::size_t j = 0; j < n; ++j) {
        const double dr = den.re[j];
        const double di = den.im[j];
        const double inv = 1.0 / (dr * dr + di * di);
        out.re[j] = (num.re[j] * dr + num.im[j] * di) * inv;
        out.im[j] = (num.im[j] * dr - num.re[j] * di) * inv;
    }
}

double residual_energy_scalar(const BasisView& b, const EdgeView& e, ComplexIn mu) {
    double sum = 0.0;
    for (std::size_t j = 0; j < b.count; ++j) {
        const double e1r = e.e1_re[j];
        const double e1i = e.e1_im[j];
        const double e2r = e.e2_re[j];
        const double e2i = e.e2_im[j];
        const double fzr = b.a1_re[j] * e1r - b.a1_im[j] * e1i + b.a2_re[j] * e2r - b.a2_im[j] * e2i;
        const double fzi = b.a1_re[j] * e1i + b.a1_im[j] * e1r + b.a2_re[j] * e2i + b.a2_im[j] * e2r;
        const double fbr = b.b1_re[j] * e1r - b.b1_im[j] * e1i + b.b2_re[j] * e2r - b.b2_im[j] * e2i;
        const double fbi = b.b1_re[j] * e1i + b.b1_im[j] * e1r + b.b2_re[j] * e2i + b.b2_im[j] * e2r;
        const double rr = fbr - (mu.re[j] * fzr - mu.im[j] * fzi);
        const double ri = fbi - (mu.re[j] * fzi + mu.im[j] * fzr);
        sum += b.area[j] * (rr * rr + ri * ri);
    }
    return sum;
}

double weighted_abs_diff_scalar(std::size_t n, const double* w, ComplexIn a, ComplexIn b) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double dr = a.re[j] - b.re[j];
        const double di = a.im[j] - b.im[j];
        sum += w[j] * std::sqrt(dr * dr + di * di);
    }
    return sum;
}

constexpr KernelTable kScalar{
    "scalar", derivatives_scalar, ratio_scalar, residual_energy_scalar, weighted_abs_diff_scalar,
};

} // namespace

const KernelTable& scalar_kernel_table() noexcept { return kScalar; }

} // namespace qcmc::simd
