// Compiled with -mavx2 -mfma. Only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "qcmc/simd/kernel_abi.hpp"

namespace qcmc::simd {
namespace {

struct Vc {
    __m256d re;
    __m256d im;
};

inline Vc load(const double* re, const double* im, std::size_t j) {
    return {_mm256_loadu_pd(re + j), _mm256_loadu_pd(im + j)};
}

// a * x + b * y for complex lanes.
inline Vc mul_add2(Vc a, Vc x, Vc b, Vc y) {
    __m256d re = _mm256_mul_pd(a.re, x.re);
    re = _mm256_fnmadd_pd(a.im, x.im, re);
    re = _mm256_fmadd_pd(b.re, y.re, re);
    re = _mm256_fnmadd_pd(b.im, y.im, re);
    __m256d im = _mm256_mul_pd(a.re, x.im);
    im = _mm256_fmadd_pd(a.im, x.re, im);
    im = _mm256_fmadd_pd(b.re, y.im, im);
    im = _mm256_fmadd_pd(b.im, y.re, im);
    return {re, im};
}

inline BasisView advance(const BasisView& b, std::size_t j) {
    return {b.count - j, b.a1_re + j, b.a1_im + j, b.a2_re + j, b.a2_im + j, b.b1_re + j,
            b.b1_im + j,  b.b2_re + j, b.b2_im + j, b.area + j};
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void derivatives_avx2(const BasisView& b, const EdgeView& e, ComplexOut fz, ComplexOut fzbar) {
    const std::size_t n = b.count;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const Vc e1 = load(e.e1_re, e.e1_im, j);
        const Vc e2 = load(e.e2_re, e.e2_im, j);
        const Vc d = mul_add2(load(b.a1_re, b.a1_im, j), e1, load(b.a2_re, b.a2_im, j), e2);
        const Vc db = mul_add2(load(b.b1_re, b.b1_im, j), e1, load(b.b2_re, b.b2_im, j), e2);
        _mm256_storeu_pd(fz.re + j, d.re);
        _mm256_storeu_pd(fz.im + j, d.im);
        _mm256_storeu_pd(fzbar.re + j, db.re);
        _mm256_storeu_pd(fzbar.im + j, db.im);
    }
    if (j < n) {
        const BasisView tail = advance(b, j);
        const EdgeView te{e.e1_re + j, e.e1_im + j, e.e2_re + j, e.e2_im + j};
        scalar_kernel_table().derivatives(tail, te, {fz.re + j, fz.im + j}, {fzbar.re + j, fzbar.im + j});
    }
}

void ratio_avx2(std::size_t n, ComplexIn num, ComplexIn den, ComplexOut out) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const Vc a = load(num.re, num.im, j);
        const Vc d = load(den.re, den.im, j);
        const __m256d inv = _mm256_div_pd(one, _mm256_fmadd_pd(d.re, d.re, _mm256_mul_pd(d.im, d.im)));
        const __m256d re = _mm256_fmadd_pd(a.re, d.re, _mm256_mul_pd(a.im, d.im));
        const __m256d im = _mm256_fmsub_pd(a.im, d.re, _mm256_mul_pd(a.re, d.im));
        _mm256_storeu_pd(out.re + j, _mm256_mul_pd(re, inv));
        _mm256_storeu_pd(out.im + j, _mm256_mul_pd(im, inv));
    }
    if (j < n) {
        scalar_kernel_table().ratio(n - j, {num.re + j, num.im + j}, {den.re + j, den.im + j},
                                    {out.re + j, out.im + j});
    }
}

double residual_energy_avx2(const BasisView& b, const EdgeView& e, ComplexIn mu) {
    const std::size_t n = b.count;
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const Vc e1 = load(e.e1_re, e.e1_im, j);
        const Vc e2 = load(e.e2_re, e.e2_im, j);
        const Vc d = mul_add2(load(b.a1_re, b.a1_im, j), e1, load(b.a2_re, b.a2_im, j), e2);
        const Vc db = mul_add2(load(b.b1_re, b.b1_im, j), e1, load(b.b2_re, b.b2_im, j), e2);
        const Vc m = load(mu.re, mu.im, j);
        // r = fzbar - mu * fz
        __m256d rr = _mm256_fnmadd_pd(m.re, d.re, db.re);
        rr = _mm256_fmadd_pd(m.im, d.im, rr);
        __m256d ri = _mm256_fnmadd_pd(m.re, d.im, db.im);
        ri = _mm256_fnmadd_pd(m.im, d.re, ri);
        const __m256d sq = _mm256_fmadd_pd(rr, rr, _mm256_mul_pd(ri, ri));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(b.area + j), sq, acc);
    }
    double sum = hsum(acc);
    if (j < n) {
        const BasisView tail = advance(b, j);
        const EdgeView te{e.e1_re + j, e.e1_im + j, e.e2_re + j, e.e2_im + j};
        sum += scalar_kernel_table().residual_energy(tail, te, {mu.re + j, mu.im + j});
    }
    return sum;
}

double weighted_abs_diff_avx2(std::size_t n, const double* w, ComplexIn a, ComplexIn b) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d dr = _mm256_sub_pd(_mm256_loadu_pd(a.re + j), _mm256_loadu_pd(b.re + j));
        const __m256d di = _mm256_sub_pd(_mm256_loadu_pd(a.im + j), _mm256_loadu_pd(b.im + j));
        const __m256d mag = _mm256_sqrt_pd(_mm256_fmadd_pd(dr, dr, _mm256_mul_pd(di, di)));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), mag, acc);
    }
    double sum = hsum(acc);
    if (j < n) {
        sum += scalar_kernel_table().weighted_abs_diff(n - j, w + j, {a.re + j, a.im + j}, {b.re + j, b.im + j});
    }
    return sum;
}

constexpr KernelTable kAvx2{
    "avx2", derivatives_avx2, ratio_avx2, residual_energy_avx2, weighted_abs_diff_avx2,
};

} // namespace

const KernelTable* avx2_kernel_table() noexcept { return &kAvx2; }

} // namespace qcmc::simd
