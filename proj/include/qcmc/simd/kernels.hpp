#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "qcmc/simd/kernel_abi.hpp"
#include "qcmc/types.hpp"

namespace qcmc::simd {

/// Per-face derivative coefficients, precomputed once from the source triangles.
///
/// Solving the 2x2 complex system
///   [ w2-w1  conj(w2-w1) ] [ fz    ]   [ z2-z1 ]
///   [ w3-w1  conj(w3-w1) ] [ fzbar ] = [ z3-z1 ]
/// by Cramer's rule gives fz and fzbar as fixed linear combinations of the
/// image edges; those coefficients are stored here.
class FaceBasis {
public:
    FaceBasis() = default;

    // Throws Error(degenerate) naming the first face whose system is singular.
    explicit FaceBasis(std::span<const FaceFrame> frames);

    [[nodiscard]] std::size_t size() const noexcept { return area_.size(); }
    [[nodiscard]] std::span<const double> areas() const noexcept { return area_; }
    [[nodiscard]] BasisView view() const noexcept;

private:
    std::vector<double> a1_re_, a1_im_, a2_re_, a2_im_;
    std::vector<double> b1_re_, b1_im_, b2_re_, b2_im_;
    std::vector<double> area_;
};

// Image edge vectors z2 - z1 and z3 - z1 per face.
struct EdgeImages {
    std::vector<double> e1_re, e1_im, e2_re, e2_im;

    static EdgeImages gather(std::span<const Face> faces, std::span<const Complex> map);
    [[nodiscard]] EdgeView view() const noexcept { return {e1_re.data(), e1_im.data(), e2_re.data(), e2_im.data()}; }
};

// Split storage for a complex field.
struct ComplexArrays {
    std::vector<double> re, im;

    ComplexArrays() = default;
    explicit ComplexArrays(std::size_t n) : re(n), im(n) {}
    static ComplexArrays from(std::span<const Complex> values);

    [[nodiscard]] std::vector<Complex> to_complex() const;
    [[nodiscard]] ComplexIn in() const noexcept { return {re.data(), im.data()}; }
    [[nodiscard]] ComplexOut out() noexcept { return {re.data(), im.data()}; }
};

/// Kernel table used by the library. Picks AVX2 when compiled in and the CPU
/// supports AVX2 and FMA; the environment variable QCMC_KERNELS=scalar forces
/// the scalar reference path.
const KernelTable& active_kernels();

// Every variant runnable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

// Switches the active table by name ("scalar", "avx2"). Returns false if unavailable.
bool select_kernels(std::string_view name);

} // namespace qcmc::simd
