#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include "qcmc/error.hpp"
#include "qcmc/simd/kernels.hpp"

namespace qcmc::simd {

#ifndef QCMC_HAVE_AVX2
const KernelTable* avx2_kernel_table() noexcept { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* runnable_avx2() noexcept {
    static const KernelTable* table = cpu_has_avx2() ? avx2_kernel_table() : nullptr;
    return table;
}

const KernelTable* initial_table() noexcept {
    const char* env = std::getenv("QCMC_KERNELS");
    if (env != nullptr && std::string(env) == "scalar") return &scalar_kernel_table();
    if (const auto* avx = runnable_avx2()) return avx;
    return &scalar_kernel_table();
}

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{initial_table()};
    return slot;
}

} // namespace

const KernelTable& active_kernels() { return *active_slot().load(std::memory_order_relaxed); }

std::vector<const KernelTable*> available_kernels() {
    std::vector<const KernelTable*> out{&scalar_kernel_table()};
    if (const auto* avx = runnable_avx2()) out.push_back(avx);
    return out;
}

bool select_kernels(std::string_view name) {
    for (const auto* table : available_kernels()) {
        if (name == table->name) {
            active_slot().store(table, std::memory_order_relaxed);
            return true;
        }
    }
    return false;
}

FaceBasis::FaceBasis(std::span<const FaceFrame> frames) {
    const std::size_t m = frames.size();
    for (auto* v : {&a1_re_, &a1_im_, &a2_re_, &a2_im_, &b1_re_, &b1_im_, &b2_re_, &b2_im_, &area_}) v->resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const Complex d1 = frames[j][1] - frames[j][0];
        const Complex d2 = frames[j][2] - frames[j][0];
        // det = d1 conj(d2) - conj(d1) d2 = -4i * signed area
        const Complex det = d1 * std::conj(d2) - std::conj(d1) * d2;
        const double area = 0.5 * (d1.real() * d2.imag() - d1.imag() * d2.real());
        const double scale = std::norm(d1) + std::norm(d2);
        if (!(std::abs(area) > 1e-14 * scale) || !std::isfinite(area)) {
            throw Error(ErrorKind::degenerate, "singular derivative system on face " + std::to_string(j));
        }
        const Complex a1 = std::conj(d2) / det;
        const Complex a2 = -std::conj(d1) / det;
        const Complex b1 = -d2 / det;
        const Complex b2 = d1 / det;
        a1_re_[j] = a1.real();
        a1_im_[j] = a1.imag();
        a2_re_[j] = a2.real();
        a2_im_[j] = a2.imag();
        b1_re_[j] = b1.real();
        b1_im_[j] = b1.imag();
        b2_re_[j] = b2.real();
        b2_im_[j] = b2.imag();
        area_[j] = std::abs(area);
    }
}

BasisView FaceBasis::view() const noexcept {
    return {area_.size(),   a1_re_.data(), a1_im_.data(), a2_re_.data(), a2_im_.data(), b1_re_.data(),
            b1_im_.data(),  b2_re_.data(), b2_im_.data(), area_.data()};
}

EdgeImages EdgeImages::gather(std::span<const Face> faces, std::span<const Complex> map) {
    EdgeImages e;
    const std::size_t m = faces.size();
    e.e1_re.resize(m);
    e.e1_im.resize(m);
    e.e2_re.resize(m);
    e.e2_im.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const Complex z1 = map[faces[j][0]];
        const Complex d1 = map[faces[j][1]] - z1;
        const Complex d2 = map[faces[j][2]] - z1;
        e.e1_re[j] = d1.real();
        e.e1_im[j] = d1.imag();
        e.e2_re[j] = d2.real();
        e.e2_im[j] = d2.imag();
    }
    return e;
}

ComplexArrays ComplexArrays::from(std::span<const Complex> values) {
    ComplexArrays out(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
        out.re[j] = values[j].real();
        out.im[j] = values[j].imag();
    }
    return out;
}

std::vector<Complex> ComplexArrays::to_complex() const {
    std::vector<Complex> out(re.size());
    for (std::size_t j = 0; j < re.size(); ++j) out[j] = Complex(re[j], im[j]);
    return out;
}

} // namespace qcmc::simd
