#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace qcmc {

using Complex = std::complex<double>;

// Per-vertex complex positions of a map into the plane.
using ComplexMap = std::vector<Complex>;

using Face = std::array<std::uint32_t, 3>;

// Source triangle of one face expressed in a planar chart.
using FaceFrame = std::array<Complex, 3>;

} // namespace qcmc
