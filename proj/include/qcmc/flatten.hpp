#pragma once

#include <array>

#include "qcmc/beltrami.hpp"
#include "qcmc/mesh.hpp"

namespace qcmc {

/// Planar embedding of a surface mesh together with its Beltrami coefficient
/// measured against the surface metric (per-face local frames).
struct Flattening {
    TriMesh domain;              // planar, same faces and vertex order as the input
    BeltramiField mu_phi;        // coefficient of the flattening per face
    FaceDerivatives derivs_phi;  // derivatives of the flattening per face
    std::array<std::uint32_t, 2> pinned{};
};

/// Free-boundary least-squares conformal flattening with two pinned boundary
/// vertices (the boundary pair at maximal 3D distance). Planar input in the
/// z = 0 plane is returned unchanged with mu_phi = 0 and fz = 1.
/// Throws Error(flipped) if the embedding has faces with non-positive area.
[[nodiscard]] Flattening initial_flatten(const TriMesh& mesh);

} // namespace qcmc
