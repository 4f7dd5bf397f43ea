#pragma once

#include <span>
#include <vector>

#include "qcmc/conformal_module.hpp"
#include "qcmc/mesh.hpp"

namespace qcmc::shapes {

/// Concentric annulus on a log-polar grid. Radii grow geometrically so the
/// quads stay close to square; each quad is split along one diagonal. A
/// nonzero `warp` in (-1, 1) spaces the sectors unevenly in angle.
[[nodiscard]] TriMesh annulus(double inner_radius, double outer_radius, std::size_t rings, std::size_t sectors,
                              double warp = 0.0);

/// Disk on a polar grid with a small central fan.
[[nodiscard]] TriMesh disk(double radius, std::size_t rings, std::size_t sectors);

/// Delaunay triangulation of a polygonal domain with polygonal holes.
///
/// `outer` is a counterclockwise polyline and each hole a polyline (either
/// orientation) whose consecutive samples are about `spacing` apart; interior
/// points come from a jittered triangular lattice kept away from the boundary.
[[nodiscard]] TriMesh triangulate_domain(std::span<const Complex> outer, const std::vector<std::vector<Complex>>& holes,
                                         double spacing, unsigned seed = 7);

// Circle sampled counterclockwise at roughly `spacing` arc length, unevenly when warp != 0.
[[nodiscard]] std::vector<Complex> sample_circle(const Circle& circle, double spacing, double warp = 0.0);
// Axis-aligned square centered at the origin, counterclockwise, corners included.
[[nodiscard]] std::vector<Complex> sample_square(double side, double spacing);

[[nodiscard]] TriMesh disk_with_holes(const std::vector<Circle>& holes, double spacing, double warp = 0.0);
[[nodiscard]] TriMesh square_with_holes(double side, const std::vector<Circle>& holes, double spacing);

/// Unit-sphere cap from polar angle `hole_angle` (around the north pole) down to
/// the equator; 3D, two boundary loops.
[[nodiscard]] TriMesh hemisphere_cap(double hole_angle, std::size_t rings, std::size_t sectors);

/// Rectangle of the given length and width bent onto a cylinder of `radius`; 3D
/// and intrinsically flat.
[[nodiscard]] TriMesh cylinder_strip(double length, double width, double radius, std::size_t nu, std::size_t nv);

} // namespace qcmc::shapes
