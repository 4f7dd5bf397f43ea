#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qcmc/types.hpp"

namespace qcmc {

using Vec3 = std::array<double, 3>;

// Closed cycle of boundary vertices, traversed with the domain on the left.
using BoundaryLoop = std::vector<std::uint32_t>;

enum class MeshFormat { obj, off };

/// Where a vertex sits on the boundary. Interior vertices have loop_index == -1.
struct BoundaryVertexInfo {
    std::int32_t loop_index = -1;
    std::uint32_t position_in_loop = 0;
};

/// Indexed triangle mesh of a connected domain with one or more boundary loops.
///
/// Construction validates the triangulation (manifold, connected, planar-domain
/// topology, no degenerate faces) and normalizes orientation. For planar meshes
/// every face ends up with positive signed area. Loop 0 is the outer boundary,
/// found as the loop with the largest enclosed area; inner loops follow in
/// descending area order.
class TriMesh {
public:
    TriMesh() = default;

    static TriMesh from_arrays(std::vector<Vec3> vertices, std::vector<Face> faces);

    // Same connectivity, planar vertex positions (z = 0).
    [[nodiscard]] TriMesh with_planar_positions(std::span<const Complex> positions) const;

    [[nodiscard]] const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<Face>& faces() const noexcept { return faces_; }
    [[nodiscard]] const std::vector<BoundaryLoop>& boundary_loops() const noexcept { return loops_; }
    [[nodiscard]] const std::vector<BoundaryVertexInfo>& boundary_info() const noexcept { return vertex_info_; }

    [[nodiscard]] std::size_t vertex_count() const noexcept { return vertices_.size(); }
    [[nodiscard]] std::size_t face_count() const noexcept { return faces_.size(); }
    [[nodiscard]] std::size_t inner_loop_count() const noexcept { return loops_.empty() ? 0 : loops_.size() - 1; }
    [[nodiscard]] std::size_t boundary_vertex_count() const noexcept { return boundary_vertices_; }
    [[nodiscard]] std::size_t interior_vertex_count() const noexcept { return vertices_.size() - boundary_vertices_; }
    [[nodiscard]] bool is_boundary(std::uint32_t v) const noexcept { return vertex_info_[v].loop_index >= 0; }

    // True when every vertex has z == 0.
    [[nodiscard]] bool is_planar() const noexcept { return planar_; }

    // x + iy per vertex. Throws for non-planar meshes.
    [[nodiscard]] ComplexMap planar_positions() const;

    // Per-face source triangles in a planar chart: the vertex positions for planar
    // meshes, an isometric local frame (first edge along +x) for 3D meshes.
    [[nodiscard]] std::vector<FaceFrame> face_frames() const;

    [[nodiscard]] std::vector<double> face_areas() const;
    [[nodiscard]] double total_area() const;

    // Number of undirected edges with exactly one incident face.
    [[nodiscard]] std::size_t boundary_edge_count() const noexcept { return boundary_edges_; }

private:
    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
    std::vector<BoundaryLoop> loops_;
    std::vector<BoundaryVertexInfo> vertex_info_;
    std::size_t boundary_vertices_ = 0;
    std::size_t boundary_edges_ = 0;
    bool planar_ = false;
};

/// Boundary loops of a manifold triangulation, outer loop first.
///
/// Each loop starts at its smallest vertex index and follows the boundary
/// half-edges of the faces, so the domain lies to the left. Loops are ordered
/// by descending absolute enclosed area (vector area for 3D input); ties are
/// broken by first vertex index.
[[nodiscard]] std::vector<BoundaryLoop> extract_boundary_loops(std::span<const Vec3> vertices,
                                                               std::span<const Face> faces);
[[nodiscard]] std::vector<BoundaryLoop> extract_boundary_loops(const TriMesh& mesh);

// Signed area enclosed by a loop of planar positions (positive when counterclockwise).
[[nodiscard]] double loop_signed_area(std::span<const Complex> positions, const BoundaryLoop& loop);

[[nodiscard]] inline double signed_area(Complex a, Complex b, Complex c) noexcept {
    const Complex e1 = b - a;
    const Complex e2 = c - a;
    return 0.5 * (e1.real() * e2.imag() - e1.imag() * e2.real());
}

/// Number of faces whose image under `map` has signed area <= 0.
[[nodiscard]] std::size_t flip_count(const TriMesh& mesh, std::span<const Complex> map);

[[nodiscard]] TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
// Format inferred from the file extension (.obj or .off).
[[nodiscard]] TriMesh load_mesh(const std::filesystem::path& path);

/// Writes vertices and faces. When `uv` is non-empty an OBJ gets one `vt u v`
/// record per vertex and faces reference `v/vt`; OFF output ignores `uv`.
void save_mesh(const std::filesystem::path& path, const TriMesh& mesh, MeshFormat format,
               std::span<const Complex> uv = {});

} // namespace qcmc
