#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "qcmc/beltrami.hpp"
#include "qcmc/conformal_module.hpp"
#include "qcmc/mesh.hpp"

namespace qcmc {

using SparseMatrix = Eigen::SparseMatrix<double>;

// 2n reals: all real parts, then all imaginary parts.
[[nodiscard]] Eigen::VectorXd stack(std::span<const Complex> values);
[[nodiscard]] ComplexMap unstack(const Eigen::VectorXd& stacked);

/// Real 2m x 2n matrix of fzbar - mu fz acting on stacked vertex images.
/// Rows 0..m-1 hold the real parts per face, rows m..2m-1 the imaginary parts.
struct OperatorMatrix {
    SparseMatrix matrix;
    std::size_t faces = 0;
    std::size_t vertices = 0;
};

[[nodiscard]] OperatorMatrix assemble_operator(std::span<const FaceFrame> frames, std::span<const Face> faces,
                                               std::size_t vertex_count, const BeltramiField& mu);
[[nodiscard]] OperatorMatrix assemble_operator(const TriMesh& mesh, const BeltramiField& mu);

/// Maps reduced variations to stacked per-vertex variations, delta_g = K * x.
///
/// Column layout of x: [interior real parts | interior imaginary parts |
/// one tangential scalar per boundary vertex | per inner loop (Re dc, Im dc, dr)].
/// The module block is present only in the augmented form.
struct ConstraintMatrix {
    SparseMatrix matrix;
    std::vector<std::uint32_t> interior_vertices;  // column order of the interior blocks
    std::vector<std::uint32_t> boundary_vertices;  // column order of the tangential block
    std::vector<Complex> tangents;                 // unit tangent per boundary column
    std::size_t inner_loops = 0;
    bool augmented = false;

    [[nodiscard]] std::size_t interior_count() const noexcept { return interior_vertices.size(); }
    [[nodiscard]] std::size_t boundary_count() const noexcept { return boundary_vertices.size(); }
    [[nodiscard]] std::size_t base_columns() const noexcept { return 2 * interior_count() + boundary_count(); }
    // First column of the (Re dc, Im dc, dr) triple of inner circle `inner` (0-based).
    [[nodiscard]] std::size_t module_column(std::size_t inner) const noexcept { return base_columns() + 3 * inner; }
};

/// Boundary vertices on loop k slide along the unit tangent i (g - c_k) / |g - c_k|
/// of their target circle; with `augment_module`, inner-loop vertices also
/// follow a shift of the circle center and a radial change of its radius.
/// Throws Error(degenerate) if an image coincides with its circle center and
/// Error(config) if it lies farther than 0.2 r_k from the circle.
[[nodiscard]] ConstraintMatrix assemble_constraints(const TriMesh& mesh, std::span<const Complex> current_map,
                                                    const ConformalModule& module, bool augment_module);

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& matrix);

} // namespace qcmc
