#include "qcmc/flatten.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>

#include "qcmc/error.hpp"
#include "qcmc/operators.hpp"

namespace qcmc {
namespace {

std::array<std::uint32_t, 2> farthest_boundary_pair(const TriMesh& mesh) {
    std::vector<std::uint32_t> boundary;
    for (const auto& loop : mesh.boundary_loops()) boundary.insert(boundary.end(), loop.begin(), loop.end());
    std::array<std::uint32_t, 2> best{boundary[0], boundary[1]};
    double best_d = -1.0;
    const auto& v = mesh.vertices();
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        for (std::size_t j = i + 1; j < boundary.size(); ++j) {
            const auto& a = v[boundary[i]];
            const auto& b = v[boundary[j]];
            const double d = (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]);
            if (d > best_d) {
                best_d = d;
                best = {boundary[i], boundary[j]};
            }
        }
    }
    return best;
}

} // namespace

Flattening initial_flatten(const TriMesh& mesh) {
    const std::size_t m = mesh.face_count();
    const std::size_t n = mesh.vertex_count();
    const auto pinned = farthest_boundary_pair(mesh);
    if (mesh.is_planar()) {
        return {mesh, BeltramiField::constant(m, Complex(0.0, 0.0)),
                FaceDerivatives{std::vector<Complex>(m, Complex(1.0, 0.0)), std::vector<Complex>(m, Complex(0.0, 0.0))},
                pinned};
    }

    // Conformal energy sum_j area_j |fzbar_j|^2 is the Beltrami residual with mu = 0.
    const auto frames = mesh.face_frames();
    const auto op = assemble_operator(frames, mesh.faces(), n, BeltramiField::constant(m, Complex(0.0, 0.0)));
    const auto areas = mesh.face_areas();
    const auto mm = static_cast<Eigen::Index>(m);
    Eigen::VectorXd row_weight(2 * mm);
    for (Eigen::Index j = 0; j < mm; ++j) {
        row_weight(j) = std::sqrt(areas[static_cast<std::size_t>(j)]);
        row_weight(mm + j) = row_weight(j);
    }
    const SparseMatrix weighted = row_weight.asDiagonal() * op.matrix;

    const auto& p0 = mesh.vertices()[pinned[0]];
    const auto& p1 = mesh.vertices()[pinned[1]];
    const double span =
        std::sqrt((p0[0] - p1[0]) * (p0[0] - p1[0]) + (p0[1] - p1[1]) * (p0[1] - p1[1]) + (p0[2] - p1[2]) * (p0[2] - p1[2]));
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd fixed = Eigen::VectorXd::Zero(2 * nn);
    fixed(static_cast<Eigen::Index>(pinned[1])) = span;

    // Free columns: every stacked coordinate except the four pinned ones.
    std::vector<Eigen::Index> free_index(static_cast<std::size_t>(2 * nn), -1);
    Eigen::Index free_count = 0;
    for (Eigen::Index c = 0; c < 2 * nn; ++c) {
        const auto v = static_cast<std::uint32_t>(c % nn);
        if (v == pinned[0] || v == pinned[1]) continue;
        free_index[static_cast<std::size_t>(c)] = free_count++;
    }
    std::vector<Eigen::Triplet<double>> sel;
    sel.reserve(static_cast<std::size_t>(free_count));
    for (Eigen::Index c = 0; c < 2 * nn; ++c) {
        if (free_index[static_cast<std::size_t>(c)] >= 0) sel.emplace_back(c, free_index[static_cast<std::size_t>(c)], 1.0);
    }
    SparseMatrix select(2 * nn, free_count);
    select.setFromTriplets(sel.begin(), sel.end());

    const SparseMatrix reduced = weighted * select;
    const SparseMatrix normal = reduced.transpose() * reduced;
    const Eigen::VectorXd rhs = -(reduced.transpose() * (weighted * fixed));
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(normal);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::numerical, "conformal flattening system is singular");
    const Eigen::VectorXd x = ldlt.solve(rhs);
    if (!x.allFinite()) throw Error(ErrorKind::numerical, "conformal flattening produced non-finite positions");
    const ComplexMap positions = unstack(fixed + select * x);

    const auto flips = flip_count(mesh, positions);
    if (flips > 0) {
        throw Error(ErrorKind::flipped, "flattening produced " + std::to_string(flips) +
                                            " flipped faces; mesh too irregular for free-boundary flattening");
    }
    Flattening out;
    out.derivs_phi = face_derivatives(frames, mesh.faces(), positions);
    out.mu_phi = beltrami_from_derivatives(out.derivs_phi);
    out.domain = mesh.with_planar_positions(positions);
    out.pinned = pinned;
    return out;
}

} // namespace qcmc
