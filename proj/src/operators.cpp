#include "qcmc/operators.hpp"

#include <cmath>

#include <unsupported/Eigen/SparseExtra>

#include "qcmc/error.hpp"

namespace qcmc {

Eigen::VectorXd stack(std::span<const Complex> values) {
    const auto n = static_cast<Eigen::Index>(values.size());
    Eigen::VectorXd out(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i) = values[static_cast<std::size_t>(i)].real();
        out(n + i) = values[static_cast<std::size_t>(i)].imag();
    }
    return out;
}

ComplexMap unstack(const Eigen::VectorXd& stacked) {
    const Eigen::Index n = stacked.size() / 2;
    ComplexMap out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = Complex(stacked(i), stacked(n + i));
    return out;
}

OperatorMatrix assemble_operator(std::span<const FaceFrame> frames, std::span<const Face> faces,
                                 std::size_t vertex_count, const BeltramiField& mu) {
    const std::size_t m = faces.size();
    if (frames.size() != m || mu.size() != m) throw Error(ErrorKind::config, "assemble_operator: size mismatch");
    mu.require_admissible();
    const auto rows = static_cast<Eigen::Index>(m);
    const auto cols = static_cast<Eigen::Index>(vertex_count);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(12 * m);
    const Complex i_unit(0.0, 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& w = frames[j];
        const double area = signed_area(w[0], w[1], w[2]);
        if (!(std::abs(area) > 1e-14 * (std::norm(w[1] - w[0]) + std::norm(w[2] - w[0])))) {
            throw Error(ErrorKind::degenerate, "degenerate face " + std::to_string(j));
        }
        const auto row = static_cast<Eigen::Index>(j);
        for (int k = 0; k < 3; ++k) {
            // Gradient of the hat function of corner k as a complex number.
            const Complex grad = i_unit * (w[(k + 2) % 3] - w[(k + 1) % 3]) / (2.0 * area);
            const Complex dz = 0.5 * std::conj(grad);
            const Complex dzbar = 0.5 * grad;
            const Complex c = dzbar - mu[j] * dz;
            const auto v = static_cast<Eigen::Index>(faces[j][k]);
            triplets.emplace_back(row, v, c.real());
            triplets.emplace_back(row, cols + v, -c.imag());
            triplets.emplace_back(rows + row, v, c.imag());
            triplets.emplace_back(rows + row, cols + v, c.real());
        }
    }
    OperatorMatrix out;
    out.faces = m;
    out.vertices = vertex_count;
    out.matrix.resize(2 * rows, 2 * cols);
    out.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

OperatorMatrix assemble_operator(const TriMesh& mesh, const BeltramiField& mu) {
    const auto frames = mesh.face_frames();
    return assemble_operator(frames, mesh.faces(), mesh.vertex_count(), mu);
}

ConstraintMatrix assemble_constraints(const TriMesh& mesh, std::span<const Complex> current_map,
                                      const ConformalModule& module, bool augment_module) {
    const std::size_t n = mesh.vertex_count();
    if (current_map.size() != n) throw Error(ErrorKind::config, "map size does not match vertex count");
    if (module.size() != mesh.inner_loop_count()) {
        throw Error(ErrorKind::config, "module has " + std::to_string(module.size()) + " circles for " +
                                           std::to_string(mesh.inner_loop_count()) + " inner loops");
    }

    ConstraintMatrix k;
    k.augmented = augment_module;
    k.inner_loops = mesh.inner_loop_count();
    for (std::uint32_t v = 0; v < n; ++v) {
        if (!mesh.is_boundary(v)) k.interior_vertices.push_back(v);
    }
    for (const auto& loop : mesh.boundary_loops()) k.boundary_vertices.insert(k.boundary_vertices.end(), loop.begin(), loop.end());

    const auto nn = static_cast<Eigen::Index>(n);
    const auto r = static_cast<Eigen::Index>(k.interior_count());
    const auto base = static_cast<Eigen::Index>(k.base_columns());
    const Eigen::Index cols = base + (augment_module ? 3 * static_cast<Eigen::Index>(k.inner_loops) : 0);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(2 * k.interior_count() + 2 * k.boundary_count() * (augment_module ? 3 : 1));
    for (Eigen::Index j = 0; j < r; ++j) {
        const auto v = static_cast<Eigen::Index>(k.interior_vertices[static_cast<std::size_t>(j)]);
        triplets.emplace_back(v, j, 1.0);
        triplets.emplace_back(nn + v, r + j, 1.0);
    }

    k.tangents.resize(k.boundary_count());
    for (std::size_t b = 0; b < k.boundary_count(); ++b) {
        const std::uint32_t v = k.boundary_vertices[b];
        const auto loop = static_cast<std::size_t>(mesh.boundary_info()[v].loop_index);
        const Complex c = module.loop_center(loop);
        const double radius = module.loop_radius(loop);
        const Complex offset = current_map[v] - c;
        const double dist = std::abs(offset);
        if (!(dist > 1e-14 * radius)) {
            throw Error(ErrorKind::degenerate, "boundary image of vertex " + std::to_string(v) +
                                                   " coincides with its circle center");
        }
        if (std::abs(dist - radius) > 0.2 * radius) {
            throw Error(ErrorKind::config, "boundary image of vertex " + std::to_string(v) +
                                               " is too far from its target circle");
        }
        const Complex radial = offset / dist;
        const Complex tangent = Complex(0.0, 1.0) * radial;
        k.tangents[b] = tangent;
        const auto row = static_cast<Eigen::Index>(v);
        const Eigen::Index col = 2 * r + static_cast<Eigen::Index>(b);
        triplets.emplace_back(row, col, tangent.real());
        triplets.emplace_back(nn + row, col, tangent.imag());
        if (augment_module && loop > 0) {
            const auto mc = static_cast<Eigen::Index>(k.module_column(loop - 1));
            triplets.emplace_back(row, mc, 1.0);
            triplets.emplace_back(nn + row, mc + 1, 1.0);
            triplets.emplace_back(row, mc + 2, radial.real());
            triplets.emplace_back(nn + row, mc + 2, radial.imag());
        }
    }
    k.matrix.resize(2 * nn, cols);
    k.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return k;
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& matrix) {
    if (!Eigen::saveMarket(matrix, path.string())) throw Error(ErrorKind::io, "cannot write " + path.string());
}

} // namespace qcmc
