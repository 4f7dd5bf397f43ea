#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "qcmc/mesh.hpp"
#include "qcmc/types.hpp"

namespace qcmc {

/// Piecewise-constant Beltrami coefficient, one complex value per face.
struct BeltramiField {
    std::vector<Complex> values;

    BeltramiField() = default;
    explicit BeltramiField(std::vector<Complex> v) : values(std::move(v)) {}
    static BeltramiField constant(std::size_t faces, Complex value) {
        return BeltramiField(std::vector<Complex>(faces, value));
    }

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] const Complex& operator[](std::size_t j) const { return values[j]; }

    // max_j |values[j]|
    [[nodiscard]] double sup_norm() const noexcept;

    // Throws Error(invalid_mu) unless sup_norm() < 1 and, when given, size() == faces.
    void require_admissible(std::size_t faces = 0) const;
};

/// Complex derivatives of a piecewise-affine map, per face.
struct FaceDerivatives {
    std::vector<Complex> fz;
    std::vector<Complex> fzbar;

    // conj(fz) / fz per face; fz must be nonzero.
    [[nodiscard]] std::vector<Complex> rotation_factors() const;
};

[[nodiscard]] FaceDerivatives face_derivatives(std::span<const FaceFrame> frames, std::span<const Face> faces,
                                               std::span<const Complex> map);
[[nodiscard]] FaceDerivatives face_derivatives(const TriMesh& mesh, std::span<const Complex> map);

/// mu_j = fzbar_j / fz_j. Throws Error(degenerate) naming the first face with fz == 0.
[[nodiscard]] BeltramiField beltrami_coefficient(std::span<const FaceFrame> frames, std::span<const Face> faces,
                                                 std::span<const Complex> map);
[[nodiscard]] BeltramiField beltrami_coefficient(const TriMesh& mesh, std::span<const Complex> map);
[[nodiscard]] BeltramiField beltrami_from_derivatives(const FaceDerivatives& derivs);

// (1 + |mu|_inf) / (1 - |mu|_inf); throws Error(invalid_mu) when |mu|_inf >= 1.
[[nodiscard]] double maximal_dilation(const BeltramiField& mu);

/// Beltrami coefficient of g o f from mu_f, the derivatives of f, and mu_g
/// already sampled per source face at the image of that face:
///   (mu_f + r (mu_g o f)) / (1 + r conj(mu_f) (mu_g o f)),  r = conj(fz) / fz.
[[nodiscard]] BeltramiField compose_beltrami(const BeltramiField& mu_f, const FaceDerivatives& derivs_f,
                                             const BeltramiField& mu_g_on_image);

/// Target coefficient for a map defined on a flattened domain so that its
/// composition with the flattening phi has coefficient mu:
///   nu = (1 / r) (mu - mu_phi) / (1 - mu conj(mu_phi)),  r = conj(phi_z) / phi_z.
/// Throws Error(invalid_mu) if the result has sup-norm >= 1.
[[nodiscard]] BeltramiField transfer_target(const BeltramiField& mu, const BeltramiField& mu_phi,
                                            const FaceDerivatives& derivs_phi);

/// Samples a per-face field on `image_mesh` at the image barycenter of every
/// source face under `map`. Barycenters outside the image mesh take the value
/// of the face with the nearest centroid.
[[nodiscard]] BeltramiField sample_at_image_barycenters(const TriMesh& image_mesh, const BeltramiField& field,
                                                        std::span<const Face> source_faces,
                                                        std::span<const Complex> map);

// CSV with header `face_index,re,im`; every face must appear exactly once.
[[nodiscard]] BeltramiField read_beltrami_csv(const std::filesystem::path& path, std::size_t faces);
void write_beltrami_csv(const std::filesystem::path& path, const BeltramiField& mu);

} // namespace qcmc
