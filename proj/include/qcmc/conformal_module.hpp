#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qcmc/mesh.hpp"
#include "qcmc/types.hpp"

namespace qcmc {

/// Radii and centers of the inner circles of a punctured unit disk.
struct ConformalModule {
    std::vector<double> radii;
    std::vector<Complex> centers;

    [[nodiscard]] std::size_t size() const noexcept { return radii.size(); }

    // Circle k of the full circle domain: k == 0 is the unit circle, k >= 1 inner circle k-1.
    [[nodiscard]] Complex loop_center(std::size_t loop) const { return loop == 0 ? Complex(0.0, 0.0) : centers[loop - 1]; }
    [[nodiscard]] double loop_radius(std::size_t loop) const { return loop == 0 ? 1.0 : radii[loop - 1]; }

    // Empty when valid, otherwise a description of the first violated condition.
    [[nodiscard]] std::string violation() const;
    [[nodiscard]] bool valid() const { return violation().empty(); }

    friend bool operator==(const ConformalModule&, const ConformalModule&) = default;
};

struct ModuleUpdate {
    std::vector<Complex> delta_centers;
    std::vector<double> delta_radii;

    static ModuleUpdate zero(std::size_t n) { return {std::vector<Complex>(n), std::vector<double>(n, 0.0)}; }
};

struct ModuleLimits {
    double min_radius = 1e-3;
    double margin = 1e-3;  // to the unit circle and between circles
};

struct Circle {
    Complex center;
    double radius = 0.0;
};

// Algebraic (Kasa) least-squares circle through planar points.
[[nodiscard]] Circle fit_circle(std::span<const Complex> points);

// Fitted circle for every boundary loop of a planar mesh, in mesh coordinates.
[[nodiscard]] std::vector<Circle> fit_loop_circles(const TriMesh& mesh);

/// Fits a circle to every boundary loop, translates and scales so the outer fit
/// becomes the unit circle, and clamps inner circles into the admissible range.
/// Throws Error(degenerate) for collinear loops and Error(topology) when the
/// clamped configuration still overlaps.
[[nodiscard]] ConformalModule initial_module(const TriMesh& mesh, const ModuleLimits& limits = {});

struct ModuleUpdateResult {
    ConformalModule module;
    std::size_t clamp_events = 0;
};

/// centers += damping * delta_c, radii += damping * delta_r, then clamping:
/// radii to [min_radius, 1 - 2 margin], centers pulled inward along their
/// direction so |c| + r <= 1 - margin, and circles that would overlap keep
/// their previous values.
[[nodiscard]] ModuleUpdateResult apply_update(const ConformalModule& module, const ModuleUpdate& update,
                                              double damping, const ModuleLimits& limits = {});

void to_json(nlohmann::json& j, const ConformalModule& m);
void from_json(const nlohmann::json& j, ConformalModule& m);

void write_module_json(const std::filesystem::path& path, const ConformalModule& module);

} // namespace qcmc
