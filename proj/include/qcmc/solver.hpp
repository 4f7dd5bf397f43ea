#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qcmc/beltrami.hpp"
#include "qcmc/conformal_module.hpp"
#include "qcmc/mesh.hpp"

namespace qcmc {

struct SolverConfig {
    double epsilon = 1e-4;  // on the area-weighted mean of |mu_n - mu_{n-1}|
    int max_iter = 200;
    double step = 0.5;
    bool fixed_module = false;
    int p = 2;  // only the least-squares exponent is supported
    ModuleLimits limits{};

    // Throws Error(config) on epsilon <= 0, step outside (0, 1], max_iter < 0 or p != 2.
    void validate() const;
};

/// Snapshot of one iterate. Boundary vertices lie on their circles.
struct ParamState {
    ComplexMap map;
    ConformalModule module;
    BeltramiField mu_current;
    int iteration = 0;
    double energy = 0.0;
};

enum class SolveStatus { converged, max_iterations };

struct SolveReport {
    std::vector<double> energy_trace;   // index 0 is the initial map
    std::vector<double> mu_diff_trace;  // index 0 is NaN (no previous iterate)
    double mu_error_mean = 0.0;
    double mu_error_std = 0.0;
    std::size_t flips = 0;
    ConformalModule final_module;
    int iterations_used = 0;
    std::size_t clamp_events = 0;
    SolveStatus status = SolveStatus::max_iterations;
    bool ill_posed = false;  // module clamping in more than half of the iterations
    double time_seconds = 0.0;
};

struct SolveResult {
    ParamState state;
    SolveReport report;
};

struct DescentResult {
    ParamState state;
    ModuleUpdate update;
    std::size_t clamp_events = 0;
    bool regularized = false;
};

using IterationObserver = std::function<void(const ParamState&)>;

/// Boundary loop k goes to circle k by arc-length-proportional angles (outer
/// counterclockwise, inner clockwise, starting at the angle of the loop's first
/// vertex about its fitted circle); interior vertices solve the cotangent
/// Laplace equation with those Dirichlet values.
[[nodiscard]] ComplexMap harmonic_initial_map(const TriMesh& mesh, const ConformalModule& module);

/// Sum over faces of area * |fzbar - mu fz|^2.
[[nodiscard]] double beltrami_energy(const TriMesh& mesh, std::span<const Complex> map, const BeltramiField& mu_target);

// Area-weighted mean of |a - b| over faces.
[[nodiscard]] double mean_abs_difference(const TriMesh& mesh, const BeltramiField& a, const BeltramiField& b);

/// One damped least-squares step of the Beltrami energy under the boundary
/// constraints, followed by the module update and radial projection of the
/// boundary onto the updated circles.
[[nodiscard]] DescentResult descent_step(const TriMesh& mesh, const ParamState& state, const BeltramiField& mu_target,
                                         const SolverConfig& config);

[[nodiscard]] SolveResult solve_fixed_module(const TriMesh& mesh, const BeltramiField& mu_target,
                                             const ConformalModule& module, const SolverConfig& config,
                                             const IterationObserver& observer = {});

[[nodiscard]] SolveResult solve_qcmc(const TriMesh& mesh, const BeltramiField& mu_target, const SolverConfig& config,
                                     const IterationObserver& observer = {});

} // namespace qcmc
