#include "qcmc/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "qcmc/error.hpp"
#include "qcmc/operators.hpp"
#include "qcmc/simd/kernels.hpp"

namespace qcmc {

void SolverConfig::validate() const {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::config, "epsilon must be positive");
    if (!(step > 0.0 && step <= 1.0)) throw Error(ErrorKind::config, "step must lie in (0, 1]");
    if (max_iter < 0) throw Error(ErrorKind::config, "max_iter must be non-negative");
    if (p != 2) throw Error(ErrorKind::config, "only p = 2 is supported");
}

ComplexMap harmonic_initial_map(const TriMesh& mesh, const ConformalModule& module) {
    const std::size_t n = mesh.vertex_count();
    if (module.size() != mesh.inner_loop_count()) {
        throw Error(ErrorKind::config, "module does not match the number of inner loops");
    }
    if (const auto why = module.violation(); !why.empty()) throw Error(ErrorKind::config, "invalid module: " + why);

    const auto pos = mesh.planar_positions();
    const auto fits = fit_loop_circles(mesh);
    ComplexMap map(n);

    for (std::size_t k = 0; k < mesh.boundary_loops().size(); ++k) {
        const auto& loop = mesh.boundary_loops()[k];
        std::vector<double> arc(loop.size() + 1, 0.0);
        for (std::size_t p = 0; p < loop.size(); ++p) {
            arc[p + 1] = arc[p] + std::abs(pos[loop[(p + 1) % loop.size()]] - pos[loop[p]]);
        }
        const double length = arc.back();
        const double start = std::arg(pos[loop.front()] - fits[k].center);
        const double direction = k == 0 ? 1.0 : -1.0;
        const Complex c = module.loop_center(k);
        const double r = module.loop_radius(k);
        for (std::size_t p = 0; p < loop.size(); ++p) {
            const double theta = start + direction * 2.0 * std::numbers::pi * arc[p] / length;
            map[loop[p]] = c + std::polar(r, theta);
        }
    }

    // Cotangent Laplacian restricted to interior rows.
    std::vector<std::int64_t> interior_index(n, -1);
    Eigen::Index interior = 0;
    for (std::uint32_t v = 0; v < n; ++v) {
        if (!mesh.is_boundary(v)) interior_index[v] = interior++;
    }
    if (interior == 0) return map;

    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs_re = Eigen::VectorXd::Zero(interior);
    Eigen::VectorXd rhs_im = Eigen::VectorXd::Zero(interior);
    for (const auto& f : mesh.faces()) {
        for (int k = 0; k < 3; ++k) {
            const std::uint32_t a = f[(k + 1) % 3];
            const std::uint32_t b = f[(k + 2) % 3];
            const Complex u = pos[a] - pos[f[k]];
            const Complex v = pos[b] - pos[f[k]];
            const double cross = u.real() * v.imag() - u.imag() * v.real();
            const double w = 0.5 * (u.real() * v.real() + u.imag() * v.imag()) / cross;
            for (const auto [i, j] : {std::pair{a, b}, std::pair{b, a}}) {
                const std::int64_t row = interior_index[i];
                if (row < 0) continue;
                triplets.emplace_back(row, row, w);
                const std::int64_t col = interior_index[j];
                if (col >= 0) {
                    triplets.emplace_back(row, col, -w);
                } else {
                    rhs_re(row) += w * map[j].real();
                    rhs_im(row) += w * map[j].imag();
                }
            }
        }
    }
    SparseMatrix lap(interior, interior);
    lap.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::VectorXd x_re;
    Eigen::VectorXd x_im;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(lap);
    if (ldlt.info() == Eigen::Success) {
        x_re = ldlt.solve(rhs_re);
        x_im = ldlt.solve(rhs_im);
    }
    if (ldlt.info() != Eigen::Success || !x_re.allFinite() || !x_im.allFinite()) {
        Eigen::SparseLU<SparseMatrix> lu;
        lu.compute(lap);
        if (lu.info() != Eigen::Success) throw Error(ErrorKind::numerical, "singular Laplacian in harmonic initialization");
        x_re = lu.solve(rhs_re);
        x_im = lu.solve(rhs_im);
        if (!x_re.allFinite() || !x_im.allFinite()) {
            throw Error(ErrorKind::numerical, "harmonic initialization produced non-finite positions");
        }
    }
    for (std::uint32_t v = 0; v < n; ++v) {
        if (interior_index[v] >= 0) map[v] = Complex(x_re(interior_index[v]), x_im(interior_index[v]));
    }
    return map;
}

namespace {

/// Cached per-mesh quantities shared by all iterations of one solve.
bool rotation_is_symmetry(const ConformalModule& module, bool augment) {
    if (augment) return true;
    for (const auto& c : module.centers) {
        if (std::abs(c) > 1e-12) return false;
    }
    return true;
}

class DescentEngine {
public:
    DescentEngine(const TriMesh& mesh, const BeltramiField& target, const SolverConfig& config)
        : mesh_(mesh), frames_(mesh.face_frames()), basis_(frames_), target_(simd::ComplexArrays::from(target.values)),
          config_(config) {
        const auto op = assemble_operator(frames_, mesh.faces(), mesh.vertex_count(), target);
        const auto m = static_cast<Eigen::Index>(mesh.face_count());
        Eigen::VectorXd row_weight(2 * m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const double w = std::sqrt(basis_.areas()[static_cast<std::size_t>(j)]);
            row_weight(j) = w;
            row_weight(m + j) = w;
        }
        const SparseMatrix weighted = row_weight.asDiagonal() * op.matrix;
        normal_ = SparseMatrix(weighted.transpose() * weighted);
        total_area_ = 0.0;
        for (const double a : basis_.areas()) total_area_ += a;
    }

    [[nodiscard]] double energy(std::span<const Complex> map) const {
        const auto edges = simd::EdgeImages::gather(mesh_.faces(), map);
        return simd::active_kernels().residual_energy(basis_.view(), edges.view(), target_.in());
    }

    [[nodiscard]] BeltramiField mu(std::span<const Complex> map) const {
        const auto edges = simd::EdgeImages::gather(mesh_.faces(), map);
        simd::ComplexArrays fz(mesh_.face_count());
        simd::ComplexArrays fzbar(mesh_.face_count());
        simd::active_kernels().derivatives(basis_.view(), edges.view(), fz.out(), fzbar.out());
        return beltrami_from_derivatives({fz.to_complex(), fzbar.to_complex()});
    }

    [[nodiscard]] double mean_abs_difference(const BeltramiField& a, const BeltramiField& b) const {
        const auto aa = simd::ComplexArrays::from(a.values);
        const auto bb = simd::ComplexArrays::from(b.values);
        const double s =
            simd::active_kernels().weighted_abs_diff(a.size(), basis_.areas().data(), aa.in(), bb.in());
        return s / total_area_;
    }

    [[nodiscard]] ParamState make_state(ComplexMap map, ConformalModule module, int iteration) const {
        ParamState s;
        s.mu_current = mu(map);
        s.energy = energy(map);
        s.map = std::move(map);
        s.module = std::move(module);
        s.iteration = iteration;
        return s;
    }

    [[nodiscard]] DescentResult step(const ParamState& state, bool augment) {
        const auto k = assemble_constraints(mesh_, state.map, state.module, augment);
        const Eigen::VectorXd u = stack(state.map);
        const SparseMatrix kt = k.matrix.transpose();
        SparseMatrix lhs = kt * normal_ * k.matrix;
        Eigen::VectorXd rhs = -(kt * (normal_ * u));

        // Jacobi equilibration: module and tangential columns differ in scale.
        Eigen::VectorXd scale(lhs.cols());
        for (Eigen::Index c = 0; c < lhs.cols(); ++c) {
            const double d = lhs.coeff(c, c);
            scale(c) = d > 0.0 ? 1.0 / std::sqrt(d) : 1.0;
        }
        lhs = scale.asDiagonal() * lhs * scale.asDiagonal();
        rhs = scale.asDiagonal() * rhs;

        // A common rotation of every circle leaves the energy unchanged; hold the
        // first outer boundary vertex still so the system is nonsingular.
        if (rotation_is_symmetry(state.module, augment) && k.boundary_count() > 0) {
            const auto pin = static_cast<Eigen::Index>(2 * k.interior_count());
            Eigen::VectorXd keep = Eigen::VectorXd::Ones(lhs.cols());
            keep(pin) = 0.0;
            lhs = keep.asDiagonal() * lhs * keep.asDiagonal();
            lhs.coeffRef(pin, pin) = 1.0;
            rhs(pin) = 0.0;
        }

        DescentResult out;
        Eigen::VectorXd y;
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(lhs);
        if (ldlt.info() == Eigen::Success) y = ldlt.solve(rhs);
        if (ldlt.info() != Eigen::Success || !y.allFinite()) {
            SparseMatrix reg(lhs.rows(), lhs.cols());
            reg.setIdentity();
            ldlt.compute(lhs + 1e-10 * reg);
            if (ldlt.info() == Eigen::Success) y = ldlt.solve(rhs);
            if (ldlt.info() != Eigen::Success || !y.allFinite()) {
                throw Error(ErrorKind::numerical, "normal equations are rank deficient");
            }
            out.regularized = true;
        }
        const Eigen::VectorXd x = scale.asDiagonal() * y;
        const ComplexMap delta = unstack(k.matrix * x);

        const double t = config_.step;
        ComplexMap next(state.map.size());
        for (std::size_t v = 0; v < next.size(); ++v) next[v] = state.map[v] + t * delta[v];

        out.update = ModuleUpdate::zero(state.module.size());
        if (augment) {
            for (std::size_t i = 0; i < state.module.size(); ++i) {
                const auto col = static_cast<Eigen::Index>(k.module_column(i));
                out.update.delta_centers[i] = Complex(x(col), x(col + 1));
                out.update.delta_radii[i] = x(col + 2);
            }
        }
        auto [module, clamps] = apply_update(state.module, out.update, t, config_.limits);
        out.clamp_events = clamps;

        for (std::size_t li = 0; li < mesh_.boundary_loops().size(); ++li) {
            const Complex c = module.loop_center(li);
            const double r = module.loop_radius(li);
            for (const auto v : mesh_.boundary_loops()[li]) {
                const Complex offset = next[v] - c;
                const double dist = std::abs(offset);
                if (!(dist > 0.0)) throw Error(ErrorKind::degenerate, "boundary vertex collapsed onto circle center");
                next[v] = c + offset * (r / dist);
            }
        }
        out.state = make_state(std::move(next), std::move(module), state.iteration + 1);
        return out;
    }

private:
    const TriMesh& mesh_;
    std::vector<FaceFrame> frames_;
    simd::FaceBasis basis_;
    simd::ComplexArrays target_;
    SolverConfig config_;
    SparseMatrix normal_;
    double total_area_ = 0.0;
};

void check_inputs(const TriMesh& mesh, const BeltramiField& mu_target, const SolverConfig& config) {
    config.validate();
    if (!mesh.is_planar()) throw Error(ErrorKind::config, "solver needs a planar mesh; flatten it first");
    mu_target.require_admissible(mesh.face_count());
}

double population_std(const std::vector<double>& v, double mean) {
    double acc = 0.0;
    for (const double x : v) acc += (x - mean) * (x - mean);
    return v.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(v.size()));
}

SolveResult run(const TriMesh& mesh, const BeltramiField& mu_target, ConformalModule module,
                const SolverConfig& config, bool augment, const IterationObserver& observer) {
    const auto t0 = std::chrono::steady_clock::now();
    DescentEngine engine(mesh, mu_target, config);
    ComplexMap start = harmonic_initial_map(mesh, module);
    ParamState state = engine.make_state(std::move(start), std::move(module), 0);

    SolveReport report;
    report.energy_trace.push_back(state.energy);
    report.mu_diff_trace.push_back(std::numeric_limits<double>::quiet_NaN());
    if (observer) observer(state);

    for (int it = 0; it < config.max_iter; ++it) {
        auto result = engine.step(state, augment);
        const double diff = engine.mean_abs_difference(result.state.mu_current, state.mu_current);
        report.clamp_events += result.clamp_events;
        state = std::move(result.state);
        report.energy_trace.push_back(state.energy);
        report.mu_diff_trace.push_back(diff);
        if (observer) observer(state);
        if (diff < config.epsilon) {
            report.status = SolveStatus::converged;
            break;
        }
    }

    report.iterations_used = state.iteration;
    report.final_module = state.module;
    report.flips = flip_count(mesh, state.map);
    std::vector<double> err(mesh.face_count());
    double sum = 0.0;
    for (std::size_t j = 0; j < err.size(); ++j) {
        err[j] = std::abs(state.mu_current[j] - mu_target[j]);
        sum += err[j];
    }
    report.mu_error_mean = err.empty() ? 0.0 : sum / static_cast<double>(err.size());
    report.mu_error_std = population_std(err, report.mu_error_mean);
    report.ill_posed = report.iterations_used > 0 &&
                       static_cast<double>(report.clamp_events) > 0.5 * static_cast<double>(report.iterations_used);
    report.time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(state), std::move(report)};
}

} // namespace

double beltrami_energy(const TriMesh& mesh, std::span<const Complex> map, const BeltramiField& mu_target) {
    if (map.size() != mesh.vertex_count()) throw Error(ErrorKind::config, "map size does not match vertex count");
    if (mu_target.size() != mesh.face_count()) throw Error(ErrorKind::config, "target size does not match face count");
    const auto frames = mesh.face_frames();
    const simd::FaceBasis basis(frames);
    const auto edges = simd::EdgeImages::gather(mesh.faces(), map);
    const auto mu = simd::ComplexArrays::from(mu_target.values);
    return simd::active_kernels().residual_energy(basis.view(), edges.view(), mu.in());
}

double mean_abs_difference(const TriMesh& mesh, const BeltramiField& a, const BeltramiField& b) {
    if (a.size() != mesh.face_count() || b.size() != mesh.face_count()) {
        throw Error(ErrorKind::config, "field size does not match face count");
    }
    const auto areas = mesh.face_areas();
    const auto aa = simd::ComplexArrays::from(a.values);
    const auto bb = simd::ComplexArrays::from(b.values);
    double total = 0.0;
    for (const double x : areas) total += x;
    return simd::active_kernels().weighted_abs_diff(areas.size(), areas.data(), aa.in(), bb.in()) / total;
}

DescentResult descent_step(const TriMesh& mesh, const ParamState& state, const BeltramiField& mu_target,
                           const SolverConfig& config) {
    check_inputs(mesh, mu_target, config);
    DescentEngine engine(mesh, mu_target, config);
    return engine.step(state, !config.fixed_module);
}

SolveResult solve_fixed_module(const TriMesh& mesh, const BeltramiField& mu_target, const ConformalModule& module,
                               const SolverConfig& config, const IterationObserver& observer) {
    check_inputs(mesh, mu_target, config);
    return run(mesh, mu_target, module, config, false, observer);
}

SolveResult solve_qcmc(const TriMesh& mesh, const BeltramiField& mu_target, const SolverConfig& config,
                       const IterationObserver& observer) {
    check_inputs(mesh, mu_target, config);
    return run(mesh, mu_target, initial_module(mesh, config.limits), config, !config.fixed_module, observer);
}

} // namespace qcmc
