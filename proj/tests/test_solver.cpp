#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qcmc/error.hpp"
#include "qcmc/solver.hpp"
#include "qcmc/shapes.hpp"

using namespace qcmc;

namespace {

BeltramiField constant_mu(const TriMesh& m, Complex v) { return BeltramiField::constant(m.face_count(), v); }

double boundary_gap(const TriMesh& mesh, const ParamState& s) {
    double worst = 0.0;
    for (std::size_t li = 0; li < mesh.boundary_loops().size(); ++li) {
        for (const auto v : mesh.boundary_loops()[li]) {
            worst = std::max(worst, std::abs(std::abs(s.map[v] - s.module.loop_center(li)) - s.module.loop_radius(li)));
        }
    }
    return worst;
}

TriMesh rotated(const TriMesh& mesh, double angle) {
    auto z = mesh.planar_positions();
    for (auto& p : z) p *= std::polar(1.0, angle);
    return mesh.with_planar_positions(z);
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::io;
}

} // namespace

TEST_CASE("solver configuration validation") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    for (auto bad : {SolverConfig{.epsilon = 0.0}, SolverConfig{.step = 0.0}, SolverConfig{.step = 1.5},
                     SolverConfig{.max_iter = -1}, SolverConfig{.p = 1}}) {
        CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::config);
    }
}

TEST_CASE("Beltrami energy") {
    const auto mesh = oracle::jittered_grid(4, 3, 0.25, 6);
    const auto z = mesh.planar_positions();

    SUBCASE("matching affine map has zero energy") {
        const Complex a(1.1, 0.2), b(0.15, -0.25);
        std::vector<Complex> f(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) f[i] = a * z[i] + b * std::conj(z[i]);
        CHECK(beltrami_energy(mesh, f, constant_mu(mesh, b / a)) < 1e-20);
    }
    SUBCASE("identity against a constant target") {
        CHECK(beltrami_energy(mesh, z, constant_mu(mesh, 0.3)) == doctest::Approx(0.09 * mesh.total_area()).epsilon(1e-12));
    }
    SUBCASE("random map agrees with face-by-face summation") {
        const auto small = oracle::jittered_grid(5, 1, 0.2, 7);
        REQUIRE(small.face_count() == 10);
        for (unsigned seed = 0; seed < 10; ++seed) {
            const auto f = oracle::random_complex(small.vertex_count(), 3.0, seed);
            const auto mu = oracle::random_complex(small.face_count(), 0.9, seed + 50);
            const double want = oracle::brute_energy(small, f, mu);
            CHECK(std::abs(beltrami_energy(small, f, BeltramiField(mu)) - want) <= 1e-12 * std::max(1.0, want));
        }
    }
}

TEST_CASE("harmonic initial map") {
    SUBCASE("concentric annulus is mapped close to the identity") {
        const auto mesh = shapes::annulus(0.4, 1.0, 10, 80);
        const auto g = harmonic_initial_map(mesh, initial_module(mesh));
        const auto z = mesh.planar_positions();
        for (std::size_t v = 0; v < z.size(); ++v) CHECK(std::abs(std::abs(g[v]) - std::abs(z[v])) < 0.02);
        CHECK(flip_count(mesh, g) == 0);
    }
    SUBCASE("boundary spacing follows arc length") {
        const auto mesh = shapes::square_with_holes(2.0, {}, 0.1);
        const auto g = harmonic_initial_map(mesh, ConformalModule{});
        const auto z = mesh.planar_positions();
        const auto& loop = mesh.boundary_loops()[0];
        double perimeter = 0.0;
        for (std::size_t p = 0; p < loop.size(); ++p) perimeter += std::abs(z[loop[(p + 1) % loop.size()]] - z[loop[p]]);
        for (std::size_t p = 0; p < loop.size(); ++p) {
            const double src = std::abs(z[loop[(p + 1) % loop.size()]] - z[loop[p]]) / perimeter;
            double turn = std::arg(g[loop[(p + 1) % loop.size()]] / g[loop[p]]);
            CHECK(std::abs(turn / (2.0 * 3.141592653589793) - src) < 1e-9);
            CHECK(std::abs(std::abs(g[loop[p]]) - 1.0) < 1e-12);
        }
        CHECK(flip_count(mesh, g) == 0);
    }
    SUBCASE("inner circle close to the outer boundary still yields a map") {
        const auto mesh = shapes::disk_with_holes({Circle{0.0, 0.3}}, 0.08);
        const ConformalModule near{{0.3}, {Complex(0.69, 0.0)}};
        const auto g = harmonic_initial_map(mesh, near);
        const double e = beltrami_energy(mesh, g, constant_mu(mesh, 0.0));
        CHECK(std::isfinite(e));
        MESSAGE("initial energy with a displaced inner circle: " << e);
    }
    SUBCASE("module must match the loops") {
        const auto mesh = shapes::annulus(0.4, 1.0, 3, 20);
        CHECK(kind_of([&] { (void)harmonic_initial_map(mesh, ConformalModule{}); }) == ErrorKind::config);
    }
}

TEST_CASE("descent step") {
    const auto mesh = shapes::annulus(0.4, 1.0, 10, 60);
    const ConformalModule truth{{0.4}, {Complex(0.0, 0.0)}};
    const auto mu0 = constant_mu(mesh, 0.0);

    SUBCASE("an optimal state is a fixed point") {
        ParamState s;
        s.map = mesh.planar_positions();
        s.module = truth;
        s.mu_current = beltrami_coefficient(mesh, s.map);
        s.energy = beltrami_energy(mesh, s.map, mu0);
        REQUIRE(s.energy < 1e-18);
        for (const bool fixed : {true, false}) {
            const auto r = descent_step(mesh, s, mu0, SolverConfig{.fixed_module = fixed});
            double moved = 0.0;
            for (std::size_t v = 0; v < s.map.size(); ++v) moved = std::max(moved, std::abs(r.state.map[v] - s.map[v]));
            CHECK(moved < 1e-9);
            CHECK(std::abs(r.state.module.radii[0] - 0.4) < 1e-9);
            CHECK(std::abs(r.state.module.centers[0]) < 1e-9);
        }
    }
    SUBCASE("conformal target from the harmonic start lowers the energy") {
        const auto warped = shapes::annulus(0.4, 1.0, 10, 60, 0.3);
        SolverConfig cfg;
        const auto module = initial_module(warped);
        ParamState s;
        s.map = harmonic_initial_map(warped, module);
        s.module = module;
        s.mu_current = beltrami_coefficient(warped, s.map);
        s.energy = beltrami_energy(warped, s.map, mu0);
        REQUIRE(s.energy > 1e-12);
        const auto r = descent_step(warped, s, mu0, cfg);
        CHECK(r.state.energy < s.energy);
        CHECK(r.state.iteration == 1);
    }
    SUBCASE("fixed module produces no module update") {
        const auto sq = shapes::square_with_holes(2.0, {Circle{{0.1, 0.0}, 0.4}}, 0.12);
        const auto module = initial_module(sq);
        ParamState s;
        s.map = harmonic_initial_map(sq, module);
        s.module = module;
        s.mu_current = beltrami_coefficient(sq, s.map);
        const auto target = constant_mu(sq, 0.0);
        s.energy = beltrami_energy(sq, s.map, target);
        const auto r = descent_step(sq, s, target, SolverConfig{.fixed_module = true});
        CHECK(r.update.delta_radii == std::vector<double>{0.0});
        CHECK(r.update.delta_centers == std::vector<Complex>{Complex(0.0)});
        CHECK(r.state.module == module);
        const auto free = descent_step(sq, s, target, SolverConfig{});
        CHECK(free.update.delta_radii[0] != 0.0);
    }
}

TEST_CASE("fixed-module solve") {
    SUBCASE("annulus with its true module") {
        const auto mesh = shapes::annulus(0.4, 1.0, 16, 100);
        const auto r = solve_fixed_module(mesh, constant_mu(mesh, 0.0), {{0.4}, {Complex(0.0)}}, SolverConfig{});
        CHECK(r.report.mu_error_mean < 0.02);
        CHECK(r.report.flips == 0);
        CHECK(r.report.status == SolveStatus::converged);
    }
    SUBCASE("simply connected disk") {
        const auto mesh = shapes::disk(1.0, 12, 64);
        const auto r = solve_fixed_module(mesh, constant_mu(mesh, 0.0), ConformalModule{}, SolverConfig{});
        CHECK(r.report.energy_trace.back() < 1e-6 * mesh.total_area());
        CHECK(r.report.flips == 0);
    }
    SUBCASE("inadmissible target") {
        const auto mesh = shapes::annulus(0.4, 1.0, 4, 30);
        CHECK(kind_of([&] {
                  (void)solve_fixed_module(mesh, constant_mu(mesh, 1.2), {{0.4}, {Complex(0.0)}}, SolverConfig{});
              }) == ErrorKind::invalid_mu);
    }
    SUBCASE("3D input is refused") {
        const auto cap = shapes::hemisphere_cap(0.5, 4, 20);
        CHECK(kind_of([&] { (void)solve_qcmc(cap, constant_mu(cap, 0.0), SolverConfig{}); }) == ErrorKind::config);
    }
}

TEST_CASE("solve with module recovery") {
    SUBCASE("annulus recovers its own module") {
        const auto mesh = shapes::annulus(0.4, 1.0, 20, 100);
        const auto r = solve_qcmc(mesh, constant_mu(mesh, 0.0), SolverConfig{});
        CHECK(r.report.final_module.radii[0] >= 0.39);
        CHECK(r.report.final_module.radii[0] <= 0.41);
        CHECK(r.report.flips == 0);
    }
    SUBCASE("constant quasi-conformal target on the annulus") {
        const auto mesh = shapes::annulus(0.4, 1.0, 20, 100);
        const auto r = solve_qcmc(mesh, constant_mu(mesh, 0.2), SolverConfig{});
        CHECK(r.report.mu_error_mean < 0.03);
        CHECK(r.report.flips == 0);
    }
    SUBCASE("square with a hole matches the harmonic modulus") {
        const auto mesh = shapes::square_with_holes(2.0, {Circle{0.0, 0.5}}, 0.08);
        const double oracle_rho = oracle::harmonic_modulus(mesh);
        const auto r = solve_qcmc(mesh, constant_mu(mesh, 0.0), SolverConfig{});
        const double rho = oracle::concentric_radius(r.report.final_module.centers[0], r.report.final_module.radii[0]);
        CHECK(std::abs(rho - oracle_rho) / oracle_rho < 0.02);
        CHECK(r.report.flips == 0);
    }
}

TEST_CASE("iterate invariants") {
    const auto mesh = shapes::square_with_holes(2.0, {Circle{{-0.45, 0.4}, 0.25}, Circle{{0.5, -0.3}, 0.2}}, 0.1);
    const auto target = constant_mu(mesh, Complex(0.1, 0.05));
    int seen = 0;
    double worst_gap = 0.0;
    double worst_energy = 0.0;
    const auto r = solve_qcmc(mesh, target, SolverConfig{}, [&](const ParamState& s) {
        ++seen;
        worst_gap = std::max(worst_gap, boundary_gap(mesh, s));
        const double e = beltrami_energy(mesh, s.map, target);
        worst_energy = std::max(worst_energy, std::abs(e - s.energy) / std::max(1.0, e));
        CHECK(s.module.valid());
    });
    CHECK(seen == r.report.iterations_used + 1);
    CHECK(worst_gap < 1e-9);
    CHECK(worst_energy < 1e-12);
    CHECK(r.report.energy_trace.size() == r.report.mu_diff_trace.size());
    CHECK(std::isnan(r.report.mu_diff_trace[0]));
}

TEST_CASE("energy descent on conformal targets") {
    for (const auto& mesh : {shapes::annulus(0.4, 1.0, 10, 60, 0.3),
                             shapes::disk_with_holes({Circle{{-0.4, 0.1}, 0.2}, Circle{{0.35, -0.2}, 0.15}}, 0.08),
                             shapes::square_with_holes(2.0, {Circle{{-0.45, 0.4}, 0.25}, Circle{{0.5, -0.3}, 0.2}}, 0.08)}) {
        const auto r = solve_qcmc(mesh, constant_mu(mesh, 0.0), SolverConfig{});
        const auto& e = r.report.energy_trace;
        std::size_t ok = 0;
        for (std::size_t i = 1; i < e.size(); ++i) ok += e[i] <= e[i - 1] + 1e-12 ? 1 : 0;
        CHECK(static_cast<double>(ok) >= 0.95 * static_cast<double>(e.size() - 1));
        CHECK(r.report.flips == 0);
    }
}

TEST_CASE("rotation equivariance") {
    const auto mesh = shapes::square_with_holes(2.0, {Circle{{0.2, 0.1}, 0.45}}, 0.1);
    const auto a = solve_qcmc(mesh, constant_mu(mesh, 0.0), SolverConfig{});
    const auto b = solve_qcmc(rotated(mesh, 0.9), constant_mu(mesh, 0.0), SolverConfig{});
    CHECK(std::abs(a.report.final_module.radii[0] - b.report.final_module.radii[0]) < 1e-3);
    REQUIRE(a.report.energy_trace.size() == b.report.energy_trace.size());
    for (std::size_t i = 0; i < a.report.energy_trace.size(); ++i) {
        CHECK(std::abs(a.report.energy_trace[i] - b.report.energy_trace[i]) < 1e-6);
    }
}

TEST_CASE("frozen module reproduces the fixed-module solve") {
    const auto mesh = shapes::square_with_holes(2.0, {Circle{{0.2, 0.1}, 0.45}}, 0.1);
    const auto target = constant_mu(mesh, 0.0);
    const auto frozen = solve_qcmc(mesh, target, SolverConfig{.fixed_module = true});
    const auto fixed = solve_fixed_module(mesh, target, initial_module(mesh), SolverConfig{});
    CHECK(frozen.report.energy_trace == fixed.report.energy_trace);
    CHECK(frozen.state.map == fixed.state.map);
}

TEST_CASE("convergence measure") {
    const auto mesh = oracle::jittered_grid(3, 3, 0.2, 2);
    const auto a = constant_mu(mesh, Complex(0.1, 0.0));
    const auto b = constant_mu(mesh, Complex(0.1, 0.3));
    CHECK(mean_abs_difference(mesh, a, b) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(mean_abs_difference(mesh, a, a) == 0.0);
}
