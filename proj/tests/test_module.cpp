#include <doctest.h>

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "qcmc/conformal_module.hpp"
#include "qcmc/error.hpp"
#include "qcmc/shapes.hpp"

using namespace qcmc;

namespace {

TriMesh rotated(const TriMesh& mesh, double angle) {
    auto z = mesh.planar_positions();
    for (auto& p : z) p *= std::polar(1.0, angle);
    return mesh.with_planar_positions(z);
}

bool invariants_hold(const ConformalModule& m, const ModuleLimits& limits = {}) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.radii[i] < limits.min_radius - 1e-15) return false;
        if (std::abs(m.centers[i]) + m.radii[i] > 1.0 - limits.margin + 1e-12) return false;
    }
    return m.valid();
}

} // namespace

TEST_CASE("circle fit") {
    const Circle truth{Complex(0.3, -0.1), 0.7};
    const auto pts = shapes::sample_circle(truth, 0.05);
    const auto fit = fit_circle(pts);
    CHECK(std::abs(fit.center - truth.center) < 1e-12);
    CHECK(fit.radius == doctest::Approx(0.7).epsilon(1e-12));

    std::vector<Complex> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    try {
        (void)fit_circle(line);
        FAIL("collinear points");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate);
    }
}

TEST_CASE("initial module") {
    SUBCASE("exact circle loops") {
        const auto mesh = shapes::disk_with_holes({Circle{0.3, 0.2}}, 0.05);
        const auto m = initial_module(mesh);
        REQUIRE(m.size() == 1);
        CHECK(std::abs(m.radii[0] - 0.2) < 1e-10);
        CHECK(std::abs(m.centers[0] - Complex(0.3, 0.0)) < 1e-10);
    }
    SUBCASE("concentric annulus") {
        const auto m = initial_module(shapes::annulus(0.4, 1.0, 10, 100));
        CHECK(std::abs(m.radii[0] - 0.4) < 1e-10);
        CHECK(std::abs(m.centers[0]) < 1e-10);
    }
    SUBCASE("scaled and shifted annulus normalizes to the unit circle") {
        auto z = shapes::annulus(0.8, 2.0, 6, 60).planar_positions();
        for (auto& p : z) p = p + Complex(5.0, -3.0);
        const auto mesh = shapes::annulus(0.8, 2.0, 6, 60).with_planar_positions(z);
        const auto m = initial_module(mesh);
        CHECK(std::abs(m.radii[0] - 0.4) < 1e-10);
        CHECK(std::abs(m.centers[0]) < 1e-10);
    }
    SUBCASE("square with a hole") {
        const auto mesh = shapes::square_with_holes(2.0, {Circle{0.0, 0.5}}, 0.05);
        const auto fits = fit_loop_circles(mesh);
        const auto m = initial_module(mesh);
        CHECK(invariants_hold(m));
        CHECK(m.radii[0] == doctest::Approx(0.5 / fits[0].radius).epsilon(1e-12));
    }
    SUBCASE("rotation equivariance") {
        const auto mesh = shapes::disk_with_holes({Circle{{-0.4, 0.1}, 0.2}, Circle{{0.35, -0.2}, 0.15}}, 0.06);
        const auto m0 = initial_module(mesh);
        const double angle = 0.7;
        const auto m1 = initial_module(rotated(mesh, angle));
        for (std::size_t i = 0; i < m0.size(); ++i) {
            CHECK(std::abs(m0.radii[i] - m1.radii[i]) < 1e-9);
            CHECK(std::abs(m0.centers[i] * std::polar(1.0, angle) - m1.centers[i]) < 1e-9);
        }
    }
}

TEST_CASE("module update clamping") {
    const ConformalModule base{{0.2, 0.1}, {Complex(-0.3, 0.2), Complex(0.4, -0.1)}};
    REQUIRE(base.valid());

    SUBCASE("zero update") {
        const auto r = apply_update(base, ModuleUpdate::zero(2), 0.5);
        CHECK(r.module == base);
        CHECK(r.clamp_events == 0);
    }
    SUBCASE("collapsing radius stops at the minimum") {
        ModuleUpdate u = ModuleUpdate::zero(2);
        u.delta_radii[0] = -0.2;
        const auto r = apply_update(base, u, 1.0);
        CHECK(r.module.radii[0] == doctest::Approx(1e-3));
        CHECK(r.clamp_events >= 1);
        CHECK(invariants_hold(r.module));
    }
    SUBCASE("center pushed into the unit circle is pulled back along its direction") {
        ModuleUpdate u = ModuleUpdate::zero(2);
        u.delta_centers[1] = Complex(0.6, -0.15);
        const auto r = apply_update(base, u, 1.0);
        const Complex c = r.module.centers[1];
        CHECK(std::abs(c) + r.module.radii[1] <= 1.0 - 1e-3 + 1e-12);
        CHECK(std::abs(std::arg(c) - std::arg(Complex(1.0, -0.25))) < 1e-12);
        CHECK(r.clamp_events >= 1);
        CHECK(invariants_hold(r.module));
    }
    SUBCASE("overlapping circles keep their previous values") {
        ModuleUpdate u = ModuleUpdate::zero(2);
        u.delta_centers[0] = Complex(0.6, -0.3);
        const auto r = apply_update(base, u, 1.0);
        CHECK(r.module == base);
        CHECK(r.clamp_events >= 1);
    }
    SUBCASE("damping then zero damping equals damping once") {
        ModuleUpdate u = ModuleUpdate::zero(2);
        u.delta_radii = {0.05, -0.02};
        u.delta_centers = {Complex(0.01, 0.02), Complex(-0.03, 0.0)};
        const auto once = apply_update(base, u, 0.5);
        const auto twice = apply_update(once.module, u, 0.0);
        CHECK(once.module == twice.module);
        CHECK(std::abs(once.module.radii[0] - 0.225) < 1e-15);
    }
}

TEST_CASE("module JSON") {
    const ConformalModule m{{0.25, 0.125}, {Complex(0.5, -0.25), Complex(-0.375, 0.0)}};
    const nlohmann::json j = m;
    CHECK(j.at("radii").size() == 2);
    CHECK(j.at("centers")[0][1].get<double>() == -0.25);
    CHECK(j.get<ConformalModule>() == m);

    const auto path = std::filesystem::temp_directory_path() / "qcmc_test_module.json";
    write_module_json(path, m);
    std::ifstream in(path);
    CHECK(nlohmann::json::parse(in).get<ConformalModule>() == m);
    std::filesystem::remove(path);
}
