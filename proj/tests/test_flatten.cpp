#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qcmc/beltrami.hpp"
#include "qcmc/error.hpp"
#include "qcmc/flatten.hpp"
#include "qcmc/shapes.hpp"

using namespace qcmc;

TEST_CASE("planar input flattens to itself") {
    const auto mesh = shapes::disk_with_holes({Circle{{0.2, 0.0}, 0.3}}, 0.1);
    const auto flat = initial_flatten(mesh);
    CHECK(flat.domain.planar_positions() == mesh.planar_positions());
    CHECK(flat.mu_phi.sup_norm() == 0.0);
    for (const auto fz : flat.derivs_phi.fz) CHECK(fz == Complex(1.0, 0.0));
}

TEST_CASE("hemisphere cap flattens without flips") {
    const auto cap = shapes::hemisphere_cap(0.3, 12, 48);
    const auto flat = initial_flatten(cap);
    CHECK(flat.domain.is_planar());
    CHECK(flat.domain.faces() == cap.faces());
    CHECK(flip_count(flat.domain, flat.domain.planar_positions()) == 0);
    CHECK(flat.domain.boundary_loops().size() == 2);
    CHECK(flat.mu_phi.sup_norm() < 1.0);

    // pinned pair realizes the largest boundary distance
    double best = 0.0;
    for (const auto& la : cap.boundary_loops()) {
        for (const auto a : la) {
            for (const auto& lb : cap.boundary_loops()) {
                for (const auto b : lb) {
                    const auto& p = cap.vertices()[a];
                    const auto& q = cap.vertices()[b];
                    best = std::max(best, std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]));
                }
            }
        }
    }
    const auto& p = cap.vertices()[flat.pinned[0]];
    const auto& q = cap.vertices()[flat.pinned[1]];
    CHECK(std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]) == doctest::Approx(best).epsilon(1e-12));
    const auto z = flat.domain.planar_positions();
    CHECK(std::abs(z[flat.pinned[1]] - z[flat.pinned[0]]) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("developable strip flattens conformally") {
    const auto strip = shapes::cylinder_strip(3.0, 1.0, 1.2, 30, 10);
    const auto flat = initial_flatten(strip);
    double mean = 0.0;
    for (const auto& m : flat.mu_phi.values) mean += std::abs(m);
    mean /= static_cast<double>(flat.mu_phi.size());
    CHECK(mean < 1e-6);
    // a similarity of the developed strip: one common length scale
    const auto z = flat.domain.planar_positions();
    double lo = 1e300, hi = 0.0;
    for (const auto& f : strip.faces()) {
        const auto& a = strip.vertices()[f[0]];
        const auto& b = strip.vertices()[f[1]];
        const double s = std::abs(z[f[0]] - z[f[1]]) / std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    CHECK(hi - lo < 1e-6);
}

TEST_CASE("flattening coefficient matches the surface frames") {
    const auto cap = shapes::hemisphere_cap(0.4, 6, 24);
    const auto flat = initial_flatten(cap);
    const auto parts = oracle::affine_parts(cap, flat.domain.planar_positions());
    for (std::size_t j = 0; j < parts.size(); ++j) {
        CHECK(std::abs(parts[j].fzbar / parts[j].fz - flat.mu_phi[j]) < 1e-10);
    }
}
