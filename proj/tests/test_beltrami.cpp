#include <doctest.h>

#include <cmath>
#include <fstream>

#include "oracles.hpp"
#include "qcmc/beltrami.hpp"
#include "qcmc/error.hpp"
#include "qcmc/shapes.hpp"

using namespace qcmc;

namespace {

std::vector<Complex> apply(const std::vector<Complex>& z, Complex a, Complex b) {
    std::vector<Complex> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = a * z[i] + b * std::conj(z[i]);
    return out;
}

std::vector<Complex> perturb(const std::vector<Complex>& z, double amount, unsigned seed) {
    auto noise = oracle::random_complex(z.size(), amount, seed);
    for (std::size_t i = 0; i < z.size(); ++i) noise[i] += z[i];
    return noise;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("qcmc_test_beltrami_" + name);
}

} // namespace

TEST_CASE("affine maps have analytic derivatives") {
    std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    const auto tri = TriMesh::from_arrays(v, {{0, 1, 2}});
    const auto z = tri.planar_positions();

    auto d = face_derivatives(tri, apply(z, 2.0, 0.0));
    CHECK(std::abs(d.fz[0] - 2.0) < 1e-14);
    CHECK(std::abs(d.fzbar[0]) < 1e-14);

    const auto grid = oracle::jittered_grid(4, 3, 0.25, 9);
    const auto g = grid.planar_positions();
    d = face_derivatives(grid, apply(g, 1.0, 0.5));
    for (std::size_t j = 0; j < grid.face_count(); ++j) {
        CHECK(std::abs(d.fz[j] - 1.0) < 1e-12);
        CHECK(std::abs(d.fzbar[j] - 0.5) < 1e-12);
    }
    d = face_derivatives(grid, apply(g, 0.0, 1.0));
    for (std::size_t j = 0; j < grid.face_count(); ++j) {
        CHECK(std::abs(d.fz[j]) < 1e-12);
        CHECK(std::abs(d.fzbar[j] - 1.0) < 1e-12);
    }
}

TEST_CASE("Beltrami coefficient of identity, affine and anticonformal maps") {
    for (const auto& mesh : {oracle::jittered_grid(6, 5, 0.3, 1), shapes::annulus(0.4, 1.0, 5, 30),
                             shapes::hemisphere_cap(0.5, 4, 16)}) {
        ComplexMap id;
        if (mesh.is_planar()) {
            id = mesh.planar_positions();
            const auto mu = beltrami_coefficient(mesh, id);
            CHECK(mu.sup_norm() < 1e-12);
        }
    }
    const auto mesh = oracle::jittered_grid(6, 5, 0.3, 2);
    const auto z = mesh.planar_positions();
    const Complex a(1.3, -0.4), b(0.2, 0.5);
    const auto mu = beltrami_coefficient(mesh, apply(z, a, b));
    for (std::size_t j = 0; j < mesh.face_count(); ++j) CHECK(std::abs(mu[j] - b / a) < 1e-12);

    const auto plus = beltrami_coefficient(mesh, apply(z, 1.0, 0.5));
    for (std::size_t j = 0; j < mesh.face_count(); ++j) CHECK(std::abs(plus[j] - 0.5) < 1e-12);

    try {
        (void)beltrami_coefficient(mesh, apply(z, 0.0, 1.0));
        FAIL("conjugation must be rejected");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate);
    }
}

TEST_CASE("maximal dilation") {
    CHECK(maximal_dilation(BeltramiField::constant(5, 0.0)) == doctest::Approx(1.0));
    CHECK(maximal_dilation(BeltramiField::constant(5, Complex(0.3, 0.4))) == doctest::Approx(3.0));
    CHECK_THROWS_AS((void)maximal_dilation(BeltramiField::constant(5, 1.0)), Error);
    double last = 0.0;
    for (double s = 0.0; s < 0.99; s += 0.07) {
        const double k = maximal_dilation(BeltramiField(std::vector<Complex>{0.0, std::polar(s, 1.0)}));
        CHECK(k >= last);
        CHECK((k == 1.0) == (s == 0.0));
        last = k;
    }
}

TEST_CASE("admissibility") {
    CHECK_NOTHROW(BeltramiField::constant(3, 0.99).require_admissible(3));
    CHECK_THROWS_AS(BeltramiField::constant(3, Complex(0.99, 0.3)).require_admissible(3), Error);
    try {
        BeltramiField::constant(3, 0.1).require_admissible(4);
        FAIL("size mismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::invalid_mu);
    }
}

TEST_CASE("composition identities") {
    const auto mesh = oracle::jittered_grid(5, 4, 0.3, 4);
    const auto f = perturb(mesh.planar_positions(), 0.08, 12);
    const auto mu_f = beltrami_coefficient(mesh, f);
    const auto d_f = face_derivatives(mesh, f);

    SUBCASE("mu_g = 0 leaves mu_f") {
        const auto c = compose_beltrami(mu_f, d_f, BeltramiField::constant(mesh.face_count(), 0.0));
        for (std::size_t j = 0; j < c.size(); ++j) CHECK(std::abs(c[j] - mu_f[j]) < 1e-14);
    }
    SUBCASE("conformal f with real positive fz passes mu_g through") {
        const auto z = mesh.planar_positions();
        const auto scaled = apply(z, 1.7, 0.0);
        const auto mu_g = BeltramiField(oracle::random_complex(mesh.face_count(), 0.5, 3));
        const auto c = compose_beltrami(beltrami_coefficient(mesh, scaled), face_derivatives(mesh, scaled), mu_g);
        for (std::size_t j = 0; j < c.size(); ++j) CHECK(std::abs(c[j] - mu_g[j]) < 1e-12);
    }
}

TEST_CASE("composition agrees with the explicitly composed piecewise-affine map") {
    // 10 faces; g lives on the image mesh f(mesh) so g o f is affine per face.
    const auto mesh = oracle::jittered_grid(5, 1, 0.2, 21);
    REQUIRE(mesh.face_count() == 10);
    for (unsigned seed = 0; seed < 20; ++seed) {
        const auto z = mesh.planar_positions();
        const auto f = perturb(apply(z, Complex(1.0, 0.3), 0.2), 0.05, 100 + seed);
        const auto image = mesh.with_planar_positions(f);
        const auto w = image.planar_positions();
        const auto g = perturb(apply(w, Complex(0.8, -0.5), Complex(0.1, 0.15)), 0.05, 200 + seed);

        const auto mu_f = beltrami_coefficient(mesh, f);
        const auto mu_g = beltrami_coefficient(image, g);
        REQUIRE(mu_f.sup_norm() < 0.5);
        REQUIRE(mu_g.sup_norm() < 0.5);

        const auto sampled = sample_at_image_barycenters(image, mu_g, mesh.faces(), f);
        for (std::size_t j = 0; j < sampled.size(); ++j) CHECK(sampled[j] == mu_g[j]);

        const auto composed = compose_beltrami(mu_f, face_derivatives(mesh, f), sampled);
        const auto direct = beltrami_coefficient(mesh, g);  // g o f evaluated at the vertices
        for (std::size_t j = 0; j < direct.size(); ++j) CHECK(std::abs(composed[j] - direct[j]) < 1e-10);
    }
}

TEST_CASE("transfer target") {
    const auto mesh = oracle::jittered_grid(4, 3, 0.2, 8);
    const auto z = mesh.planar_positions();

    SUBCASE("mu equal to mu_phi gives zero") {
        const auto phi = perturb(z, 0.1, 5);
        const auto mu_phi = beltrami_coefficient(mesh, phi);
        const auto nu = transfer_target(mu_phi, mu_phi, face_derivatives(mesh, phi));
        CHECK(nu.sup_norm() < 1e-15);
    }
    SUBCASE("identity flattening returns mu") {
        const auto mu = BeltramiField(oracle::random_complex(mesh.face_count(), 0.7, 9));
        const auto nu = transfer_target(mu, beltrami_coefficient(mesh, z), face_derivatives(mesh, z));
        for (std::size_t j = 0; j < nu.size(); ++j) CHECK(std::abs(nu[j] - mu[j]) < 1e-14);
    }
    SUBCASE("conformal target through a 0.2 stretch") {
        const auto phi = apply(z, 1.0, 0.2);
        const auto mu_phi = beltrami_coefficient(mesh, phi);
        const auto d_phi = face_derivatives(mesh, phi);
        const auto nu = transfer_target(BeltramiField::constant(mesh.face_count(), 0.0), mu_phi, d_phi);
        for (std::size_t j = 0; j < nu.size(); ++j) CHECK(std::abs(nu[j] - (-0.2)) < 1e-12);

        // g(w) = w - 0.2 conj(w) has coefficient nu; g o phi = 0.96 z is conformal.
        const auto composed = apply(phi, 1.0, -0.2);
        for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(composed[i] - 0.96 * z[i]) < 1e-12);
        CHECK(beltrami_coefficient(mesh, composed).sup_norm() < 1e-12);
        CHECK(compose_beltrami(mu_phi, d_phi, nu).sup_norm() < 1e-12);
    }
    SUBCASE("admissible inputs stay admissible") {
        for (unsigned seed = 0; seed < 20; ++seed) {
            const auto phi = perturb(z, 0.2, 60 + seed);
            const auto mu_phi = beltrami_coefficient(mesh, phi);
            if (mu_phi.sup_norm() >= 1.0) continue;
            const BeltramiField mu(oracle::random_complex(mesh.face_count(), 0.95, 90 + seed));
            CHECK(transfer_target(mu, mu_phi, face_derivatives(mesh, phi)).sup_norm() < 1.0);
        }
    }
}

TEST_CASE("bounded coefficient implies no flips") {
    const auto mesh = shapes::disk_with_holes({Circle{{0.2, 0.0}, 0.3}}, 0.1);
    for (unsigned seed = 0; seed < 30; ++seed) {
        const auto g = perturb(mesh.planar_positions(), 0.04, seed);
        const auto d = face_derivatives(mesh, g);
        bool bounded = true;
        for (std::size_t j = 0; j < d.fz.size(); ++j) bounded = bounded && std::abs(d.fzbar[j]) < std::abs(d.fz[j]);
        if (bounded) CHECK(flip_count(mesh, g) == 0);
    }
}

TEST_CASE("Beltrami CSV") {
    const auto path = temp_file("mu.csv");
    const BeltramiField mu(std::vector<Complex>{{0.1, 0.2}, {-0.3, 0.0}, {0.0, 0.45}});
    write_beltrami_csv(path, mu);
    const auto back = read_beltrami_csv(path, 3);
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(back[j] - mu[j]) < 1e-15);

    auto expect_kind = [&](const std::string& body, ErrorKind kind) {
        std::ofstream(path) << body;
        try {
            (void)read_beltrami_csv(path, 3);
            FAIL("expected failure for: " << body);
        } catch (const Error& e) {
            CHECK(e.kind() == kind);
        }
    };
    expect_kind("face_index,re,im\n0,0,0\n1,0,0\n1,0,0\n", ErrorKind::parse);
    expect_kind("face_index,re,im\n0,0,0\n1,0,0\n", ErrorKind::parse);
    expect_kind("face_index,re,im\n0,0,0\n1,0,0\n5,0,0\n", ErrorKind::parse);
    expect_kind("index,re,im\n0,0,0\n1,0,0\n2,0,0\n", ErrorKind::parse);
    expect_kind("face_index,re,im\n0,0,0\n1,0.99,0.3\n2,0,0\n", ErrorKind::invalid_mu);
    std::filesystem::remove(path);
}
