#include "qcmc/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "qcmc/error.hpp"

namespace qcmc::shapes {
namespace {

constexpr double kPi = std::numbers::pi;

void add_quad(std::vector<Face>& faces, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
    // a-b-c-d counterclockwise
    faces.push_back({a, b, c});
    faces.push_back({a, c, d});
}

bool inside_polygon(Complex p, std::span<const Complex> poly) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Complex a = poly[i];
        const Complex b = poly[j];
        if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
            const double x = (b.real() - a.real()) * (p.imag() - a.imag()) / (b.imag() - a.imag()) + a.real();
            if (p.real() < x) inside = !inside;
        }
    }
    return inside;
}

double distance_to_polyline(Complex p, std::span<const Complex> poly) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Complex a = poly[i];
        const Complex b = poly[(i + 1) % poly.size()];
        const Complex ab = b - a;
        const double t = std::clamp(((p - a) * std::conj(ab)).real() / std::norm(ab), 0.0, 1.0);
        best = std::min(best, std::abs(p - (a + t * ab)));
    }
    return best;
}

struct Triangle {
    std::array<std::uint32_t, 3> v;
    Complex center;
    double radius2;
    bool alive;
};

Triangle make_triangle(const std::vector<Complex>& pts, std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    if (signed_area(pts[a], pts[b], pts[c]) < 0.0) std::swap(b, c);
    const Complex pa = pts[a];
    const Complex u = pts[b] - pa;
    const Complex w = pts[c] - pa;
    const double d = 2.0 * (u.real() * w.imag() - u.imag() * w.real());
    const Complex center = pa + Complex(w.imag() * std::norm(u) - u.imag() * std::norm(w),
                                        u.real() * std::norm(w) - w.real() * std::norm(u)) / d;
    return {{a, b, c}, center, std::norm(pts[a] - center), true};
}

// Bowyer-Watson over `pts`, inserting in `order`; returns counterclockwise triangles.
std::vector<Face> delaunay(std::vector<Complex> pts, std::span<const std::uint32_t> order) {
    const std::size_t n = pts.size();
    Complex lo = pts.front();
    Complex hi = pts.front();
    for (const auto& p : pts) {
        lo = {std::min(lo.real(), p.real()), std::min(lo.imag(), p.imag())};
        hi = {std::max(hi.real(), p.real()), std::max(hi.imag(), p.imag())};
    }
    const Complex mid = 0.5 * (lo + hi);
    const double extent = 20.0 * std::max({hi.real() - lo.real(), hi.imag() - lo.imag(), 1e-9});
    pts.push_back(mid + Complex(-extent, -extent));
    pts.push_back(mid + Complex(extent, -extent));
    pts.push_back(mid + Complex(0.0, extent));
    const auto s0 = static_cast<std::uint32_t>(n);

    std::vector<Triangle> tris{make_triangle(pts, s0, s0 + 1, s0 + 2)};
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (const std::uint32_t i : order) {
        const Complex p = pts[i];
        edges.clear();
        for (auto& t : tris) {
            if (!t.alive || std::norm(p - t.center) >= t.radius2) continue;
            t.alive = false;
            for (int k = 0; k < 3; ++k) edges.emplace_back(t.v[k], t.v[(k + 1) % 3]);
        }
        // Cavity boundary: directed edges whose reverse is not in the cavity.
        std::map<std::pair<std::uint32_t, std::uint32_t>, int> count;
        for (const auto& [a, b] : edges) ++count[{std::min(a, b), std::max(a, b)}];
        for (const auto& [a, b] : edges) {
            if (count[{std::min(a, b), std::max(a, b)}] == 1) tris.push_back(make_triangle(pts, a, b, i));
        }
        if (tris.size() > 4 * n + 64) {
            std::erase_if(tris, [](const Triangle& t) { return !t.alive; });
        }
    }
    std::vector<Face> out;
    for (const auto& t : tris) {
        if (!t.alive || t.v[0] >= s0 || t.v[1] >= s0 || t.v[2] >= s0) continue;
        out.push_back({t.v[0], t.v[1], t.v[2]});
    }
    return out;
}

// Angle at fraction s of a full turn; nonzero warp bunches samples toward angle pi.
double warped_angle(double s, double warp) {
    const double phi = 2.0 * kPi * s;
    return phi + warp * std::sin(phi);
}

} // namespace

TriMesh annulus(double inner_radius, double outer_radius, std::size_t rings, std::size_t sectors, double warp) {
    if (!(inner_radius > 0.0 && outer_radius > inner_radius) || rings < 1 || sectors < 3 || !(std::abs(warp) < 1.0)) {
        throw Error(ErrorKind::config, "invalid annulus parameters");
    }
    std::vector<Vec3> verts;
    // Outer ring first so the outer loop starts at vertex 0.
    for (std::size_t i = 0; i <= rings; ++i) {
        const double t = 1.0 - static_cast<double>(i) / static_cast<double>(rings);
        const double r = inner_radius * std::pow(outer_radius / inner_radius, t);
        for (std::size_t j = 0; j < sectors; ++j) {
            const double a = warped_angle(static_cast<double>(j) / static_cast<double>(sectors), warp);
            verts.push_back({r * std::cos(a), r * std::sin(a), 0.0});
        }
    }
    std::vector<Face> faces;
    auto id = [&](std::size_t i, std::size_t j) { return static_cast<std::uint32_t>(i * sectors + j % sectors); };
    for (std::size_t i = 0; i < rings; ++i) {
        for (std::size_t j = 0; j < sectors; ++j) {
            // ring i is outside ring i+1
            add_quad(faces, id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), id(i, j));
        }
    }
    return TriMesh::from_arrays(std::move(verts), std::move(faces));
}

TriMesh disk(double radius, std::size_t rings, std::size_t sectors) {
    if (!(radius > 0.0) || rings < 1 || sectors < 3) throw Error(ErrorKind::config, "invalid disk parameters");
    std::vector<Vec3> verts{{0.0, 0.0, 0.0}};
    for (std::size_t i = 1; i <= rings; ++i) {
        const double r = radius * static_cast<double>(i) / static_cast<double>(rings);
        for (std::size_t j = 0; j < sectors; ++j) {
            const double a = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(sectors);
            verts.push_back({r * std::cos(a), r * std::sin(a), 0.0});
        }
    }
    auto id = [&](std::size_t i, std::size_t j) { return static_cast<std::uint32_t>(1 + (i - 1) * sectors + j % sectors); };
    std::vector<Face> faces;
    for (std::size_t j = 0; j < sectors; ++j) faces.push_back({0, id(1, j), id(1, j + 1)});
    for (std::size_t i = 1; i < rings; ++i) {
        for (std::size_t j = 0; j < sectors; ++j) add_quad(faces, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
    }
    return TriMesh::from_arrays(std::move(verts), std::move(faces));
}

std::vector<Complex> sample_circle(const Circle& circle, double spacing, double warp) {
    if (!(std::abs(warp) < 1.0)) throw Error(ErrorKind::config, "warp must lie in (-1, 1)");
    const auto count = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(2.0 * kPi * circle.radius / spacing)));
    std::vector<Complex> out(count);
    for (std::size_t k = 0; k < count; ++k) {
        out[k] = circle.center +
                 std::polar(circle.radius, warped_angle(static_cast<double>(k) / static_cast<double>(count), warp));
    }
    return out;
}

std::vector<Complex> sample_square(double side, double spacing) {
    const double h = 0.5 * side;
    const auto per_side = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(side / spacing)));
    const std::array<Complex, 4> corners{Complex(-h, -h), Complex(h, -h), Complex(h, h), Complex(-h, h)};
    std::vector<Complex> out;
    for (std::size_t c = 0; c < 4; ++c) {
        const Complex a = corners[c];
        const Complex b = corners[(c + 1) % 4];
        for (std::size_t k = 0; k < per_side; ++k) {
            out.push_back(a + (b - a) * (static_cast<double>(k) / static_cast<double>(per_side)));
        }
    }
    return out;
}

TriMesh triangulate_domain(std::span<const Complex> outer, const std::vector<std::vector<Complex>>& holes,
                           double spacing, unsigned seed) {
    std::vector<Complex> pts(outer.begin(), outer.end());
    for (const auto& h : holes) pts.insert(pts.end(), h.begin(), h.end());
    const std::size_t boundary_count = pts.size();

    Complex lo = outer.front();
    Complex hi = outer.front();
    for (const auto& p : outer) {
        lo = {std::min(lo.real(), p.real()), std::min(lo.imag(), p.imag())};
        hi = {std::max(hi.real(), p.real()), std::max(hi.imag(), p.imag())};
    }
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.02 * spacing, 0.02 * spacing);
    const double row_height = spacing * std::sqrt(3.0) / 2.0;
    const double clearance = 0.75 * spacing;
    std::size_t row = 0;
    for (double y = lo.imag(); y <= hi.imag(); y += row_height, ++row) {
        const double offset = (row % 2 == 1) ? 0.5 * spacing : 0.0;
        for (double x = lo.real() + offset; x <= hi.real(); x += spacing) {
            const Complex p(x + jitter(rng), y + jitter(rng));
            if (!inside_polygon(p, outer) || distance_to_polyline(p, outer) < clearance) continue;
            bool keep = true;
            for (const auto& h : holes) {
                if (inside_polygon(p, h) || distance_to_polyline(p, h) < clearance) {
                    keep = false;
                    break;
                }
            }
            if (keep) pts.push_back(p);
        }
    }
    const std::size_t interior_end = pts.size();
    // A helper point inside each hole keeps cocircular hole samples from forming triangles.
    for (const auto& h : holes) {
        Complex c(0.0, 0.0);
        for (const auto& p : h) c += p;
        c /= static_cast<double>(h.size());
        if (inside_polygon(c, h)) pts.push_back(c);
    }

    // Interior first, then hole helpers, then the (cocircular or collinear) boundary samples.
    std::vector<std::uint32_t> order;
    order.reserve(pts.size());
    for (std::size_t i = boundary_count; i < interior_end; ++i) order.push_back(static_cast<std::uint32_t>(i));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = interior_end; i < pts.size(); ++i) order.push_back(static_cast<std::uint32_t>(i));
    for (std::size_t i = boundary_count; i-- > 0;) order.push_back(static_cast<std::uint32_t>(i));

    auto faces = delaunay(pts, order);
    std::erase_if(faces, [&](const Face& f) {
        const Complex c = (pts[f[0]] + pts[f[1]] + pts[f[2]]) / 3.0;
        if (!inside_polygon(c, outer)) return true;
        return std::any_of(holes.begin(), holes.end(), [&](const auto& h) { return inside_polygon(c, h); });
    });

    std::vector<std::int64_t> remap(pts.size(), -1);
    for (const auto& f : faces) {
        for (const auto v : f) remap[v] = 0;
    }
    std::vector<Vec3> verts;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (remap[i] < 0) continue;
        remap[i] = static_cast<std::int64_t>(verts.size());
        verts.push_back({pts[i].real(), pts[i].imag(), 0.0});
    }
    for (auto& f : faces) {
        for (auto& v : f) v = static_cast<std::uint32_t>(remap[v]);
    }
    return TriMesh::from_arrays(std::move(verts), std::move(faces));
}

TriMesh disk_with_holes(const std::vector<Circle>& holes, double spacing, double warp) {
    const auto outer = sample_circle({Complex(0.0, 0.0), 1.0}, spacing, warp);
    std::vector<std::vector<Complex>> hole_pts;
    for (const auto& h : holes) hole_pts.push_back(sample_circle(h, spacing, warp));
    return triangulate_domain(outer, hole_pts, spacing);
}

TriMesh square_with_holes(double side, const std::vector<Circle>& holes, double spacing) {
    const auto outer = sample_square(side, spacing);
    std::vector<std::vector<Complex>> hole_pts;
    for (const auto& h : holes) hole_pts.push_back(sample_circle(h, spacing));
    return triangulate_domain(outer, hole_pts, spacing);
}

TriMesh hemisphere_cap(double hole_angle, std::size_t rings, std::size_t sectors) {
    if (!(hole_angle > 0.0 && hole_angle < kPi / 2) || rings < 1 || sectors < 3) {
        throw Error(ErrorKind::config, "invalid hemisphere parameters");
    }
    std::vector<Vec3> verts;
    for (std::size_t i = 0; i <= rings; ++i) {
        const double polar = kPi / 2 - (kPi / 2 - hole_angle) * static_cast<double>(i) / static_cast<double>(rings);
        for (std::size_t j = 0; j < sectors; ++j) {
            const double a = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(sectors);
            verts.push_back({std::sin(polar) * std::cos(a), std::sin(polar) * std::sin(a), std::cos(polar)});
        }
    }
    std::vector<Face> faces;
    auto id = [&](std::size_t i, std::size_t j) { return static_cast<std::uint32_t>(i * sectors + j % sectors); };
    for (std::size_t i = 0; i < rings; ++i) {
        for (std::size_t j = 0; j < sectors; ++j) add_quad(faces, id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), id(i, j));
    }
    return TriMesh::from_arrays(std::move(verts), std::move(faces));
}

TriMesh cylinder_strip(double length, double width, double radius, std::size_t nu, std::size_t nv) {
    if (!(length > 0.0 && width > 0.0 && radius > 0.0) || nu < 1 || nv < 1) {
        throw Error(ErrorKind::config, "invalid strip parameters");
    }
    std::vector<Vec3> verts;
    for (std::size_t j = 0; j <= nv; ++j) {
        const double y = width * static_cast<double>(j) / static_cast<double>(nv);
        for (std::size_t i = 0; i <= nu; ++i) {
            const double s = length * static_cast<double>(i) / static_cast<double>(nu);
            const double a = s / radius;
            verts.push_back({radius * std::sin(a), y, radius * (1.0 - std::cos(a))});
        }
    }
    auto id = [&](std::size_t i, std::size_t j) { return static_cast<std::uint32_t>(j * (nu + 1) + i); };
    std::vector<Face> faces;
    for (std::size_t j = 0; j < nv; ++j) {
        for (std::size_t i = 0; i < nu; ++i) add_quad(faces, id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
    }
    return TriMesh::from_arrays(std::move(verts), std::move(faces));
}

} // namespace qcmc::shapes
