#include "qcmc/conformal_module.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qcmc/error.hpp"

namespace qcmc {

std::string ConformalModule::violation() const {
    if (radii.size() != centers.size()) return "radii and centers differ in length";
    for (std::size_t i = 0; i < radii.size(); ++i) {
        std::ostringstream msg;
        if (!(radii[i] > 0.0 && radii[i] < 1.0)) {
            msg << "radius " << i << " = " << radii[i] << " outside (0, 1)";
            return msg.str();
        }
        if (!(std::abs(centers[i]) + radii[i] < 1.0)) {
            msg << "circle " << i << " is not inside the unit disk";
            return msg.str();
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (!(std::abs(centers[i] - centers[j]) > radii[i] + radii[j])) {
                msg << "circles " << j << " and " << i << " overlap";
                return msg.str();
            }
        }
    }
    return {};
}

Circle fit_circle(std::span<const Complex> points) {
    if (points.size() < 3) throw Error(ErrorKind::degenerate, "circle fit needs at least 3 points");
    Complex mean(0.0, 0.0);
    for (const auto& p : points) mean += p;
    mean /= static_cast<double>(points.size());
    double scale = 0.0;
    for (const auto& p : points) scale = std::max(scale, std::abs(p - mean));
    if (!(scale > 0.0)) throw Error(ErrorKind::degenerate, "circle fit on coincident points");

    // x^2 + y^2 + D x + E y + F = 0 in centered, scaled coordinates.
    Eigen::MatrixXd design(points.size(), 3);
    Eigen::VectorXd rhs(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Complex q = (points[i] - mean) / scale;
        design(static_cast<Eigen::Index>(i), 0) = q.real();
        design(static_cast<Eigen::Index>(i), 1) = q.imag();
        design(static_cast<Eigen::Index>(i), 2) = 1.0;
        rhs(static_cast<Eigen::Index>(i)) = -std::norm(q);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw Error(ErrorKind::degenerate, "circle fit on collinear points");
    const Eigen::Vector3d sol = qr.solve(rhs);
    const Complex center(-0.5 * sol(0), -0.5 * sol(1));
    const double r2 = std::norm(center) - sol(2);
    if (!(r2 > 0.0) || !std::isfinite(r2)) throw Error(ErrorKind::degenerate, "circle fit is degenerate");
    return {mean + scale * center, scale * std::sqrt(r2)};
}

std::vector<Circle> fit_loop_circles(const TriMesh& mesh) {
    const auto pos = mesh.planar_positions();
    std::vector<Circle> fits;
    fits.reserve(mesh.boundary_loops().size());
    for (const auto& loop : mesh.boundary_loops()) {
        std::vector<Complex> pts;
        pts.reserve(loop.size());
        for (const auto v : loop) pts.push_back(pos[v]);
        fits.push_back(fit_circle(pts));
    }
    return fits;
}

namespace {

// Clamps circle i in place; returns true if anything changed.
bool clamp_circle(double& r, Complex& c, const ModuleLimits& limits) {
    bool clamped = false;
    const double r_max = 1.0 - 2.0 * limits.margin;
    if (!(r >= limits.min_radius)) {
        r = limits.min_radius;
        clamped = true;
    } else if (r > r_max) {
        r = r_max;
        clamped = true;
    }
    const double reach = 1.0 - limits.margin - r;
    if (std::abs(c) > reach) {
        c = std::polar(reach, std::arg(c));
        clamped = true;
    }
    return clamped;
}

bool separated(const ConformalModule& m, std::size_t i, std::size_t j, double margin) {
    return std::abs(m.centers[i] - m.centers[j]) > m.radii[i] + m.radii[j] + margin;
}

} // namespace

ConformalModule initial_module(const TriMesh& mesh, const ModuleLimits& limits) {
    const auto fits = fit_loop_circles(mesh);
    const Circle outer = fits.front();
    ConformalModule module;
    for (std::size_t k = 1; k < fits.size(); ++k) {
        double r = fits[k].radius / outer.radius;
        Complex c = (fits[k].center - outer.center) / outer.radius;
        clamp_circle(r, c, limits);
        module.radii.push_back(r);
        module.centers.push_back(c);
    }
    for (std::size_t i = 0; i < module.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (!separated(module, i, j, limits.margin)) {
                throw Error(ErrorKind::topology, "fitted inner circles " + std::to_string(j) + " and " +
                                                     std::to_string(i) + " overlap after normalization");
            }
        }
    }
    return module;
}

ModuleUpdateResult apply_update(const ConformalModule& module, const ModuleUpdate& update, double damping,
                                const ModuleLimits& limits) {
    const std::size_t n = module.size();
    if (update.delta_centers.size() != n || update.delta_radii.size() != n) {
        throw Error(ErrorKind::config, "module update size does not match module");
    }
    ModuleUpdateResult result{module, 0};
    auto& out = result.module;
    for (std::size_t i = 0; i < n; ++i) {
        out.radii[i] += damping * update.delta_radii[i];
        out.centers[i] += damping * update.delta_centers[i];
        if (clamp_circle(out.radii[i], out.centers[i], limits)) ++result.clamp_events;
    }
    // Reverting a pair can create a new overlap with a circle checked earlier.
    for (bool reverted = true; reverted;) {
        reverted = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (separated(out, i, j, limits.margin)) continue;
                const bool unchanged = out.radii[i] == module.radii[i] && out.centers[i] == module.centers[i] &&
                                       out.radii[j] == module.radii[j] && out.centers[j] == module.centers[j];
                if (unchanged) continue;
                out.radii[i] = module.radii[i];
                out.centers[i] = module.centers[i];
                out.radii[j] = module.radii[j];
                out.centers[j] = module.centers[j];
                ++result.clamp_events;
                reverted = true;
            }
        }
    }
    return result;
}

void to_json(nlohmann::json& j, const ConformalModule& m) {
    j = nlohmann::json::object();
    j["radii"] = m.radii;
    auto centers = nlohmann::json::array();
    for (const auto& c : m.centers) centers.push_back({c.real(), c.imag()});
    j["centers"] = centers;
}

void from_json(const nlohmann::json& j, ConformalModule& m) {
    m.radii = j.at("radii").get<std::vector<double>>();
    m.centers.clear();
    for (const auto& c : j.at("centers")) m.centers.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
}

void write_module_json(const std::filesystem::path& path, const ConformalModule& module) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << nlohmann::json(module).dump(2) << '\n';
}

} // namespace qcmc
