#include "qcmc/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "qcmc/error.hpp"
#include "qcmc/simd/kernels.hpp"

namespace qcmc {

double BeltramiField::sup_norm() const noexcept {
    double s = 0.0;
    for (const auto& v : values) s = std::max(s, std::abs(v));
    return s;
}

void BeltramiField::require_admissible(std::size_t faces) const {
    if (faces != 0 && values.size() != faces) {
        throw Error(ErrorKind::invalid_mu, "Beltrami field has " + std::to_string(values.size()) +
                                               " values for " + std::to_string(faces) + " faces");
    }
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!std::isfinite(values[j].real()) || !std::isfinite(values[j].imag()) || !(std::abs(values[j]) < 1.0)) {
            std::ostringstream msg;
            msg << "Beltrami coefficient on face " << j << " has modulus " << std::abs(values[j])
                << " (must be < 1)";
            throw Error(ErrorKind::invalid_mu, msg.str());
        }
    }
}

std::vector<Complex> FaceDerivatives::rotation_factors() const {
    std::vector<Complex> r(fz.size());
    for (std::size_t j = 0; j < fz.size(); ++j) {
        if (fz[j] == Complex(0.0, 0.0)) {
            throw Error(ErrorKind::degenerate, "fz vanishes on face " + std::to_string(j));
        }
        r[j] = std::conj(fz[j]) / fz[j];
    }
    return r;
}

FaceDerivatives face_derivatives(std::span<const FaceFrame> frames, std::span<const Face> faces,
                                 std::span<const Complex> map) {
    if (frames.size() != faces.size()) throw Error(ErrorKind::config, "frame count does not match face count");
    const simd::FaceBasis basis(frames);
    const auto edges = simd::EdgeImages::gather(faces, map);
    simd::ComplexArrays fz(faces.size());
    simd::ComplexArrays fzbar(faces.size());
    simd::active_kernels().derivatives(basis.view(), edges.view(), fz.out(), fzbar.out());
    return {fz.to_complex(), fzbar.to_complex()};
}

FaceDerivatives face_derivatives(const TriMesh& mesh, std::span<const Complex> map) {
    if (map.size() != mesh.vertex_count()) throw Error(ErrorKind::config, "map size does not match vertex count");
    const auto frames = mesh.face_frames();
    return face_derivatives(frames, mesh.faces(), map);
}

BeltramiField beltrami_from_derivatives(const FaceDerivatives& derivs) {
    const std::size_t m = derivs.fz.size();
    for (std::size_t j = 0; j < m; ++j) {
        const double scale = std::abs(derivs.fz[j]) + std::abs(derivs.fzbar[j]);
        if (!(std::abs(derivs.fz[j]) > 1e-12 * scale)) {
            throw Error(ErrorKind::degenerate,
                        "fz vanishes on face " + std::to_string(j) + "; map is locally degenerate");
        }
    }
    const auto num = simd::ComplexArrays::from(derivs.fzbar);
    const auto den = simd::ComplexArrays::from(derivs.fz);
    simd::ComplexArrays out(m);
    simd::active_kernels().ratio(m, num.in(), den.in(), out.out());
    return BeltramiField(out.to_complex());
}

BeltramiField beltrami_coefficient(std::span<const FaceFrame> frames, std::span<const Face> faces,
                                   std::span<const Complex> map) {
    return beltrami_from_derivatives(face_derivatives(frames, faces, map));
}

BeltramiField beltrami_coefficient(const TriMesh& mesh, std::span<const Complex> map) {
    return beltrami_from_derivatives(face_derivatives(mesh, map));
}

double maximal_dilation(const BeltramiField& mu) {
    const double s = mu.sup_norm();
    if (!(s < 1.0)) throw Error(ErrorKind::invalid_mu, "maximal dilation undefined for sup-norm >= 1");
    return (1.0 + s) / (1.0 - s);
}

BeltramiField compose_beltrami(const BeltramiField& mu_f, const FaceDerivatives& derivs_f,
                               const BeltramiField& mu_g_on_image) {
    const std::size_t m = mu_f.size();
    if (derivs_f.fz.size() != m || mu_g_on_image.size() != m) {
        throw Error(ErrorKind::config, "compose_beltrami: field sizes differ");
    }
    mu_f.require_admissible();
    mu_g_on_image.require_admissible();
    const auto r = derivs_f.rotation_factors();
    std::vector<Complex> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        const Complex g = r[j] * mu_g_on_image[j];
        const Complex den = 1.0 + std::conj(mu_f[j]) * g;
        if (std::abs(den) < 1e-14) {
            throw Error(ErrorKind::degenerate, "near-degenerate composition on face " + std::to_string(j));
        }
        out[j] = (mu_f[j] + g) / den;
    }
    return BeltramiField(std::move(out));
}

BeltramiField transfer_target(const BeltramiField& mu, const BeltramiField& mu_phi, const FaceDerivatives& derivs_phi) {
    const std::size_t m = mu.size();
    if (mu_phi.size() != m || derivs_phi.fz.size() != m) {
        throw Error(ErrorKind::config, "transfer_target: field sizes differ");
    }
    mu.require_admissible();
    mu_phi.require_admissible();
    const auto r = derivs_phi.rotation_factors();
    std::vector<Complex> nu(m);
    for (std::size_t j = 0; j < m; ++j) {
        const Complex den = 1.0 - mu[j] * std::conj(mu_phi[j]);
        if (!(std::abs(den) > 1e-14)) {
            throw Error(ErrorKind::degenerate, "transfer denominator underflow on face " + std::to_string(j));
        }
        nu[j] = (mu[j] - mu_phi[j]) / (den * r[j]);
    }
    BeltramiField out(std::move(nu));
    if (!(out.sup_norm() < 1.0)) {
        throw Error(ErrorKind::invalid_mu, "transferred target has sup-norm >= 1; unreachable through this flattening");
    }
    return out;
}

namespace {

// Uniform grid over face bounding boxes for point location.
class FaceLocator {
public:
    FaceLocator(std::span<const Complex> pos, std::span<const Face> faces) : pos_(pos), faces_(faces) {
        lo_ = hi_ = pos.empty() ? Complex() : pos.front();
        for (const auto& p : pos) {
            lo_ = {std::min(lo_.real(), p.real()), std::min(lo_.imag(), p.imag())};
            hi_ = {std::max(hi_.real(), p.real()), std::max(hi_.imag(), p.imag())};
        }
        res_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(faces.size()))));
        cells_.resize(res_ * res_);
        for (std::size_t j = 0; j < faces.size(); ++j) {
            Complex flo = pos[faces[j][0]];
            Complex fhi = flo;
            for (const auto v : faces[j]) {
                flo = {std::min(flo.real(), pos[v].real()), std::min(flo.imag(), pos[v].imag())};
                fhi = {std::max(fhi.real(), pos[v].real()), std::max(fhi.imag(), pos[v].imag())};
            }
            const auto [x0, y0] = cell(flo);
            const auto [x1, y1] = cell(fhi);
            for (std::size_t y = y0; y <= y1; ++y) {
                for (std::size_t x = x0; x <= x1; ++x) cells_[y * res_ + x].push_back(static_cast<std::uint32_t>(j));
            }
        }
    }

    [[nodiscard]] std::size_t locate(Complex p) const {
        const auto [x, y] = cell(p);
        std::size_t best = faces_.size();
        double best_slack = -std::numeric_limits<double>::infinity();
        for (const auto j : cells_[y * res_ + x]) {
            const double s = containment_slack(j, p);
            if (s > best_slack) {
                best_slack = s;
                best = j;
            }
        }
        if (best < faces_.size() && best_slack >= -1e-12) return best;
        // Outside the mesh: nearest centroid.
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < faces_.size(); ++j) {
            const Complex c = (pos_[faces_[j][0]] + pos_[faces_[j][1]] + pos_[faces_[j][2]]) / 3.0;
            const double d = std::norm(c - p);
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        return best;
    }

private:
    [[nodiscard]] std::pair<std::size_t, std::size_t> cell(Complex p) const {
        auto idx = [&](double v, double lo, double hi) {
            const double span = hi - lo;
            if (!(span > 0.0)) return std::size_t{0};
            const double t = std::clamp((v - lo) / span, 0.0, 1.0);
            return std::min(res_ - 1, static_cast<std::size_t>(t * static_cast<double>(res_)));
        };
        return {idx(p.real(), lo_.real(), hi_.real()), idx(p.imag(), lo_.imag(), hi_.imag())};
    }

    // Smallest normalized barycentric coordinate of p in face j.
    [[nodiscard]] double containment_slack(std::size_t j, Complex p) const {
        const Complex a = pos_[faces_[j][0]];
        const Complex b = pos_[faces_[j][1]];
        const Complex c = pos_[faces_[j][2]];
        const double total = signed_area(a, b, c);
        return std::min({signed_area(p, b, c), signed_area(a, p, c), signed_area(a, b, p)}) / total;
    }

    std::span<const Complex> pos_;
    std::span<const Face> faces_;
    Complex lo_, hi_;
    std::size_t res_ = 1;
    std::vector<std::vector<std::uint32_t>> cells_;
};

} // namespace

BeltramiField sample_at_image_barycenters(const TriMesh& image_mesh, const BeltramiField& field,
                                          std::span<const Face> source_faces, std::span<const Complex> map) {
    if (field.size() != image_mesh.face_count()) throw Error(ErrorKind::config, "field does not match image mesh");
    const auto pos = image_mesh.planar_positions();
    const FaceLocator locator(pos, image_mesh.faces());
    std::vector<Complex> out(source_faces.size());
    for (std::size_t j = 0; j < source_faces.size(); ++j) {
        const auto& f = source_faces[j];
        const Complex bary = (map[f[0]] + map[f[1]] + map[f[2]]) / 3.0;
        out[j] = field[locator.locate(bary)];
    }
    return BeltramiField(std::move(out));
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

BeltramiField read_beltrami_csv(const std::filesystem::path& path, std::size_t faces) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != "face_index,re,im") {
        throw Error(ErrorKind::parse, path.string() + ": expected header 'face_index,re,im'");
    }
    std::vector<Complex> values(faces);
    std::vector<char> seen(faces, 0);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        std::string idx_s, re_s, im_s;
        if (!std::getline(ss, idx_s, ',') || !std::getline(ss, re_s, ',') || !std::getline(ss, im_s)) {
            throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": expected 3 columns");
        }
        long long idx = -1;
        double re = 0.0;
        double im = 0.0;
        try {
            std::size_t used = 0;
            idx = std::stoll(trim(idx_s), &used);
            re = std::stod(trim(re_s));
            im = std::stod(trim(im_s));
        } catch (const std::exception&) {
            throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": malformed number");
        }
        if (idx < 0 || static_cast<std::size_t>(idx) >= faces) {
            throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": face index out of range");
        }
        if (seen[static_cast<std::size_t>(idx)]) {
            throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": duplicate face index");
        }
        seen[static_cast<std::size_t>(idx)] = 1;
        values[static_cast<std::size_t>(idx)] = Complex(re, im);
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw Error(ErrorKind::parse, path.string() + ": not every face has a value");
    }
    BeltramiField mu(std::move(values));
    mu.require_admissible(faces);
    return mu;
}

void write_beltrami_csv(const std::filesystem::path& path, const BeltramiField& mu) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << std::setprecision(17) << "face_index,re,im\n";
    for (std::size_t j = 0; j < mu.size(); ++j) out << j << ',' << mu[j].real() << ',' << mu[j].imag() << '\n';
}

} // namespace qcmc
