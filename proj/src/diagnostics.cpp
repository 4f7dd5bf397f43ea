#include "qcmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qcmc/error.hpp"

namespace qcmc {
namespace {

// Interior angle at a between edges to b and c; NaN if either edge vanishes.
double corner_angle(Complex a, Complex b, Complex c) {
    const Complex u = b - a;
    const Complex v = c - a;
    if (std::abs(u) == 0.0 || std::abs(v) == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::abs(std::arg(v / u));
}

} // namespace

AngleDistortion angle_distortion(const TriMesh& mesh, std::span<const Complex> map) {
    if (map.size() != mesh.vertex_count()) throw Error(ErrorKind::config, "map size does not match vertex count");
    const auto frames = mesh.face_frames();
    AngleDistortion out;
    out.per_corner.resize(3 * mesh.face_count());
    for (std::size_t j = 0; j < mesh.face_count(); ++j) {
        const auto& f = mesh.faces()[j];
        const bool degenerate = !(std::abs(signed_area(map[f[0]], map[f[1]], map[f[2]])) > 0.0);
        for (int k = 0; k < 3; ++k) {
            double d = std::numeric_limits<double>::quiet_NaN();
            if (!degenerate) {
                const double src = corner_angle(frames[j][k], frames[j][(k + 1) % 3], frames[j][(k + 2) % 3]);
                const double img = corner_angle(map[f[k]], map[f[(k + 1) % 3]], map[f[(k + 2) % 3]]);
                d = img - src;
            }
            if (std::isnan(d)) ++out.undefined;
            out.per_corner[3 * j + static_cast<std::size_t>(k)] = d;
        }
    }
    std::vector<double> magnitudes(out.per_corner.size());
    std::transform(out.per_corner.begin(), out.per_corner.end(), magnitudes.begin(), [](double d) { return std::abs(d); });
    const auto stats = describe(magnitudes);
    out.mean_abs = stats.mean;
    out.std_abs = stats.std;
    return out;
}

SampleStats describe(std::span<const double> samples) {
    SampleStats s;
    double sum = 0.0;
    for (const double x : samples) {
        if (std::isnan(x)) continue;
        sum += x;
        ++s.count;
    }
    if (s.count == 0) return s;
    s.mean = sum / static_cast<double>(s.count);
    double acc = 0.0;
    for (const double x : samples) {
        if (!std::isnan(x)) acc += (x - s.mean) * (x - s.mean);
    }
    s.std = std::sqrt(acc / static_cast<double>(s.count));
    return s;
}

Histogram make_histogram(std::string statistic, std::span<const double> samples, std::size_t bins) {
    if (bins == 0) throw Error(ErrorKind::config, "histogram needs at least one bin");
    Histogram h;
    h.statistic = std::move(statistic);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const double x : samples) {
        if (!std::isfinite(x)) continue;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (!(lo <= hi)) {
        lo = 0.0;
        hi = 1.0;
    } else if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    h.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
        h.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    }
    h.bin_edges.back() = hi;
    h.counts.assign(bins, 0);
    for (const double x : samples) {
        if (!std::isfinite(x)) continue;
        auto b = static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins));
        ++h.counts[std::min(b, bins - 1)];
    }
    return h;
}

std::vector<double> beltrami_error(const BeltramiField& mu_out, const BeltramiField& mu_target) {
    if (mu_out.size() != mu_target.size()) throw Error(ErrorKind::config, "Beltrami fields differ in size");
    std::vector<double> err(mu_out.size());
    for (std::size_t j = 0; j < err.size(); ++j) err[j] = std::abs(mu_out[j] - mu_target[j]);
    return err;
}

void to_json(nlohmann::json& j, const RunReport& r) {
    j = nlohmann::json{
        {"schema", r.schema},
        {"input", r.input},
        {"mesh_fingerprint", r.mesh_fingerprint},
        {"faces", r.faces},
        {"vertices", r.vertices},
        {"inner_loops", r.inner_loops},
        {"time_seconds", r.time_seconds},
        {"mu_error_mean", r.mu_error_mean},
        {"mu_error_std", r.mu_error_std},
        {"flips", r.flips},
        {"angle_distortion_mean", r.angle_distortion_mean},
        {"angle_distortion_std", r.angle_distortion_std},
        {"iterations", r.iterations},
        {"converged", r.converged},
        {"fixed_module", r.fixed_module},
        {"ill_posed", r.ill_posed},
        {"clamp_events", r.clamp_events},
        {"energy_initial", r.energy_initial},
        {"energy_final", r.energy_final},
        {"kernels", r.kernels},
        {"module", r.module},
    };
}

void from_json(const nlohmann::json& j, RunReport& r) {
    r.schema = j.at("schema").get<int>();
    if (r.schema != 1) throw Error(ErrorKind::parse, "unsupported report schema " + std::to_string(r.schema));
    j.at("input").get_to(r.input);
    j.at("mesh_fingerprint").get_to(r.mesh_fingerprint);
    j.at("faces").get_to(r.faces);
    j.at("vertices").get_to(r.vertices);
    j.at("inner_loops").get_to(r.inner_loops);
    j.at("time_seconds").get_to(r.time_seconds);
    j.at("mu_error_mean").get_to(r.mu_error_mean);
    j.at("mu_error_std").get_to(r.mu_error_std);
    j.at("flips").get_to(r.flips);
    j.at("angle_distortion_mean").get_to(r.angle_distortion_mean);
    j.at("angle_distortion_std").get_to(r.angle_distortion_std);
    j.at("iterations").get_to(r.iterations);
    j.at("converged").get_to(r.converged);
    j.at("fixed_module").get_to(r.fixed_module);
    j.at("ill_posed").get_to(r.ill_posed);
    j.at("clamp_events").get_to(r.clamp_events);
    j.at("energy_initial").get_to(r.energy_initial);
    j.at("energy_final").get_to(r.energy_final);
    j.at("kernels").get_to(r.kernels);
    j.at("module").get_to(r.module);
}

RunReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "missing run artifact " + path.string());
    try {
        return nlohmann::json::parse(in).get<RunReport>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
}

void write_report(const std::filesystem::path& path, const RunReport& report) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << nlohmann::json(report).dump(2) << '\n';
}

std::string mesh_fingerprint(const TriMesh& mesh) {
    // FNV-1a over the raw coordinate and index bytes.
    std::uint64_t hash = 1469598103934665603ULL;
    auto mix = [&](const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            hash ^= bytes[i];
            hash *= 1099511628211ULL;
        }
    };
    for (const auto& v : mesh.vertices()) mix(v.data(), sizeof(double) * 3);
    for (const auto& f : mesh.faces()) mix(f.data(), sizeof(std::uint32_t) * 3);
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << hash;
    return s.str();
}

void write_trace_csv(const std::filesystem::path& path, const SolveReport& report) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << std::setprecision(17) << "iter,energy,mu_diff\n";
    for (std::size_t i = 0; i < report.energy_trace.size(); ++i) {
        out << i << ',' << report.energy_trace[i] << ',';
        if (!std::isnan(report.mu_diff_trace[i])) out << report.mu_diff_trace[i];
        out << '\n';
    }
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& histogram) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << std::setprecision(17) << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < histogram.counts.size(); ++b) {
        out << histogram.bin_edges[b] << ',' << histogram.bin_edges[b + 1] << ',' << histogram.counts[b] << '\n';
    }
}

std::vector<CompareRow> compare_reports(const std::string& label_a, const RunReport& a, const std::string& label_b,
                                        const RunReport& b) {
    if (a.faces != b.faces || a.vertices != b.vertices || a.mesh_fingerprint != b.mesh_fingerprint) {
        throw Error(ErrorKind::config, "runs were computed on different meshes");
    }
    auto row = [](const std::string& label, const RunReport& r) {
        return CompareRow{label, r.angle_distortion_mean, r.angle_distortion_std, r.mu_error_mean, r.mu_error_std};
    };
    return {row(label_a, a), row(label_b, b)};
}

void write_compare_csv(const std::filesystem::path& path, const std::vector<CompareRow>& rows) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << std::setprecision(17) << "run,angle_mean,angle_std,mu_error_mean,mu_error_std\n";
    for (const auto& r : rows) {
        out << r.label << ',' << r.angle_mean << ',' << r.angle_std << ',' << r.mu_error_mean << ',' << r.mu_error_std
            << '\n';
    }
}

} // namespace qcmc
