#include "qcmc/run.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>

#include <nlohmann/json.hpp>

#include "qcmc/flatten.hpp"
#include "qcmc/operators.hpp"
#include "qcmc/simd/kernels.hpp"

namespace qcmc {
namespace {

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const std::string& suffix) {
    auto p = prefix;
    p += suffix;
    return p;
}

void write_report_csv(const std::filesystem::path& path, const RunReport& r) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << std::setprecision(17);
    out << "faces,vertices,time_seconds,mu_error_mean,mu_error_std,flips,angle_mean,angle_std,iterations,converged\n";
    out << r.faces << ',' << r.vertices << ',' << r.time_seconds << ',' << r.mu_error_mean << ',' << r.mu_error_std
        << ',' << r.flips << ',' << r.angle_distortion_mean << ',' << r.angle_distortion_std << ',' << r.iterations
        << ',' << (r.converged ? 1 : 0) << '\n';
}

} // namespace

BeltramiField MuSource::resolve(std::size_t faces) const {
    BeltramiField mu;
    switch (kind) {
    case MuSourceKind::zero: mu = BeltramiField::constant(faces, Complex(0.0, 0.0)); break;
    case MuSourceKind::constant: mu = BeltramiField::constant(faces, value); break;
    case MuSourceKind::file: mu = read_beltrami_csv(path, faces); break;
    }
    mu.require_admissible(faces);
    return mu;
}

RunArtifacts RunArtifacts::for_prefix(const std::filesystem::path& prefix) {
    return {with_suffix(prefix, ".obj"),           with_suffix(prefix, "_module.json"),
            with_suffix(prefix, "_trace.csv"),     with_suffix(prefix, "_hist_angle.csv"),
            with_suffix(prefix, "_hist_mu_error.csv"), with_suffix(prefix, "_report.json"),
            with_suffix(prefix, "_report.csv"),    with_suffix(prefix, "_error.json"),
            with_suffix(prefix, "_A.mtx"),         with_suffix(prefix, "_K0.mtx")};
}

RunOutcome run_parameterize(const RunConfig& config) {
    config.solver.validate();
    const TriMesh mesh = load_mesh(config.input_path);
    const BeltramiField mu = config.mu.resolve(mesh.face_count());

    const Flattening flat = initial_flatten(mesh);
    const BeltramiField target = mesh.is_planar() ? mu : transfer_target(mu, flat.mu_phi, flat.derivs_phi);

    SolveResult solved = solve_qcmc(flat.domain, target, config.solver);
    const auto& map = solved.state.map;

    // Error against the requested coefficient on the original surface.
    BeltramiField mu_out = solved.state.mu_current;
    if (!mesh.is_planar()) {
        mu_out = compose_beltrami(flat.mu_phi, flat.derivs_phi, mu_out);
    }
    const auto mu_err = beltrami_error(mu_out, mu);
    const auto err_stats = describe(mu_err);
    const auto angles = angle_distortion(mesh, map);

    RunReport report;
    report.input = config.input_path.string();
    report.mesh_fingerprint = mesh_fingerprint(mesh);
    report.faces = mesh.face_count();
    report.vertices = mesh.vertex_count();
    report.inner_loops = mesh.inner_loop_count();
    report.time_seconds = solved.report.time_seconds;
    report.mu_error_mean = err_stats.mean;
    report.mu_error_std = err_stats.std;
    report.flips = solved.report.flips;
    report.angle_distortion_mean = angles.mean_abs;
    report.angle_distortion_std = angles.std_abs;
    report.iterations = solved.report.iterations_used;
    report.converged = solved.report.status == SolveStatus::converged;
    report.fixed_module = config.solver.fixed_module;
    report.ill_posed = solved.report.ill_posed;
    report.clamp_events = solved.report.clamp_events;
    report.energy_initial = solved.report.energy_trace.front();
    report.energy_final = solved.report.energy_trace.back();
    report.kernels = simd::active_kernels().name;
    report.module = solved.report.final_module;

    const auto files = RunArtifacts::for_prefix(config.output_prefix);
    if (config.output_prefix.has_parent_path()) std::filesystem::create_directories(config.output_prefix.parent_path());
    save_mesh(files.mesh, mesh, MeshFormat::obj, map);
    write_module_json(files.module, report.module);
    write_trace_csv(files.trace, solved.report);
    std::vector<double> abs_angles;
    abs_angles.reserve(angles.per_corner.size());
    for (const double a : angles.per_corner) abs_angles.push_back(std::abs(a));
    write_histogram_csv(files.hist_angle, make_histogram("angle_distortion", abs_angles));
    write_histogram_csv(files.hist_mu_error, make_histogram("beltrami_error", mu_err));
    if (config.report_formats.contains(ReportFormat::json)) write_report(files.report_json, report);
    if (config.report_formats.contains(ReportFormat::csv)) write_report_csv(files.report_csv, report);
    if (config.dump_matrices) {
        write_matrix_market(files.matrix_a, assemble_operator(flat.domain, target).matrix);
        const auto initial = initial_module(flat.domain, config.solver.limits);
        const auto start = harmonic_initial_map(flat.domain, initial);
        write_matrix_market(files.matrix_k,
                            assemble_constraints(flat.domain, start, initial, !config.solver.fixed_module).matrix);
    }
    return {std::move(report), std::move(solved.report), map};
}

void run_flatten(const std::filesystem::path& input, const std::filesystem::path& output) {
    const TriMesh mesh = load_mesh(input);
    const Flattening flat = initial_flatten(mesh);
    const auto ext = output.extension().string();
    if (ext == ".off" || ext == ".OFF") {
        save_mesh(output, flat.domain, MeshFormat::off);
    } else {
        save_mesh(output, flat.domain, MeshFormat::obj);
    }
}

std::vector<CompareRow> run_compare(const std::filesystem::path& prefix_a, const std::filesystem::path& prefix_b,
                                    const std::filesystem::path& output_csv) {
    const RunReport a = read_report(RunArtifacts::for_prefix(prefix_a).report_json);
    const RunReport b = read_report(RunArtifacts::for_prefix(prefix_b).report_json);
    auto rows = compare_reports(prefix_a.filename().string(), a, prefix_b.filename().string(), b);
    write_compare_csv(output_csv, rows);
    return rows;
}

void print_report_table(std::ostream& out, const std::vector<std::pair<std::string, RunReport>>& reports) {
    out << std::left << std::setw(24) << "run" << std::right << std::setw(8) << "faces" << std::setw(10) << "vertices"
        << std::setw(10) << "time(s)" << std::setw(12) << "mean(mu)" << std::setw(12) << "std(mu)" << std::setw(7)
        << "flips" << '\n';
    for (const auto& [label, r] : reports) {
        out << std::left << std::setw(24) << label << std::right << std::setw(8) << r.faces << std::setw(10)
            << r.vertices << std::setw(10) << std::fixed << std::setprecision(3) << r.time_seconds << std::setw(12)
            << std::setprecision(4) << r.mu_error_mean << std::setw(12) << r.mu_error_std << std::setw(7) << r.flips
            << '\n';
        out.unsetf(std::ios::floatfield);
    }
}

std::string error_json(ErrorKind kind, const std::string& message) {
    return nlohmann::json{{"schema", 1}, {"error", {{"kind", std::string(to_string(kind))}, {"message", message}}}}.dump();
}

} // namespace qcmc
