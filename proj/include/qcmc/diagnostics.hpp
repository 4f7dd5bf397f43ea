#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qcmc/beltrami.hpp"
#include "qcmc/conformal_module.hpp"
#include "qcmc/mesh.hpp"
#include "qcmc/solver.hpp"

namespace qcmc {

struct AngleDistortion {
    std::vector<double> per_corner;  // image angle - source angle, NaN where undefined
    std::size_t undefined = 0;       // corners of degenerate image faces
    double mean_abs = 0.0;
    double std_abs = 0.0;
};

/// Signed change of every face corner angle under `map` (radians), three
/// entries per face in face-corner order. Statistics use absolute values and
/// skip undefined corners.
[[nodiscard]] AngleDistortion angle_distortion(const TriMesh& mesh, std::span<const Complex> map);

struct SampleStats {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    std::size_t count = 0;
};

// NaN entries are ignored.
[[nodiscard]] SampleStats describe(std::span<const double> samples);

struct Histogram {
    std::string statistic;
    std::vector<double> bin_edges;   // strictly increasing, bins + 1 entries
    std::vector<std::size_t> counts;  // one per bin

    friend bool operator==(const Histogram&, const Histogram&) = default;
};

/// Uniform bins over the observed range of the finite samples. A degenerate
/// range [v, v] becomes [v - 0.5, v + 0.5].
[[nodiscard]] Histogram make_histogram(std::string statistic, std::span<const double> samples, std::size_t bins = 50);

// |mu_out - mu_target| per face.
[[nodiscard]] std::vector<double> beltrami_error(const BeltramiField& mu_out, const BeltramiField& mu_target);

/// Summary of one parameterization run, written as versioned JSON.
struct RunReport {
    int schema = 1;
    std::string input;
    std::string mesh_fingerprint;
    std::size_t faces = 0;
    std::size_t vertices = 0;
    std::size_t inner_loops = 0;
    double time_seconds = 0.0;
    double mu_error_mean = 0.0;
    double mu_error_std = 0.0;
    std::size_t flips = 0;
    double angle_distortion_mean = 0.0;
    double angle_distortion_std = 0.0;
    int iterations = 0;
    bool converged = false;
    bool fixed_module = false;
    bool ill_posed = false;
    std::size_t clamp_events = 0;
    double energy_initial = 0.0;
    double energy_final = 0.0;
    std::string kernels;
    ConformalModule module;

    friend bool operator==(const RunReport&, const RunReport&) = default;
};

void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

[[nodiscard]] RunReport read_report(const std::filesystem::path& path);
void write_report(const std::filesystem::path& path, const RunReport& report);

// Hex digest of vertex coordinates and faces; identical meshes share it.
[[nodiscard]] std::string mesh_fingerprint(const TriMesh& mesh);

// `iter,energy,mu_diff`
void write_trace_csv(const std::filesystem::path& path, const SolveReport& report);
// `bin_lo,bin_hi,count`
void write_histogram_csv(const std::filesystem::path& path, const Histogram& histogram);

struct CompareRow {
    std::string label;
    double angle_mean = 0.0;
    double angle_std = 0.0;
    double mu_error_mean = 0.0;
    double mu_error_std = 0.0;
};

/// Side-by-side statistics of two completed runs of the same mesh. Throws
/// Error(config) when the reports describe different meshes.
[[nodiscard]] std::vector<CompareRow> compare_reports(const std::string& label_a, const RunReport& a,
                                                      const std::string& label_b, const RunReport& b);
// `run,angle_mean,angle_std,mu_error_mean,mu_error_std`
void write_compare_csv(const std::filesystem::path& path, const std::vector<CompareRow>& rows);

} // namespace qcmc
