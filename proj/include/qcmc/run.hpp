#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>

#include "qcmc/beltrami.hpp"
#include "qcmc/diagnostics.hpp"
#include "qcmc/error.hpp"
#include "qcmc/solver.hpp"

namespace qcmc {

enum class MuSourceKind { zero, constant, file };

struct MuSource {
    MuSourceKind kind = MuSourceKind::zero;
    Complex value{};
    std::filesystem::path path;

    // Per-face target; throws Error(invalid_mu) for sup-norm >= 1.
    [[nodiscard]] BeltramiField resolve(std::size_t faces) const;
};

enum class ReportFormat { json, csv };

struct RunConfig {
    std::filesystem::path input_path;
    std::filesystem::path output_prefix;
    MuSource mu;
    SolverConfig solver;
    std::set<ReportFormat> report_formats{ReportFormat::json};
    bool dump_matrices = false;
};

struct RunOutcome {
    RunReport report;
    SolveReport solve;
    ComplexMap map;
};

// Files written by a run with the given prefix.
struct RunArtifacts {
    std::filesystem::path mesh, module, trace, hist_angle, hist_mu_error, report_json, report_csv, error_json, matrix_a,
        matrix_k;
    static RunArtifacts for_prefix(const std::filesystem::path& prefix);
};

/// Loads the mesh, flattens it if it is not planar, solves, and writes every
/// artifact. Throws qcmc::Error on failure.
RunOutcome run_parameterize(const RunConfig& config);

// Planar flattening of `input` written to `output` (OBJ or OFF by extension).
void run_flatten(const std::filesystem::path& input, const std::filesystem::path& output);

/// Compares the reports of two completed runs and writes the CSV.
std::vector<CompareRow> run_compare(const std::filesystem::path& prefix_a, const std::filesystem::path& prefix_b,
                                    const std::filesystem::path& output_csv);

// One aligned table row per report.
void print_report_table(std::ostream& out, const std::vector<std::pair<std::string, RunReport>>& reports);

// {"schema":1,"error":{"kind":...,"message":...}}
[[nodiscard]] std::string error_json(ErrorKind kind, const std::string& message);

} // namespace qcmc
