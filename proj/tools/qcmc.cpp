#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qcmc/run.hpp"
#include "qcmc/simd/kernels.hpp"

namespace {

qcmc::Complex parse_complex(const std::string& text) {
    std::istringstream in(text);
    double re = 0.0;
    double im = 0.0;
    char comma = 0;
    if (!(in >> re >> comma >> im) || comma != ',' || !(in >> std::ws).eof()) {
        throw qcmc::Error(qcmc::ErrorKind::config, "expected re,im but got '" + text + "'");
    }
    return {re, im};
}

int fail(const qcmc::Error& e, const std::filesystem::path& error_file) {
    const auto payload = qcmc::error_json(e.kind(), e.what());
    std::cout << payload << '\n';
    std::cerr << "qcmc: " << qcmc::to_string(e.kind()) << ": " << e.what() << '\n';
    if (!error_file.empty()) {
        std::ofstream out(error_file);
        if (out) out << payload << '\n';
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-conformal parameterization of multiply-connected meshes onto circle domains"};
    app.require_subcommand(1);

    std::string kernels;
    app.add_option("--kernels", kernels, "Force a kernel set (scalar, avx2)");

    auto* flatten = app.add_subcommand("flatten", "Flatten a surface mesh into the plane");
    std::string flatten_in, flatten_out;
    flatten->add_option("input", flatten_in, "Input mesh (OBJ or OFF)")->required();
    flatten->add_option("-o,--output", flatten_out, "Output mesh")->required();

    auto* param = app.add_subcommand("parameterize", "Map a mesh onto a punctured unit disk");
    std::string param_in, prefix, mu_const, mu_file;
    std::vector<std::string> formats{"json"};
    qcmc::SolverConfig solver;
    bool dump = false;
    param->add_option("input", param_in, "Input mesh (OBJ or OFF)")->required();
    param->add_option("-o,--output", prefix, "Output prefix")->required();
    auto* mu_const_opt = param->add_option("--mu-const", mu_const, "Constant target coefficient re,im");
    param->add_option("--mu-file", mu_file, "Per-face target coefficient CSV")->excludes(mu_const_opt);
    param->add_option("--epsilon", solver.epsilon, "Convergence threshold")->capture_default_str();
    param->add_option("--max-iter", solver.max_iter, "Iteration limit")->capture_default_str();
    param->add_option("--step", solver.step, "Damping factor in (0, 1]")->capture_default_str();
    param->add_flag("--fixed-module", solver.fixed_module, "Keep the initial circle fit");
    param->add_flag("--dump-matrices", dump, "Write the operator and constraint matrices");
    param->add_option("--report-format", formats, "json and/or csv")
        ->delimiter(',')
        ->check(CLI::IsMember({"json", "csv"}));

    auto* compare = app.add_subcommand("compare", "Compare statistics of two runs");
    std::string prefix_a, prefix_b, compare_out;
    compare->add_option("run_a", prefix_a, "Output prefix of the first run")->required();
    compare->add_option("run_b", prefix_b, "Output prefix of the second run")->required();
    compare->add_option("-o,--output", compare_out, "Comparison CSV")->required();

    auto* report = app.add_subcommand("report", "Print a summary table of completed runs");
    std::vector<std::string> report_prefixes;
    report->add_option("runs", report_prefixes, "Output prefixes")->required();

    CLI11_PARSE(app, argc, argv);

    if (!kernels.empty() && !qcmc::simd::select_kernels(kernels)) {
        std::cerr << "qcmc: kernel set '" << kernels << "' is not available\n";
        return 2;
    }

    std::filesystem::path error_file;
    try {
        if (*flatten) {
            qcmc::run_flatten(flatten_in, flatten_out);
        } else if (*param) {
            qcmc::RunConfig config;
            config.input_path = param_in;
            config.output_prefix = prefix;
            error_file = qcmc::RunArtifacts::for_prefix(prefix).error_json;
            if (!mu_const.empty()) {
                config.mu.kind = qcmc::MuSourceKind::constant;
                config.mu.value = parse_complex(mu_const);
            } else if (!mu_file.empty()) {
                config.mu.kind = qcmc::MuSourceKind::file;
                config.mu.path = mu_file;
            }
            config.solver = solver;
            config.report_formats.clear();
            for (const auto& f : formats) {
                config.report_formats.insert(f == "csv" ? qcmc::ReportFormat::csv : qcmc::ReportFormat::json);
            }
            config.dump_matrices = dump;
            const auto outcome = qcmc::run_parameterize(config);
            qcmc::print_report_table(std::cout, {{std::filesystem::path(prefix).filename().string(), outcome.report}});
        } else if (*compare) {
            const auto rows = qcmc::run_compare(prefix_a, prefix_b, compare_out);
            for (const auto& r : rows) {
                std::cout << r.label << ": angle " << r.angle_mean << " +/- " << r.angle_std << ", mu error "
                          << r.mu_error_mean << " +/- " << r.mu_error_std << '\n';
            }
        } else if (*report) {
            std::vector<std::pair<std::string, qcmc::RunReport>> rows;
            for (const auto& p : report_prefixes) {
                rows.emplace_back(std::filesystem::path(p).filename().string(),
                                  qcmc::read_report(qcmc::RunArtifacts::for_prefix(p).report_json));
            }
            qcmc::print_report_table(std::cout, rows);
        }
    } catch (const qcmc::Error& e) {
        return fail(e, error_file);
    } catch (const std::exception& e) {
        return fail(qcmc::Error(qcmc::ErrorKind::io, e.what()), error_file);
    }
    return EXIT_SUCCESS;
}
