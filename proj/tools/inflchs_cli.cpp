#include "inflchs/errors.hpp"
#include "inflchs/harness.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

using namespace inflchs;

namespace {

using harness::ExitCode;

int code(ExitCode c) { return static_cast<int>(c); }

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) {
            throw ConfigError("/values", "cannot parse '" + item + "' as a number");
        }
        out.push_back(v);
    }
    return out;
}

int cmd_solve(const std::string& path) {
    const RunConfig cfg = load_config(path);
    const auto out = harness::run_solve(cfg);
    std::cout << "problem " << cfg.problem << ": N = " << out.report.plan_size
              << ", rel_error = " << harness::format_double(out.report.rel_error)
              << ", abs_error = " << harness::format_double(out.report.abs_error) << "\n";
    for (const auto& f : out.written) {
        std::cout << "wrote " << f.string() << "\n";
    }
    return code(ExitCode::ok);
}

int cmd_converge(const std::string& path, const std::string& axis_name, const std::string& values) {
    const RunConfig cfg = load_config(path);
    harness::SweepAxis axis;
    try {
        axis = harness::parse_axis(axis_name);
    } catch (const InvalidArgument& e) {
        throw ConfigError("/axis", e.what());
    }
    const auto sweep = harness::run_convergence(cfg, axis, parse_values(values));
    const std::string csv = harness::sweep_csv(sweep);
    const std::filesystem::path dir(cfg.output);
    harness::write_atomic(dir / "sweep.csv", csv);
    harness::write_atomic(dir / "sweep.json", harness::sweep_to_json(sweep).dump(2) + "\n");
    std::cout << csv;
    if (sweep.error_fit) {
        std::cout << "error slope " << harness::format_double(sweep.error_fit->slope) << " +/- "
                  << harness::format_double(sweep.error_fit->slope_stderr)
                  << (axis == harness::SweepAxis::Q ? " (log2 per unit)" : " (log-log)") << "\n";
    }
    for (const auto& row : sweep.rows) {
        if (row.failure) {
            std::cerr << "row " << harness::format_double(row.value) << " failed: " << *row.failure
                      << "\n";
        }
    }
    return code(ExitCode::ok);
}

int cmd_validate_kernel(const std::string& family, std::optional<double> beta) {
    kernel::KernelSpec spec = kernel::KernelSpec::cauchy();
    try {
        const auto fam = kernel::parse_family(family);
        if (fam == kernel::Family::beta) {
            spec = kernel::KernelSpec::beta(beta.value_or(kernel::kDefaultBeta));
        } else if (beta) {
            throw ConfigError("--beta", "only valid for the beta family");
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError("--family", e.what());
    }
    const double residual = kernel::check_normalization(spec);
    nlohmann::json doc = {{"family", kernel::to_string(spec.family())},
                          {"beta", spec.beta()},
                          {"normalization_correction", spec.normalization_correction()},
                          {"normalization_residual", residual}};
    nlohmann::json ks = nlohmann::json::array();
    for (double eps : {1e-3, 1e-6, 1e-9}) {
        try {
            ks.push_back({{"eps_tail", eps}, {"K", kernel::choose_truncation(spec, eps).K}});
        } catch (const RangeError&) {
            ks.push_back({{"eps_tail", eps}, {"K", nullptr}, {"note", "exceeds the K limit"}});
        }
    }
    doc["truncation"] = std::move(ks);
    std::cout << doc.dump(2) << "\n";
    return code(residual <= 1e-10 ? ExitCode::ok : ExitCode::solve);
}

int cmd_lemma_check(const std::string& path) {
    const RunConfig cfg = load_config(path);
    const ProblemInstance p = [&] {
        try {
            return problems::build_named(cfg.problem, cfg.params);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw BuildError(e.what());
        }
    }();
    std::vector<harness::LemmaRow> rows;
    try {
        rows = harness::lemma_sequence(p, cfg.make_kernel(), cfg.T);
    } catch (const Error& e) {
        throw SolveError("lemma", e.what());
    }
    std::string csv = "K,M,Q,residual\n";
    for (const auto& r : rows) {
        csv += harness::format_double(r.K) + "," + std::to_string(r.M) + "," + std::to_string(r.Q) +
               "," + harness::format_double(r.residual) + "\n";
    }
    harness::write_atomic(std::filesystem::path(cfg.output) / "lemma.csv", csv);
    std::cout << csv;
    return code(ExitCode::ok);
}

int cmd_list_problems() {
    for (const auto& b : problems::builders()) {
        std::cout << b.name << "\t" << b.description << "\n";
    }
    return code(ExitCode::ok);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Linear combination of Hamiltonian simulation solver for du/dt = -A(t)u"};
    app.require_subcommand(1);

    std::string config_path;
    auto* solve_cmd = app.add_subcommand("solve", "Run one solve and write a report");
    solve_cmd->add_option("config", config_path, "Run configuration (JSON)")->required();

    std::string axis, values;
    auto* converge_cmd = app.add_subcommand("converge", "Sweep one plan parameter");
    converge_cmd->add_option("config", config_path, "Run configuration (JSON)")->required();
    converge_cmd->add_option("--axis", axis, "Q, M, Ns, K or eps")->required();
    converge_cmd->add_option("--values", values, "Comma-separated ascending values")->required();

    std::string family;
    std::optional<double> beta;
    auto* kernel_cmd = app.add_subcommand("validate-kernel", "Check kernel normalization");
    kernel_cmd->add_option("--family", family, "cauchy or beta")->required();
    kernel_cmd->add_option("--beta", beta, "Beta exponent in (0, 1)");

    auto* lemma_cmd = app.add_subcommand("lemma-check", "Residual of the f-weighted unitary sum");
    lemma_cmd->add_option("config", config_path, "Run configuration (JSON)")->required();

    auto* list_cmd = app.add_subcommand("list-problems", "List problem builders");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : code(ExitCode::usage);
    }

    try {
        if (*solve_cmd) {
            return cmd_solve(config_path);
        }
        if (*converge_cmd) {
            return cmd_converge(config_path, axis, values);
        }
        if (*kernel_cmd) {
            return cmd_validate_kernel(family, beta);
        }
        if (*lemma_cmd) {
            return cmd_lemma_check(config_path);
        }
        if (*list_cmd) {
            return cmd_list_problems();
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return code(ExitCode::config);
    } catch (const BuildError& e) {
        std::cerr << "build error: " << e.what() << "\n";
        return code(ExitCode::build);
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return code(ExitCode::io);
    } catch (const std::exception& e) {
        std::cerr << "solve error: " << e.what() << "\n";
        return code(ExitCode::solve);
    }
    return code(ExitCode::usage);
}
