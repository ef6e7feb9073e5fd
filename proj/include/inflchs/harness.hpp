// harness.hpp: config-driven runs, convergence sweeps and power-law fits.

#pragma once

#include "inflchs/config.hpp"
#include "inflchs/evolve.hpp"
#include "inflchs/problems.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace inflchs::harness {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kMonteCarloReplicas = 20;

enum class ExitCode : int { ok = 0, usage = 1, config = 2, build = 3, solve = 4, io = 5 };

// Problem and plan for a configuration. Builder and plan failures surface as
// BuildError (ConfigError passes through unchanged).
struct Prepared {
    ProblemInstance instance;
    kernel::KernelSpec kernel;
    sampling::SamplingPlan plan;
};

Prepared prepare(const RunConfig& cfg);
sampling::SamplingPlan make_plan(const RunConfig& cfg, const ProblemInstance& p,
                                 const kernel::KernelSpec& kernel);

// Deterministic report document (no wall times).
nlohmann::json report_to_json(const RunConfig& cfg, const Prepared& prep, const SolveReport& r);
// Throws ConfigError (pointer into the report) on any schema violation.
void validate_report(const nlohmann::json& report);

struct SolveOutcome {
    SolveReport report;
    nlohmann::json document;
    std::vector<std::filesystem::path> written;
};

// Builds, plans, solves and writes report.json / timing.json / plan_terms.csv
// into cfg.output as requested by cfg.emit.
SolveOutcome run_solve(const RunConfig& cfg);

// Writes `content` to `path` via a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct Fit {
    double slope = 0.0;
    double intercept = 0.0;
    // Residual standard error of the regression and standard error of the slope.
    double residual_stderr = 0.0;
    double slope_stderr = 0.0;
    std::size_t points = 0;
};

// OLS of log y on log x. Needs >= 4 rows with x, y > 0.
Fit fit_scaling(const std::vector<double>& x, const std::vector<double>& y);
// OLS of log2 y on x. Needs >= 4 rows with y > 0.
Fit fit_semilog2(const std::vector<double>& x, const std::vector<double>& y);

enum class SweepAxis { Q, M, Ns, K, eps };
std::string_view to_string(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

struct SweepRow {
    double value = 0.0;
    std::size_t N = 0;
    double rel_error = 0.0;  // mean over replicas for Monte Carlo
    double stderr_ = 0.0;    // standard error of the mean (0 for deterministic rows)
    double wall_s = 0.0;
    std::optional<std::string> failure;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::Q;
    std::vector<SweepRow> rows;
    // rel_error against the axis value (semilog2 for Q, log-log otherwise)
    // and plan size against the axis value (log-log); absent when fewer than
    // four usable rows exist.
    std::optional<Fit> error_fit;
    std::optional<Fit> size_fit;
};

// One solve per value; Monte Carlo rows use seeds seed, seed+1, ... over
// kMonteCarloReplicas replicas. Row failures are recorded, not thrown.
SweepResult run_convergence(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values);
std::string sweep_csv(const SweepResult& sweep);
nlohmann::json sweep_to_json(const SweepResult& sweep);

struct LemmaRow {
    double K = 0.0;
    int M = 0;
    int Q = 0;
    double residual = 0.0;
};

// Residual of the f-weighted unitary sum under joint refinement of (K, M, Q).
std::vector<LemmaRow> lemma_sequence(const ProblemInstance& p, const kernel::KernelSpec& kernel,
                                     double T, int levels = 6, double K0 = 8.0);

// 17-significant-digit formatting used by every CSV writer.
std::string format_double(double x);

} // namespace inflchs::harness
