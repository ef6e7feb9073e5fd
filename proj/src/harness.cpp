#include "inflchs/harness.hpp"

#include "inflchs/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace inflchs::harness {

namespace {

using nlohmann::json;

std::int64_t ceil_int(double x) {
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) {
        return static_cast<std::int64_t>(r);
    }
    return static_cast<std::int64_t>(std::ceil(x));
}

// Gaussian parameters of an eps-driven or explicit configuration.
struct GaussianBase {
    double K = 0.0;
    int M = 0;
    int Q = 0;
};

GaussianBase gaussian_base(const RunConfig& cfg, const ProblemInstance& p,
                           const kernel::KernelSpec& kernel) {
    if (cfg.accuracy.eps) {
        const auto gp = sampling::gaussian_parameters(kernel, *cfg.accuracy.eps, cfg.T,
                                                      p.schedule().max_norm_L());
        return {gp.K, gp.M, gp.Q};
    }
    return {cfg.accuracy.K, cfg.accuracy.M, cfg.accuracy.Q};
}

double mc_window(const RunConfig& cfg, const kernel::KernelSpec& kernel) {
    if (cfg.accuracy.eps) {
        return kernel::choose_truncation(kernel, *cfg.accuracy.eps / 2.0).K;
    }
    return cfg.accuracy.K;
}

template <class F>
auto as_build_error(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const BuildError&) {
        throw;
    } catch (const Error& e) {
        throw BuildError(e.what());
    }
}

void expect(bool ok, const std::string& pointer, const std::string& message) {
    if (!ok) {
        throw ConfigError(pointer, message);
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string csv_number(double x) {
    return std::isfinite(x) ? format_double(x) : std::string(std::isnan(x) ? "nan" : "inf");
}

} // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

sampling::SamplingPlan make_plan(const RunConfig& cfg, const ProblemInstance& p,
                                 const kernel::KernelSpec& kernel) {
    return as_build_error([&] {
        if (cfg.method == sampling::Method::gaussian) {
            if (cfg.accuracy.eps) {
                return sampling::plan_from_accuracy(kernel, *cfg.accuracy.eps, cfg.T,
                                                    p.schedule().max_norm_L());
            }
            return sampling::composite_plan(kernel, cfg.accuracy.K, cfg.accuracy.M, cfg.accuracy.Q);
        }
        if (cfg.accuracy.eps) {
            const double half = *cfg.accuracy.eps / 2.0;
            const double K = kernel::choose_truncation(kernel, half).K;
            auto plan = sampling::mc_plan(kernel, K, sampling::mc_size_from_accuracy(half, K),
                                          cfg.accuracy.seed);
            plan.eps = *cfg.accuracy.eps;
            return plan;
        }
        return sampling::mc_plan(kernel, cfg.accuracy.K, cfg.accuracy.Ns, cfg.accuracy.seed);
    });
}

Prepared prepare(const RunConfig& cfg) {
    ProblemInstance instance =
        as_build_error([&] { return problems::build_named(cfg.problem, cfg.params); });
    kernel::KernelSpec kern = as_build_error([&] { return cfg.make_kernel(); });
    sampling::SamplingPlan plan = make_plan(cfg, instance, kern);
    return {std::move(instance), std::move(kern), std::move(plan)};
}

json report_to_json(const RunConfig& cfg, const Prepared& prep, const SolveReport& r) {
    const auto& plan = prep.plan;
    json plan_doc = {{"method", sampling::to_string(plan.method)},
                     {"K", plan.K},
                     {"size", plan.size()},
                     {"eps", plan.eps},
                     {"sum_abs_c", r.sum_abs_c},
                     {"kernel",
                      {{"family", kernel::to_string(plan.kernel.family())},
                       {"beta", plan.kernel.beta()},
                       {"normalization_correction", plan.kernel.normalization_correction()}}}};
    if (plan.method == sampling::Method::gaussian) {
        plan_doc["M"] = plan.M;
        plan_doc["Q"] = plan.Q;
    } else {
        plan_doc["Ns"] = plan.Ns;
        plan_doc["seed"] = plan.seed;
        plan_doc["generator"] = plan.generator;
    }
    return {{"schema_version", kReportSchemaVersion},
            {"kind", "solve-report"},
            {"config", to_json(cfg)},
            {"problem",
             {{"name", cfg.problem},
              {"label", prep.instance.label()},
              {"dim", prep.instance.dim()},
              {"meta", prep.instance.meta()}}},
            {"plan", std::move(plan_doc)},
            {"T", r.T},
            {"shift", {{"c", r.shift}, {"lambda0", r.lambda0}, {"unwound", r.shift_unwound}}},
            {"rel_error", r.rel_error},
            {"abs_error", r.abs_error},
            {"amplification", r.amplification},
            {"propagator_steps", r.propagator_steps},
            {"u_lchs", vector_to_json(r.u_lchs)},
            {"u_oracle", vector_to_json(r.u_oracle)}};
}

void validate_report(const json& doc) {
    expect(doc.is_object(), "", "report must be an object");
    auto field = [&](const char* key) -> const json& {
        expect(doc.contains(key), std::string("/") + key, "required field is missing");
        return doc.at(key);
    };
    expect(field("schema_version").is_number_integer() &&
               field("schema_version").get<int>() == kReportSchemaVersion,
           "/schema_version", "unsupported version");
    expect(field("kind") == "solve-report", "/kind", "expected solve-report");
    parse_config(field("config"));

    const json& problem = field("problem");
    expect(problem.is_object() && problem.contains("name") && problem["name"].is_string(),
           "/problem/name", "expected a string");
    expect(problem.contains("dim") && problem["dim"].is_number_integer() && problem["dim"].get<long>() > 0,
           "/problem/dim", "expected a positive integer");
    const long dim = problem["dim"].get<long>();

    const json& plan = field("plan");
    expect(plan.is_object(), "/plan", "expected an object");
    for (const char* key : {"K", "eps", "sum_abs_c"}) {
        expect(plan.contains(key) && plan[key].is_number(), std::string("/plan/") + key,
               "expected a number");
    }
    expect(plan.contains("size") && plan["size"].is_number_unsigned(), "/plan/size",
           "expected a non-negative integer");
    expect(plan.contains("method") && plan["method"].is_string(), "/plan/method", "expected a string");
    const std::string method = plan["method"].get<std::string>();
    if (method == "gaussian") {
        expect(plan.contains("M") && plan["M"].is_number_integer(), "/plan/M", "expected an integer");
        expect(plan.contains("Q") && plan["Q"].is_number_integer(), "/plan/Q", "expected an integer");
    } else {
        expect(method == "monte-carlo", "/plan/method", "unknown method");
        expect(plan.contains("Ns") && plan["Ns"].is_number_integer(), "/plan/Ns", "expected an integer");
        expect(plan.contains("generator") && plan["generator"].is_string(), "/plan/generator",
               "expected a string");
    }

    for (const char* key : {"T", "rel_error", "abs_error", "amplification"}) {
        expect(field(key).is_number(), std::string("/") + key, "expected a number");
    }
    expect(field("propagator_steps").is_number_integer(), "/propagator_steps", "expected an integer");
    const json& shift = field("shift");
    expect(shift.is_object() && shift.contains("c") && shift["c"].is_number() &&
               shift.contains("lambda0") && shift["lambda0"].is_number() &&
               shift.contains("unwound") && shift["unwound"].is_boolean(),
           "/shift", "expected {c, lambda0, unwound}");
    for (const char* key : {"u_lchs", "u_oracle"}) {
        const json& v = field(key);
        expect(v.is_array() && static_cast<long>(v.size()) == 2 * dim, std::string("/") + key,
               "expected 2 * dim interleaved numbers");
        for (std::size_t i = 0; i < v.size(); ++i) {
            expect(v[i].is_number(), std::string("/") + key + "/" + std::to_string(i),
                   "expected a number");
        }
    }
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory " + path.parent_path().string() + ": " +
                          ec.message());
        }
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            throw IoError("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

SolveOutcome run_solve(const RunConfig& cfg) {
    const Prepared prep = prepare(cfg);
    SolveOutcome out;
    SolveOptions options;
    out.report = solve(prep.instance, prep.plan, cfg.T, options);
    out.document = report_to_json(cfg, prep, out.report);
    validate_report(out.document);

    const std::filesystem::path dir(cfg.output);
    if (cfg.emit_json) {
        write_atomic(dir / "report.json", out.document.dump(2) + "\n");
        out.written.push_back(dir / "report.json");
        const json timing = {{"propagation_s", out.report.wall_times.propagation},
                             {"oracle_s", out.report.wall_times.oracle},
                             {"total_s", out.report.wall_times.total}};
        write_atomic(dir / "timing.json", timing.dump(2) + "\n");
        out.written.push_back(dir / "timing.json");
    }
    if (cfg.emit_csv) {
        std::string csv = "k,abs_c\n";
        for (const auto& t : prep.plan.terms) {
            csv += format_double(t.k) + "," + format_double(std::abs(t.c)) + "\n";
        }
        write_atomic(dir / "plan_terms.csv", csv);
        out.written.push_back(dir / "plan_terms.csv");
    }
    return out;
}

namespace {

Fit ordinary_least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw DomainError("fit: abscissae must not all coincide");
    }
    Fit f;
    f.points = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
    }
    f.residual_stderr = std::sqrt(rss / static_cast<double>(n - 2));
    f.slope_stderr = f.residual_stderr / std::sqrt(sxx);
    return f;
}

void require_rows(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 4) {
        throw DomainError("fit: need at least 4 matching rows");
    }
}

} // namespace

Fit fit_scaling(const std::vector<double>& x, const std::vector<double>& y) {
    require_rows(x, y);
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
            throw DomainError("fit_scaling: values must be positive and finite");
        }
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return ordinary_least_squares(lx, ly);
}

Fit fit_semilog2(const std::vector<double>& x, const std::vector<double>& y) {
    require_rows(x, y);
    std::vector<double> ly(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0) || !std::isfinite(y[i]) || !std::isfinite(x[i])) {
            throw DomainError("fit_semilog2: values must be finite with y > 0");
        }
        ly[i] = std::log2(y[i]);
    }
    return ordinary_least_squares(x, ly);
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::Q:
        return "Q";
    case SweepAxis::M:
        return "M";
    case SweepAxis::Ns:
        return "Ns";
    case SweepAxis::K:
        return "K";
    case SweepAxis::eps:
        return "eps";
    }
    return "?";
}

SweepAxis parse_axis(std::string_view name) {
    for (SweepAxis a : {SweepAxis::Q, SweepAxis::M, SweepAxis::Ns, SweepAxis::K, SweepAxis::eps}) {
        if (to_string(a) == name) {
            return a;
        }
    }
    throw InvalidArgument("unknown sweep axis '" + std::string(name) + "'");
}

namespace {

int as_count(double v, const char* what) {
    if (!(v >= 1.0) || v != std::floor(v) || v > static_cast<double>(1 << 30)) {
        throw InvalidArgument(std::string(what) + " values must be positive integers");
    }
    return static_cast<int>(v);
}

sampling::SamplingPlan sweep_plan(const RunConfig& cfg, const ProblemInstance& p,
                                  const kernel::KernelSpec& kernel, SweepAxis axis, double value,
                                  std::uint64_t seed) {
    const bool gaussian = cfg.method == sampling::Method::gaussian;
    switch (axis) {
    case SweepAxis::Q: {
        const GaussianBase b = gaussian_base(cfg, p, kernel);
        return sampling::composite_plan(kernel, b.K, b.M, as_count(value, "Q"));
    }
    case SweepAxis::M: {
        const GaussianBase b = gaussian_base(cfg, p, kernel);
        return sampling::composite_plan(kernel, b.K, as_count(value, "M"), b.Q);
    }
    case SweepAxis::K: {
        if (!(value > 0.0)) {
            throw InvalidArgument("K values must be positive");
        }
        if (gaussian) {
            const GaussianBase b = gaussian_base(cfg, p, kernel);
            const double h = b.K / b.M;
            const auto m = std::max<std::int64_t>(1, ceil_int(value / h));
            return sampling::composite_plan(kernel, value, static_cast<int>(m), b.Q);
        }
        const std::int64_t ns = cfg.accuracy.eps
                                    ? sampling::mc_size_from_accuracy(*cfg.accuracy.eps / 2.0, value)
                                    : cfg.accuracy.Ns;
        return sampling::mc_plan(kernel, value, ns, seed);
    }
    case SweepAxis::Ns:
        return sampling::mc_plan(kernel, mc_window(cfg, kernel),
                                 static_cast<std::int64_t>(as_count(value, "Ns")), seed);
    case SweepAxis::eps: {
        RunConfig c = cfg;
        c.accuracy = AccuracySpec{};
        c.accuracy.eps = value;
        c.accuracy.seed = seed;
        if (!(value > 0.0 && value < 1.0)) {
            throw InvalidArgument("eps values must lie in (0, 1)");
        }
        return make_plan(c, p, kernel);
    }
    }
    throw InvalidArgument("unknown sweep axis");
}

} // namespace

SweepResult run_convergence(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values) {
    if (values.size() < 4) {
        throw ConfigError("/values", "a sweep needs at least 4 values");
    }
    if (!std::is_sorted(values.begin(), values.end())) {
        throw ConfigError("/values", "values must be sorted ascending");
    }
    const bool gaussian = cfg.method == sampling::Method::gaussian;
    if ((axis == SweepAxis::Q || axis == SweepAxis::M) && !gaussian) {
        throw ConfigError("/method", "axis " + std::string(to_string(axis)) + " requires gaussian");
    }
    if (axis == SweepAxis::Ns && gaussian) {
        throw ConfigError("/method", "axis Ns requires monte-carlo");
    }

    const ProblemInstance instance =
        as_build_error([&] { return problems::build_named(cfg.problem, cfg.params); });
    const kernel::KernelSpec kern = as_build_error([&] { return cfg.make_kernel(); });
    linalg::Vector oracle;
    try {
        oracle = oracle_solve(instance, cfg.T);
    } catch (const Error& e) {
        throw SolveError("oracle", e.what());
    }
    SolveOptions options;
    options.oracle = &oracle;

    SweepResult result;
    result.axis = axis;
    const int replicas = gaussian ? 1 : kMonteCarloReplicas;
    for (double value : values) {
        SweepRow row;
        row.value = value;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            std::vector<double> errors;
            for (int r = 0; r < replicas; ++r) {
                const auto plan = sweep_plan(cfg, instance, kern, axis, value,
                                             cfg.accuracy.seed + static_cast<std::uint64_t>(r));
                row.N = plan.size();
                errors.push_back(solve(instance, plan, cfg.T, options).rel_error);
            }
            double mean = 0.0;
            for (double e : errors) {
                mean += e;
            }
            mean /= errors.size();
            double var = 0.0;
            for (double e : errors) {
                var += (e - mean) * (e - mean);
            }
            row.rel_error = mean;
            row.stderr_ = errors.size() > 1
                              ? std::sqrt(var / (errors.size() - 1) / errors.size())
                              : 0.0;
        } catch (const Error& e) {
            row.failure = e.what();
            row.rel_error = std::numeric_limits<double>::quiet_NaN();
            row.stderr_ = std::numeric_limits<double>::quiet_NaN();
        }
        row.wall_s = seconds_since(t0);
        result.rows.push_back(std::move(row));
    }

    std::vector<double> x, y, n;
    for (const auto& row : result.rows) {
        if (!row.failure && row.rel_error > 0.0) {
            x.push_back(row.value);
            y.push_back(row.rel_error);
            n.push_back(static_cast<double>(row.N));
        }
    }
    if (x.size() >= 4) {
        result.error_fit = axis == SweepAxis::Q ? fit_semilog2(x, y) : fit_scaling(x, y);
        result.size_fit = fit_scaling(x, n);
    }
    return result;
}

std::string sweep_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "axis,value,N,rel_error,stderr,wall_s\n";
    for (const auto& row : sweep.rows) {
        out << to_string(sweep.axis) << ',' << format_double(row.value) << ',' << row.N << ','
            << csv_number(row.rel_error) << ',' << csv_number(row.stderr_) << ','
            << format_double(row.wall_s) << '\n';
    }
    return out.str();
}

json sweep_to_json(const SweepResult& sweep) {
    auto fit_json = [](const std::optional<Fit>& f) -> json {
        if (!f) {
            return nullptr;
        }
        return {{"slope", f->slope},
                {"intercept", f->intercept},
                {"residual_stderr", f->residual_stderr},
                {"slope_stderr", f->slope_stderr},
                {"points", f->points}};
    };
    json rows = json::array();
    for (const auto& row : sweep.rows) {
        json r = {{"value", row.value}, {"N", row.N}};
        if (row.failure) {
            r["failure"] = *row.failure;
        } else {
            r["rel_error"] = row.rel_error;
            r["stderr"] = row.stderr_;
        }
        rows.push_back(std::move(r));
    }
    return {{"schema_version", kReportSchemaVersion},
            {"kind", "sweep"},
            {"axis", to_string(sweep.axis)},
            {"error_fit_scale", sweep.axis == SweepAxis::Q ? "semilog2" : "loglog"},
            {"rows", std::move(rows)},
            {"error_fit", fit_json(sweep.error_fit)},
            {"size_fit", fit_json(sweep.size_fit)}};
}

std::vector<LemmaRow> lemma_sequence(const ProblemInstance& p, const kernel::KernelSpec& kernel,
                                     double T, int levels, double K0) {
    if (levels < 1 || !(K0 > 0.0)) {
        throw InvalidArgument("lemma_sequence: need levels >= 1 and K0 > 0");
    }
    const double norm_l = p.schedule().max_norm_L();
    const double h = std::min(1.0, 1.0 / (std::numbers::e * T * norm_l));
    std::vector<LemmaRow> rows;
    for (int j = 0; j < levels; ++j) {
        LemmaRow row;
        row.K = K0 * std::ldexp(1.0, j);
        row.M = static_cast<int>(std::max<std::int64_t>(1, ceil_int(row.K / h)));
        row.Q = std::min(4 + 2 * j, sampling::kMaxGaussNodes);
        const int steps = p.schedule().exact_pieces()
                              ? 1
                              : static_cast<int>(std::ceil(1.0 + row.K * norm_l * T));
        row.residual = residual_lemma_check(p, kernel, T, row.K, row.M, row.Q, steps);
        rows.push_back(row);
    }
    return rows;
}

} // namespace inflchs::harness
