#include "inflchs/sampling.hpp"

#include "inflchs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace inflchs::sampling {

namespace {

constexpr int kPlanSchemaVersion = 1;

// Legendre P_n(x) and its derivative by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
    double p_prev = 1.0;
    double p = x;
    if (n == 0) {
        return {1.0, 0.0};
    }
    for (int j = 2; j <= n; ++j) {
        const double next = ((2.0 * j - 1.0) * x * p - (j - 1.0) * p_prev) / j;
        p_prev = p;
        p = next;
    }
    const double dp = n * (x * p - p_prev) / (x * x - 1.0);
    return {p, dp};
}

// ceil(x) that ignores round-off just above an integer.
std::int64_t robust_ceil(double x) {
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) {
        return static_cast<std::int64_t>(r);
    }
    return static_cast<std::int64_t>(std::ceil(x));
}

void require_positive_finite(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidArgument(std::string(what) + " must be positive and finite");
    }
}

} // namespace

std::string_view to_string(Method method) {
    return method == Method::gaussian ? "gaussian" : "monte-carlo";
}

Method parse_method(std::string_view name) {
    if (name == "gaussian") {
        return Method::gaussian;
    }
    if (name == "monte-carlo") {
        return Method::monte_carlo;
    }
    throw InvalidArgument("unknown sampling method '" + std::string(name) + "'");
}

double SamplingPlan::abs_coefficient_sum() const {
    double s = 0.0;
    for (const auto& t : terms) {
        s += std::abs(t.c);
    }
    return s;
}

std::complex<double> SamplingPlan::coefficient_sum() const {
    std::complex<double> s = 0.0;
    for (const auto& t : terms) {
        s += t.c;
    }
    return s;
}

Rule gauss_legendre(int Q) {
    if (Q < 1 || Q > kMaxGaussNodes) {
        throw RangeError("gauss_legendre: Q must lie in [1, 64], got " + std::to_string(Q));
    }
    Rule rule;
    rule.nodes.resize(Q);
    rule.weights.resize(Q);
    const int half = (Q + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-like initial guess for the i-th largest root.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (Q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            auto [p, d] = legendre_with_derivative(Q, x);
            dp = d;
            const double dx = p / d;
            x -= dx;
            if (std::abs(dx) <= 1e-15) {
                break;
            }
        }
        dp = legendre_with_derivative(Q, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Store ascending and exactly symmetric.
        rule.nodes[Q - 1 - i] = x;
        rule.nodes[i] = -x;
        rule.weights[Q - 1 - i] = w;
        rule.weights[i] = w;
    }
    if (Q % 2 == 1) {
        rule.nodes[Q / 2] = 0.0;
    }
    return rule;
}

Rule composite_rule(double K, int M, int Q) {
    require_positive_finite(K, "composite_rule: K");
    if (M < 1) {
        throw InvalidArgument("composite_rule: M must be at least 1");
    }
    const Rule base = gauss_legendre(Q);
    const double h = K / M;
    Rule out;
    out.nodes.reserve(2 * static_cast<std::size_t>(M) * Q);
    out.weights.reserve(out.nodes.capacity());
    for (int m = -M; m < M; ++m) {
        const double a = K * (static_cast<double>(m) / M);
        const double b = K * (static_cast<double>(m + 1) / M);
        const double mid = 0.5 * (a + b);
        for (int q = 0; q < Q; ++q) {
            out.nodes.push_back(mid + 0.5 * h * base.nodes[q]);
            out.weights.push_back(0.5 * h * base.weights[q]);
        }
    }
    return out;
}

SamplingPlan composite_plan(const kernel::KernelSpec& kernel, double K, int M, int Q) {
    const Rule rule = composite_rule(K, M, Q);
    SamplingPlan plan;
    plan.method = Method::gaussian;
    plan.kernel = kernel;
    plan.K = K;
    plan.M = M;
    plan.Q = Q;
    plan.terms.reserve(rule.nodes.size());
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        plan.terms.push_back({rule.nodes[j], rule.weights[j] * kernel.g(rule.nodes[j])});
    }
    return plan;
}

GaussianParameters gaussian_parameters(const kernel::KernelSpec& kernel, double eps, double T,
                                       double normL, const AccuracyOptions& options) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw InvalidArgument("plan_from_accuracy: eps must lie in (0, 1)");
    }
    if (!(T >= 0.0) || !std::isfinite(T) || !(normL >= 0.0) || !std::isfinite(normL)) {
        throw InvalidArgument("plan_from_accuracy: T and normL must be finite and non-negative");
    }
    if (!(options.max_panel_width > 0.0)) {
        throw InvalidArgument("plan_from_accuracy: max_panel_width must be positive");
    }
    const double share = eps / 3.0;
    const kernel::TruncationChoice trunc = kernel::choose_truncation(kernel, share);

    GaussianParameters p;
    p.K = trunc.K;
    p.tail = trunc.epsilon_tail;
    double h = std::min(p.K, options.max_panel_width);
    const double scale = std::numbers::e * T * normL;
    if (scale > 0.0) {
        h = std::min(h, 1.0 / scale);
    }
    const std::int64_t m = robust_ceil(p.K / h);
    if (m > (1LL << 30)) {
        throw RangeError("plan_from_accuracy: subinterval count exceeds 2^30");
    }
    p.M = static_cast<int>(std::max<std::int64_t>(1, m));
    p.h = p.K / p.M;
    if (options.q_override) {
        p.Q = *options.q_override;
    } else {
        p.Q = static_cast<int>(std::ceil(std::log2(p.K / share) / 2.0)) + 2;
    }
    p.Q = std::clamp(p.Q, 1, kMaxGaussNodes);
    return p;
}

SamplingPlan plan_from_accuracy(const kernel::KernelSpec& kernel, double eps, double T,
                                double normL, const AccuracyOptions& options) {
    const GaussianParameters p = gaussian_parameters(kernel, eps, T, normL, options);
    SamplingPlan plan = composite_plan(kernel, p.K, p.M, p.Q);
    plan.eps = eps;
    return plan;
}

SamplingPlan mc_plan(const kernel::KernelSpec& kernel, double K, std::int64_t Ns,
                     std::uint64_t seed) {
    require_positive_finite(K, "mc_plan: K");
    if (Ns < 1) {
        throw InvalidArgument("mc_plan: Ns must be at least 1");
    }
    if (Ns > kMaxMonteCarloSamples) {
        throw RangeError("mc_plan: Ns exceeds 1e9");
    }
    SamplingPlan plan;
    plan.method = Method::monte_carlo;
    plan.kernel = kernel;
    plan.K = K;
    plan.Ns = Ns;
    plan.seed = seed;
    plan.generator = std::string(kGeneratorName);
    plan.terms.reserve(static_cast<std::size_t>(Ns));

    // mt19937_64 output is fixed by the standard; the mapping to [0, 1) is
    // done by hand because uniform_real_distribution is implementation-defined.
    std::mt19937_64 engine(seed);
    const double scale = 2.0 * K / static_cast<double>(Ns);
    for (std::int64_t i = 0; i < Ns; ++i) {
        const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
        const double xi = -K + 2.0 * K * u;
        plan.terms.push_back({xi, scale * kernel.g(xi)});
    }
    return plan;
}

std::int64_t mc_size_from_accuracy(double eps, double K) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw InvalidArgument("mc_size_from_accuracy: eps must lie in (0, 1)");
    }
    require_positive_finite(K, "mc_size_from_accuracy: K");
    const double ratio = 2.0 * K / eps;
    const double n = ratio * ratio;
    if (n > static_cast<double>(kMaxMonteCarloSamples)) {
        throw RangeError("mc_size_from_accuracy: required Ns = " + std::to_string(n) +
                         " exceeds 1e9");
    }
    return std::max<std::int64_t>(1, robust_ceil(n));
}

nlohmann::json to_json(const SamplingPlan& plan) {
    nlohmann::json doc;
    doc["schema_version"] = kPlanSchemaVersion;
    doc["method"] = to_string(plan.method);
    doc["K"] = plan.K;
    if (plan.method == Method::gaussian) {
        doc["M"] = plan.M;
        doc["Q"] = plan.Q;
    } else {
        doc["Ns"] = plan.Ns;
        doc["seed"] = plan.seed;
        doc["generator"] = plan.generator;
    }
    doc["eps"] = plan.eps;
    doc["kernel"] = {{"family", kernel::to_string(plan.kernel.family())},
                     {"beta", plan.kernel.beta()},
                     {"normalization_correction", plan.kernel.normalization_correction()}};
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : plan.terms) {
        terms.push_back({{"k", t.k}, {"c_re", t.c.real()}, {"c_im", t.c.imag()}});
    }
    doc["terms"] = std::move(terms);
    return doc;
}

SamplingPlan plan_from_json(const nlohmann::json& doc) {
    try {
        SamplingPlan plan;
        if (doc.at("schema_version").get<int>() != kPlanSchemaVersion) {
            throw InvalidArgument("plan_from_json: unsupported schema_version");
        }
        plan.method = parse_method(doc.at("method").get<std::string>());
        plan.K = doc.at("K").get<double>();
        plan.eps = doc.value("eps", 0.0);
        const auto& kern = doc.at("kernel");
        plan.kernel = kernel::KernelSpec::from_parts(
            kernel::parse_family(kern.at("family").get<std::string>()),
            kern.at("beta").get<double>(), kern.at("normalization_correction").get<double>());
        std::size_t expected = 0;
        if (plan.method == Method::gaussian) {
            plan.M = doc.at("M").get<int>();
            plan.Q = doc.at("Q").get<int>();
            expected = 2 * static_cast<std::size_t>(plan.M) * plan.Q;
        } else {
            plan.Ns = doc.at("Ns").get<std::int64_t>();
            plan.seed = doc.at("seed").get<std::uint64_t>();
            plan.generator = doc.at("generator").get<std::string>();
            expected = static_cast<std::size_t>(plan.Ns);
        }
        const auto& terms = doc.at("terms");
        if (terms.size() != expected) {
            throw InvalidArgument("plan_from_json: term count does not match plan metadata");
        }
        plan.terms.reserve(terms.size());
        for (const auto& t : terms) {
            plan.terms.push_back({t.at("k").get<double>(),
                                  {t.at("c_re").get<double>(), t.at("c_im").get<double>()}});
        }
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("plan_from_json: ") + e.what());
    }
}

} // namespace inflchs::sampling
