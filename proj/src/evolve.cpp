#include "inflchs/evolve.hpp"

#include "inflchs/errors.hpp"
#include "inflchs/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

namespace inflchs {

namespace {

using linalg::Complex;
using linalg::HermitianPair;
using linalg::Matrix;
using linalg::Vector;

// Neumaier-compensated running sum of complex vectors.
class CompensatedSum {
public:
    explicit CompensatedSum(linalg::Index n)
        : sum_re_(Eigen::ArrayXd::Zero(n)), sum_im_(Eigen::ArrayXd::Zero(n)),
          comp_re_(Eigen::ArrayXd::Zero(n)), comp_im_(Eigen::ArrayXd::Zero(n)) {}

    void add(const Vector& v) {
        for (linalg::Index i = 0; i < v.size(); ++i) {
            accumulate(sum_re_(i), comp_re_(i), v(i).real());
            accumulate(sum_im_(i), comp_im_(i), v(i).imag());
        }
    }

    Vector value() const {
        Vector out(sum_re_.size());
        for (linalg::Index i = 0; i < out.size(); ++i) {
            out(i) = Complex(sum_re_(i) + comp_re_(i), sum_im_(i) + comp_im_(i));
        }
        return out;
    }

private:
    static void accumulate(double& sum, double& comp, double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }

    Eigen::ArrayXd sum_re_, sum_im_, comp_re_, comp_im_;
};

// Pairs sampled once per segment (piece value, or midpoint for callbacks).
struct Discretization {
    std::vector<Segment> segments;
    std::vector<HermitianPair> pairs;
};

Discretization discretize(const ProblemInstance& p, double T, int n_steps) {
    Discretization d;
    const TimeSchedule& s = p.schedule();
    d.segments = s.segments(T, n_steps);
    d.pairs.reserve(d.segments.size());
    for (const auto& seg : d.segments) {
        d.pairs.push_back(s.exact_pieces() ? s.pairs()[seg.piece]
                                           : s.at(0.5 * (seg.t0 + seg.t1)));
    }
    return d;
}

Vector propagate(const Discretization& d, double k, const Vector& u0) {
    if (!std::isfinite(k)) {
        throw InvalidArgument("non-finite node");
    }
    Vector v = u0;
    for (std::size_t i = 0; i < d.segments.size(); ++i) {
        const Matrix g = k * d.pairs[i].L + d.pairs[i].H;
        v = linalg::HermitianPropagator(g).apply(d.segments[i].t1 - d.segments[i].t0, v);
    }
    return v;
}

void require_time(double T, const char* what) {
    if (!(T >= 0.0) || !std::isfinite(T)) {
        throw InvalidArgument(std::string(what) + ": T must be finite and non-negative");
    }
}

// du/dt = -A u with classical RK4 and a fixed total step budget `n`.
Vector rk4_solve(const ProblemInstance& p, double T, std::int64_t n) {
    const TimeSchedule& s = p.schedule();
    Vector u = p.u0();
    auto step_constant = [](const Matrix& a, double h, Vector& x) {
        const Vector k1 = -(a * x);
        const Vector k2 = -(a * (x + 0.5 * h * k1));
        const Vector k3 = -(a * (x + 0.5 * h * k2));
        const Vector k4 = -(a * (x + h * k3));
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    if (s.exact_pieces()) {
        for (const auto& seg : s.segments(T, 1)) {
            const Matrix a = s.pairs()[seg.piece].original();
            const double len = seg.t1 - seg.t0;
            const auto m = std::max<std::int64_t>(
                1, static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * len / T)));
            const double h = len / static_cast<double>(m);
            for (std::int64_t j = 0; j < m; ++j) {
                step_constant(a, h, u);
            }
        }
        return u;
    }
    const double h = T / static_cast<double>(n);
    for (std::int64_t j = 0; j < n; ++j) {
        const double t = T * static_cast<double>(j) / static_cast<double>(n);
        const Matrix a0 = s.at(t).original();
        const Matrix am = s.at(t + 0.5 * h).original();
        const Matrix a1 = s.at(std::min(T, t + h)).original();
        const Vector k1 = -(a0 * u);
        const Vector k2 = -(am * (u + 0.5 * h * k1));
        const Vector k3 = -(am * (u + 0.5 * h * k2));
        const Vector k4 = -(a1 * (u + h * k3));
        u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return u;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

Vector propagate_unitary(const ProblemInstance& p, double k, double T, int n_steps) {
    if (!std::isfinite(k)) {
        throw InvalidArgument("propagate_unitary: k must be finite");
    }
    require_time(T, "propagate_unitary");
    if (n_steps < 1) {
        throw InvalidArgument("propagate_unitary: n_steps must be at least 1");
    }
    return propagate(discretize(p, T, n_steps), k, p.u0());
}

Vector weighted_unitary_sum(const ProblemInstance& p, std::span<const double> nodes,
                            std::span<const std::complex<double>> weights, double T,
                            int n_steps) {
    if (nodes.size() != weights.size() || nodes.empty()) {
        throw InvalidArgument("weighted_unitary_sum: need matching, non-empty nodes and weights");
    }
    require_time(T, "weighted_unitary_sum");
    const Discretization d = discretize(p, T, std::max(1, n_steps));

    CompensatedSum acc(p.dim());
    constexpr std::size_t kChunk = 1024;
    std::vector<Vector> buffer(std::min(kChunk, nodes.size()));
    std::vector<std::optional<std::string>> failures(buffer.size());
    for (std::size_t start = 0; start < nodes.size(); start += kChunk) {
        const std::size_t len = std::min(kChunk, nodes.size() - start);
        parallel_for(len, [&](std::size_t i) {
            try {
                buffer[i] = weights[start + i] * propagate(d, nodes[start + i], p.u0());
                failures[i].reset();
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        });
        for (std::size_t i = 0; i < len; ++i) {
            if (failures[i]) {
                throw PropagationError("term " + std::to_string(start + i) + " (k = " +
                                           std::to_string(nodes[start + i]) +
                                           "): " + *failures[i],
                                       T, static_cast<std::ptrdiff_t>(start + i));
            }
            acc.add(buffer[i]);
        }
    }
    return acc.value();
}

Vector lchs_apply(const ProblemInstance& p, const sampling::SamplingPlan& plan, double T,
                  int n_steps) {
    if (plan.terms.empty()) {
        throw InvalidArgument("lchs_apply: plan is empty");
    }
    std::vector<double> nodes;
    std::vector<std::complex<double>> coeffs;
    nodes.reserve(plan.size());
    coeffs.reserve(plan.size());
    for (const auto& t : plan.terms) {
        nodes.push_back(t.k);
        coeffs.push_back(t.c);
    }
    Vector u = weighted_unitary_sum(p, nodes, coeffs, T, n_steps);
    const double c = p.schedule().shift();
    if (c > 0.0) {
        u *= std::exp(c * T);
    }
    return u;
}

Vector oracle_solve(const ProblemInstance& p, double T, OracleMethod method) {
    require_time(T, "oracle_solve");
    if (T == 0.0) {
        return p.u0();
    }
    const TimeSchedule& s = p.schedule();
    if (s.kind() == TimeSchedule::Kind::constant && method == OracleMethod::automatic) {
        const Matrix a = s.pairs().front().original();
        return linalg::matrix_exponential(-T * a) * p.u0();
    }
    s.segments(T, 1); // horizon check

    constexpr std::int64_t kMaxSteps = std::int64_t{1} << 21;
    const double norm_a = s.max_norm_A();
    std::int64_t n = std::max<std::int64_t>(8, static_cast<std::int64_t>(std::ceil(2.0 * T * norm_a)));
    Vector coarse = rk4_solve(p, T, n);
    double delta = std::numeric_limits<double>::infinity();
    while (2 * n <= kMaxSteps) {
        Vector fine = rk4_solve(p, T, 2 * n);
        const double scale = std::max(fine.norm(), 1e-300);
        delta = (fine - coarse).norm() / scale;
        if (delta <= 1e-10) {
            return fine;
        }
        coarse = std::move(fine);
        n *= 2;
    }
    throw ConvergenceError("oracle_solve: RK4 step cap reached, last relative delta " +
                               std::to_string(delta),
                           delta);
}

double residual_lemma_check(const ProblemInstance& p, const kernel::KernelSpec& kernel, double T,
                            double K, int M, int Q, int n_steps) {
    if (!(p.schedule().lambda0() > 0.0)) {
        throw ContractViolation("residual_lemma_check: requires lambda0 > 0");
    }
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw InvalidArgument("residual_lemma_check: requires T > 0");
    }
    const sampling::Rule rule = sampling::composite_rule(K, M, Q);
    std::vector<std::complex<double>> weights(rule.nodes.size());
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        weights[j] = rule.weights[j] * kernel.f({rule.nodes[j], 0.0});
    }
    return weighted_unitary_sum(p, rule.nodes, weights, T, n_steps).norm();
}

SolveReport solve(const ProblemInstance& p, const sampling::SamplingPlan& plan, double T,
                  const SolveOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    require_time(T, "solve");
    if (plan.terms.empty()) {
        throw InvalidArgument("solve: plan is empty");
    }
    SolveReport report;
    report.T = T;
    report.plan_size = plan.size();
    report.sum_abs_c = plan.abs_coefficient_sum();
    report.shift = p.schedule().shift();
    report.lambda0 = p.schedule().lambda0();
    report.shift_unwound = report.shift > 0.0;

    try {
        const TimeSchedule& s = p.schedule();
        if (s.exact_pieces() || T == 0.0) {
            report.u_lchs = lchs_apply(p, plan, T, 1);
            report.propagator_steps = static_cast<int>(s.segments(T, 1).size());
        } else {
            double tol = options.step_tolerance;
            if (!(tol > 0.0)) {
                tol = plan.eps > 0.0 ? plan.eps / 3.0 : 1e-8;
            }
            double k_max = 0.0;
            for (const auto& t : plan.terms) {
                k_max = std::max(k_max, std::abs(t.k));
            }
            const double initial = std::ceil(1.0 + k_max * s.max_norm_L() * T);
            int n = static_cast<int>(std::clamp(initial, 1.0, static_cast<double>(options.max_steps)));
            Vector coarse = lchs_apply(p, plan, T, n);
            bool accepted = false;
            double delta = 0.0;
            while (2 * static_cast<std::int64_t>(n) <= options.max_steps) {
                Vector fine = lchs_apply(p, plan, T, 2 * n);
                delta = (fine - coarse).norm() / std::max(fine.norm(), 1e-300);
                n *= 2;
                coarse = std::move(fine);
                if (delta <= tol) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                throw ConvergenceError("step doubling did not reach tolerance, last delta " +
                                           std::to_string(delta),
                                       delta);
            }
            report.u_lchs = std::move(coarse);
            report.propagator_steps = n;
        }
    } catch (const Error& e) {
        throw SolveError("propagation", e.what());
    }
    report.wall_times.propagation = seconds_since(start);

    const auto oracle_start = std::chrono::steady_clock::now();
    try {
        if (options.oracle) {
            if (options.oracle->size() != p.dim()) {
                throw DimensionError("precomputed oracle has the wrong length");
            }
            report.u_oracle = *options.oracle;
        } else {
            report.u_oracle = oracle_solve(p, T);
        }
    } catch (const Error& e) {
        throw SolveError("oracle", e.what());
    }
    report.wall_times.oracle = seconds_since(oracle_start);

    const double oracle_norm = report.u_oracle.norm();
    report.abs_error = (report.u_lchs - report.u_oracle).norm();
    report.rel_error = oracle_norm > 0.0 ? report.abs_error / oracle_norm
                                         : std::numeric_limits<double>::infinity();
    report.amplification = oracle_norm > 0.0 ? p.u0().norm() / oracle_norm
                                             : std::numeric_limits<double>::infinity();
    report.wall_times.total = seconds_since(start);
    return report;
}

nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json out = nlohmann::json::array();
    for (linalg::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i).real());
        out.push_back(v(i).imag());
    }
    return out;
}

Vector vector_from_json(const nlohmann::json& doc) {
    if (!doc.is_array() || doc.size() % 2 != 0) {
        throw InvalidArgument("vector_from_json: expected an interleaved re/im array");
    }
    Vector v(static_cast<linalg::Index>(doc.size() / 2));
    for (linalg::Index i = 0; i < v.size(); ++i) {
        v(i) = Complex(doc.at(2 * i).get<double>(), doc.at(2 * i + 1).get<double>());
    }
    return v;
}

} // namespace inflchs
