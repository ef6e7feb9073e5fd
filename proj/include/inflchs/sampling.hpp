// sampling.hpp: finite sampling plans for the kernel integral: composite
// Gauss-Legendre quadrature and uniform Monte Carlo.

#pragma once

#include "inflchs/kernel.hpp"

#include "json.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace inflchs::sampling {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline constexpr int kMaxGaussNodes = 64;

// Gauss-Legendre nodes (ascending) and weights on [-1, 1], 1 <= Q <= 64.
Rule gauss_legendre(int Q);

// [-K, K] split into 2M panels of width h = K/M with a Q-node rule on each.
// Nodes ascend across the whole window.
Rule composite_rule(double K, int M, int Q);

enum class Method { gaussian, monte_carlo };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct PlanTerm {
    double k = 0.0;
    std::complex<double> c;
};

// Name and version of the pseudo-random stream behind Monte Carlo plans.
inline constexpr std::string_view kGeneratorName = "mt19937_64/v1";

struct SamplingPlan {
    Method method = Method::gaussian;
    kernel::KernelSpec kernel = kernel::KernelSpec::cauchy();
    std::vector<PlanTerm> terms;
    double K = 0.0;
    // gaussian
    int M = 0;
    int Q = 0;
    // monte-carlo
    std::int64_t Ns = 0;
    std::uint64_t seed = 0;
    std::string generator;
    // Target accuracy when the plan was derived from one; 0 otherwise.
    double eps = 0.0;

    std::size_t size() const { return terms.size(); }
    double abs_coefficient_sum() const;
    std::complex<double> coefficient_sum() const;
};

SamplingPlan composite_plan(const kernel::KernelSpec& kernel, double K, int M, int Q);

// Tunables for the accuracy-to-plan map. The quadrature order follows from
// the per-panel bound 2^{-2Q} A(beta) with A(beta) <= 10:
// Q = ceil(log2(K/eps) / 2) + 2.
struct AccuracyOptions {
    std::optional<int> q_override;
    // Panel width cap; g is analytic in the strip |Im k| < 1, so panels wider
    // than this lose accuracy on g itself regardless of T ||L||.
    double max_panel_width = 1.0;
};

struct GaussianParameters {
    double K = 0.0;
    double h = 0.0;
    int M = 0;
    int Q = 0;
    double tail = 0.0;
    std::int64_t node_count() const { return 2LL * M * Q; }
};

// Parameter selection of plan_from_accuracy without building the terms.
// eps is split in thirds: truncation tail, quadrature, propagator stepping.
GaussianParameters gaussian_parameters(const kernel::KernelSpec& kernel, double eps, double T,
                                       double normL, const AccuracyOptions& options = {});

SamplingPlan plan_from_accuracy(const kernel::KernelSpec& kernel, double eps, double T,
                                double normL, const AccuracyOptions& options = {});

SamplingPlan mc_plan(const kernel::KernelSpec& kernel, double K, std::int64_t Ns,
                     std::uint64_t seed);

inline constexpr std::int64_t kMaxMonteCarloSamples = 1'000'000'000;

// Ns = ceil((2K/eps)^2), so that the standard-error bound 2K/sqrt(Ns) <= eps.
std::int64_t mc_size_from_accuracy(double eps, double K);

nlohmann::json to_json(const SamplingPlan& plan);
SamplingPlan plan_from_json(const nlohmann::json& doc);

} // namespace inflchs::sampling
