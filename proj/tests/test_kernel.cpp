#include "doctest.h"
#include "oracles.hpp"

#include "inflchs/errors.hpp"
#include "inflchs/kernel.hpp"
#include "inflchs/sampling.hpp"

#include <numbers>

using namespace inflchs;
using kernel::KernelSpec;

namespace {

// int g over [-W, W] by the composite Gauss-Legendre rule (a different node
// family from the library's Kronrod route), plus the analytic far tail.
double legendre_window_sum(const KernelSpec& spec, double W) {
    const auto rule = sampling::composite_rule(W, static_cast<int>(4 * W), 20);
    std::complex<double> s = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        s += rule.weights[j] * spec.g(rule.nodes[j]);
    }
    return s.real();
}

} // namespace

TEST_CASE("cauchy kernel closed forms") {
    const KernelSpec c = KernelSpec::cauchy();
    for (double k : {-5.0, -0.3, 0.0, 1.0, 17.0}) {
        CHECK(std::abs(c.g(k) - 1.0 / (std::numbers::pi * (1.0 + k * k))) <= 1e-16);
        const auto f = c.f({k, 0.0});
        CHECK(std::abs(f - 1.0 / (std::numbers::pi * std::complex<double>(1.0, k))) <= 1e-16);
    }
    CHECK(kernel::tail_mass(c, 3.0) == doctest::Approx(2.0 / std::numbers::pi * std::atan(1.0 / 3.0)));
}

TEST_CASE("kernel f is only defined on the closed lower half-plane") {
    CHECK_THROWS_AS(KernelSpec::cauchy().f({0.0, 0.1}), DomainError);
    CHECK_THROWS_AS(KernelSpec::beta(0.5).f({1.0, 1e-3}), DomainError);
    CHECK_NOTHROW(KernelSpec::beta(0.5).f({1.0, -3.0}));
}

TEST_CASE("beta parameter outside (0, 1) is rejected") {
    CHECK_THROWS_AS(KernelSpec::beta(1.0), InvalidArgument);
    CHECK_THROWS_AS(KernelSpec::beta(0.0), InvalidArgument);
    CHECK_THROWS_AS(KernelSpec::beta(-0.2), InvalidArgument);
}

TEST_CASE("normalization holds by two independent quadrature routes") {
    for (double beta : {0.5, 0.75, 0.9}) {
        const KernelSpec spec = KernelSpec::beta(beta);
        CHECK(kernel::check_normalization(spec) <= 1e-10);
        CHECK(spec.normalization_correction() == doctest::Approx(1.0).epsilon(1e-9));
        const double W = spec.far_window();
        const double far = 2.0 * spec.tail_prefactor() / beta *
                           std::exp(-spec.tail_decay_rate() * std::pow(W, beta));
        CHECK(std::abs(legendre_window_sum(spec, W) - 1.0) <= 1e-10 + far);
    }
    const KernelSpec c = KernelSpec::cauchy();
    CHECK(kernel::check_normalization(c) <= 1e-10);
    CHECK(std::abs(legendre_window_sum(c, 64.0) + 2.0 / std::numbers::pi * std::atan(1.0 / 64.0) -
                   1.0) <= 1e-12);
}

TEST_CASE("beta tail mass agrees with an adaptive Simpson oracle") {
    const KernelSpec spec = KernelSpec::beta(0.75);
    auto abs_g = [&](double k) { return std::abs(spec.g(k)); };
    for (double K : {2.0, 10.0, 40.0}) {
        std::vector<double> cuts{K};
        for (double x = 2.0 * K; x < 4096.0; x *= 2.0) {
            cuts.push_back(x);
        }
        cuts.push_back(4096.0);
        const double ref = 2.0 * oracle::simpson_pieces(abs_g, cuts, 1e-13);
        const double ours = kernel::tail_mass(spec, K);
        CHECK(ours >= ref * (1.0 - 1e-8));
        CHECK(ours <= ref * (1.0 + 1e-6) + 1e-14);
    }
}

TEST_CASE("truncation choice meets its tail budget") {
    for (const KernelSpec& spec : {KernelSpec::cauchy(), KernelSpec::beta(0.5), KernelSpec::beta(0.9)}) {
        for (double eps : {1e-2, 1e-4}) {
            const auto t = kernel::choose_truncation(spec, eps);
            CHECK(t.epsilon_tail <= eps);
            CHECK(kernel::tail_mass(spec, t.K) <= eps);
            // Not grossly conservative: half the window already misses the budget.
            CHECK(kernel::tail_mass(spec, 0.5 * t.K) > eps);
        }
    }
}

TEST_CASE("cauchy truncation matches the arctangent inversion") {
    const KernelSpec c = KernelSpec::cauchy();
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const double ref = oracle::cauchy_k_for_tail(eps);
        CHECK(kernel::choose_truncation(c, eps).K == doctest::Approx(ref).epsilon(1e-3));
    }
    CHECK_THROWS_AS(kernel::choose_truncation(c, 1e-8), RangeError);
}

TEST_CASE("decay supremum") {
    // |k f(k)| = |k| / (pi sqrt(1 + k^2)) increases towards 1/pi.
    CHECK(kernel::decay_sup(KernelSpec::cauchy(), 1.0, 1e3) ==
          doctest::Approx(1e3 / (std::numbers::pi * std::sqrt(1.0 + 1e6))));
    const KernelSpec spec = KernelSpec::beta(0.75);
    const double s3 = kernel::decay_sup(spec, 3.0, 1e3);
    CHECK(std::isfinite(s3));
    CHECK(kernel::decay_sup(spec, 3.0, 1e4) == doctest::Approx(s3).epsilon(1e-4));
}
