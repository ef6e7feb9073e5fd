#include "doctest.h"
#include "oracles.hpp"

#include "inflchs/errors.hpp"
#include "inflchs/sampling.hpp"

#include <numbers>

using namespace inflchs;
using namespace inflchs::sampling;

TEST_CASE("Gauss-Legendre integrates monomials exactly up to degree 2Q-1") {
    for (int q = 1; q <= 20; ++q) {
        const Rule r = gauss_legendre(q);
        REQUIRE(r.nodes.size() == static_cast<std::size_t>(q));
        for (int d = 0; d <= 2 * q - 1; ++d) {
            double s = 0.0;
            for (int i = 0; i < q; ++i) {
                s += r.weights[i] * std::pow(r.nodes[i], d);
            }
            const double exact = d % 2 == 1 ? 0.0 : 2.0 / (d + 1);
            CHECK(std::abs(s - exact) <= 1e-13);
        }
        // One degree higher is not exact.
        const int d = 2 * q;
        double s = 0.0;
        for (int i = 0; i < q; ++i) {
            s += r.weights[i] * std::pow(r.nodes[i], d);
        }
        CHECK(std::abs(s - 2.0 / (d + 1)) > 1e-12);
    }
}

TEST_CASE("Gauss-Legendre nodes agree with the Golub-Welsch eigenvalue route") {
    for (int q : {2, 7, 16, 33, 64}) {
        const Rule r = gauss_legendre(q);
        const auto gw = oracle::golub_welsch(q);
        for (int i = 0; i < q; ++i) {
            CHECK(r.nodes[i] == doctest::Approx(gw.nodes[i]).epsilon(1e-12));
            CHECK(std::abs(r.weights[i] - gw.weights[i]) <= 1e-12);
            CHECK(r.nodes[i] == -r.nodes[q - 1 - i]);
        }
    }
    CHECK_THROWS_AS(gauss_legendre(0), RangeError);
    CHECK_THROWS_AS(gauss_legendre(65), RangeError);
}

TEST_CASE("composite rule covers [-K, K] with 2M panels") {
    const Rule r = composite_rule(3.0, 4, 5);
    CHECK(r.nodes.size() == 40);
    double total = 0.0;
    double cubic = 0.0;
    for (std::size_t j = 0; j < r.nodes.size(); ++j) {
        total += r.weights[j];
        cubic += r.weights[j] * std::pow(r.nodes[j] + 1.0, 3);
    }
    CHECK(total == doctest::Approx(6.0).epsilon(1e-14));
    // int_{-3}^{3} (x+1)^3 dx = (4^4 - (-2)^4) / 4 = 60
    CHECK(cubic == doctest::Approx(60.0).epsilon(1e-13));
    CHECK(std::is_sorted(r.nodes.begin(), r.nodes.end()));
    CHECK(r.nodes.front() > -3.0);
    CHECK(r.nodes.back() < 3.0);
}

TEST_CASE("gaussian plan parameters follow the step and order rules") {
    const auto kern = kernel::KernelSpec::beta(0.75);
    const double eps = 1e-4;
    const auto p = gaussian_parameters(kern, eps, 2.0, 3.0);
    const double share = eps / 3.0;
    CHECK(p.K == kernel::choose_truncation(kern, share).K);
    CHECK(p.M == static_cast<int>(std::ceil(p.K * std::numbers::e * 2.0 * 3.0 - 1e-9)));
    CHECK(p.h <= 1.0 / (std::numbers::e * 2.0 * 3.0) + 1e-15);
    CHECK(p.Q == static_cast<int>(std::ceil(std::log2(p.K / share) / 2.0)) + 2);
    CHECK(p.node_count() == 2 * static_cast<std::size_t>(p.M) * p.Q);

    // T = 0: panels are capped at unit width.
    const auto p0 = gaussian_parameters(kern, eps, 0.0, 3.0);
    CHECK(p0.h <= 1.0);
    CHECK(p0.M == static_cast<int>(std::ceil(p0.K)));

    CHECK_THROWS_AS(gaussian_parameters(kern, 0.0, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(gaussian_parameters(kern, 1e-3, -1.0, 1.0), InvalidArgument);
}

TEST_CASE("plan coefficients are quadrature weights times g") {
    const auto kern = kernel::KernelSpec::cauchy();
    const SamplingPlan plan = composite_plan(kern, 4.0, 8, 6);
    const Rule rule = composite_rule(4.0, 8, 6);
    REQUIRE(plan.size() == rule.nodes.size());
    for (std::size_t j = 0; j < plan.size(); ++j) {
        CHECK(plan.terms[j].k == rule.nodes[j]);
        CHECK(std::abs(plan.terms[j].c - rule.weights[j] / (std::numbers::pi * (1.0 + rule.nodes[j] * rule.nodes[j]))) <= 1e-16);
    }
    // sum c = int_{-4}^{4} g = (2/pi) atan 4
    const SamplingPlan fine = composite_plan(kern, 4.0, 16, 16);
    CHECK(fine.coefficient_sum().real() ==
          doctest::Approx(2.0 / std::numbers::pi * std::atan(4.0)).epsilon(1e-12));
}

TEST_CASE("Monte Carlo sizing and reproducibility") {
    CHECK(mc_size_from_accuracy(0.1, 1.0) == 400);
    CHECK_THROWS_AS(mc_size_from_accuracy(1e-6, 1e3), RangeError);

    const auto kern = kernel::KernelSpec::beta(0.5);
    const SamplingPlan a = mc_plan(kern, 5.0, 1000, 42);
    const SamplingPlan b = mc_plan(kern, 5.0, 1000, 42);
    const SamplingPlan c = mc_plan(kern, 5.0, 1000, 43);
    CHECK(a.generator == kGeneratorName);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.terms[i].k == b.terms[i].k);
        CHECK(a.terms[i].c == b.terms[i].c);
        CHECK(a.terms[i].k >= -5.0);
        CHECK(a.terms[i].k < 5.0);
        CHECK(std::abs(a.terms[i].c - (10.0 / 1000.0) * kern.g(a.terms[i].k)) <= 1e-18);
        differs = differs || a.terms[i].k != c.terms[i].k;
    }
    CHECK(differs);
}

TEST_CASE("Monte Carlo nodes follow the fixed mt19937_64 stream") {
    std::mt19937_64 engine(7);
    const SamplingPlan p = mc_plan(kernel::KernelSpec::cauchy(), 2.0, 3, 7);
    for (int i = 0; i < 3; ++i) {
        const double u = static_cast<double>(engine() >> 11) / 9007199254740992.0;
        CHECK(p.terms[i].k == -2.0 + 4.0 * u);
    }
}

TEST_CASE("plan JSON round trip") {
    const auto kern = kernel::KernelSpec::beta(0.9);
    SamplingPlan g = plan_from_accuracy(kern, 1e-3, 1.0, 2.0);
    SamplingPlan back = plan_from_json(nlohmann::json::parse(to_json(g).dump()));
    CHECK(back.method == g.method);
    CHECK(back.kernel == g.kernel);
    CHECK(back.M == g.M);
    CHECK(back.Q == g.Q);
    CHECK(back.K == g.K);
    CHECK(back.eps == g.eps);
    REQUIRE(back.size() == g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(back.terms[i].k == g.terms[i].k);
        CHECK(back.terms[i].c == g.terms[i].c);
    }

    const SamplingPlan mc = mc_plan(kern, 3.0, 50, 99);
    const SamplingPlan mc_back = plan_from_json(to_json(mc));
    CHECK(mc_back.seed == 99);
    CHECK(mc_back.Ns == 50);

    auto doc = to_json(mc);
    doc["terms"].erase(doc["terms"].begin());
    CHECK_THROWS_AS(plan_from_json(doc), InvalidArgument);
    doc = to_json(mc);
    doc.erase("method");
    CHECK_THROWS_AS(plan_from_json(doc), InvalidArgument);
}
