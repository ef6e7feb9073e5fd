#include "doctest.h"
#include "oracles.hpp"

#include "inflchs/errors.hpp"
#include "inflchs/evolve.hpp"
#include "inflchs/problems.hpp"

#include <cstdlib>

using namespace inflchs;
using linalg::Complex;
using linalg::HermitianPair;
using linalg::Matrix;
using linalg::Vector;

namespace {

HermitianPair scalar_pair(double l, double h) {
    HermitianPair p;
    p.L = Matrix::Constant(1, 1, l);
    p.H = Matrix::Constant(1, 1, h);
    p.lambda0 = l;
    return p;
}

ProblemInstance random_instance(std::mt19937_64& rng, int n, const char* label = "random") {
    HermitianPair p;
    p.L = oracle::random_hermitian_spectrum(rng, n, 0.3, 1.5);
    p.H = oracle::random_hermitian(rng, n, 1.5);
    p.lambda0 = linalg::min_hermitian_eigenvalue(p.L);
    return ProblemInstance(TimeSchedule::constant(p), oracle::random_vector(rng, n), label);
}

} // namespace

TEST_CASE("scalar decay reproduces exp(-1)") {
    const ProblemInstance p = problems::build_scalar(1.0);
    const auto plan = sampling::plan_from_accuracy(kernel::KernelSpec::beta(0.75), 1e-4, 1.0,
                                                   p.schedule().max_norm_L());
    const Vector u = lchs_apply(p, plan, 1.0, 1);
    CHECK(std::abs(u(0) - std::exp(-1.0)) <= 1e-4);
}

TEST_CASE("unitary propagation matches the matrix exponential") {
    std::mt19937_64 rng(1);
    const ProblemInstance p = random_instance(rng, 5);
    const auto& pair = p.schedule().pairs().front();
    for (double k : {-3.0, 0.0, 2.5}) {
        const Vector u = propagate_unitary(p, k, 0.8, 1);
        const Vector ref = oracle::expm(-linalg::kI * 0.8 * (k * pair.L + pair.H)) * p.u0();
        CHECK((u - ref).norm() <= 1e-12);
        CHECK(u.norm() == doctest::Approx(p.u0().norm()).epsilon(1e-13));
    }
}

TEST_CASE("midpoint rule on a time-dependent scalar phase") {
    // L = 1, H(t) = t: U(k, 1) = exp(-i (k + 1/2)); the midpoint rule is exact for linear H.
    const TimeSchedule s =
        TimeSchedule::callback(2.0, [](double t) { return scalar_pair(1.0, t); });
    const ProblemInstance p(s, Vector::Constant(1, 1.0), "phase");
    for (int steps : {1, 3, 10}) {
        for (double k : {0.0, 1.5, -4.0}) {
            const Vector u = propagate_unitary(p, k, 1.0, steps);
            CHECK(std::abs(u(0) - std::exp(Complex(0.0, -(k + 0.5)))) <= 1e-13);
        }
    }
}

TEST_CASE("piecewise schedules are propagated exactly, breakpoints need not match T") {
    std::mt19937_64 rng(4);
    const Matrix L1 = oracle::random_hermitian_spectrum(rng, 3, 0.5, 1.0);
    const Matrix L2 = oracle::random_hermitian_spectrum(rng, 3, 0.5, 2.0);
    const Matrix H1 = oracle::random_hermitian(rng, 3, 1.0);
    const Matrix H2 = oracle::random_hermitian(rng, 3, 1.0);
    auto mk = [](const Matrix& l, const Matrix& h) {
        HermitianPair p;
        p.L = l;
        p.H = h;
        return p;
    };
    const TimeSchedule s = TimeSchedule::piecewise({0.0, 0.4, 1.0}, {mk(L1, H1), mk(L2, H2)});
    const ProblemInstance p(s, oracle::random_vector(rng, 3), "pieces");
    const double T = 0.7;
    const double k = 1.3;
    const Vector ref = oracle::expm(-linalg::kI * 0.3 * (k * L2 + H2)) *
                       (oracle::expm(-linalg::kI * 0.4 * (k * L1 + H1)) * p.u0());
    CHECK((propagate_unitary(p, k, T, 1) - ref).norm() <= 1e-12);

    // Oracle for the piecewise generator.
    const Vector oref = oracle::expm(-0.3 * (L2 + linalg::kI * H2)) *
                        (oracle::expm(-0.4 * (L1 + linalg::kI * H1)) * p.u0());
    CHECK(oracle::rel_diff(oracle_solve(p, T), oref) <= 1e-9);
    CHECK_THROWS_AS(propagate_unitary(p, k, 1.5, 1), PropagationError);
}

TEST_CASE("stepping oracle agrees with the exponential oracle") {
    std::mt19937_64 rng(2);
    const ProblemInstance p = random_instance(rng, 6);
    const Vector a = oracle_solve(p, 1.5, OracleMethod::automatic);
    const Vector b = oracle_solve(p, 1.5, OracleMethod::stepping);
    const auto& pair = p.schedule().pairs().front();
    const Vector ref = oracle::eig_propagate(pair.original(), 1.5, p.u0());
    CHECK(oracle::rel_diff(a, ref) <= 1e-10);
    CHECK(oracle::rel_diff(b, ref) <= 1e-9);
    CHECK((oracle_solve(p, 0.0) - p.u0()).norm() == 0.0);
}

TEST_CASE("solve on random instances stays within the accuracy target") {
    std::mt19937_64 rng(8);
    const auto kern = kernel::KernelSpec::beta(0.75);
    for (int trial = 0; trial < 4; ++trial) {
        const ProblemInstance p = random_instance(rng, 4);
        const auto plan = sampling::plan_from_accuracy(kern, 1e-3, 1.0, p.schedule().max_norm_L());
        const SolveReport r = solve(p, plan, 1.0);
        CHECK(r.rel_error <= 1e-3);
        CHECK(r.plan_size == plan.size());
        CHECK(r.propagator_steps == 1);
        CHECK(r.sum_abs_c == doctest::Approx(plan.abs_coefficient_sum()));
    }
}

TEST_CASE("spectral shift is unwound exactly") {
    // a_re = -0.5: shifted by c = 0.6; the answer still grows like exp(0.5 T).
    const ProblemInstance p = problems::build_scalar(-0.5, 0.3);
    CHECK(p.schedule().shift() == doctest::Approx(0.6));
    const auto plan = sampling::plan_from_accuracy(kernel::KernelSpec::beta(0.75), 1e-5, 1.0,
                                                   p.schedule().max_norm_L());
    const SolveReport r = solve(p, plan, 1.0);
    CHECK(r.shift_unwound);
    CHECK(std::abs(r.u_lchs(0) - std::exp(Complex(0.5, -0.3))) <= 1e-4);
    CHECK(std::abs(r.u_oracle(0) - std::exp(Complex(0.5, -0.3))) <= 1e-12);
}

TEST_CASE("T = 0 returns the coefficient mass times u0") {
    const ProblemInstance p = problems::build_scalar(2.0);
    const auto plan = sampling::composite_plan(kernel::KernelSpec::cauchy(), 10.0, 20, 8);
    const Vector u = lchs_apply(p, plan, 0.0, 1);
    CHECK(std::abs(u(0) - plan.coefficient_sum()) <= 1e-15);
}

TEST_CASE("failing terms are reported with their plan index") {
    const ProblemInstance p = problems::build_scalar(1.0);
    const std::vector<double> nodes{0.0, 1.0, std::numeric_limits<double>::infinity(), 2.0};
    const std::vector<std::complex<double>> w(4, 0.25);
    try {
        weighted_unitary_sum(p, nodes, w, 1.0, 1);
        FAIL("expected a propagation error");
    } catch (const PropagationError& e) {
        CHECK(e.term() == 2);
    }
    CHECK_THROWS_AS(weighted_unitary_sum(p, nodes, std::vector<std::complex<double>>(3), 1.0, 1),
                    InvalidArgument);
}

TEST_CASE("result does not depend on the worker count") {
    std::mt19937_64 rng(12);
    const ProblemInstance p = random_instance(rng, 3);
    const auto plan = sampling::plan_from_accuracy(kernel::KernelSpec::beta(0.75), 1e-3, 1.0,
                                                   p.schedule().max_norm_L());
    setenv("INFLCHS_THREADS", "1", 1);
    const Vector a = lchs_apply(p, plan, 1.0, 1);
    setenv("INFLCHS_THREADS", "3", 1);
    const Vector b = lchs_apply(p, plan, 1.0, 1);
    unsetenv("INFLCHS_THREADS");
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        CHECK(a(i) == b(i));
    }
}

TEST_CASE("callback schedules converge by step doubling") {
    // L = 1 + t/2, H = [[t, 0.5], [0.5, -t]]: non-commuting over time.
    const TimeSchedule s = TimeSchedule::callback(1.0, [](double t) {
        HermitianPair p;
        p.L = Matrix::Identity(2, 2) * (1.0 + 0.5 * t);
        p.H = Matrix(2, 2);
        p.H << t, 0.5, 0.5, -t;
        return p;
    });
    const ProblemInstance p(s, Vector::Constant(2, Complex(1.0 / std::sqrt(2.0))), "callback");
    const auto plan = sampling::plan_from_accuracy(kernel::KernelSpec::beta(0.75), 1e-3, 1.0,
                                                   p.schedule().max_norm_L());
    const SolveReport r = solve(p, plan, 1.0);
    CHECK(r.rel_error <= 2e-3);
    CHECK(r.propagator_steps >= 2);
}

TEST_CASE("residual of the f-weighted sum shrinks under refinement") {
    const ProblemInstance p = problems::build_scalar(1.0, 0.4);
    const auto kern = kernel::KernelSpec::beta(0.75);
    const double coarse = residual_lemma_check(p, kern, 1.0, 16.0, 48, 6, 1);
    const double fine = residual_lemma_check(p, kern, 1.0, 128.0, 384, 12, 1);
    CHECK(fine < coarse);
    CHECK(fine <= 1e-4);
    CHECK_THROWS_AS(residual_lemma_check(p, kern, 0.0, 16.0, 48, 6, 1), InvalidArgument);
}

TEST_CASE("vector JSON helpers interleave real and imaginary parts") {
    Vector v(2);
    v << Complex(1.0, -2.0), Complex(0.5, 0.25);
    const auto doc = vector_to_json(v);
    CHECK(doc.size() == 4);
    CHECK(doc[1].get<double>() == -2.0);
    CHECK(vector_from_json(doc) == v);
    CHECK_THROWS_AS(vector_from_json(nlohmann::json::array({1.0})), InvalidArgument);
}
