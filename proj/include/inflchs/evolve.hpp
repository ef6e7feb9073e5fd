// evolve.hpp: the unitary-sum evaluation u(T) ~ sum_j c_j U(k_j, T) u0, the
// direct-integration oracle and diagnostics.

#pragma once

#include "inflchs/errors.hpp"
#include "inflchs/kernel.hpp"
#include "inflchs/sampling.hpp"
#include "inflchs/schedule.hpp"

#include "json.hpp"

#include <complex>
#include <span>
#include <string>

namespace inflchs {

// U(k, T) u0 = T exp(-i int_0^T (k L(s) + H(s)) ds) u0 by the midpoint rule.
// Exact (n_steps ignored) for constant and piecewise-constant schedules.
linalg::Vector propagate_unitary(const ProblemInstance& p, double k, double T, int n_steps);

// sum_j w_j U(k_j, T) u0 in ascending index order with compensated
// summation. No shift unwinding.
linalg::Vector weighted_unitary_sum(const ProblemInstance& p, std::span<const double> nodes,
                                    std::span<const std::complex<double>> weights, double T,
                                    int n_steps);

// The plan sum, multiplied by exp(cT) when the instance carries a shift c > 0.
linalg::Vector lchs_apply(const ProblemInstance& p, const sampling::SamplingPlan& plan, double T,
                          int n_steps);

enum class OracleMethod { automatic, stepping };

// Ground truth for du/dt = -A(t) u with the unshifted A. Constant schedules
// use exp(-A T) u0 unless `stepping` is requested; otherwise classical RK4 with
// the step count doubled until successive answers agree to 1e-10.
linalg::Vector oracle_solve(const ProblemInstance& p, double T,
                            OracleMethod method = OracleMethod::automatic);

// || sum_j w_j f(k_j) U(k_j, T) u0 || over a composite rule on [-K, K]; tends
// to zero for T > 0 when lambda0 > 0.
double residual_lemma_check(const ProblemInstance& p, const kernel::KernelSpec& kernel, double T,
                            double K, int M, int Q, int n_steps);

struct WallTimes {
    double propagation = 0.0;
    double oracle = 0.0;
    double total = 0.0;
};

struct SolveReport {
    linalg::Vector u_lchs;
    linalg::Vector u_oracle;
    double T = 0.0;
    double rel_error = 0.0;
    double abs_error = 0.0;
    std::size_t plan_size = 0;
    int propagator_steps = 0;
    WallTimes wall_times;
    bool shift_unwound = false;
    double shift = 0.0;
    double lambda0 = 0.0;
    // ||u0|| / ||u(T)||; the post-selection cost factor of a quantum LCU
    // realization, reported only.
    double amplification = 0.0;
    double sum_abs_c = 0.0;
};

struct SolveOptions {
    // Relative change allowed when doubling the step count of callback
    // schedules. Defaults to plan.eps / 3 when the plan records an accuracy.
    double step_tolerance = 0.0;
    int max_steps = 1 << 14;
    // Precomputed oracle solution to reuse (e.g. across Monte Carlo replicas).
    const linalg::Vector* oracle = nullptr;
};

SolveReport solve(const ProblemInstance& p, const sampling::SamplingPlan& plan, double T,
                  const SolveOptions& options = {});

// Error raised by solve(); names the phase (propagation | oracle) that failed.
class SolveError : public Error {
public:
    SolveError(std::string phase, const std::string& what)
        : Error(phase + ": " + what), phase_(std::move(phase)) {}
    const std::string& phase() const noexcept { return phase_; }

private:
    std::string phase_;
};

// Interleaved [re0, im0, re1, im1, ...].
nlohmann::json vector_to_json(const linalg::Vector& v);
linalg::Vector vector_from_json(const nlohmann::json& doc);

} // namespace inflchs
