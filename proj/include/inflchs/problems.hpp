// problems.hpp: builders for the application instances: parabolic PDEs,
// queueing chains, absorbing-potential Schrodinger, Lindblad dynamics and the
// damped (black-hole) Hamiltonian, plus a scalar test problem.

#pragma once

#include "inflchs/schedule.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace inflchs::problems {

// Named coefficient function c(x) * p(t), with p(t) = sum_j time_poly[j] t^j
// (p = 1 when time_poly is empty).
struct CoefficientPreset {
    enum class Kind { constant, gaussian, polynomial, sine, cap_layer };

    Kind kind = Kind::constant;
    double value = 0.0;                // constant
    double amplitude = 1.0;            // gaussian, sine
    double center = 0.0;               // gaussian
    double width = 1.0;                // gaussian: amplitude * exp(-(x-center)^2 / (2 width^2))
    double mode = 1.0;                 // sine: amplitude * sin(mode * pi * x)
    std::vector<double> coefficients;  // polynomial: sum_j coefficients[j] x^j
    double depth = 0.0;                // cap_layer: -depth * s^power, s = (x-start)/(stop-start)
    double start = 0.0;                //   for x in [start, stop], 0 elsewhere
    double stop = 1.0;
    double power = 2.0;
    std::vector<double> time_poly;

    static CoefficientPreset constant_value(double v);
    static CoefficientPreset sine_wave(double mode);
    static CoefficientPreset from_json(const nlohmann::json& doc, const std::string& pointer);
    nlohmann::json to_json() const;

    double operator()(double x, double t = 0.0) const;
    bool time_dependent() const;
};

struct ParabolicCoefficients {
    CoefficientPreset a = CoefficientPreset::constant_value(1.0);
    CoefficientPreset b = CoefficientPreset::constant_value(0.0);
    CoefficientPreset c = CoefficientPreset::constant_value(0.0);
    int N_grid = 33;
    // Used only when a coefficient depends on time.
    double horizon = 1.0;
    int time_pieces = 16;
    double shift_target = 0.1;
    CoefficientPreset u0 = CoefficientPreset::sine_wave(1.0);
};

// Interior-grid matrices at time t for the domain [0, 1] with Dirichlet ends.
linalg::HermitianPair parabolic_pair(const ParabolicCoefficients& pc, double t);
ProblemInstance build_parabolic_1d(const ParabolicCoefficients& pc);

// Which chain the truncated generator represents. `standard` uses states
// 0..n-1 (row 0 = (-lambda, lambda)); `offset` uses states 1..n with the
// -(lambda + c_n mu) diagonal on every row, as in the usual matrix display.
enum class QueueBoundary { standard, offset };
// Last row: `leaky` keeps lambda on the diagonal (mass escapes at rate
// lambda), `reflecting` drops it so the row sums to zero.
enum class QueueTruncation { leaky, reflecting };

struct QueueParams {
    double lambda_rate = 1.0;
    double mu_rate = 2.0;
    int servers = 1;
    int n_trunc = 32;
    QueueBoundary boundary = QueueBoundary::standard;
    QueueTruncation truncation = QueueTruncation::leaky;
    double shift_target = 0.1;
};

// Transition-rate matrix (rows sum to zero except at truncated/leaky rows).
Eigen::MatrixXd queue_generator(const QueueParams& qp);
// Solver generator A = -Q^T.
linalg::Matrix queue_solver_matrix(const QueueParams& qp);
ProblemInstance build_mm1(const QueueParams& qp);
ProblemInstance build_mmc(const QueueParams& qp);

struct CapPotentials {
    CoefficientPreset V_R = CoefficientPreset::constant_value(0.0);
    CoefficientPreset V_I = CoefficientPreset::constant_value(0.0);
    double hbar = 1.0;
    int N_grid = 66;
    double x_lo = 0.0;
    double x_hi = 10.0;
    double horizon = 1.0;
    int time_pieces = 16;
    double shift_target = 0.1;
    // Gaussian wave packet exp(-(x-x0)^2/(4 sigma^2) + i k0 x).
    double packet_x0 = 4.0;
    double packet_sigma = 0.7;
    double packet_k0 = 4.0;
};

linalg::HermitianPair cap_pair(const CapPotentials& cp, double t);
linalg::Vector wave_packet(const CapPotentials& cp);
ProblemInstance build_cap_schrodinger(const CapPotentials& cp);

struct LindbladSpec {
    linalg::Matrix H_sys;
    std::vector<linalg::Matrix> jump_ops;
    linalg::Matrix rho0;
    double shift_target = 0.1;

    // n = 2, H = 0, jump sqrt(gamma) |0><1|, rho0 = |1><1|.
    static LindbladSpec amplitude_damping(double gamma);
};

// Column-stacking vec and its inverse.
linalg::Vector vectorize(const linalg::Matrix& rho);
linalg::Matrix unvectorize(const linalg::Vector& v, linalg::Index n);
// S with d vec(rho)/dt = S vec(rho).
linalg::Matrix lindblad_superoperator(const LindbladSpec& spec);
ProblemInstance build_lindblad(const LindbladSpec& spec);

ProblemInstance build_blackhole(const linalg::Matrix& H, double gamma, const linalg::Vector& u0);

// du/dt = -(a_re + i a_im) u, u(0) = u0.
ProblemInstance build_scalar(double a_re, double a_im = 0.0, linalg::Complex u0 = 1.0,
                             double shift_target = 0.1);

struct BuilderInfo {
    std::string name;
    std::string description;
};

const std::vector<BuilderInfo>& builders();
// Builds from a JSON parameter block; malformed fields raise ConfigError
// with a pointer rooted at `pointer`.
ProblemInstance build_named(const std::string& name, const nlohmann::json& params,
                            const std::string& pointer = "/problem/params");
ProblemInstance default_instance(const std::string& name);

// JSON encodings: a matrix is an array of rows, a vector an array; each entry
// is a number or a [re, im] pair.
linalg::Matrix matrix_from_json(const nlohmann::json& doc, const std::string& pointer);
linalg::Vector complex_vector_from_json(const nlohmann::json& doc, const std::string& pointer);

} // namespace inflchs::problems
