// kernel.hpp: kernel functions f(z), the integrand weight g(k) = f(k)/(1 - ik),
// normalization and truncation-range selection.

#pragma once

#include <complex>
#include <string>
#include <string_view>

namespace inflchs::kernel {

enum class Family { cauchy, beta };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

inline constexpr double kDefaultBeta = 0.75;

// Immutable description of a kernel. Beta kernels carry a numerically
// computed correction factor so that the integral of g over the real line
// equals one to machine precision.
class KernelSpec {
public:
    // f(z) = 1 / (pi (1 + iz))
    static KernelSpec cauchy();
    // f(z) = exp(2^beta) exp(-(1 + iz)^beta) / (2 pi), 0 < beta < 1
    static KernelSpec beta(double beta);
    // Rebuild a kernel from serialized metadata without renormalizing.
    static KernelSpec from_parts(Family family, double beta, double correction);

    Family family() const { return family_; }
    double beta() const { return beta_; }
    double normalization_correction() const { return correction_; }
    std::string name() const;

    // Requires Im(z) <= 0.
    std::complex<double> f(std::complex<double> z) const;
    std::complex<double> g(double k) const;
    double abs_g(double k) const;

    // Upper bound on |f(k)| for real |k| >= 0 used by the analytic tail bound:
    // |f(k)| <= prefactor * exp(-decay * |k|^beta).
    double tail_prefactor() const;
    double tail_decay_rate() const;

    // Window beyond which the analytic tail bound is below 1e-15.
    double far_window() const { return far_window_; }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

private:
    KernelSpec(Family family, double beta, double correction);

    Family family_ = Family::cauchy;
    double beta_ = 0.0;
    double correction_ = 1.0;
    double far_window_ = 1024.0;
};

std::complex<double> eval_kernel(const KernelSpec& spec, std::complex<double> z);
std::complex<double> weight_g(const KernelSpec& spec, double k);

// |numeric integral of g over R - 1|, including a certified bound for the
// part of the line outside the quadrature window.
double check_normalization(const KernelSpec& spec);

// Certified upper bound on the integral of |g| over |k| > K.
double tail_mass(const KernelSpec& spec, double K);

struct TruncationChoice {
    double K = 0.0;
    double epsilon_tail = 0.0;
};

inline constexpr double kMaxTruncation = 1e6;

// Smallest K (on a dyadic grid refined to three significant digits) whose
// certified tail mass is at most eps_tail.
TruncationChoice choose_truncation(const KernelSpec& spec, double eps_tail);

// sup over a symmetric logarithmic grid on [-k_max, k_max] of |k|^alpha |f(k)|.
double decay_sup(const KernelSpec& spec, double alpha, double k_max, int samples = 4001);

} // namespace inflchs::kernel
