#include "inflchs/kernel.hpp"

#include "inflchs/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace inflchs::kernel {

namespace {

using std::numbers::pi;

constexpr double kQuadratureTolerance = 1e-14;
constexpr double kFarTailTarget = 1e-15;

struct SegmentResult {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a, b], split at powers of two so each piece is
// well scaled for integrands concentrated near the origin.
template <class F>
SegmentResult integrate_segments(F&& fn, double a, double b) {
    std::vector<double> cuts{a};
    for (double p = 0.25; p < b; p *= 2.0) {
        if (p > 1.5 * a && p < b / 1.5) {
            cuts.push_back(p);
        }
    }
    cuts.push_back(b);
    SegmentResult out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double err = 0.0;
        out.value += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            fn, cuts[i], cuts[i + 1], 12, kQuadratureTolerance, &err);
        out.error += err;
    }
    return out;
}

// Analytic bound on int_{|k| > K} |g| for the beta family:
// |g(k)| <= prefactor exp(-decay |k|^beta) / |k|, which integrates to
// (prefactor / beta) E1(decay K^beta) on each side.
double beta_far_bound(double prefactor, double decay, double beta, double K) {
    const double x = decay * std::pow(K, beta);
    if (x > 700.0) {
        return 0.0;
    }
    return 2.0 * prefactor / beta * boost::math::expint(1, x);
}

double far_window_for(double prefactor, double decay, double beta) {
    double w = 16.0;
    while (beta_far_bound(prefactor, decay, beta, w) > kFarTailTarget && w < 1e12) {
        w *= 2.0;
    }
    return w;
}

// 2 * int_0^W Re g(k) dk; g(-k) = conj(g(k)) on the real line.
SegmentResult window_integral(const KernelSpec& spec) {
    auto re_g = [&spec](double k) { return spec.g(k).real(); };
    SegmentResult r = integrate_segments(re_g, 0.0, spec.far_window());
    r.value *= 2.0;
    r.error *= 2.0;
    return r;
}

} // namespace

std::string_view to_string(Family family) {
    return family == Family::cauchy ? "cauchy" : "beta";
}

Family parse_family(std::string_view name) {
    if (name == "cauchy") {
        return Family::cauchy;
    }
    if (name == "beta") {
        return Family::beta;
    }
    throw InvalidArgument("unknown kernel family '" + std::string(name) + "'");
}

KernelSpec::KernelSpec(Family family, double beta, double correction)
    : family_(family), beta_(beta), correction_(correction) {
    if (family_ == Family::beta) {
        far_window_ = far_window_for(tail_prefactor(), tail_decay_rate(), beta_);
    }
}

KernelSpec KernelSpec::cauchy() {
    return KernelSpec(Family::cauchy, 0.0, 1.0);
}

KernelSpec KernelSpec::beta(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw InvalidArgument("beta kernel requires 0 < beta < 1, got " + std::to_string(beta));
    }
    KernelSpec raw(Family::beta, beta, 1.0);
    const SegmentResult integral = window_integral(raw);
    if (integral.error > 1e-11) {
        throw ConvergenceError("beta kernel normalization quadrature did not converge",
                               integral.error);
    }
    // The far tail (< 1e-15) is below the resolution of the correction.
    return KernelSpec(Family::beta, beta, 1.0 / integral.value);
}

KernelSpec KernelSpec::from_parts(Family family, double beta, double correction) {
    if (family == Family::cauchy) {
        return cauchy();
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw InvalidArgument("beta kernel requires 0 < beta < 1");
    }
    if (!(correction > 0.5 && correction < 2.0)) {
        throw InvalidArgument("beta kernel normalization correction out of range");
    }
    return KernelSpec(family, beta, correction);
}

std::string KernelSpec::name() const {
    if (family_ == Family::cauchy) {
        return "cauchy";
    }
    return "beta(" + std::to_string(beta_) + ")";
}

std::complex<double> KernelSpec::f(std::complex<double> z) const {
    if (z.imag() > 0.0) {
        throw DomainError("kernel evaluated in the open upper half-plane");
    }
    const std::complex<double> w = 1.0 + std::complex<double>(0.0, 1.0) * z;
    if (family_ == Family::cauchy) {
        return 1.0 / (pi * w);
    }
    // Principal branch; Re(w) >= 1 on the closed lower half-plane.
    const std::complex<double> exponent = std::pow(2.0, beta_) - std::pow(w, beta_);
    return correction_ * std::exp(exponent) / (2.0 * pi);
}

std::complex<double> KernelSpec::g(double k) const {
    if (family_ == Family::cauchy) {
        return {1.0 / (pi * (1.0 + k * k)), 0.0};
    }
    return f({k, 0.0}) / std::complex<double>(1.0, -k);
}

double KernelSpec::abs_g(double k) const {
    return std::abs(g(k));
}

double KernelSpec::tail_prefactor() const {
    if (family_ == Family::cauchy) {
        return 1.0 / pi;
    }
    return correction_ * std::exp(std::pow(2.0, beta_)) / (2.0 * pi);
}

double KernelSpec::tail_decay_rate() const {
    if (family_ == Family::cauchy) {
        return 0.0;
    }
    return std::cos(beta_ * pi / 2.0);
}

std::complex<double> eval_kernel(const KernelSpec& spec, std::complex<double> z) {
    return spec.f(z);
}

std::complex<double> weight_g(const KernelSpec& spec, double k) {
    return spec.g(k);
}

double check_normalization(const KernelSpec& spec) {
    const SegmentResult integral = window_integral(spec);
    if (integral.error > 1e-11) {
        throw ConvergenceError("normalization quadrature did not converge (error estimate " +
                                   std::to_string(integral.error) + ")",
                               integral.error);
    }
    const double window = spec.far_window();
    if (spec.family() == Family::cauchy) {
        const double exact_tail = 2.0 / pi * std::atan(1.0 / window);
        return std::abs(integral.value + exact_tail - 1.0);
    }
    return std::abs(integral.value - 1.0) +
           beta_far_bound(spec.tail_prefactor(), spec.tail_decay_rate(), spec.beta(), window);
}

double tail_mass(const KernelSpec& spec, double K) {
    if (!(K >= 0.0) || !std::isfinite(K)) {
        throw InvalidArgument("tail_mass: K must be finite and non-negative");
    }
    if (spec.family() == Family::cauchy) {
        // (2/pi)(pi/2 - atan K), written to avoid cancellation for large K.
        return K == 0.0 ? 1.0 : 2.0 / pi * std::atan(1.0 / K);
    }
    const double far = std::max(spec.far_window(), 2.0 * K);
    auto abs_g = [&spec](double k) { return spec.abs_g(k); };
    const SegmentResult near = integrate_segments(abs_g, K, far);
    return 2.0 * (near.value + near.error) +
           beta_far_bound(spec.tail_prefactor(), spec.tail_decay_rate(), spec.beta(), far);
}

TruncationChoice choose_truncation(const KernelSpec& spec, double eps_tail) {
    if (!(eps_tail > 0.0 && eps_tail < 1.0)) {
        throw InvalidArgument("choose_truncation: eps_tail must lie in (0, 1)");
    }
    constexpr int kMinExponent = -12;
    constexpr int kMaxExponent = 20; // 2^20 > 1e6
    constexpr int kBisectionSteps = 11;

    int j = kMinExponent;
    while (tail_mass(spec, std::ldexp(1.0, j)) > eps_tail) {
        if (++j > kMaxExponent) {
            throw RangeError("choose_truncation: required K exceeds 1e6 for eps_tail = " +
                             std::to_string(eps_tail) +
                             "; use the beta kernel or a looser tolerance");
        }
    }
    double hi = std::ldexp(1.0, j);
    if (j > kMinExponent) {
        double lo = std::ldexp(1.0, j - 1);
        for (int step = 0; step < kBisectionSteps; ++step) {
            const double mid = 0.5 * (lo + hi);
            if (tail_mass(spec, mid) <= eps_tail) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    if (hi > kMaxTruncation) {
        throw RangeError("choose_truncation: required K exceeds 1e6");
    }
    return {hi, tail_mass(spec, hi)};
}

double decay_sup(const KernelSpec& spec, double alpha, double k_max, int samples) {
    if (samples < 2 || !(k_max > 0.0)) {
        throw InvalidArgument("decay_sup: need k_max > 0 and at least two samples");
    }
    const double lo = std::log(1e-3);
    const double hi = std::log(k_max);
    double sup = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double k = std::exp(lo + (hi - lo) * i / (samples - 1));
        for (double s : {k, -k}) {
            sup = std::max(sup, std::pow(k, alpha) * std::abs(spec.f({s, 0.0})));
        }
    }
    return sup;
}

} // namespace inflchs::kernel
