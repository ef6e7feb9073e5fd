#include "inflchs/linalg.hpp"

#include "inflchs/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace inflchs::linalg {

namespace {

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double one_norm(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().colwise().sum().maxCoeff();
}

} // namespace

Matrix HermitianPair::assemble() const {
    return L + kI * H;
}

Matrix HermitianPair::original() const {
    Matrix a = assemble();
    a.diagonal().array() -= shift;
    return a;
}

void require_square(const Matrix& m, std::string_view what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

void require_finite(const Matrix& m, std::string_view what) {
    if (!m.allFinite()) {
        throw InvalidArgument(std::string(what) + ": matrix has non-finite entries");
    }
}

double hermiticity_defect(const Matrix& m) {
    return max_abs(m - m.adjoint());
}

bool is_hermitian(const Matrix& m) {
    return m.rows() == m.cols() &&
           hermiticity_defect(m) <= kHermitianTolerance * std::max(1.0, max_abs(m));
}

Matrix checked_hermitian(const Matrix& m, std::string_view what) {
    require_square(m, what);
    require_finite(m, what);
    if (!is_hermitian(m)) {
        throw ContractViolation(std::string(what) + ": matrix is not Hermitian (defect " +
                                std::to_string(hermiticity_defect(m)) + ")");
    }
    return (m + m.adjoint()) * 0.5;
}

HermitianPair hermitian_split(const Matrix& a) {
    require_square(a, "hermitian_split");
    require_finite(a, "hermitian_split");
    HermitianPair pair;
    pair.L = (a + a.adjoint()) * 0.5;
    pair.H = (a - a.adjoint()) / Complex(0.0, 2.0);
    // Round-off can leave a last-bit asymmetry on the diagonal of H.
    pair.H = (pair.H + pair.H.adjoint()) * 0.5;
    pair.shift = 0.0;
    pair.lambda0 = min_hermitian_eigenvalue(pair.L);
    return pair;
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
    const Matrix h = checked_hermitian(m, "hermitian_eigenvalues");
    if (h.rows() == 1) {
        return Eigen::VectorXd::Constant(1, h(0, 0).real());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("hermitian_eigenvalues: eigensolver failed", 0.0);
    }
    return solver.eigenvalues();
}

double min_hermitian_eigenvalue(const Matrix& l) {
    return hermitian_eigenvalues(l).minCoeff();
}

double hermitian_spectral_norm(const Matrix& m) {
    return hermitian_eigenvalues(m).cwiseAbs().maxCoeff();
}

double power_norm_estimate(const Matrix& m, int iterations) {
    require_square(m, "power_norm_estimate");
    const Index n = m.rows();
    // Deterministic, non-degenerate start vector.
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v(i) = Complex(1.0 + 0.1 * static_cast<double>(i % 7), 0.05 * static_cast<double>(i % 3));
    }
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Vector w = m.adjoint() * (m * v);
        const double nw = w.norm();
        if (nw == 0.0) {
            return 0.0;
        }
        estimate = std::sqrt(nw);
        v = w / nw;
    }
    return estimate;
}

ShiftResult spectral_shift(const HermitianPair& pair, double lambda0_target) {
    if (!(lambda0_target > 0.0) || !std::isfinite(lambda0_target)) {
        throw InvalidArgument("spectral_shift: lambda0_target must be a positive finite number");
    }
    ShiftResult out;
    const double current = min_hermitian_eigenvalue(pair.L);
    out.c = std::max(0.0, lambda0_target - current);
    out.pair = pair;
    out.pair.L.diagonal().array() += out.c;
    out.pair.shift = pair.shift + out.c;
    out.pair.lambda0 = min_hermitian_eigenvalue(out.pair.L);
    return out;
}

Matrix matrix_exponential(const Matrix& m) {
    require_square(m, "matrix_exponential");
    require_finite(m, "matrix_exponential");

    // Higham (2005) degree-13 coefficients and the matching theta bound.
    static constexpr std::array<double, 14> b = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};
    static constexpr double theta13 = 5.371920351148152;

    const Index n = m.rows();
    const double norm = one_norm(m);
    int s = 0;
    if (norm > theta13) {
        s = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    }
    if (s > 1000) {
        throw RangeError("matrix_exponential: norm too large for scaling and squaring");
    }
    const Matrix a = m / std::ldexp(1.0, s);
    const Matrix id = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;

    const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                           b[3] * a2 + b[1] * id;
    const Matrix u = a * u_inner;
    const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                     b[2] * a2 + b[0] * id;

    Matrix r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < s; ++i) {
        r = r * r;
        if (!r.allFinite()) {
            throw RangeError("matrix_exponential: result overflows double precision");
        }
    }
    if (!r.allFinite()) {
        throw RangeError("matrix_exponential: result overflows double precision");
    }
    return r;
}

HermitianPropagator::HermitianPropagator(const Matrix& g) {
    const Matrix h = checked_hermitian(g, "HermitianPropagator");
    dim_ = h.rows();
    if (dim_ == 1) {
        eigenvalues_ = Eigen::VectorXd::Constant(1, h(0, 0).real());
        eigenvectors_ = Matrix::Identity(1, 1);
    } else if (dim_ <= kEigenStepMaxDim) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
        if (solver.info() != Eigen::Success) {
            throw ConvergenceError("HermitianPropagator: eigensolver failed", 0.0);
        }
        eigenvalues_ = solver.eigenvalues();
        eigenvectors_ = solver.eigenvectors();
    } else {
        spectral_ = false;
        generator_ = h;
    }
}

Vector HermitianPropagator::apply(double dt, const Vector& v) const {
    if (v.size() != dim_) {
        throw DimensionError("HermitianPropagator::apply: vector length mismatch");
    }
    if (!std::isfinite(dt)) {
        throw InvalidArgument("HermitianPropagator::apply: dt must be finite");
    }
    if (dt == 0.0) {
        return v;
    }
    if (spectral_) {
        Vector coeffs = eigenvectors_.adjoint() * v;
        for (Index i = 0; i < dim_; ++i) {
            coeffs(i) *= std::exp(Complex(0.0, -eigenvalues_(i) * dt));
        }
        return eigenvectors_ * coeffs;
    }
    return matrix_exponential(Complex(0.0, -dt) * generator_) * v;
}

Vector unitary_step(const Matrix& g, double dt, const Vector& v) {
    return HermitianPropagator(g).apply(dt, v);
}

} // namespace inflchs::linalg
