// Reference computations used only by the tests. Each one takes a route that
// is independent of the library code it checks.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// exp(M) through Eigen's matrix-function module.
inline Matrix expm(const Matrix& m) { return m.exp(); }

// exp(-A T) u0 by diagonalizing A (assumes A diagonalizable).
inline Vector eig_propagate(const Matrix& a, double T, const Vector& u0) {
    Eigen::ComplexEigenSolver<Matrix> es(a);
    const Matrix& v = es.eigenvectors();
    Vector coeffs = v.partialPivLu().solve(u0);
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
        coeffs(i) *= std::exp(-es.eigenvalues()(i) * T);
    }
    return v * coeffs;
}

// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol,
                      int depth = 40) {
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps,
            int d) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
            return left + right + (left + right - whole) / 15.0;
        }
        return rec(lo, mid, flo, flm, fmid, left, eps / 2.0, d - 1) +
               rec(mid, hi, fmid, frm, fhi, right, eps / 2.0, d - 1);
    };
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(a, b, fa, fm, fb, whole, tol, depth);
}

// Simpson over consecutive [x_i, x_{i+1}] pieces.
inline double simpson_pieces(const std::function<double(double)>& f, const std::vector<double>& x,
                             double tol) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        s += simpson(f, x[i], x[i + 1], tol / static_cast<double>(x.size()));
    }
    return s;
}

// Gauss-Legendre nodes/weights from the eigenproblem of the Jacobi matrix.
struct GolubWelsch {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GolubWelsch golub_welsch(int q) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(q, q);
    for (int i = 1; i < q; ++i) {
        const double b = i / std::sqrt(4.0 * i * i - 1.0);
        j(i, i - 1) = b;
        j(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    GolubWelsch r;
    for (int i = 0; i < q; ++i) {
        r.nodes.push_back(es.eigenvalues()(i));
        const double v0 = es.eigenvectors()(0, i);
        r.weights.push_back(2.0 * v0 * v0);
    }
    return r;
}

// Eigenvalues of (1/h^2) tridiag(-1, 2, -1) on n interior points, h = 1/(n+1).
inline std::vector<double> dirichlet_laplacian_eigenvalues(int n) {
    const double h = 1.0 / (n + 1);
    std::vector<double> ev;
    for (int j = 1; j <= n; ++j) {
        const double s = std::sin(j * std::numbers::pi * h / 2.0);
        ev.push_back(4.0 / (h * h) * s * s);
    }
    return ev;
}

// Cauchy-kernel tail mass (2/pi) atan(1/K) inverted in closed form.
inline double cauchy_k_for_tail(double eps) { return 1.0 / std::tan(std::numbers::pi * eps / 2.0); }

inline Matrix random_hermitian(std::mt19937_64& rng, int n, double scale) {
    std::normal_distribution<double> nd;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m(i, j) = Complex(nd(rng), nd(rng));
        }
    }
    Matrix h = 0.5 * (m + m.adjoint());
    const double norm = Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues().cwiseAbs().maxCoeff();
    return h * (scale / norm);
}

// Hermitian matrix with spectrum drawn uniformly from [lo, hi].
inline Matrix random_hermitian_spectrum(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> ud(lo, hi);
    Eigen::HouseholderQR<Matrix> qr(random_hermitian(rng, n, 1.0) +
                                    Matrix::Identity(n, n) * Complex(0.0, 1.0));
    const Matrix q = qr.householderQ();
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) {
        d(i) = ud(rng);
    }
    d(0) = lo;
    return q * d.cast<Complex>().asDiagonal() * q.adjoint();
}

inline Vector random_vector(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> nd;
    Vector v(n);
    for (int i = 0; i < n; ++i) {
        v(i) = Complex(nd(rng), nd(rng));
    }
    return v / v.norm();
}

inline double rel_diff(const Vector& a, const Vector& b) { return (a - b).norm() / b.norm(); }

} // namespace oracle
