// linalg.hpp: dense complex primitives: Cartesian splitting, spectral bounds,
// spectral shifting, matrix exponentials and unitary steps.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string_view>

namespace inflchs::linalg {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

// Hermiticity is checked in max-norm, scaled by max(1, max|entry|).
inline constexpr double kHermitianTolerance = 1e-12;

// Eigendecomposition is used for unitary steps up to this dimension.
inline constexpr Index kEigenStepMaxDim = 512;

// A = (L - shift*I) + iH, with L and H Hermitian and L >= lambda0.
struct HermitianPair {
    Matrix L;
    Matrix H;
    double shift = 0.0;
    double lambda0 = 0.0;

    Index dim() const { return L.rows(); }
    // L + iH (the shifted generator).
    Matrix assemble() const;
    // L - shift*I + iH (the generator before shifting).
    Matrix original() const;
};

void require_square(const Matrix& m, std::string_view what);
void require_finite(const Matrix& m, std::string_view what);

// max |M - M^dagger|
double hermiticity_defect(const Matrix& m);
bool is_hermitian(const Matrix& m);
// Throws ContractViolation if `m` is not Hermitian within tolerance, then
// returns (m + m^dagger)/2.
Matrix checked_hermitian(const Matrix& m, std::string_view what);

HermitianPair hermitian_split(const Matrix& a);

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m);
double min_hermitian_eigenvalue(const Matrix& l);
// Spectral norm of a Hermitian matrix (max |eigenvalue|).
double hermitian_spectral_norm(const Matrix& m);
// Power-iteration estimate of the spectral norm of any square matrix.
double power_norm_estimate(const Matrix& m, int iterations = 60);

struct ShiftResult {
    HermitianPair pair;
    double c = 0.0;
};

// L' = L + c*I with c = max(0, lambda0_target - min eig L). The solution of
// the shifted problem satisfies u(T) = exp(cT) u'(T).
ShiftResult spectral_shift(const HermitianPair& pair, double lambda0_target);

// exp(M) by scaling and squaring with the degree-13 Pade approximant.
Matrix matrix_exponential(const Matrix& m);

// exp(-i G dt) v for Hermitian G.
Vector unitary_step(const Matrix& g, double dt, const Vector& v);

// Caches the factorization of a Hermitian generator so that repeated
// exp(-i G dt) applications are cheap.
class HermitianPropagator {
public:
    explicit HermitianPropagator(const Matrix& g);

    Vector apply(double dt, const Vector& v) const;
    Index dim() const { return dim_; }

private:
    Index dim_ = 0;
    bool spectral_ = true;
    Eigen::VectorXd eigenvalues_;
    Matrix eigenvectors_;
    Matrix generator_;
};

} // namespace inflchs::linalg
