#pragma once

#include <span>
#include <vector>

#include "psam/linalg.hpp"
#include "psam/matrix.hpp"
#include "psam/random.hpp"

namespace psam {

/// Transmit-side spatial correlation R_H with its eigen-data and Hermitian
/// square root cached. Immutable once constructed.
class CovarianceSpec {
public:
    /// Validates that `matrix` is Hermitian positive definite.
    explicit CovarianceSpec(ComplexMatrix matrix);

    static CovarianceSpec identity(std::size_t n);

    std::size_t size() const noexcept { return matrix_.rows(); }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    /// Eigenvalues g, descending.
    const std::vector<double>& eigenvalues() const noexcept { return eig_.values; }
    /// Eigenbasis U, columns matching eigenvalues().
    const ComplexMatrix& eigenbasis() const noexcept { return eig_.vectors; }
    const ComplexMatrix& sqrt() const noexcept { return sqrt_; }
    bool is_identity(double tol = 1e-12) const;

private:
    ComplexMatrix matrix_;
    HermitianEig eig_;
    ComplexMatrix sqrt_;
};

/// Exponential correlation model [R]_ij = rho^|i-j|.
CovarianceSpec exp_correlation(std::size_t n, double rho);

/// True when `a` is majorized by `b` (a is "less spread" than b). Both are
/// sorted descending internally. Throws Domain on length mismatch and
/// NotComparable when the sums differ by more than 1e-9.
bool majorizes(std::span<const double> a, std::span<const double> b);

/// One channel draw H = H0 R^{1/2}, H0 i.i.d. ZMCSCG (Nr x Nt).
ComplexMatrix sample_channel(const CovarianceSpec& cov, std::size_t nr, RandomStream& stream);

}  // namespace psam
