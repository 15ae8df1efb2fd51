#pragma once

#include <span>
#include <vector>

#include "psam/matrix.hpp"

namespace psam {

/// Eigen-pairs of a Hermitian matrix: values descending, vectors as columns.
struct HermitianEig {
    std::vector<double> values;
    ComplexMatrix vectors;

    /// U diag(values) U^H
    ComplexMatrix reconstruct() const;
};

/// Cyclic Jacobi eigendecomposition for small Hermitian matrices (n <= 16).
/// Exact ties in the eigenvalues are ordered by descending diagonal position.
HermitianEig hermitian_eig(const ComplexMatrix& a);

/// Eigenvalues only, descending. `a` is a row-major n x n Hermitian block and
/// is not modified; `out` receives n values. Allocation-free for n <= 16.
void hermitian_eigenvalues(std::span<const cplx> a, std::size_t n, std::span<double> out);

/// Hermitian PSD square root S with S*S = A. Eigenvalues down to -1e-10 are
/// treated as zero; anything more negative raises ErrorKind::NotPsd.
ComplexMatrix psd_sqrt(const ComplexMatrix& a);

/// Inverse of a Hermitian positive definite matrix. Throws SingularMatrixError
/// when the smallest eigenvalue is at or below 1e-12.
ComplexMatrix psd_inverse(const ComplexMatrix& a);

/// log2 det(A) for Hermitian positive definite A via Cholesky.
double log2det_pd(const ComplexMatrix& a);

/// log2 det(I + D^{1/2} W D^{1/2}) with W a row-major n x n Hermitian PSD
/// block and D = diag(d), d >= 0. Entries with d_i == 0 drop out of the
/// determinant, so only the active sub-block is factored.
double log2det_identity_plus_scaled(std::span<const cplx> w, std::size_t n, std::span<const double> d);

}  // namespace psam
