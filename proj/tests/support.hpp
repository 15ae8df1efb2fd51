#pragma once

#include <Eigen/Dense>

#include "psam/matrix.hpp"
#include "psam/random.hpp"

namespace testsupport {

using EigenMat = Eigen::MatrixXcd;

inline EigenMat to_eigen(const psam::ComplexMatrix& m) {
    EigenMat e(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
    return e;
}

inline psam::ComplexMatrix from_eigen(const EigenMat& e) {
    psam::ComplexMatrix m(e.rows(), e.cols());
    for (Eigen::Index r = 0; r < e.rows(); ++r)
        for (Eigen::Index c = 0; c < e.cols(); ++c) m(r, c) = e(r, c);
    return m;
}

/// Random Hermitian PSD matrix G G^H with optional diagonal shift.
inline psam::ComplexMatrix random_psd(std::size_t n, psam::RandomStream& s, double shift = 0.0) {
    const psam::ComplexMatrix g = psam::sample_zmcscg(n, n, s);
    psam::ComplexMatrix a = g * g.adjoint();
    for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real() + shift;
    return a;
}

inline double max_abs_diff(const psam::ComplexMatrix& a, const psam::ComplexMatrix& b) {
    return (a - b).max_abs();
}

}  // namespace testsupport
