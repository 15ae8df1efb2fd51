#include "psam/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "psam/error.hpp"

namespace psam {

CovarianceSpec::CovarianceSpec(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
    require(matrix_.square() && !matrix_.empty(), ErrorKind::Domain, "covariance must be a non-empty square matrix");
    require(matrix_.all_finite(), ErrorKind::Domain, "covariance has non-finite entries");
    eig_ = hermitian_eig(matrix_);
    if (!(eig_.values.back() > 1e-12))
        fail(ErrorKind::SingularModel,
             "covariance is not positive definite (smallest eigenvalue " + std::to_string(eig_.values.back()) + ")");
    HermitianEig root = eig_;
    for (auto& v : root.values) v = std::sqrt(v);
    sqrt_ = root.reconstruct();
}

CovarianceSpec CovarianceSpec::identity(std::size_t n) {
    return CovarianceSpec(ComplexMatrix::identity(n));
}

bool CovarianceSpec::is_identity(double tol) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(matrix_(i, j) - (i == j ? 1.0 : 0.0)) > tol) return false;
    return true;
}

CovarianceSpec exp_correlation(std::size_t n, double rho) {
    require(n >= 1, ErrorKind::Domain, "exp_correlation: n must be positive");
    require(std::isfinite(rho) && rho >= 0.0, ErrorKind::Domain, "exp_correlation: rho must be in [0, 1)");
    if (rho >= 1.0) fail(ErrorKind::SingularModel, "exp_correlation: rho >= 1 gives a rank-one model");
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = std::pow(rho, static_cast<double>(i > j ? i - j : j - i));
    return CovarianceSpec(std::move(m));
}

bool majorizes(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorKind::Domain, "majorizes: vectors differ in length");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end(), std::greater<>());
    std::sort(y.begin(), y.end(), std::greater<>());

    double sx = 0.0;
    double sy = 0.0;
    bool dominated = true;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        if (k + 1 < x.size() && sx > sy + 1e-12) dominated = false;
    }
    if (std::abs(sx - sy) > 1e-9) fail(ErrorKind::NotComparable, "majorizes: vector sums differ");
    return dominated;
}

ComplexMatrix sample_channel(const CovarianceSpec& cov, std::size_t nr, RandomStream& stream) {
    return sample_zmcscg(nr, cov.size(), stream) * cov.sqrt();
}

}  // namespace psam
