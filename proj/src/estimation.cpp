#include "psam/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "psam/error.hpp"
#include "psam/linalg.hpp"
#include "psam/waterfill.hpp"

namespace psam {

bool PilotDesign::isotropic() const {
    return std::all_of(powers.begin(), powers.end(), [&](double p) { return p == powers.front(); });
}

ComplexMatrix PilotDesign::gram() const {
    const std::size_t n = powers.size();
    ComplexMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += basis(i, k) * powers[k] * std::conj(basis(j, k));
            g(i, j) = s;
        }
    return g;
}

ComplexMatrix PilotDesign::explicit_matrix() const {
    const std::size_t nt = powers.size();
    ComplexMatrix x(nt, length);
    if (isotropic()) {
        // Rows of a DFT are orthogonal over any Lp >= Nt window.
        const double amp = std::sqrt(powers.front() / static_cast<double>(length));
        for (std::size_t k = 0; k < nt; ++k)
            for (std::size_t l = 0; l < length; ++l) {
                const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * l) / static_cast<double>(length);
                x(k, l) = amp * cplx(std::cos(angle), std::sin(angle));
            }
        return basis * x;
    }
    require(length <= nt, ErrorKind::Domain, "explicit_matrix: shaped design longer than Nt");
    for (std::size_t l = 0; l < length; ++l) {
        const double amp = std::sqrt(powers[l]);
        for (std::size_t r = 0; r < nt; ++r) x(r, l) = basis(r, l) * amp;
    }
    return x;
}

PilotDesign iid_orthogonal_pilots(std::size_t nt, double pilot_power, std::size_t length) {
    require(nt >= 1, ErrorKind::Domain, "iid_orthogonal_pilots: Nt must be positive");
    require(std::isfinite(pilot_power) && pilot_power > 0.0, ErrorKind::Domain,
            "iid_orthogonal_pilots: pilot power must be positive");
    if (length < nt)
        fail(ErrorKind::InsufficientTraining, "iid_orthogonal_pilots: Lp = " + std::to_string(length) +
                                                  " is shorter than Nt = " + std::to_string(nt));
    PilotDesign d;
    d.basis = ComplexMatrix::identity(nt);
    d.powers.assign(nt, pilot_power * static_cast<double>(length) / static_cast<double>(nt));
    d.length = length;
    d.power = pilot_power;
    d.effective_length = nt;
    return d;
}

PilotDesign ccf_pilots(const CovarianceSpec& cov, double pilot_power, std::size_t length) {
    const std::size_t nt = cov.size();
    require(length >= 1 && length <= nt, ErrorKind::Domain, "ccf_pilots: Lp must be in [1, Nt]");
    require(std::isfinite(pilot_power) && pilot_power > 0.0, ErrorKind::Domain,
            "ccf_pilots: pilot power must be positive");

    const auto& g = cov.eigenvalues();
    std::vector<double> trained(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(length));
    std::vector<double> alloc(length);
    std::size_t active = 0;
    const double level = waterfill_into(trained, pilot_power * static_cast<double>(length), alloc, active);

    PilotDesign d;
    d.basis = cov.eigenbasis();
    d.powers.assign(nt, 0.0);
    std::copy(alloc.begin(), alloc.end(), d.powers.begin());
    d.length = length;
    d.power = pilot_power;
    d.level = level;
    d.effective_length = active;
    d.reduced = active < length;
    return d;
}

EstimationModel estimation_stats(const CovarianceSpec& cov, const PilotDesign& pilot) {
    const std::size_t nt = cov.size();
    require(pilot.powers.size() == nt && pilot.basis.rows() == nt, ErrorKind::Config,
            "estimation_stats: pilot and covariance dimensions differ");

    const auto& g = cov.eigenvalues();
    if (!pilot.isotropic()) {
        // Each pilot direction must be an eigenvector of R with the matching g_i.
        const ComplexMatrix ru = cov.matrix() * pilot.basis;
        for (std::size_t k = 0; k < nt; ++k)
            for (std::size_t r = 0; r < nt; ++r)
                require(std::abs(ru(r, k) - g[k] * pilot.basis(r, k)) <= 1e-9 * std::max(1.0, g.front()),
                        ErrorKind::Config, "estimation_stats: pilot basis does not match the covariance eigenbasis");
    }

    EstimationModel m;
    m.error_cov = psd_inverse(psd_inverse(cov.matrix()) + pilot.gram());
    m.estimate_cov = cov.matrix() - m.error_cov;
    m.error_eig.resize(nt);
    m.estimate_eig.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        m.error_eig[i] = 1.0 / (1.0 / g[i] + pilot.powers[i]);
        m.estimate_eig[i] = g[i] - m.error_eig[i];
    }
    return m;
}

ComplexMatrix lmmse_estimate(const ComplexMatrix& y, const ComplexMatrix& xp, const CovarianceSpec& cov) {
    require(xp.rows() == cov.size(), ErrorKind::Domain, "lmmse_estimate: Xp must have Nt rows");
    require(y.cols() == xp.cols(), ErrorKind::Domain, "lmmse_estimate: Y and Xp differ in training length");
    const ComplexMatrix xh_r = xp.adjoint() * cov.matrix();
    const ComplexMatrix inner = xh_r * xp + ComplexMatrix::identity(xp.cols());
    return y * psd_inverse(inner) * xh_r;
}

double worst_case_mse(const ComplexMatrix& pilot_gram, std::span<const CovarianceSpec> correlations) {
    require(!correlations.empty(), ErrorKind::Domain, "worst_case_mse: empty correlation set");
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& r : correlations) {
        const double n = static_cast<double>(r.size());
        require(r.size() == pilot_gram.rows(), ErrorKind::Domain, "worst_case_mse: dimension mismatch");
        require(std::abs(r.matrix().trace().real() - n) <= 1e-9 * n, ErrorKind::Domain,
                "worst_case_mse: correlation trace must equal Nt");
        const ComplexMatrix err = psd_inverse(psd_inverse(r.matrix()) + pilot_gram);
        worst = std::max(worst, err.trace().real());
    }
    return worst;
}

std::vector<CovarianceSpec> sample_correlation_set(std::size_t n, std::size_t random_count, RandomStream& stream) {
    std::vector<CovarianceSpec> set;
    set.reserve(10 + random_count);
    set.push_back(CovarianceSpec::identity(n));
    for (int k = 1; k <= 9; ++k) set.push_back(exp_correlation(n, 0.1 * k));
    while (set.size() < 10 + random_count) {
        const ComplexMatrix a = sample_zmcscg(n, n, stream);
        ComplexMatrix r = gram(a);
        const double scale = static_cast<double>(n) / r.trace().real();
        r *= scale;
        for (std::size_t i = 0; i < n; ++i) r(i, i) = r(i, i).real();
        // Reject near-singular draws rather than regularizing them.
        if (hermitian_eig(r).values.back() > 1e-6) set.emplace_back(std::move(r));
    }
    return set;
}

}  // namespace psam
