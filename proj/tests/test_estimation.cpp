#include <cmath>

#include "certificates.hpp"
#include "doctest.h"
#include "psam/error.hpp"
#include "psam/estimation.hpp"
#include "psam/linalg.hpp"
#include "support.hpp"

using namespace psam;
using testsupport::max_abs_diff;

namespace {

CovarianceSpec diagonal_cov(std::vector<double> g) { return CovarianceSpec(ComplexMatrix::diagonal(g)); }

CovarianceSpec random_cov(std::size_t n, RandomStream& s) {
    return CovarianceSpec(testsupport::random_psd(n, s, 0.05));
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("orthogonal equal-power pilots") {
    const PilotDesign a = iid_orthogonal_pilots(4, 10, 4);
    CHECK(a.powers == std::vector<double>{10, 10, 10, 10});
    CHECK(a.isotropic());
    CHECK(std::isnan(a.level));
    CHECK(iid_orthogonal_pilots(2, 1, 2).powers == std::vector<double>{1, 1});
    CHECK(iid_orthogonal_pilots(2, 1, 6).powers == std::vector<double>{3, 3});
    try {
        iid_orthogonal_pilots(4, 10, 2);
        FAIL("expected insufficient training");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientTraining);
    }
}

TEST_CASE("covariance-shaped pilots") {
    const PilotDesign sym = ccf_pilots(CovarianceSpec::identity(2), 1.0, 2);
    CHECK(sym.powers[0] == doctest::Approx(1.0));
    CHECK(sym.powers[1] == doctest::Approx(1.0));
    CHECK(sym.level == doctest::Approx(2.0));

    const CovarianceSpec g = diagonal_cov({1.0, 0.5});
    const PilotDesign d = ccf_pilots(g, 2.0, 2);
    CHECK(d.level == doctest::Approx(3.5));
    CHECK(d.powers[0] == doctest::Approx(2.5));
    CHECK(d.powers[1] == doctest::Approx(1.5));
    CHECK_FALSE(d.reduced);
    CHECK(d.effective_length == 2);

    const PilotDesign r = ccf_pilots(g, 0.5, 2);
    CHECK(r.reduced);
    CHECK(r.effective_length == 1);
    CHECK(r.powers[0] == doctest::Approx(1.0));
    CHECK(r.powers[1] == 0.0);

    const PilotDesign one = ccf_pilots(exp_correlation(4, 0.5), 3.0, 1);
    CHECK(one.powers[0] == doctest::Approx(3.0));
    for (std::size_t i = 1; i < 4; ++i) CHECK(one.powers[i] == 0.0);
}

TEST_CASE("pilot energy bookkeeping") {
    RandomStream s(12);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 2 + rep % 4;
        const CovarianceSpec cov = random_cov(n, s);
        const double pp = 0.1 + 10.0 * s.next_uniform();
        const std::size_t lp = 1 + rep % n;
        const PilotDesign d = ccf_pilots(cov, pp, lp);
        double sum = 0.0;
        std::size_t nonzero = 0;
        for (double p : d.powers) {
            CHECK(p >= 0.0);
            sum += p;
            nonzero += p > 0.0;
        }
        CHECK(sum == doctest::Approx(pp * lp).epsilon(1e-9));
        CHECK(nonzero == d.effective_length);
        CHECK((d.reduced || nonzero == lp));
    }
}

TEST_CASE("explicit pilot matrices reproduce the Gram") {
    RandomStream s(4);
    const CovarianceSpec cov = random_cov(3, s);
    for (const PilotDesign& d : {ccf_pilots(cov, 2.0, 2), ccf_pilots(cov, 2.0, 3), iid_orthogonal_pilots(3, 2.0, 5)}) {
        const ComplexMatrix x = d.explicit_matrix();
        CHECK(x.rows() == 3);
        CHECK(x.cols() == d.length);
        CHECK(max_abs_diff(x * x.adjoint(), d.gram()) < 1e-12);
    }
}

TEST_CASE("estimation statistics: hand-worked values") {
    const EstimationModel iid = estimation_stats(CovarianceSpec::identity(4), iid_orthogonal_pilots(4, 9, 4));
    for (double e : iid.error_eig) CHECK(e == doctest::Approx(0.1));
    CHECK(max_abs_diff(iid.error_cov, 0.1 * ComplexMatrix::identity(4)) < 1e-12);

    const CovarianceSpec g = diagonal_cov({1.0, 0.5});
    const PilotDesign d = ccf_pilots(g, 2.0, 2);
    const EstimationModel m = estimation_stats(g, d);
    CHECK(m.estimate_eig[0] == doctest::Approx(1.0 - 1.0 / 3.5).epsilon(1e-12));
    CHECK(m.estimate_eig[1] == doctest::Approx(0.5 - 1.0 / 3.5).epsilon(1e-12));
    CHECK(m.estimate_eig[0] == doctest::Approx(0.7143).epsilon(1e-4));
    CHECK(m.estimate_eig[1] == doctest::Approx(0.2143).epsilon(1e-3));

    PilotDesign dark = iid_orthogonal_pilots(2, 1, 2);
    dark.powers = {0.0, 0.0};
    const CovarianceSpec c = exp_correlation(2, 0.4);
    const EstimationModel none = estimation_stats(c, dark);
    CHECK(max_abs_diff(none.error_cov, c.matrix()) < 1e-12);
    CHECK(none.estimate_cov.max_abs() < 1e-12);
}

TEST_CASE("trained and untrained directions") {
    const CovarianceSpec cov = exp_correlation(4, 0.6);
    const PilotDesign d = ccf_pilots(cov, 5.0, 2);
    REQUIRE_FALSE(d.reduced);
    const EstimationModel m = estimation_stats(cov, d);
    for (std::size_t i = 0; i < 4; ++i) {
        if (i < 2) {
            CHECK(m.error_eig[i] == doctest::Approx(1.0 / d.level).epsilon(1e-12));
            CHECK(m.estimate_eig[i] == doctest::Approx(cov.eigenvalues()[i] - 1.0 / d.level).epsilon(1e-12));
        } else {
            CHECK(m.error_eig[i] == doctest::Approx(cov.eigenvalues()[i]));
            CHECK(m.estimate_eig[i] == doctest::Approx(0.0).scale(1.0));
        }
    }
}

TEST_CASE("orthogonality and eigen forms on random pairs") {
    RandomStream s(21);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + rep % 4;
        const CovarianceSpec cov = random_cov(n, s);
        const double pp = 0.2 + 20.0 * s.next_uniform();
        const PilotDesign d = rep % 2 ? ccf_pilots(cov, pp, 1 + rep % n) : iid_orthogonal_pilots(n, pp, n + rep % 3);
        const EstimationModel m = estimation_stats(cov, d);
        CHECK(max_abs_diff(m.error_cov + m.estimate_cov, cov.matrix()) <= 1e-9);
        // Eigen forms along the pilot basis reproduce the dense matrices.
        const ComplexMatrix u = d.isotropic() ? cov.eigenbasis() : d.basis;
        const ComplexMatrix dense = u * ComplexMatrix::diagonal(m.error_eig) * u.adjoint();
        CHECK(max_abs_diff(dense, m.error_cov) <= 1e-9 * std::max(1.0, cov.matrix().max_abs()));
        CHECK(hermitian_eig(m.error_cov).values.back() >= -1e-10);
        CHECK(hermitian_eig(m.estimate_cov).values.back() >= -1e-10);
    }
}

TEST_CASE("more pilot power strictly shrinks every error eigenvalue") {
    const CovarianceSpec cov = exp_correlation(3, 0.5);
    const auto low = estimation_stats(cov, iid_orthogonal_pilots(3, 1.0, 3)).error_eig;
    const auto high = estimation_stats(cov, iid_orthogonal_pilots(3, 2.0, 3)).error_eig;
    for (std::size_t i = 0; i < 3; ++i) CHECK(high[i] < low[i]);
}

TEST_CASE("a pilot basis from another covariance is rejected") {
    RandomStream s(1);
    const CovarianceSpec a = random_cov(3, s);
    const CovarianceSpec b = random_cov(3, s);
    try {
        estimation_stats(a, ccf_pilots(b, 1.0, 2));
        FAIL("expected config error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
    }
}

TEST_CASE("explicit LMMSE estimator") {
    const CovarianceSpec cov = exp_correlation(2, 0.5);
    RandomStream s(77);
    const ComplexMatrix h = sample_channel(cov, 2, s);
    const ComplexMatrix y = sample_zmcscg(2, 3, s);
    CHECK(lmmse_estimate(y, ComplexMatrix(2, 3), cov).max_abs() == 0.0);

    // Very strong pilots recover the channel.
    const ComplexMatrix xp = iid_orthogonal_pilots(2, 1e6, 2).explicit_matrix();
    const ComplexMatrix yh = h * xp + sample_zmcscg(2, 2, s);
    CHECK((lmmse_estimate(yh, xp, cov) - h).frobenius_norm() / h.frobenius_norm() < 1e-2);

    CHECK_THROWS_AS(lmmse_estimate(y, ComplexMatrix(3, 3), cov), Error);
}

TEST_CASE("empirical estimation error matches the error covariance") {
    const CovarianceSpec cov = exp_correlation(3, 0.6);
    for (const PilotDesign& d : {ccf_pilots(cov, 1.5, 2), iid_orthogonal_pilots(3, 1.5, 4)}) {
        const ComplexMatrix xp = d.explicit_matrix();
        const EstimationModel m = estimation_stats(cov, d);
        RandomStream s(5);
        const int trials = 10000;
        ComplexMatrix acc(3, 3);
        for (int t = 0; t < trials; ++t) {
            const ComplexMatrix h = sample_channel(cov, 1, s);
            const ComplexMatrix y = h * xp + sample_zmcscg(1, xp.cols(), s);
            acc += gram(lmmse_estimate(y, xp, cov) - h);
        }
        acc *= 1.0 / trials;
        CHECK((acc - m.error_cov).frobenius_norm() < 0.05);
    }
}

TEST_CASE("worst-case MSE") {
    const CovarianceSpec id = CovarianceSpec::identity(2);
    const std::vector<CovarianceSpec> only_id{id};
    CHECK(worst_case_mse(4.0 * ComplexMatrix::identity(2), only_id) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(worst_case_mse(ComplexMatrix::diagonal(std::vector<double>{6, 2}), only_id) ==
          doctest::Approx(1.0 / 7 + 1.0 / 3).epsilon(1e-12));

    RandomStream s(3);
    const auto set = sample_correlation_set(2, 20, s);
    CHECK(worst_case_mse(4.0 * ComplexMatrix::identity(2), set) == doctest::Approx(0.4).epsilon(1e-12));

    try {
        worst_case_mse(ComplexMatrix::identity(2), std::vector<CovarianceSpec>{});
        FAIL("expected domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Domain);
    }
    const std::vector<CovarianceSpec> wrong_trace{CovarianceSpec(2.0 * ComplexMatrix::identity(2))};
    CHECK_THROWS_AS(worst_case_mse(ComplexMatrix::identity(2), wrong_trace), Error);
}

TEST_CASE("equal-power training is minimax (reduced sample)") {
    for (std::size_t nt : {2u, 3u}) {
        const auto r = certificates::minimax_certificate(nt, 6.0, 50, 50, 10 + nt);
        CHECK(r.equal_worst == doctest::Approx(r.closed_form).epsilon(1e-12));
        CHECK(r.passed);
    }
}

}  // TEST_SUITE
