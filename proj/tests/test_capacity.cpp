#include <boost/math/special_functions/expint.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "psam/capacity.hpp"
#include "psam/error.hpp"
#include "psam/estimation.hpp"
#include "psam/linalg.hpp"
#include "psam/waterfill.hpp"
#include "support.hpp"

using namespace psam;
using testsupport::to_eigen;

namespace {

// log2 det(I + c H^H H Q) straight from the definition, via Eigen's LU determinant.
double dense_clb(const ComplexMatrix& hhat, const ComplexMatrix& q, const ComplexMatrix& r_tilde) {
    const auto h = to_eigen(hhat);
    const auto qq = to_eigen(q);
    const double c = 1.0 / (1.0 + (to_eigen(r_tilde) * qq).trace().real());
    const auto n = h.cols();
    const testsupport::EigenMat m = testsupport::EigenMat::Identity(n, n) + c * h.adjoint() * h * qq;
    return std::log2(std::abs(m.determinant()));
}

// E log2(1 + a X) for X ~ Exp(1).
double exp_log2_mean(double a) {
    return std::exp(1.0 / a) * boost::math::expint(1, 1.0 / a) / std::numbers::ln2;
}

SchemeConfig base(Scheme scheme, std::size_t nt, std::size_t nr, std::size_t block, std::size_t lp, double snr_db,
                  double alpha) {
    SchemeConfig c;
    c.nt = nt;
    c.nr = nr;
    c.block_len = block;
    c.pilot_len = lp;
    c.power = db_to_linear(snr_db);
    c.alpha = alpha;
    c.scheme = std::move(scheme);
    return c;
}

SimOptions sims(std::size_t trials, std::uint64_t seed = 42, int workers = 0) { return {trials, seed, workers}; }

// Trial-by-trial reference for evaluate(): builds H^ = H0 R^^{1/2} and the
// scheme's Q densely and calls the Eigen-based bound.
double dense_reference(const SchemeConfig& cfg, const SimOptions& sim) {
    const CovarianceSpec cov = cfg.effective_covariance();
    const bool feedback = std::holds_alternative<CgfDelayless>(cfg.scheme);
    const PilotDesign pilot = std::holds_alternative<Ccf>(cfg.scheme)
                                  ? ccf_pilots(cov, cfg.pilot_power(), cfg.pilot_len)
                                  : iid_orthogonal_pilots(cfg.nt, cfg.pilot_power(), cfg.pilot_len);
    const EstimationModel m = estimation_stats(cov, pilot);
    const ComplexMatrix root = psd_sqrt(m.estimate_cov);
    const double pd = cfg.data_power();
    double total = 0.0;
    for (std::size_t t = 0; t < sim.trials; ++t) {
        RandomStream s = RandomStream::substream(sim.seed, t);
        const ComplexMatrix hhat = sample_zmcscg(cfg.nr, cfg.nt, s) * root;
        ComplexMatrix q(cfg.nt, cfg.nt);
        if (feedback) {
            Eigen::SelfAdjointEigenSolver<testsupport::EigenMat> es(to_eigen(gram(hhat)));
            std::vector<double> gains;
            std::vector<int> index;
            for (int i = static_cast<int>(cfg.nt) - 1; i >= 0; --i)
                if (es.eigenvalues()(i) > 1e-12 * es.eigenvalues()(cfg.nt - 1)) {
                    gains.push_back(es.eigenvalues()(i) / (1.0 + m.error_eig[0] * pd));
                    index.push_back(i);
                }
            const auto wf = waterfill(gains, pd);
            testsupport::EigenMat qe = testsupport::EigenMat::Zero(cfg.nt, cfg.nt);
            for (std::size_t k = 0; k < gains.size(); ++k)
                qe += wf.alloc[k] * es.eigenvectors().col(index[k]) * es.eigenvectors().col(index[k]).adjoint();
            q = testsupport::from_eigen(qe);
        } else if (std::holds_alternative<Ccf>(cfg.scheme)) {
            std::vector<double> diag(cfg.nt, 0.0);
            for (std::size_t i = 0; i < pilot.effective_length; ++i) diag[i] = pd / pilot.effective_length;
            q = cov.eigenbasis() * ComplexMatrix::diagonal(diag) * cov.eigenbasis().adjoint();
        } else {
            q = (pd / cfg.nt) * ComplexMatrix::identity(cfg.nt);
        }
        total += dense_clb(hhat, q, m.error_cov);
    }
    return total / sim.trials * cfg.data_len() / cfg.block_len;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Contract;
}

}  // namespace

TEST_SUITE("capacity") {

TEST_CASE("instantaneous bound: hand-worked values") {
    const ComplexMatrix h{{1.0}};
    CHECK(instant_clb(h, ComplexMatrix(1, 1), ComplexMatrix(1, 1)) == 0.0);
    CHECK(instant_clb(h, ComplexMatrix{{3.0}}, ComplexMatrix(1, 1)) == doctest::Approx(2.0));
    const double v = instant_clb(ComplexMatrix::identity(2), 2.0 * ComplexMatrix::identity(2),
                                 0.1 * ComplexMatrix::identity(2));
    CHECK(v == doctest::Approx(2.0 * std::log2(1.0 + 2.0 / 1.4)).epsilon(1e-14));
    CHECK(v == doctest::Approx(2.56022).epsilon(1e-5));
    CHECK_THROWS_AS(instant_clb(ComplexMatrix(2, 3), ComplexMatrix::identity(2), ComplexMatrix::identity(2)), Error);
}

TEST_CASE("instantaneous bound agrees with the dense definition") {
    RandomStream s(10);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t nt = 1 + rep % 4;
        const std::size_t nr = 1 + (rep / 4) % 3;
        const ComplexMatrix h = sample_zmcscg(nr, nt, s);
        const ComplexMatrix q = testsupport::random_psd(nt, s);
        const ComplexMatrix rt = 0.1 * testsupport::random_psd(nt, s);
        CHECK(instant_clb(h, q, rt) == doctest::Approx(dense_clb(h, q, rt)).epsilon(1e-10));
    }
}

TEST_CASE("evaluate matches a trial-by-trial dense reference") {
    const SimOptions sim = sims(300, 5);
    const SchemeConfig nf = base(NonFeedback{}, 3, 2, 30, 4, 8.0, 0.7);
    CHECK(evaluate(nf, sim).mean == doctest::Approx(dense_reference(nf, sim)).epsilon(1e-10));

    const SchemeConfig cgf = base(CgfDelayless{}, 3, 2, 30, 3, 4.0, 0.8);
    CHECK(evaluate(cgf, sim).mean == doctest::Approx(dense_reference(cgf, sim)).epsilon(1e-10));

    const SchemeConfig cgf_wide = base(CgfDelayless{}, 4, 2, 30, 4, 12.0, 0.8);
    CHECK(evaluate(cgf_wide, sim).mean == doctest::Approx(dense_reference(cgf_wide, sim)).epsilon(1e-10));

    SchemeConfig ccf = base(Ccf{}, 4, 3, 20, 2, 10.0, 0.75);
    ccf.covariance = CovarianceSpec(ComplexMatrix::diagonal(std::vector<double>{1.8, 1.2, 0.7, 0.3}));
    CHECK(evaluate(ccf, sim).mean == doctest::Approx(dense_reference(ccf, sim)).epsilon(1e-10));
}

TEST_CASE("correlated channels agree with the dense reference in distribution") {
    SchemeConfig ccf = base(Ccf{}, 4, 4, 20, 3, 10.0, 0.7);
    ccf.covariance = exp_correlation(4, 0.6);
    const CapacityEstimate fast = evaluate(ccf, sims(4000, 1));
    const double slow = dense_reference(ccf, sims(4000, 2));
    CHECK(std::abs(fast.mean - slow) < 4.0 * std::sqrt(2.0) * fast.std_error);

    SchemeConfig nf = base(NonFeedback{}, 3, 3, 20, 3, 5.0, 0.7);
    nf.covariance = exp_correlation(3, 0.8);
    const CapacityEstimate fnf = evaluate(nf, sims(4000, 3));
    CHECK(std::abs(fnf.mean - dense_reference(nf, sims(4000, 4))) < 4.0 * std::sqrt(2.0) * fnf.std_error);
}

TEST_CASE("delayed feedback reduces to its boundary schemes exactly") {
    const SimOptions sim = sims(2000, 9);
    const SchemeConfig at_zero = base(CgfDelayed{0, 0.0}, 4, 4, 100, 4, 10.0, 0.8);
    const SchemeConfig delayless = base(CgfDelayless{}, 4, 4, 100, 4, 10.0, 0.8);
    CHECK(evaluate(at_zero, sim).mean == evaluate(delayless, sim).mean);

    const SchemeConfig at_end = base(CgfDelayed{96, 1.0}, 4, 4, 100, 4, 10.0, 0.8);
    const SchemeConfig nofb = base(NonFeedback{}, 4, 4, 100, 4, 10.0, 0.8);
    CHECK(evaluate(at_end, sim).mean == evaluate(nofb, sim).mean);

    CHECK(kind_of([] { evaluate(base(CgfDelayed{0, 0.3}, 2, 2, 20, 2, 0.0, 0.5), sims(10)); }) == ErrorKind::Config);
    CHECK(kind_of([] { evaluate(base(CgfDelayed{18, 0.3}, 2, 2, 20, 2, 0.0, 0.5), sims(10)); }) == ErrorKind::Config);
}

TEST_CASE("power bookkeeping of the block") {
    for (double alpha : {0.2, 0.5, 0.83}) {
        const SchemeConfig c = base(CgfDelayed{20, 0.3}, 4, 4, 100, 4, 7.0, alpha);
        const double energy = c.pilot_power() * c.pilot_len + c.data_power() * c.data_len();
        CHECK(energy == doctest::Approx(c.power * c.block_len).epsilon(1e-12));
        const double data = c.nonadaptive_power() * 20 + c.adaptive_power() * (c.data_len() - 20);
        CHECK(data == doctest::Approx(c.data_power() * c.data_len()).epsilon(1e-12));
        CHECK(c.beta() == doctest::Approx(20.0 / 96));
    }
}

TEST_CASE("covariance feedback at zero correlation equals the non-feedback scheme") {
    SchemeConfig ccf = base(Ccf{}, 4, 4, 20, 4, 10.0, 0.6);
    ccf.covariance = exp_correlation(4, 0.0);
    const SchemeConfig nf = base(NonFeedback{}, 4, 4, 20, 4, 10.0, 0.6);
    const SimOptions sim = sims(3000, 17);
    CHECK(evaluate(ccf, sim).mean == doctest::Approx(evaluate(nf, sim).mean).epsilon(1e-12));
}

TEST_CASE("beamforming is covariance feedback with one pilot") {
    for (double rho : {0.0, 0.5, 0.9}) {
        SchemeConfig bf = base(Beamforming{}, 4, 4, 20, 1, 10.0, 0.8);
        bf.covariance = exp_correlation(4, rho);
        SchemeConfig ccf = bf;
        ccf.scheme = Ccf{};
        const SimOptions sim = sims(2000, 23);
        CHECK(std::abs(evaluate(bf, sim).mean - evaluate(ccf, sim).mean) <= 1e-12);
    }
}

TEST_CASE("water-filling never loses to equal power") {
    for (std::uint64_t seed : {1u, 2u, 3u})
        for (double snr : {-5.0, 5.0, 20.0}) {
            const SimOptions sim = sims(1000, seed);
            const auto wf = evaluate(base(CgfDelayless{}, 3, 2, 40, 5, snr, 0.7), sim);
            const auto eq = evaluate(base(NonFeedback{}, 3, 2, 40, 5, snr, 0.7), sim);
            CHECK(wf.mean >= eq.mean);
        }
}

TEST_CASE("longer feedback delay never helps") {
    const SimOptions sim = sims(3000, 4);
    double last = std::numeric_limits<double>::infinity();
    for (std::size_t d : {0u, 20u, 96u}) {
        SchemeConfig c = base(CgfDelayed{d, 0.0}, 4, 4, 100, 4, 10.0, 0.8);
        std::get<CgfDelayed>(c.scheme).phi = c.beta();
        const double v = evaluate(c, sim).mean;
        CHECK(v <= last);
        last = v;
    }
}

TEST_CASE("capacity grows with SNR for every scheme") {
    const SimOptions sim = sims(1000, 6);
    std::vector<SchemeConfig> configs = {base(NonFeedback{}, 2, 2, 20, 2, 0, 0.7),
                                         base(CgfDelayless{}, 2, 2, 20, 2, 0, 0.7),
                                         base(CgfDelayed{6, 0.4}, 2, 2, 20, 2, 0, 0.7),
                                         base(Ccf{}, 2, 2, 20, 1, 0, 0.7), base(Beamforming{}, 2, 2, 20, 1, 0, 0.7)};
    configs[3].covariance = exp_correlation(2, 0.5);
    configs[4].covariance = exp_correlation(2, 0.5);
    for (auto c : configs) {
        double last = -1.0;
        for (double snr = -10.0; snr <= 30.0; snr += 5.0) {
            c.power = db_to_linear(snr);
            const double v = evaluate(c, sim).mean;
            CHECK(v > last);
            last = v;
        }
    }
}

TEST_CASE("results do not depend on the worker count") {
    SchemeConfig ccf = base(Ccf{}, 4, 4, 20, 2, 10.0, 0.75);
    ccf.covariance = exp_correlation(4, 0.5);
    for (const SchemeConfig& c : {ccf, base(CgfDelayed{20, 0.25}, 4, 4, 100, 4, 10.0, 0.8)}) {
        const auto serial = evaluate(c, sims(3001, 8, 1));
        for (int w : {0, 2, 3}) {
            const auto par = evaluate(c, sims(3001, 8, w));
            CHECK(par.mean == serial.mean);
            CHECK(par.std_error == serial.std_error);
            CHECK(par.trials == serial.trials);
        }
    }
}

TEST_CASE("estimate fields") {
    const auto e = evaluate(base(NonFeedback{}, 2, 2, 20, 2, 10.0, 0.7), sims(500));
    CHECK(e.trials == 500);
    CHECK(e.mean > 0.0);
    CHECK(e.std_error > 0.0);
    CHECK(e.std_error < e.mean);
}

TEST_CASE("invalid configurations") {
    CHECK(kind_of([] { evaluate(base(NonFeedback{}, 2, 2, 20, 2, 0, 1.0), sims(10)); }) == ErrorKind::Config);
    CHECK(kind_of([] { evaluate(base(NonFeedback{}, 2, 2, 20, 2, 0, 0.0), sims(10)); }) == ErrorKind::Config);
    CHECK(kind_of([] { evaluate(base(NonFeedback{}, 4, 2, 20, 2, 0, 0.5), sims(10)); }) ==
          ErrorKind::InsufficientTraining);
    CHECK(kind_of([] {
              SchemeConfig c = base(CgfDelayless{}, 2, 2, 20, 2, 0, 0.5);
              c.covariance = exp_correlation(2, 0.3);
              evaluate(c, sims(10));
          }) == ErrorKind::Config);
    CHECK(kind_of([] { evaluate(base(Beamforming{}, 2, 2, 20, 2, 0, 0.5), sims(10)); }) == ErrorKind::Config);
    CHECK(kind_of([] { evaluate(base(Ccf{std::vector<double>{0.7, 0.2}}, 2, 2, 20, 2, 0, 0.5), sims(10)); }) ==
          ErrorKind::Config);
    CHECK(kind_of([] {
              const TrialPool pool = TrialPool::build(2, 2, sims(10), false);
              evaluate(base(CgfDelayless{}, 2, 2, 20, 2, 0, 0.5), pool);
          }) == ErrorKind::Contract);
}

TEST_CASE("effective SNR") {
    const SchemeConfig c = base(CgfDelayless{}, 4, 4, 100, 4, 10.0, 0.8);
    const EffectiveSnr e = effective_snr(c);
    const double pd = c.data_power();
    CHECK(e.error_var == doctest::Approx(1.0 / (1.0 + c.pilot_power())));
    CHECK(e.value >= 0.0);
    CHECK(e.value < pd);
    CHECK(e.value == doctest::Approx((1.0 - e.error_var) * pd / (1.0 + e.error_var * pd)));
}

TEST_CASE("Gaussian-input gap integral") {
    for (double k : {0.01, 0.3, 1.0, 7.0, 100.0}) {
        const std::vector<double> kappa{k};
        CHECK(expected_log2_one_plus_weighted_exp(kappa) == doctest::Approx(exp_log2_mean(k)).epsilon(1e-11));
        CHECK(input_gap(kappa, 2) ==
              doctest::Approx(2.0 * (std::log2(1.0 + k) - exp_log2_mean(k))).epsilon(1e-10));
    }
    const std::vector<double> zero{0.0, 0.0};
    CHECK(input_gap(zero, 3) == 0.0);
    const std::vector<double> tiny{1e-12, 1e-9};
    CHECK(input_gap(tiny, 1) >= 0.0);

    RandomStream s(44);
    const std::vector<double> mixed{0.5, 0.2, 0.05};
    const double exact = input_gap(mixed, 2);
    CHECK(exact == doctest::Approx(2.0 * (std::log2(1.75) - expected_log2_one_plus_weighted_exp(mixed))).epsilon(1e-10));
    // Sampling check: 4 x 250k draws, spread estimated from the batches.
    std::vector<double> batches;
    for (int b = 0; b < 4; ++b) batches.push_back(input_gap_sampled(mixed, 2, 250000, s));
    double mean = 0.0;
    for (double v : batches) mean += v / 4;
    CHECK(std::abs(mean - exact) < 0.003);
}

TEST_CASE("upper and lower bound estimates") {
    const SchemeConfig c = base(NonFeedback{}, 4, 4, 100, 4, 10.0, 0.82);
    const GapEstimate g = gap_estimate(c, sims(2000));
    CHECK(g.clb.mean == evaluate(c, sims(2000)).mean);
    CHECK(g.cub.mean >= g.clb.mean);
    CHECK(g.gap_ratio >= 0.0);
    CHECK(g.gap_ratio < 0.05);
    CHECK(kind_of([&] { gap_estimate(c, sims(99)); }) == ErrorKind::InsufficientSampling);

    const SchemeConfig d = base(CgfDelayed{20, 0.3}, 2, 2, 100, 2, 0.0, 0.8);
    const GapEstimate gd = gap_estimate(d, sims(500));
    CHECK(gd.cub.mean >= gd.clb.mean);
}

TEST_CASE("perfect-CSI delayed bound: scalar channel") {
    const SimOptions sim = sims(20000, 12);
    for (double pd : {0.5, 10.0}) {
        const auto eq = perfect_csi_delayed_clb(1, 1, 0.2, 0.2, pd, sim);
        CHECK(std::abs(eq.mean - exp_log2_mean(pd)) < 4.0 * eq.std_error);

        const double beta = 0.3;
        const double phi = 0.6;
        const double closed = beta * exp_log2_mean(phi * pd / beta) + (1 - beta) * exp_log2_mean((1 - phi) * pd / (1 - beta));
        const auto split = perfect_csi_delayed_clb(1, 1, beta, phi, pd, sim);
        CHECK(std::abs(split.mean - closed) < 4.0 * split.std_error);

        const auto all_first = perfect_csi_delayed_clb(1, 1, beta, 1.0, pd, sim);
        CHECK(std::abs(all_first.mean - beta * exp_log2_mean(pd / beta)) < 4.0 * all_first.std_error);
    }
    CHECK(kind_of([] { perfect_csi_delayed_clb(2, 2, 0.0, 0.0, 1.0, sims(10)); }) == ErrorKind::Boundary);
    CHECK(kind_of([] { perfect_csi_delayed_clb(2, 2, 1.0, 1.0, 1.0, sims(10)); }) == ErrorKind::Boundary);
}

TEST_CASE("perfect-CSI delayed bound: 2x2 Wishart quadrature") {
    // Ordered eigenvalues of a 2x2 complex Wishart matrix have density
    // proportional to (l1 - l2)^2 e^{-l1 - l2} on l1 > l2 > 0.
    const double beta = 0.2, phi = 0.2, pd = 10.0;
    const double budget = (1 - phi) * pd / (1 - beta);
    const int n = 1500;
    const double top = 40.0;
    const double h = top / n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        const double l1 = (i + 0.5) * h;
        for (int j = 0; j < i; ++j) {
            const double l2 = (j + 0.5) * h;
            const double w = (l1 - l2) * (l1 - l2) * std::exp(-l1 - l2);
            const auto wf = waterfill(std::vector<double>{l1, l2}, budget);
            const double rate = beta * (std::log2(1 + l1 * phi * pd / (2 * beta)) + std::log2(1 + l2 * phi * pd / (2 * beta))) +
                                (1 - beta) * (std::log2(1 + l1 * wf.alloc[0]) + std::log2(1 + l2 * wf.alloc[1]));
            num += w * rate;
            den += w;
        }
    }
    const double oracle = num / den;
    const auto mc = perfect_csi_delayed_clb(2, 2, beta, phi, pd, sims(20000, 77));
    CHECK(std::abs(mc.mean - oracle) < 2.0 * mc.std_error);
}

}  // TEST_SUITE
