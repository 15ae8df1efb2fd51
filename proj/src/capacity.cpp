#include "psam/capacity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <variant>

#include "psam/error.hpp"
#include "psam/estimation.hpp"
#include "psam/linalg.hpp"
#include "psam/waterfill.hpp"

namespace psam {

namespace {

constexpr std::size_t kMaxDim = 16;
// Eigenvalues below this fraction of the largest are treated as null directions.
constexpr double kRankTol = 1e-12;

// Trapezoid rule in u = ln s for int_0^inf g(s) ds / s. The integrands used here
// are analytic in u and decay double-exponentially above, so the rule converges
// far below double precision at this step.
template <class G>
double log_scale_quadrature(G g) {
    constexpr double lo = -40.0;
    constexpr double step = 0.1;
    constexpr int points = 441;  // up to u = 4, where e^{-s} < 1e-23
    double total = 0.0;
    for (int i = 0; i < points; ++i) {
        const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
        total += w * g(std::exp(lo + step * i));
    }
    return total * step;
}

// x - log1p(x) without cancellation for small x.
double excess_over_log1p(double x) {
    if (x < 1e-3) return x * x * (0.5 - x * (1.0 / 3.0 - x * 0.25));
    return x - std::log1p(x);
}

// The equal-power (or fixed-spatial-power) part of a rate: log2 det(I + D^{1/2} W D^{1/2}).
struct FixedTerm {
    double weight = 0.0;
    std::vector<double> scale;  // estimate_var * q / (1 + tr(R~ Q)), per eigen-direction
    std::vector<double> kappa;  // error_var * q
    bool single_direction = false;
    double gap = 0.0;  // input_gap(kappa, nr), same for every trial
};

// The water-filled part: gains estimate_var * lambda / (1 + error_var * budget).
struct FilledTerm {
    double weight = 0.0;
    double budget = 0.0;
    double gain_scale = 0.0;
    double error_var = 0.0;
};

struct Plan {
    std::size_t nt = 0;
    std::size_t nr = 0;
    double block_scale = 0.0;
    FixedTerm fixed;
    FilledTerm filled;
};

FixedTerm fixed_term(double weight, const EstimationModel& stats, const std::vector<double>& q, std::size_t nr) {
    FixedTerm f;
    f.weight = weight;
    double inflation = 1.0;
    for (std::size_t i = 0; i < q.size(); ++i) inflation += stats.error_eig[i] * q[i];
    f.scale.resize(q.size());
    f.kappa.resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        f.scale[i] = stats.estimate_eig[i] * q[i] / inflation;
        f.kappa[i] = stats.error_eig[i] * q[i];
    }
    f.gap = input_gap(f.kappa, nr);
    return f;
}

FixedTerm equal_power_term(double weight, const EstimationModel& stats, std::size_t nt, double data_power,
                           std::size_t nr) {
    return fixed_term(weight, stats, std::vector<double>(nt, data_power / static_cast<double>(nt)), nr);
}

FilledTerm filled_term(double weight, const EstimationModel& stats, double budget) {
    FilledTerm f;
    f.weight = weight;
    f.budget = budget;
    f.error_var = stats.error_eig[0];
    f.gain_scale = stats.estimate_eig[0] / (1.0 + f.error_var * budget);
    return f;
}

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

Plan make_plan(const SchemeConfig& cfg) {
    cfg.validate();
    Plan plan;
    plan.nt = cfg.nt;
    plan.nr = cfg.nr;
    plan.block_scale = static_cast<double>(cfg.data_len()) / static_cast<double>(cfg.block_len);

    const double pd = cfg.data_power();
    const double pp = cfg.pilot_power();
    const CovarianceSpec cov = cfg.effective_covariance();

    auto iid_stats = [&] { return estimation_stats(cov, iid_orthogonal_pilots(cfg.nt, pp, cfg.pilot_len)); };

    auto shaped = [&](const std::vector<double>& weights, bool single) {
        const PilotDesign pilot = ccf_pilots(cov, pp, cfg.pilot_len);
        const EstimationModel stats = estimation_stats(cov, pilot);
        std::vector<double> q(cfg.nt, 0.0);
        if (weights.empty()) {
            for (std::size_t i = 0; i < pilot.effective_length; ++i)
                q[i] = pd / static_cast<double>(pilot.effective_length);
        } else {
            for (std::size_t i = 0; i < weights.size(); ++i) q[i] = weights[i] * pd;
        }
        plan.fixed = fixed_term(1.0, stats, q, cfg.nr);
        plan.fixed.single_direction = single;
    };

    std::visit(overloaded{
                   [&](const NonFeedback&) { plan.fixed = equal_power_term(1.0, iid_stats(), cfg.nt, pd, cfg.nr); },
                   [&](const CgfDelayless&) { plan.filled = filled_term(1.0, iid_stats(), pd); },
                   [&](const CgfDelayed&) {
                       const EstimationModel stats = iid_stats();
                       const double beta = cfg.beta();
                       if (beta > 0.0)
                           plan.fixed = equal_power_term(beta, stats, cfg.nt, cfg.nonadaptive_power(), cfg.nr);
                       if (beta < 1.0) plan.filled = filled_term(1.0 - beta, stats, cfg.adaptive_power());
                   },
                   [&](const Ccf& c) { shaped(c.data_weights, false); },
                   [&](const Beamforming&) { shaped({}, true); },
               },
               cfg.scheme);
    return plan;
}

// Water-fills over the non-null eigenvalues; returns the rate and writes the
// allocation into q (length = number of non-null eigenvalues, returned in `used`).
double waterfilled_rate(std::span<const double> lambda, double gain_scale, double budget, std::array<double, kMaxDim>& q,
                        std::size_t& used) {
    const double top = lambda[0];
    used = 0;
    if (!(top > 0.0)) return 0.0;
    std::array<double, kMaxDim> gains{};
    while (used < lambda.size() && lambda[used] > kRankTol * top) {
        gains[used] = lambda[used] * gain_scale;
        ++used;
    }
    std::size_t active = 0;
    waterfill_into(std::span<const double>(gains.data(), used), budget, std::span<double>(q.data(), used), active);
    double rate = 0.0;
    for (std::size_t i = 0; i < active; ++i) rate += std::log2(1.0 + gains[i] * q[i]);
    return rate;
}

double trial_rate(const Plan& plan, const TrialPool& pool, std::size_t t, double* gap) {
    double rate = 0.0;
    double g = 0.0;
    if (plan.fixed.weight > 0.0) {
        const auto w = pool.gram(t);
        const double r = plan.fixed.single_direction
                             ? std::log2(1.0 + w[0].real() * plan.fixed.scale[0])
                             : log2det_identity_plus_scaled(w, plan.nt, plan.fixed.scale);
        rate += plan.fixed.weight * r;
        g += plan.fixed.weight * plan.fixed.gap;
    }
    if (plan.filled.weight > 0.0) {
        std::array<double, kMaxDim> q{};
        std::size_t used = 0;
        const double r = waterfilled_rate(pool.eigenvalues(t), plan.filled.gain_scale, plan.filled.budget, q, used);
        rate += plan.filled.weight * r;
        if (gap) {
            for (std::size_t i = 0; i < used; ++i) q[i] *= plan.filled.error_var;
            g += plan.filled.weight * input_gap(std::span<const double>(q.data(), used), plan.nr);
        }
    }
    if (gap) *gap = g;
    return rate;
}

void check_pool(const Plan& plan, const SchemeConfig& cfg, const TrialPool& pool) {
    require(pool.nt() == plan.nt && pool.nr() == plan.nr, ErrorKind::Contract,
            "evaluate: trial pool dimensions do not match the configuration");
    require(plan.filled.weight == 0.0 || pool.has_eigenvalues(), ErrorKind::Contract,
            "evaluate: " + scheme_name(cfg.scheme) + " needs a pool with eigenvalues");
}

CapacityEstimate to_estimate(std::span<const double> values) {
    const SampleStats s = sample_stats(values);
    return {s.mean, s.std_error, values.size()};
}

}  // namespace

EffectiveSnr effective_snr(const SchemeConfig& cfg) {
    require(cfg.pilot_len >= cfg.nt, ErrorKind::InsufficientTraining, "effective_snr: needs pilot_len >= nt");
    EffectiveSnr e;
    e.error_var = 1.0 / (1.0 + cfg.pilot_power() * static_cast<double>(cfg.pilot_len) / static_cast<double>(cfg.nt));
    e.estimate_var = 1.0 - e.error_var;
    const double pd = cfg.data_power();
    e.value = e.estimate_var * pd / (1.0 + e.error_var * pd);
    return e;
}

double instant_clb(const ComplexMatrix& hhat, const ComplexMatrix& q, const ComplexMatrix& r_tilde) {
    const std::size_t nt = hhat.cols();
    require(q.rows() == nt && q.cols() == nt && r_tilde.rows() == nt && r_tilde.cols() == nt, ErrorKind::Domain,
            "instant_clb: Q and R~ must be Nt x Nt with Nt = columns of H^");
    require(is_hermitian(q) && is_hermitian(r_tilde), ErrorKind::Domain, "instant_clb: Q and R~ must be Hermitian");
    const double inflation = 1.0 + (r_tilde * q).trace().real();
    // det(I_Nt + c H^H H Q) = det(I_Nr + c H Q H^H), and the latter is Hermitian.
    ComplexMatrix m = hhat * q * hhat.adjoint();
    m *= 1.0 / inflation;
    m += ComplexMatrix::identity(hhat.rows());
    return log2det_pd(m);
}

bool needs_eigenvalues(const Scheme& scheme) {
    return std::holds_alternative<CgfDelayless>(scheme) || std::holds_alternative<CgfDelayed>(scheme);
}

CapacityEstimate evaluate(const SchemeConfig& cfg, const SimOptions& sim) {
    cfg.validate();
    const TrialPool pool = TrialPool::build(cfg.nt, cfg.nr, sim, needs_eigenvalues(cfg.scheme));
    return evaluate(cfg, pool, sim.workers);
}

CapacityEstimate evaluate(const SchemeConfig& cfg, const TrialPool& pool, int workers) {
    const Plan plan = make_plan(cfg);
    check_pool(plan, cfg, pool);
    const auto values =
        map_trials(pool.size(), workers, [&](std::size_t t) { return plan.block_scale * trial_rate(plan, pool, t, nullptr); });
    return to_estimate(values);
}

GapEstimate gap_estimate(const SchemeConfig& cfg, const SimOptions& sim) {
    if (sim.trials < 100) fail(ErrorKind::InsufficientSampling, "gap_estimate: needs at least 100 trials");
    const Plan plan = make_plan(cfg);
    const TrialPool pool = TrialPool::build(cfg.nt, cfg.nr, sim, needs_eigenvalues(cfg.scheme));
    check_pool(plan, cfg, pool);

    std::vector<double> upper(pool.size());
    const auto lower = map_trials(pool.size(), sim.workers, [&](std::size_t t) {
        double gap = 0.0;
        const double rate = trial_rate(plan, pool, t, &gap);
        upper[t] = plan.block_scale * (rate + gap);
        return plan.block_scale * rate;
    });

    GapEstimate g;
    g.clb = to_estimate(lower);
    g.cub = to_estimate(upper);
    g.gap_ratio = g.clb.mean > 0.0 ? (g.cub.mean - g.clb.mean) / g.clb.mean : 0.0;
    return g;
}

CapacityEstimate perfect_csi_delayed_clb(std::size_t nt, std::size_t nr, double beta, double phi, double data_power,
                                         const SimOptions& sim) {
    require(std::isfinite(beta) && beta >= 0.0 && beta <= 1.0, ErrorKind::Domain, "beta must be in (0, 1)");
    if (beta == 0.0 || beta == 1.0)
        fail(ErrorKind::Boundary, "beta at 0 or 1 leaves a single sub-block; use the pure adaptive or equal-power bound");
    require(std::isfinite(phi) && phi >= 0.0 && phi <= 1.0, ErrorKind::Domain, "phi must be in [0, 1]");
    require(std::isfinite(data_power) && data_power > 0.0, ErrorKind::Domain, "data power must be positive");

    const TrialPool pool = TrialPool::build(nt, nr, sim, true);
    const double equal_snr = phi * data_power / (beta * static_cast<double>(nt));
    const double budget = (1.0 - phi) * data_power / (1.0 - beta);
    const auto values = map_trials(pool.size(), sim.workers, [&](std::size_t t) {
        const auto lambda = pool.eigenvalues(t);
        double fixed = 0.0;
        for (double l : lambda) fixed += std::log2(1.0 + std::max(l, 0.0) * equal_snr);
        std::array<double, kMaxDim> q{};
        std::size_t used = 0;
        return beta * fixed + (1.0 - beta) * waterfilled_rate(lambda, 1.0, budget, q, used);
    });
    return to_estimate(values);
}

double expected_log2_one_plus_weighted_exp(std::span<const double> kappa) {
    // ln(1 + y) = int_0^inf (1 - e^{-s y}) e^{-s} ds / s, and E e^{-s kappa E} = 1 / (1 + s kappa).
    const double nats = log_scale_quadrature([&](double s) {
        double log_mgf = 0.0;
        for (double k : kappa) log_mgf -= std::log1p(s * k);
        return std::exp(-s) * -std::expm1(log_mgf);
    });
    return nats / std::numbers::ln2;
}

double input_gap(std::span<const double> kappa, std::size_t nr) {
    // ln(1 + sum k) - E ln(1 + sum k E) = int_0^inf e^{-s} (prod 1/(1 + s k) - e^{-s sum k}) ds / s,
    // with a non-negative integrand since 1/(1 + x) >= e^{-x}.
    double sum = 0.0;
    for (double k : kappa) {
        require(std::isfinite(k) && k >= 0.0, ErrorKind::Domain, "input_gap: kappa must be non-negative");
        sum += k;
    }
    if (sum == 0.0) return 0.0;
    const double nats = log_scale_quadrature([&](double s) {
        double excess = 0.0;
        for (double k : kappa) excess += excess_over_log1p(s * k);
        if (excess < 1.0) return std::exp(-s - s * sum) * std::expm1(excess);
        // Large excess: combine the exponents so neither factor over/underflows.
        return std::exp(excess - s - s * sum) * -std::expm1(-excess);
    });
    return static_cast<double>(nr) * nats / std::numbers::ln2;
}

double input_gap_sampled(std::span<const double> kappa, std::size_t nr, std::size_t draws, RandomStream& stream) {
    require(draws >= 1, ErrorKind::Domain, "input_gap_sampled: need at least one draw");
    double sum = 0.0;
    for (double k : kappa) sum += k;
    std::vector<double> terms(draws);
    for (std::size_t d = 0; d < draws; ++d) {
        double quad = 0.0;
        for (double k : kappa) quad += k * -std::log(stream.next_uniform());
        terms[d] = std::log2((1.0 + sum) / (1.0 + quad));
    }
    return static_cast<double>(nr) * pairwise_sum(terms) / static_cast<double>(draws);
}

}  // namespace psam
