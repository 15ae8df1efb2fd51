#include "psam/allocopt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <variant>

#include "psam/error.hpp"
#include "psam/estimation.hpp"
#include "psam/trial_pool.hpp"
#include "psam/waterfill.hpp"

namespace psam {

double alpha_star(const AlphaRegime& regime) {
    const double g = regime.gamma;
    switch (regime.branch) {
        case AlphaBranch::Equal:
            return 0.5;
        case AlphaBranch::DataLonger:
            if (!(std::isfinite(g) && g > 1.0)) fail(ErrorKind::Regime, "alpha_star: gamma must exceed 1 on this branch");
            return g - std::sqrt(g * (g - 1.0));
        case AlphaBranch::DataShorter:
            if (!(std::isfinite(g) && g < 0.0)) fail(ErrorKind::Regime, "alpha_star: gamma must be negative on this branch");
            return g + std::sqrt(g * (g - 1.0));
    }
    fail(ErrorKind::Regime, "alpha_star: unknown branch");
}

AlphaRegime gamma_nonfeedback(std::size_t nt, double power, std::size_t block_len, std::size_t data_len) {
    require(nt >= 1 && data_len >= 1 && data_len < block_len, ErrorKind::Domain, "gamma_nonfeedback: bad lengths");
    require(std::isfinite(power) && power > 0.0, ErrorKind::Domain, "gamma_nonfeedback: power must be positive");
    AlphaRegime r;
    if (data_len == nt) return r;
    const double pl = power * static_cast<double>(block_len);
    r.gamma = (static_cast<double>(nt) + pl) / (pl * (1.0 - static_cast<double>(nt) / static_cast<double>(data_len)));
    r.branch = data_len > nt ? AlphaBranch::DataLonger : AlphaBranch::DataShorter;
    return r;
}

AlphaRegime gamma_ccf(std::size_t data_len, std::size_t pilot_len, double validity_ratio) {
    require(data_len >= 1 && pilot_len >= 1, ErrorKind::Domain, "gamma_ccf: lengths must be positive");
    AlphaRegime r;
    r.warning = validity_ratio < 10.0;
    if (data_len == pilot_len) return r;
    const double ld = static_cast<double>(data_len);
    r.gamma = ld / (ld - static_cast<double>(pilot_len));
    r.branch = data_len > pilot_len ? AlphaBranch::DataLonger : AlphaBranch::DataShorter;
    return r;
}

double ccf_validity_ratio(const CovarianceSpec& cov, std::size_t pilot_len, double power, std::size_t block_len) {
    require(pilot_len >= 1 && pilot_len <= cov.size(), ErrorKind::Domain, "ccf_validity_ratio: Lp must be in [1, Nt]");
    double inv = 0.0;
    for (std::size_t i = 0; i < pilot_len; ++i) inv += 1.0 / cov.eigenvalues()[i];
    return power * static_cast<double>(block_len) / inv;
}

AlphaRegime gamma_beamforming(double gmax, double power, std::size_t block_len) {
    if (block_len < 3) fail(ErrorKind::Domain, "gamma_beamforming: block length must be at least 3");
    require(std::isfinite(gmax) && gmax > 0.0 && std::isfinite(power) && power > 0.0, ErrorKind::Domain,
            "gamma_beamforming: gmax and power must be positive");
    const double x = gmax * power * static_cast<double>(block_len);
    const double l = static_cast<double>(block_len);
    AlphaRegime r;
    r.gamma = (1.0 + x) / (x * (l - 2.0) / (l - 1.0));
    r.branch = AlphaBranch::DataLonger;
    return r;
}

double closed_form_alpha(const SchemeConfig& cfg) {
    if (std::holds_alternative<Ccf>(cfg.scheme)) {
        const CovarianceSpec cov = cfg.effective_covariance();
        return alpha_star(gamma_ccf(cfg.data_len(), cfg.pilot_len,
                                    ccf_validity_ratio(cov, cfg.pilot_len, cfg.power, cfg.block_len)));
    }
    if (std::holds_alternative<Beamforming>(cfg.scheme))
        return alpha_star(gamma_beamforming(cfg.effective_covariance().eigenvalues().front(), cfg.power, cfg.block_len));
    return alpha_star(gamma_nonfeedback(cfg.nt, cfg.power, cfg.block_len, cfg.data_len()));
}

PhiSolution phi_star_perfect_csi(std::size_t nt, std::size_t nr, double beta, double data_power,
                                 const SimOptions& sim) {
    require(std::isfinite(beta) && beta > 0.0 && beta < 1.0, ErrorKind::Domain, "phi_star: beta must be in (0, 1)");
    require(std::isfinite(data_power) && data_power > 0.0, ErrorKind::Domain, "phi_star: data power must be positive");
    const TrialPool pool = TrialPool::build(nt, nr, sim, true);
    const double bnt = beta * static_cast<double>(nt);

    // Derivative of the perfect-CSI bound in phi, divided by Pd, averaged over the pool.
    auto stationarity = [&](double phi) {
        const double budget = (1.0 - phi) * data_power / (1.0 - beta);
        const auto terms = map_trials(pool.size(), sim.workers, [&](std::size_t t) {
            const auto lambda = pool.eigenvalues(t);
            std::array<double, 16> gains{};
            std::array<double, 16> alloc{};
            std::size_t used = 0;
            double fixed = 0.0;
            for (double l : lambda) {
                if (l > 1e-12 * lambda[0]) gains[used++] = l;
                fixed += beta * std::max(l, 0.0) / (bnt + phi * std::max(l, 0.0) * data_power);
            }
            std::size_t active = 0;
            const double level = waterfill_into(std::span<const double>(gains.data(), used), budget,
                                                std::span<double>(alloc.data(), used), active);
            return fixed - 1.0 / level;
        });
        return pairwise_sum(terms) / static_cast<double>(terms.size());
    };

    PhiSolution s;
    const double at_zero = stationarity(0.0);
    if (at_zero <= 0.0) {
        s.residual = at_zero;
        return s;
    }
    const double at_one = stationarity(1.0);
    if (at_one >= 0.0) {
        s.phi_star = 1.0;
        s.residual = at_one;
        s.flagged = true;
        return s;
    }
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        (stationarity(mid) > 0.0 ? lo : hi) = mid;
    }
    s.phi_star = 0.5 * (lo + hi);
    s.residual = stationarity(s.phi_star);
    return s;
}

AlphaSearch numeric_alpha(const SchemeConfig& cfg, const SimOptions& sim, double tol) {
    require(std::isfinite(tol) && tol >= 1e-3, ErrorKind::Domain, "numeric_alpha: tol must be at least 1e-3");
    cfg.validate();
    const TrialPool pool = TrialPool::build(cfg.nt, cfg.nr, sim, needs_eigenvalues(cfg.scheme));
    SchemeConfig point = cfg;
    AlphaSearch out;
    auto objective = [&](double alpha) {
        point.alpha = alpha;
        ++out.evaluations;
        return evaluate(point, pool, sim.workers);
    };
    auto keep_best = [&](double alpha, const CapacityEstimate& c) {
        if (out.evaluations == 1 || c.mean > out.capacity.mean) {
            out.alpha = alpha;
            out.capacity = c;
        }
    };

    constexpr double lo = 0.02;
    constexpr double hi = 0.98;
    constexpr int coarse = 21;
    std::array<double, coarse> grid{};
    std::array<double, coarse> value{};
    int best = 0;
    for (int i = 0; i < coarse; ++i) {
        grid[i] = lo + (hi - lo) * i / (coarse - 1);
        const CapacityEstimate c = objective(grid[i]);
        keep_best(grid[i], c);
        value[i] = c.mean;
        if (value[i] > value[best]) best = i;
    }

    bool unimodal = true;
    for (int i = 0; i + 1 < coarse; ++i)
        if (i < best ? value[i] > value[i + 1] : value[i] < value[i + 1]) unimodal = false;

    if (!unimodal) {
        out.flagged = true;
        const int steps = static_cast<int>(std::ceil((hi - lo) / tol));
        for (int i = 0; i <= steps; ++i) {
            const double a = std::min(hi, lo + tol * i);
            keep_best(a, objective(a));
        }
        return out;
    }

    // Golden-section search inside the bracket around the coarse maximum.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = grid[std::max(best - 1, 0)];
    double b = grid[std::min(best + 1, coarse - 1)];
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    CapacityEstimate f1 = objective(x1);
    keep_best(x1, f1);
    CapacityEstimate f2 = objective(x2);
    keep_best(x2, f2);
    while (b - a > tol) {
        if (f1.mean >= f2.mean) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
            keep_best(x1, f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
            keep_best(x2, f2);
        }
    }
    return out;
}

PhiSearch phi_grid_search(const SchemeConfig& cfg, const SimOptions& sim, double step) {
    const auto* delayed = std::get_if<CgfDelayed>(&cfg.scheme);
    require(delayed != nullptr, ErrorKind::Config, "phi_grid_search: needs a cgf-delayed configuration");
    require(delayed->delay > 0 && delayed->delay < cfg.data_len(), ErrorKind::Config,
            "phi_grid_search: phi is only free when 0 < delay < data length");
    require(std::isfinite(step) && step > 0.0 && step <= 0.5, ErrorKind::Domain, "phi_grid_search: step must be in (0, 0.5]");

    SchemeConfig point = cfg;
    point.scheme = CgfDelayed{delayed->delay, 0.0};
    point.validate();
    const TrialPool pool = TrialPool::build(cfg.nt, cfg.nr, sim, true);

    PhiSearch out;
    const int steps = static_cast<int>(std::llround(1.0 / step));
    for (int i = 0; i <= steps; ++i) {
        const double phi = std::min(1.0, step * i);
        point.scheme = CgfDelayed{delayed->delay, phi};
        const CapacityEstimate c = evaluate(point, pool, sim.workers);
        out.table.push_back({phi, c});
        if (i == 0 || c.mean > out.capacity.mean) {
            out.phi = phi;
            out.capacity = c;
        }
    }
    return out;
}

PilotLengthSearch optimal_pilot_length(const CovarianceSpec& cov, std::size_t nt, std::size_t nr,
                                       std::size_t block_len, double power, const SimOptions& sim) {
    require(cov.size() == nt, ErrorKind::Domain, "optimal_pilot_length: covariance size must equal nt");
    const TrialPool pool = TrialPool::build(nt, nr, sim, false);
    PilotLengthSearch out;
    bool have_best = false;
    double best_mean = 0.0;
    for (std::size_t lp = 1; lp <= nt && lp < block_len; ++lp) {
        PilotLengthRow row;
        row.pilot_len = lp;
        row.validity_ratio = ccf_validity_ratio(cov, lp, power, block_len);
        row.alpha = alpha_star(gamma_ccf(block_len - lp, lp, row.validity_ratio));

        SchemeConfig cfg;
        cfg.nt = nt;
        cfg.nr = nr;
        cfg.block_len = block_len;
        cfg.pilot_len = lp;
        cfg.power = power;
        cfg.alpha = row.alpha;
        cfg.scheme = Ccf{};
        cfg.covariance = cov;
        row.reduced = ccf_pilots(cov, cfg.pilot_power(), lp).reduced;
        row.capacity = evaluate(cfg, pool, sim.workers);
        if (!row.reduced && (!have_best || row.capacity.mean > best_mean)) {
            have_best = true;
            best_mean = row.capacity.mean;
            out.pilot_len = lp;
        }
        out.table.push_back(row);
    }
    return out;
}

EqualPowerSearch equal_power_training(const SchemeConfig& cfg, const SimOptions& sim) {
    require(!std::holds_alternative<Ccf>(cfg.scheme) && !std::holds_alternative<Beamforming>(cfg.scheme),
            ErrorKind::Config, "equal_power_training: needs an orthogonal-pilot scheme");
    const TrialPool pool = TrialPool::build(cfg.nt, cfg.nr, sim, needs_eigenvalues(cfg.scheme));
    EqualPowerSearch out;
    SchemeConfig point = cfg;
    for (std::size_t lp = cfg.nt; 2 * lp <= cfg.block_len; ++lp) {
        point.pilot_len = lp;
        point.alpha = static_cast<double>(cfg.block_len - lp) / static_cast<double>(cfg.block_len);
        if (auto* d = std::get_if<CgfDelayed>(&point.scheme)) d->delay = std::min(d->delay, point.data_len());
        const CapacityEstimate c = evaluate(point, pool, sim.workers);
        if (out.pilot_len == 0 || c.mean > out.capacity.mean) {
            out.pilot_len = lp;
            out.alpha = point.alpha;
            out.capacity = c;
        }
    }
    require(out.pilot_len != 0, ErrorKind::Config, "equal_power_training: block too short for Nt pilots");
    return out;
}

}  // namespace psam
