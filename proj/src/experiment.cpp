#include "psam/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "psam/allocopt.hpp"
#include "psam/capacity.hpp"
#include "psam/error.hpp"

namespace psam {

namespace {

bool shaped_scheme(const std::string& s) { return s == "ccf" || s == "beamforming"; }

Scheme make_scheme(const ExperimentSpec& spec, double phi) {
    if (spec.scheme == "nonfeedback") return NonFeedback{};
    if (spec.scheme == "cgf") return CgfDelayless{};
    if (spec.scheme == "cgf-delayed") return CgfDelayed{spec.delay, phi};
    if (spec.scheme == "ccf") return Ccf{};
    return Beamforming{};
}

SimOptions with_workers(SimOptions sim, int workers) {
    sim.workers = workers;
    return sim;
}

// Operating point before pilot length, alpha and phi are resolved.
SchemeConfig base_point(const ExperimentSpec& spec, double snr_db, double rho) {
    SchemeConfig cfg;
    cfg.nt = spec.nt;
    cfg.nr = spec.nr;
    cfg.block_len = spec.block_len;
    cfg.pilot_len = spec.pilot_len.value_or(shaped_scheme(spec.scheme) ? 1 : spec.nt);
    cfg.power = db_to_linear(snr_db);
    cfg.scheme = make_scheme(spec, 0.0);
    if (shaped_scheme(spec.scheme) || rho > 0.0) cfg.covariance = exp_correlation(spec.nt, rho);
    return cfg;
}

std::size_t resolve_pilot_len(const ExperimentSpec& spec, const SchemeConfig& cfg, const SimOptions& sim) {
    if (spec.pilot_len) return *spec.pilot_len;
    if (spec.scheme == "ccf")
        return optimal_pilot_length(cfg.effective_covariance(), cfg.nt, cfg.nr, cfg.block_len, cfg.power, sim).pilot_len;
    return cfg.pilot_len;
}

// Fills in phi for the delayed scheme from the spec's phi mode.
void resolve_phi(const ExperimentSpec& spec, SchemeConfig& cfg, const SimOptions& sim) {
    if (spec.scheme != "cgf-delayed") return;
    const std::size_t ld = cfg.data_len();
    double phi = spec.phi;
    if (spec.delay == 0) {
        phi = 0.0;
    } else if (spec.delay == ld) {
        phi = 1.0;
    } else if (spec.phi_mode == PhiMode::Beta) {
        phi = cfg.beta();
    } else if (spec.phi_mode == PhiMode::Auto) {
        phi = phi_grid_search(cfg, sim).phi;
    }
    cfg.scheme = CgfDelayed{spec.delay, phi};
}

struct PointResult {
    CapacityEstimate capacity;
    double gap_ratio = 0.0;
};

PointResult measure(const ExperimentSpec& spec, const SchemeConfig& cfg, const SimOptions& sim) {
    if (spec.gap) {
        const GapEstimate g = gap_estimate(cfg, sim);
        return {g.clb, g.gap_ratio};
    }
    return {evaluate(cfg, sim), 0.0};
}

ResultTable run_custom(const ExperimentSpec& spec, const SimOptions& sim, bool with_rho) {
    ResultTable t;
    t.columns = {"snr_db"};
    if (with_rho) t.columns.push_back("rho");
    for (const char* c : {"pilot_len", "alpha", "beta", "phi", "mean", "stderr"}) t.columns.emplace_back(c);
    if (spec.gap) t.columns.emplace_back("gap_ratio");

    const std::vector<double> alphas = spec.alpha_mode == AlphaMode::Auto ? std::vector<double>{0.0} : spec.alpha;
    for (double snr : spec.snr_db)
        for (double rho : spec.rho)
            for (double a : alphas) {
                SchemeConfig cfg = base_point(spec, snr, rho);
                cfg.pilot_len = resolve_pilot_len(spec, cfg, sim);
                cfg.alpha = spec.alpha_mode == AlphaMode::Auto ? closed_form_alpha(cfg) : a;
                resolve_phi(spec, cfg, sim);
                const PointResult r = measure(spec, cfg, sim);
                std::vector<double> row = {snr};
                if (with_rho) row.push_back(rho);
                row.insert(row.end(), {static_cast<double>(cfg.pilot_len), cfg.alpha, cfg.beta(), cfg.phi(),
                                       r.capacity.mean, r.capacity.std_error});
                if (spec.gap) row.push_back(r.gap_ratio);
                t.rows.push_back(std::move(row));
            }
    return t;
}

ResultTable run_phi_sweep(const ExperimentSpec& spec, const SimOptions& sim) {
    ResultTable t;
    t.columns = {"pd_db", "beta", "phi_star", "residual", "flagged"};
    const SchemeConfig cfg = base_point(spec, 0.0, 0.0);
    const double beta = static_cast<double>(spec.delay) / static_cast<double>(cfg.data_len());
    for (double pd_db : spec.snr_db) {
        const PhiSolution s = phi_star_perfect_csi(spec.nt, spec.nr, beta, db_to_linear(pd_db), sim);
        t.rows.push_back({pd_db, beta, s.phi_star, s.residual, s.flagged ? 1.0 : 0.0});
    }
    return t;
}

ResultTable run_delayless(const ExperimentSpec& spec, const SimOptions& sim) {
    ResultTable t;
    t.columns = {"snr_db", "pilot_len", "alpha", "mean", "stderr",
                 "equal_pilot_len", "equal_alpha", "equal_mean", "equal_stderr", "gain"};
    if (spec.gap) t.columns.emplace_back("gap_ratio");
    for (double snr : spec.snr_db) {
        SchemeConfig cfg = base_point(spec, snr, 0.0);
        cfg.alpha = spec.alpha_mode == AlphaMode::Auto ? closed_form_alpha(cfg) : spec.alpha.front();
        const PointResult r = measure(spec, cfg, sim);
        const EqualPowerSearch eq = equal_power_training(cfg, sim);
        std::vector<double> row = {snr,
                                   static_cast<double>(cfg.pilot_len),
                                   cfg.alpha,
                                   r.capacity.mean,
                                   r.capacity.std_error,
                                   static_cast<double>(eq.pilot_len),
                                   eq.alpha,
                                   eq.capacity.mean,
                                   eq.capacity.std_error,
                                   r.capacity.mean / eq.capacity.mean - 1.0};
        if (spec.gap) row.push_back(r.gap_ratio);
        t.rows.push_back(std::move(row));
    }
    return t;
}

ResultTable run_alpha_vs_rho(const ExperimentSpec& spec, const SimOptions& sim) {
    ResultTable t;
    t.columns = {"snr_db", "rho", "pilot_len", "alpha_closed", "alpha_numeric", "validity_ratio"};
    for (double snr : spec.snr_db)
        for (double rho : spec.rho) {
            const std::size_t first = spec.pilot_len.value_or(1);
            const std::size_t last = spec.pilot_len.value_or(spec.nt);
            for (std::size_t lp = first; lp <= last && lp < spec.block_len; ++lp) {
                SchemeConfig cfg = base_point(spec, snr, rho);
                cfg.pilot_len = lp;
                cfg.alpha = closed_form_alpha(cfg);
                const double ratio = ccf_validity_ratio(cfg.effective_covariance(), lp, cfg.power, cfg.block_len);
                const AlphaSearch found = numeric_alpha(cfg, sim);
                t.rows.push_back({snr, rho, static_cast<double>(lp), cfg.alpha, found.alpha, ratio});
            }
        }
    return t;
}

ResultTable run_cap_vs_rho(const ExperimentSpec& spec, const SimOptions& sim) {
    ResultTable t;
    t.columns = {"snr_db", "rho", "pilot_len_star", "mean", "stderr"};
    for (std::size_t lp = 1; lp <= spec.nt; ++lp) t.columns.push_back("mean_lp" + std::to_string(lp));
    for (double snr : spec.snr_db)
        for (double rho : spec.rho) {
            const CovarianceSpec cov = exp_correlation(spec.nt, rho);
            const PilotLengthSearch s =
                optimal_pilot_length(cov, spec.nt, spec.nr, spec.block_len, db_to_linear(snr), sim);
            const PilotLengthRow& best = s.table[s.pilot_len - 1];
            std::vector<double> row = {snr, rho, static_cast<double>(s.pilot_len), best.capacity.mean,
                                       best.capacity.std_error};
            for (const auto& r : s.table) row.push_back(r.capacity.mean);
            row.resize(t.columns.size(), 0.0);
            t.rows.push_back(std::move(row));
        }
    return t;
}

}  // namespace

ResultTable run(const ExperimentSpec& spec, int workers) {
    require(!spec.snr_db.empty() && !spec.rho.empty(), ErrorKind::Config, "experiment grid is empty");
    const SimOptions sim = with_workers(spec.sim, workers);
    switch (spec.kind) {
        case ExperimentKind::PhiSweep: return run_phi_sweep(spec, sim);
        case ExperimentKind::SnrSweepDelayless: return run_delayless(spec, sim);
        case ExperimentKind::SnrSweepDelayed: return run_custom(spec, sim, false);
        case ExperimentKind::AlphaVsRho: return run_alpha_vs_rho(spec, sim);
        case ExperimentKind::CapVsRho2x2:
        case ExperimentKind::CapVsRho4x4: return run_cap_vs_rho(spec, sim);
        case ExperimentKind::CustomSweep: return run_custom(spec, sim, true);
    }
    fail(ErrorKind::Config, "unknown experiment kind");
}

std::string to_csv(const ResultTable& table, const std::optional<std::string>& comment) {
    std::string out;
    if (comment) out += "# " + *comment + "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
    out += '\n';
    char buf[32];
    for (const auto& row : table.rows) {
        require(row.size() == table.columns.size(), ErrorKind::Contract, "to_csv: row width differs from header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            require(std::isfinite(row[c]), ErrorKind::Contract,
                    "to_csv: non-finite value in column " + table.columns[c]);
            std::snprintf(buf, sizeof buf, "%.12g", row[c]);
            if (c) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) fail(ErrorKind::Io, "cannot open '" + tmp + "' for writing");
        f << content;
        f.flush();
        if (!f) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            fail(ErrorKind::Io, "write to '" + tmp + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        fail(ErrorKind::Io, "cannot move output into '" + path + "': " + ec.message());
    }
}

}  // namespace psam
