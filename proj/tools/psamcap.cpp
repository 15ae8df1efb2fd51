// psamcap: capacity simulations and optimizers for pilot-assisted MIMO links.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "psam/allocopt.hpp"
#include "psam/capacity.hpp"
#include "psam/error.hpp"
#include "psam/experiment.hpp"

namespace {

using namespace psam;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

const char* const kSettingKeys[] = {"scheme", "nt",  "nr",    "block_len", "pilot_len", "delay", "snr_db",
                                    "rho",    "alpha", "phi", "trials",    "seed",      "out"};

struct Common {
    std::string config_path;
    std::map<std::string, std::string> flags;
    int workers = 0;
    bool deterministic = false;
    bool gap = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "key = value config file");
    for (const char* key : kSettingKeys)
        cmd->add_option(std::string("--") + key, c.flags[key], std::string("overrides config key ") + key);
    cmd->add_option("--workers", c.workers, "worker threads (1 = serial reference path)")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--deterministic", c.deterministic, "omit the timestamp comment from CSV output");
}

Settings gather(const Common& c, const Settings& preset) {
    Settings from_file;
    if (!c.config_path.empty()) {
        std::ifstream f(c.config_path);
        if (!f) fail(ErrorKind::Io, "cannot read config file '" + c.config_path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        from_file = parse_settings(ss.str());
    }
    Settings from_flags;
    for (const auto& [key, value] : c.flags)
        if (!value.empty()) from_flags[key] = Setting{value, 0};
    return merge_settings(merge_settings(preset, from_file), from_flags);
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

void emit(const ResultTable& table, const ExperimentSpec& spec, const Common& c) {
    std::optional<std::string> comment;
    if (!c.deterministic) comment = "generated " + timestamp();
    const std::string csv = to_csv(table, comment);
    if (spec.out.empty())
        std::cout << csv;
    else
        write_file_atomic(spec.out, csv);
}

SchemeConfig first_point(const ExperimentSpec& spec) {
    SchemeConfig cfg;
    cfg.nt = spec.nt;
    cfg.nr = spec.nr;
    cfg.block_len = spec.block_len;
    cfg.power = db_to_linear(spec.snr_db.front());
    const double rho = spec.rho.front();
    const bool shaped = spec.scheme == "ccf" || spec.scheme == "beamforming";
    cfg.pilot_len = spec.pilot_len.value_or(shaped ? 1 : spec.nt);
    if (shaped || rho > 0.0) cfg.covariance = exp_correlation(spec.nt, rho);
    if (spec.scheme == "nonfeedback") cfg.scheme = NonFeedback{};
    else if (spec.scheme == "cgf") cfg.scheme = CgfDelayless{};
    else if (spec.scheme == "cgf-delayed") cfg.scheme = CgfDelayed{spec.delay, 0.0};
    else if (spec.scheme == "ccf") cfg.scheme = Ccf{};
    else cfg.scheme = Beamforming{};
    return cfg;
}

ResultTable optimize_alpha(const ExperimentSpec& spec, int workers) {
    SchemeConfig cfg = first_point(spec);
    if (auto* d = std::get_if<CgfDelayed>(&cfg.scheme)) d->phi = spec.phi_mode == PhiMode::Value ? spec.phi : cfg.beta();
    cfg.alpha = closed_form_alpha(cfg);
    SimOptions sim = spec.sim;
    sim.workers = workers;
    const AlphaSearch found = numeric_alpha(cfg, sim);
    return {{"pilot_len", "alpha_closed", "alpha_numeric", "mean", "stderr", "flagged"},
            {{static_cast<double>(cfg.pilot_len), cfg.alpha, found.alpha, found.capacity.mean,
              found.capacity.std_error, found.flagged ? 1.0 : 0.0}}};
}

ResultTable optimize_phi(const ExperimentSpec& spec, int workers) {
    SchemeConfig cfg = first_point(spec);
    if (!std::holds_alternative<CgfDelayed>(cfg.scheme)) fail(ErrorKind::Config, "optimize phi needs scheme cgf-delayed");
    cfg.alpha = spec.alpha_mode == AlphaMode::Auto ? closed_form_alpha(cfg) : spec.alpha.front();
    SimOptions sim = spec.sim;
    sim.workers = workers;
    const PhiSearch found = phi_grid_search(cfg, sim);
    cfg.scheme = CgfDelayed{spec.delay, cfg.beta()};
    const CapacityEstimate at_beta = evaluate(cfg, sim);
    return {{"alpha", "beta", "mean_at_beta", "phi_best", "mean_best", "stderr_best"},
            {{cfg.alpha, cfg.beta(), at_beta.mean, found.phi, found.capacity.mean, found.capacity.std_error}}};
}

ResultTable optimize_lp(const ExperimentSpec& spec, int workers) {
    if (spec.scheme != "ccf") fail(ErrorKind::Config, "optimize lp needs scheme ccf");
    const SchemeConfig cfg = first_point(spec);
    SimOptions sim = spec.sim;
    sim.workers = workers;
    const PilotLengthSearch s =
        optimal_pilot_length(cfg.effective_covariance(), cfg.nt, cfg.nr, cfg.block_len, cfg.power, sim);
    ResultTable t{{"pilot_len", "alpha", "mean", "stderr", "validity_ratio", "reduced", "best"}, {}};
    for (const auto& r : s.table)
        t.rows.push_back({static_cast<double>(r.pilot_len), r.alpha, r.capacity.mean, r.capacity.std_error,
                          r.validity_ratio, r.reduced ? 1.0 : 0.0, r.pilot_len == s.pilot_len ? 1.0 : 0.0});
    return t;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io: return kExitIo;
        case ErrorKind::Contract:
        case ErrorKind::NotPsd:
        case ErrorKind::Singular: return kExitNumeric;
        default: return kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Capacity bounds and power allocation for pilot-assisted MIMO links"};
    app.require_subcommand(1);

    Common simulate_opts, sweep_opts, figure_opts, optimize_opts;
    auto* simulate = app.add_subcommand("simulate", "evaluate a single operating point");
    add_common(simulate, simulate_opts);
    simulate->add_flag("--gap", simulate_opts.gap, "also estimate the upper bound");

    auto* sweep = app.add_subcommand("sweep", "evaluate the snr_db x rho x alpha grid");
    add_common(sweep, sweep_opts);
    sweep->add_flag("--gap", sweep_opts.gap, "also estimate the upper bound");

    std::string figure_name;
    auto* figure = app.add_subcommand("figure", "run a canonical preset (fig2 .. fig7)");
    figure->add_option("name", figure_name, "preset name")->required();
    add_common(figure, figure_opts);

    std::string target;
    auto* optimize = app.add_subcommand("optimize", "closed-form vs numeric optimum");
    optimize->add_option("target", target, "alpha, phi or lp")->required()->check(CLI::IsMember({"alpha", "phi", "lp"}));
    add_common(optimize, optimize_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (simulate->parsed() || sweep->parsed()) {
            const Common& c = simulate->parsed() ? simulate_opts : sweep_opts;
            ExperimentSpec spec = build_spec(gather(c, {}), ExperimentKind::CustomSweep);
            spec.gap = c.gap;
            if (simulate->parsed() &&
                (spec.snr_db.size() != 1 || spec.rho.size() != 1 || spec.alpha_mode == AlphaMode::List))
                fail(ErrorKind::Config, "simulate takes a single point; use sweep for lists");
            emit(run(spec, c.workers), spec, c);
        } else if (figure->parsed()) {
            const auto [kind, preset] = figure_preset(figure_name);
            const ExperimentSpec spec = build_spec(gather(figure_opts, preset), kind);
            emit(run(spec, figure_opts.workers), spec, figure_opts);
        } else {
            const ExperimentSpec spec = build_spec(gather(optimize_opts, {}), ExperimentKind::CustomSweep);
            const ResultTable t = target == "alpha" ? optimize_alpha(spec, optimize_opts.workers)
                                  : target == "phi" ? optimize_phi(spec, optimize_opts.workers)
                                                    : optimize_lp(spec, optimize_opts.workers);
            emit(t, spec, optimize_opts);
        }
    } catch (const ParseError& e) {
        std::cerr << "psamcap: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "psamcap: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "psamcap: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
