#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>

#include "psam/error.hpp"
#include "psam/experiment.hpp"

namespace psam {

namespace {

constexpr std::array<std::string_view, 13> kKeys = {
    "scheme", "nt", "nr", "block_len", "pilot_len", "delay", "snr_db", "rho", "alpha", "phi", "trials", "seed", "out",
};
constexpr std::array<std::string_view, 5> kSchemes = {"nonfeedback", "cgf", "cgf-delayed", "ccf", "beamforming"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad(const std::string& key, const Setting& s, const std::string& what) {
    std::string where = s.line > 0 ? "line " + std::to_string(s.line) + ": " : std::string();
    throw ParseError(s.line, key, where + key + ": " + what);
}

double to_double(const std::string& key, const Setting& s, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(v))
        bad(key, s, "expected a number, got '" + std::string(text) + "'");
    return v;
}

std::uint64_t to_unsigned(const std::string& key, const Setting& s) {
    const std::string_view text = trim(s.value);
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size())
        bad(key, s, "expected a non-negative integer, got '" + std::string(text) + "'");
    return v;
}

std::vector<double> to_list(const std::string& key, const Setting& s) {
    std::vector<double> out;
    std::string_view rest = s.value;
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(to_double(key, s, rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

bool is_word(const Setting& s, std::string_view word) { return trim(s.value) == word; }

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
    switch (kind) {
        case ExperimentKind::PhiSweep: return "phi-sweep";
        case ExperimentKind::SnrSweepDelayless: return "snr-sweep-delayless";
        case ExperimentKind::SnrSweepDelayed: return "snr-sweep-delayed";
        case ExperimentKind::AlphaVsRho: return "alpha-vs-rho";
        case ExperimentKind::CapVsRho2x2: return "cap-vs-rho-2x2";
        case ExperimentKind::CapVsRho4x4: return "cap-vs-rho-4x4";
        case ExperimentKind::CustomSweep: return "custom-sweep";
    }
    return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
    static constexpr std::array<std::pair<std::string_view, ExperimentKind>, 6> aliases = {{
        {"fig2", ExperimentKind::PhiSweep},
        {"fig3", ExperimentKind::SnrSweepDelayless},
        {"fig4", ExperimentKind::SnrSweepDelayed},
        {"fig5", ExperimentKind::AlphaVsRho},
        {"fig6", ExperimentKind::CapVsRho2x2},
        {"fig7", ExperimentKind::CapVsRho4x4},
    }};
    for (const auto& [alias, kind] : aliases)
        if (name == alias || name == to_string(kind)) return kind;
    if (name == to_string(ExperimentKind::CustomSweep)) return ExperimentKind::CustomSweep;
    return std::nullopt;
}

Settings parse_settings(std::string_view text) {
    Settings out;
    int line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, std::string(line), "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
            throw ParseError(line_no, key, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (value.empty())
            throw ParseError(line_no, key, "line " + std::to_string(line_no) + ": " + key + ": empty value");
        if (!out.emplace(key, Setting{value, line_no}).second)
            throw ParseError(line_no, key, "line " + std::to_string(line_no) + ": " + key + " given twice");
    }
    return out;
}

Settings merge_settings(const Settings& base, const Settings& overrides) {
    Settings out = base;
    for (const auto& [key, s] : overrides) out[key] = s;
    return out;
}

ExperimentSpec build_spec(const Settings& settings, ExperimentKind kind) {
    for (const auto& [key, s] : settings)
        if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) bad(key, s, "unknown key");
    for (const char* key : {"scheme", "nt", "nr", "block_len", "snr_db"})
        if (!settings.count(key)) throw ParseError(0, key, std::string("missing required key '") + key + "'");

    ExperimentSpec spec;
    spec.kind = kind;
    auto get = [&](const char* key) -> const Setting* {
        const auto it = settings.find(key);
        return it == settings.end() ? nullptr : &it->second;
    };

    const Setting& scheme = *get("scheme");
    spec.scheme = std::string(trim(scheme.value));
    if (std::find(kSchemes.begin(), kSchemes.end(), spec.scheme) == kSchemes.end())
        bad("scheme", scheme, "must be one of nonfeedback, cgf, cgf-delayed, ccf, beamforming");

    auto antenna = [&](const char* key) {
        const std::uint64_t v = to_unsigned(key, *get(key));
        if (v < 1 || v > 16) bad(key, *get(key), "must be in [1, 16]");
        return static_cast<std::size_t>(v);
    };
    spec.nt = antenna("nt");
    spec.nr = antenna("nr");
    spec.block_len = static_cast<std::size_t>(to_unsigned("block_len", *get("block_len")));
    if (spec.block_len < 2) bad("block_len", *get("block_len"), "must be at least 2");

    if (const Setting* s = get("pilot_len"); s && !is_word(*s, "auto")) {
        const std::uint64_t v = to_unsigned("pilot_len", *s);
        if (v < 1 || v >= spec.block_len) bad("pilot_len", *s, "must be in [1, block_len)");
        spec.pilot_len = static_cast<std::size_t>(v);
    }

    const bool delayed = spec.scheme == "cgf-delayed";
    const bool gain_feedback = spec.scheme == "cgf" || delayed;
    const bool shaped = spec.scheme == "ccf" || spec.scheme == "beamforming";
    const std::size_t lp_for_delay = spec.pilot_len.value_or(shaped ? 1 : spec.nt);

    if (const Setting* s = get("delay")) {
        if (!delayed) bad("delay", *s, "only applies to scheme cgf-delayed");
        spec.delay = static_cast<std::size_t>(to_unsigned("delay", *s));
        if (lp_for_delay >= spec.block_len || spec.delay > spec.block_len - lp_for_delay)
            bad("delay", *s, "must not exceed block_len - pilot_len");
    } else if (delayed) {
        throw ParseError(0, "delay", "scheme cgf-delayed needs key 'delay'");
    }

    spec.snr_db = to_list("snr_db", *get("snr_db"));

    if (const Setting* s = get("rho")) {
        spec.rho = to_list("rho", *s);
        for (double r : spec.rho)
            if (r < 0.0 || r >= 1.0) bad("rho", *s, "values must be in [0, 1)");
        if (gain_feedback && std::any_of(spec.rho.begin(), spec.rho.end(), [](double r) { return r != 0.0; }))
            bad("rho", *s, "gain-feedback schemes assume an uncorrelated channel");
    }

    if (const Setting* s = get("alpha")) {
        if (is_word(*s, "auto")) {
            spec.alpha_mode = AlphaMode::Auto;
        } else {
            spec.alpha = to_list("alpha", *s);
            spec.alpha_mode = spec.alpha.size() == 1 ? AlphaMode::Value : AlphaMode::List;
            for (double a : spec.alpha)
                if (!(a > 0.0 && a < 1.0)) bad("alpha", *s, "values must be in (0, 1)");
        }
    }

    if (const Setting* s = get("phi")) {
        if (!delayed) bad("phi", *s, "only applies to scheme cgf-delayed");
        if (is_word(*s, "beta")) {
            spec.phi_mode = PhiMode::Beta;
        } else if (is_word(*s, "auto")) {
            spec.phi_mode = PhiMode::Auto;
        } else {
            spec.phi_mode = PhiMode::Value;
            spec.phi = to_double("phi", *s, s->value);
            if (spec.phi < 0.0 || spec.phi > 1.0) bad("phi", *s, "must be in [0, 1]");
        }
    }

    if (const Setting* s = get("trials")) {
        spec.sim.trials = static_cast<std::size_t>(to_unsigned("trials", *s));
        if (spec.sim.trials < 1) bad("trials", *s, "must be at least 1");
    }
    if (const Setting* s = get("seed")) spec.sim.seed = to_unsigned("seed", *s);
    if (const Setting* s = get("out")) spec.out = s->value;

    // Kind-specific shape requirements.
    auto need_scheme = [&](std::initializer_list<std::string_view> allowed) {
        if (std::find(allowed.begin(), allowed.end(), spec.scheme) == allowed.end())
            bad("scheme", scheme, std::string("not supported by experiment ") + to_string(kind));
    };
    switch (kind) {
        case ExperimentKind::PhiSweep:
            need_scheme({"cgf-delayed"});
            if (spec.delay == 0 || spec.delay >= spec.block_len - lp_for_delay)
                throw ParseError(get("delay")->line, "delay", "phi-sweep needs 0 < delay < block_len - pilot_len");
            break;
        case ExperimentKind::SnrSweepDelayless:
            need_scheme({"cgf", "nonfeedback"});
            break;
        case ExperimentKind::SnrSweepDelayed:
            need_scheme({"cgf-delayed"});
            break;
        case ExperimentKind::AlphaVsRho:
            need_scheme({"ccf"});
            break;
        case ExperimentKind::CapVsRho2x2:
        case ExperimentKind::CapVsRho4x4: {
            need_scheme({"ccf"});
            const std::size_t n = kind == ExperimentKind::CapVsRho2x2 ? 2 : 4;
            if (spec.nt != n || spec.nr != n) bad("nt", *get("nt"), std::string(to_string(kind)) + " fixes nt = nr = " + std::to_string(n));
            break;
        }
        case ExperimentKind::CustomSweep:
            break;
    }
    return spec;
}

ExperimentSpec parse_config(std::string_view text) {
    return build_spec(parse_settings(text), ExperimentKind::CustomSweep);
}

std::pair<ExperimentKind, Settings> figure_preset(std::string_view name) {
    const auto kind = parse_experiment_kind(name);
    if (!kind || *kind == ExperimentKind::CustomSweep)
        fail(ErrorKind::Config, "unknown figure '" + std::string(name) + "' (expected fig2 .. fig7)");
    auto make = [](std::initializer_list<std::pair<const char*, const char*>> kv) {
        Settings s;
        for (const auto& [k, v] : kv) s[k] = Setting{v, 0};
        return s;
    };
    switch (*kind) {
        case ExperimentKind::PhiSweep:
            return {*kind, make({{"scheme", "cgf-delayed"}, {"nt", "2"}, {"nr", "2"}, {"block_len", "52"},
                                 {"pilot_len", "2"}, {"delay", "10"}, {"snr_db", "-10,-5,0,5,10,15,20,25,30"}})};
        case ExperimentKind::SnrSweepDelayless:
            return {*kind, make({{"scheme", "cgf"}, {"nt", "4"}, {"nr", "4"}, {"block_len", "100"}, {"pilot_len", "4"},
                                 {"snr_db", "0,2,4,6,8,10,12,14,16,18,20"}})};
        case ExperimentKind::SnrSweepDelayed:
            return {*kind, make({{"scheme", "cgf-delayed"}, {"nt", "4"}, {"nr", "4"}, {"block_len", "100"},
                                 {"pilot_len", "4"}, {"delay", "20"}, {"phi", "beta"},
                                 {"snr_db", "0,2,4,6,8,10,12,14,16,18,20"}})};
        case ExperimentKind::AlphaVsRho:
            return {*kind, make({{"scheme", "ccf"}, {"nt", "4"}, {"nr", "4"}, {"block_len", "20"}, {"snr_db", "10"},
                                 {"rho", "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"}})};
        case ExperimentKind::CapVsRho2x2:
            return {*kind, make({{"scheme", "ccf"}, {"nt", "2"}, {"nr", "2"}, {"block_len", "20"}, {"snr_db", "10"},
                                 {"rho", "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.95"}})};
        case ExperimentKind::CapVsRho4x4:
            return {*kind, make({{"scheme", "ccf"}, {"nt", "4"}, {"nr", "4"}, {"block_len", "20"}, {"snr_db", "10"},
                                 {"rho", "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"}})};
        case ExperimentKind::CustomSweep:
            break;
    }
    fail(ErrorKind::Config, "unknown figure");
}

}  // namespace psam
