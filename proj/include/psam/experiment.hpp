#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psam/scheme.hpp"

namespace psam {

enum class ExperimentKind {
    PhiSweep,           ///< optimal phi vs data SNR, perfect channel knowledge
    SnrSweepDelayless,  ///< closed-form alpha vs equal power, gain feedback
    SnrSweepDelayed,    ///< delayed gain feedback vs SNR
    AlphaVsRho,         ///< closed-form and numeric alpha vs correlation
    CapVsRho2x2,        ///< best training length and capacity vs correlation
    CapVsRho4x4,
    CustomSweep,        ///< snr x rho x alpha grid for any scheme
};

const char* to_string(ExperimentKind kind) noexcept;
/// Accepts the kind names and the aliases fig2 .. fig7.
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);

/// One raw `key = value` assignment; line is 0 for values not read from a file.
struct Setting {
    std::string value;
    int line = 0;
};
using Settings = std::map<std::string, Setting>;

/// Splits config text into settings. Throws ParseError on malformed lines,
/// unknown keys and repeated keys.
Settings parse_settings(std::string_view text);

/// Later maps win key by key.
Settings merge_settings(const Settings& base, const Settings& overrides);

enum class AlphaMode { Value, Auto, List };
enum class PhiMode { Value, Beta, Auto };

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::CustomSweep;
    std::string scheme;
    std::size_t nt = 0;
    std::size_t nr = 0;
    std::size_t block_len = 0;
    std::optional<std::size_t> pilot_len;  ///< empty = chosen per scheme
    std::size_t delay = 0;
    std::vector<double> snr_db;
    std::vector<double> rho{0.0};
    AlphaMode alpha_mode = AlphaMode::Auto;
    std::vector<double> alpha;
    PhiMode phi_mode = PhiMode::Beta;
    double phi = 0.0;
    SimOptions sim;
    std::string out;
    bool gap = false;
};

/// Builds and validates a spec; defaults trials = 10000, seed = 42. Range and
/// consistency failures are ParseErrors carrying the key and its line.
ExperimentSpec build_spec(const Settings& settings, ExperimentKind kind);

/// parse_settings + build_spec for a custom sweep.
ExperimentSpec parse_config(std::string_view text);

/// Canonical settings for a figure (fig2..fig7 or a kind name). Throws Config
/// for an unknown name.
std::pair<ExperimentKind, Settings> figure_preset(std::string_view name);

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// Runs every grid point in order. `workers` only changes the speed.
ResultTable run(const ExperimentSpec& spec, int workers = 0);

/// CSV text: optional comment line, header, one row per grid point, 12
/// significant digits. Throws Contract on a non-finite cell.
std::string to_csv(const ResultTable& table, const std::optional<std::string>& comment = std::nullopt);

/// Writes `content` to a sibling temp file and renames it over `path`.
/// Throws ErrorKind::Io on failure.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace psam
