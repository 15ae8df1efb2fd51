#include "psam/scheme.hpp"

#include <cmath>
#include <numeric>

#include "psam/error.hpp"

namespace psam {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void config_check(bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::Config, what);
}

}  // namespace

std::string scheme_name(const Scheme& scheme) {
    return std::visit(overloaded{
                          [](const NonFeedback&) { return std::string("nonfeedback"); },
                          [](const CgfDelayless&) { return std::string("cgf"); },
                          [](const CgfDelayed&) { return std::string("cgf-delayed"); },
                          [](const Ccf&) { return std::string("ccf"); },
                          [](const Beamforming&) { return std::string("beamforming"); },
                      },
                      scheme);
}

double SchemeConfig::pilot_power() const noexcept {
    return (1.0 - alpha) * power * static_cast<double>(block_len) / static_cast<double>(pilot_len);
}

double SchemeConfig::data_power() const noexcept {
    return alpha * power * static_cast<double>(block_len) / static_cast<double>(data_len());
}

double SchemeConfig::beta() const noexcept {
    if (const auto* d = std::get_if<CgfDelayed>(&scheme))
        return static_cast<double>(d->delay) / static_cast<double>(data_len());
    return 0.0;
}

double SchemeConfig::phi() const noexcept {
    if (const auto* d = std::get_if<CgfDelayed>(&scheme)) return d->phi;
    return 0.0;
}

double SchemeConfig::nonadaptive_power() const noexcept {
    const double b = beta();
    return b > 0.0 ? phi() / b * data_power() : 0.0;
}

double SchemeConfig::adaptive_power() const noexcept {
    const double b = beta();
    return b < 1.0 ? (1.0 - phi()) / (1.0 - b) * data_power() : 0.0;
}

CovarianceSpec SchemeConfig::effective_covariance() const {
    return covariance ? *covariance : CovarianceSpec::identity(nt);
}

void SchemeConfig::validate() const {
    config_check(nt >= 1 && nt <= 16 && nr >= 1 && nr <= 16, "antenna counts must be in [1, 16]");
    config_check(pilot_len >= 1 && pilot_len < block_len, "pilot_len must be in [1, block_len)");
    config_check(std::isfinite(power) && power > 0.0, "power must be positive");
    config_check(std::isfinite(alpha) && alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
    if (covariance) config_check(covariance->size() == nt, "covariance size must equal nt");

    const bool iid = !covariance || covariance->is_identity();
    std::visit(overloaded{
                   [&](const NonFeedback&) {
                       require(pilot_len >= nt, ErrorKind::InsufficientTraining,
                               "nonfeedback needs pilot_len >= nt");
                   },
                   [&](const CgfDelayless&) {
                       require(pilot_len >= nt, ErrorKind::InsufficientTraining, "cgf needs pilot_len >= nt");
                       config_check(iid, "cgf assumes an i.i.d. channel");
                   },
                   [&](const CgfDelayed& d) {
                       require(pilot_len >= nt, ErrorKind::InsufficientTraining, "cgf needs pilot_len >= nt");
                       config_check(iid, "cgf assumes an i.i.d. channel");
                       config_check(d.delay <= data_len(), "delay must be in [0, block_len - pilot_len]");
                       config_check(std::isfinite(d.phi) && d.phi >= 0.0 && d.phi <= 1.0, "phi must be in [0, 1]");
                       config_check(d.delay != 0 || d.phi == 0.0, "delay 0 leaves no equal-power sub-block, phi must be 0");
                       config_check(d.delay != data_len() || d.phi == 1.0,
                                    "delay equal to the data length leaves no adaptive sub-block, phi must be 1");
                   },
                   [&](const Ccf& c) {
                       config_check(pilot_len <= nt, "ccf needs pilot_len <= nt");
                       if (!c.data_weights.empty()) {
                           config_check(c.data_weights.size() == pilot_len, "ccf data weights must have pilot_len entries");
                           double sum = 0.0;
                           for (double w : c.data_weights) {
                               config_check(std::isfinite(w) && w >= 0.0, "ccf data weights must be non-negative");
                               sum += w;
                           }
                           config_check(std::abs(sum - 1.0) <= 1e-9, "ccf data weights must sum to 1");
                       }
                   },
                   [&](const Beamforming&) { config_check(pilot_len == 1, "beamforming uses pilot_len = 1"); },
               },
               scheme);
}

}  // namespace psam
