#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "psam/covariance.hpp"

namespace psam {

/// Fixed pilots and equal data power on every antenna; no feedback.
struct NonFeedback {};
/// Receiver feeds back the estimated channel; data is water-filled at once.
struct CgfDelayless {};
/// Feedback arrives after `delay` data symbols. The first `delay` symbols use
/// equal power; `phi` is the share of block data energy spent there.
struct CgfDelayed {
    std::size_t delay = 0;
    double phi = 0.0;
};
/// Covariance feedback: pilots and data go along the strongest eigen-directions.
/// `data_weights` splits the data power over the Lp trained directions (must sum
/// to 1); empty means equal power.
struct Ccf {
    std::vector<double> data_weights;
};
/// Single-pilot covariance feedback, all data power on the strongest direction.
struct Beamforming {};

using Scheme = std::variant<NonFeedback, CgfDelayless, CgfDelayed, Ccf, Beamforming>;

std::string scheme_name(const Scheme& scheme);

/// One operating point of a pilot-assisted block-fading link. Noise variance is
/// 1, so `power` is the linear SNR per transmission.
struct SchemeConfig {
    std::size_t nt = 1;
    std::size_t nr = 1;
    std::size_t block_len = 2;  ///< L
    std::size_t pilot_len = 1;  ///< Lp
    double power = 1.0;         ///< P, average over the block
    double alpha = 0.5;         ///< share of block energy spent on data
    Scheme scheme = NonFeedback{};
    /// Transmit correlation; absent means i.i.d. (identity).
    std::optional<CovarianceSpec> covariance;

    std::size_t data_len() const noexcept { return block_len - pilot_len; }
    /// (1 - alpha) P L / Lp
    double pilot_power() const noexcept;
    /// alpha P L / Ld
    double data_power() const noexcept;
    /// delay / Ld for CgfDelayed, 0 otherwise.
    double beta() const noexcept;
    double phi() const noexcept;
    /// Power per symbol in the equal-power (pre-feedback) sub-block.
    double nonadaptive_power() const noexcept;
    /// Power per symbol in the water-filled (post-feedback) sub-block.
    double adaptive_power() const noexcept;

    CovarianceSpec effective_covariance() const;

    /// Throws ErrorKind::Config (or InsufficientTraining for Lp < Nt on the
    /// orthogonal-pilot schemes) when the point is not a valid configuration.
    void validate() const;
};

/// Monte-Carlo controls. workers: 0 = OpenMP default team, 1 = the serial
/// reference loop, k > 1 = k threads. Results never depend on it.
struct SimOptions {
    std::size_t trials = 10000;
    std::uint64_t seed = 42;
    int workers = 0;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace psam
