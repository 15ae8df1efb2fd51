#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "psam/capacity.hpp"
#include "psam/covariance.hpp"
#include "psam/scheme.hpp"

namespace psam {

/// Which closed-form root applies: data part longer than, equal to, or shorter
/// than the relevant training dimension.
enum class AlphaBranch { DataLonger, Equal, DataShorter };

struct AlphaRegime {
    double gamma = std::numeric_limits<double>::quiet_NaN();
    AlphaBranch branch = AlphaBranch::Equal;
    /// Set when the high-SNR approximation behind gamma is questionable.
    bool warning = false;
};

/// DataLonger: gamma - sqrt(gamma (gamma - 1)), in [1/2, 1), needs gamma > 1.
/// Equal: 1/2.
/// DataShorter: gamma + sqrt(gamma (gamma - 1)), in (0, 1/2], needs gamma < 0.
/// Throws ErrorKind::Regime when gamma does not fit the branch.
double alpha_star(const AlphaRegime& regime);

/// Orthogonal-pilot schemes (non-feedback and delayless gain feedback).
AlphaRegime gamma_nonfeedback(std::size_t nt, double power, std::size_t block_len, std::size_t data_len);

/// Covariance feedback with Lp trained directions. `validity_ratio` is
/// ccf_validity_ratio(); below 10 the regime is flagged.
AlphaRegime gamma_ccf(std::size_t data_len, std::size_t pilot_len,
                      double validity_ratio = std::numeric_limits<double>::infinity());

/// P L / sum_{i < Lp} 1/g_i.
double ccf_validity_ratio(const CovarianceSpec& cov, std::size_t pilot_len, double power, std::size_t block_len);

/// Beamforming along the strongest direction with eigenvalue gmax. L >= 3.
AlphaRegime gamma_beamforming(double gmax, double power, std::size_t block_len);

/// Closed-form alpha for a configuration, by scheme (the delayed scheme uses
/// the non-feedback regime).
double closed_form_alpha(const SchemeConfig& cfg);

struct PhiSolution {
    double phi_star = 0.0;
    /// Mean stationarity value at phi_star (zero at an interior optimum).
    double residual = 0.0;
    /// Stationarity did not change sign on (0, 1); phi_star is the nearer end.
    bool flagged = false;
};

/// Optimal share of data energy before feedback arrives, with perfect channel
/// knowledge. Bisection over phi on one fixed pool of sim.trials Wishart draws.
PhiSolution phi_star_perfect_csi(std::size_t nt, std::size_t nr, double beta, double data_power,
                                 const SimOptions& sim);

struct AlphaSearch {
    double alpha = 0.0;
    CapacityEstimate capacity;
    /// The coarse scan was not unimodal; alpha came from a fine grid scan.
    bool flagged = false;
    std::size_t evaluations = 0;
};

/// Maximizes evaluate() over alpha with common random numbers: a 21-point scan
/// of [0.02, 0.98], then golden-section search down to `tol` (>= 1e-3).
AlphaSearch numeric_alpha(const SchemeConfig& cfg, const SimOptions& sim, double tol = 1e-3);

struct PhiPoint {
    double phi = 0.0;
    CapacityEstimate capacity;
};
struct PhiSearch {
    double phi = 0.0;
    CapacityEstimate capacity;
    std::vector<PhiPoint> table;
};

/// Grid scan of phi in [0, 1] for a delayed-feedback configuration with
/// 0 < delay < data length; the phi field of cfg is ignored.
PhiSearch phi_grid_search(const SchemeConfig& cfg, const SimOptions& sim, double step = 0.01);

struct PilotLengthRow {
    std::size_t pilot_len = 0;
    double alpha = 0.0;
    CapacityEstimate capacity;
    double validity_ratio = 0.0;
    /// Water-filling left a trained direction dark; the row is excluded.
    bool reduced = false;
};
struct PilotLengthSearch {
    std::size_t pilot_len = 0;
    std::vector<PilotLengthRow> table;
};

/// Covariance-feedback training length: evaluates Lp = 1..Nt, each at its
/// closed-form alpha, and returns the best (ties go to the shorter length).
PilotLengthSearch optimal_pilot_length(const CovarianceSpec& cov, std::size_t nt, std::size_t nr,
                                       std::size_t block_len, double power, const SimOptions& sim);

struct EqualPowerSearch {
    std::size_t pilot_len = 0;
    double alpha = 0.0;
    CapacityEstimate capacity;
};

/// Equal pilot and data power per symbol (alpha = Ld / L): scans training
/// lengths from Nt up to L / 2 and keeps the best. The pilot_len and alpha of
/// cfg are ignored; the scheme must use orthogonal pilots.
EqualPowerSearch equal_power_training(const SchemeConfig& cfg, const SimOptions& sim);

}  // namespace psam
