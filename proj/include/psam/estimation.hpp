#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "psam/covariance.hpp"
#include "psam/matrix.hpp"
#include "psam/random.hpp"

namespace psam {

/// Pilot design described by its Gram matrix X_p X_p^H = U diag(p) U^H.
///
/// Only the Gram enters the estimation statistics and the capacity bounds; the
/// right unitary factor of X_p is a free choice (see explicit_matrix()).
struct PilotDesign {
    ComplexMatrix basis;          ///< U, columns are the trained directions
    std::vector<double> powers;   ///< p, pilot energy per direction, descending
    std::size_t length = 0;       ///< Lp, training symbols per block
    double power = 0.0;           ///< Pp, power per pilot transmission
    /// Water level mu of a covariance-shaped design; NaN for isotropic designs.
    double level = std::numeric_limits<double>::quiet_NaN();
    /// Directions that actually receive energy.
    std::size_t effective_length = 0;
    /// Set when water-filling left some of the Lp strongest directions dark,
    /// i.e. the design is really an effective_length-symbol design.
    bool reduced = false;

    bool isotropic() const;
    ComplexMatrix gram() const;
    /// An Nt x Lp pilot matrix with this Gram. Covariance-shaped designs use
    /// U[:, :Lp] diag(sqrt(p)); isotropic designs use scaled DFT rows.
    ComplexMatrix explicit_matrix() const;
};

/// Orthogonal equal-power pilots: Gram = (Pp Lp / Nt) I. Requires Lp >= Nt.
PilotDesign iid_orthogonal_pilots(std::size_t nt, double pilot_power, std::size_t length);

/// Trains the Lp strongest eigen-directions of `cov`, with energy Pp*Lp
/// water-filled over 1/g_i. Never throws for a dark direction; flags it instead.
PilotDesign ccf_pilots(const CovarianceSpec& cov, double pilot_power, std::size_t length);

/// LMMSE error / estimate covariances for a pilot design.
struct EstimationModel {
    ComplexMatrix error_cov;           ///< R~ = (R^{-1} + X X^H)^{-1}
    ComplexMatrix estimate_cov;        ///< R^ = R - R~
    std::vector<double> error_eig;     ///< eigenvalues of R~ along the pilot basis
    std::vector<double> estimate_eig;  ///< eigenvalues of R^ along the pilot basis
};

/// Requires the pilot basis to diagonalize `cov` (automatic for isotropic
/// pilots); otherwise throws ErrorKind::Config.
EstimationModel estimation_stats(const CovarianceSpec& cov, const PilotDesign& pilot);

/// H^ = Y (Xp^H R Xp + I)^{-1} Xp^H R for Y = H Xp + N. Validation path only;
/// the capacity evaluator samples the equivalent statistics directly.
ComplexMatrix lmmse_estimate(const ComplexMatrix& y, const ComplexMatrix& xp, const CovarianceSpec& cov);

/// max over `correlations` of tr((R^{-1} + Gram)^{-1}).
double worst_case_mse(const ComplexMatrix& pilot_gram, std::span<const CovarianceSpec> correlations);

/// Correlation set used for minimax checks: identity, the exponential family
/// at rho = 0.1..0.9, and `random_count` random PD matrices scaled to trace n.
std::vector<CovarianceSpec> sample_correlation_set(std::size_t n, std::size_t random_count, RandomStream& stream);

}  // namespace psam
