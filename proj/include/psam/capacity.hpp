#pragma once

#include <cstddef>
#include <span>

#include "psam/matrix.hpp"
#include "psam/random.hpp"
#include "psam/scheme.hpp"
#include "psam/trial_pool.hpp"

namespace psam {

/// Bits per channel use, averaged over the block (pilot symbols carry no data).
struct CapacityEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
};

/// Post-estimation SNR of an i.i.d. channel trained with orthogonal pilots:
/// value = estimate_var * Pd / (1 + error_var * Pd).
struct EffectiveSnr {
    double value = 0.0;
    double estimate_var = 0.0;
    double error_var = 0.0;
};
EffectiveSnr effective_snr(const SchemeConfig& cfg);

/// Lower bound for one channel realization:
/// log2 det(I + (1 + tr(R~ Q))^{-1} H^^H H^ Q). Hhat is Nr x Nt; Q and R~ are
/// Nt x Nt Hermitian.
double instant_clb(const ComplexMatrix& hhat, const ComplexMatrix& q, const ComplexMatrix& r_tilde);

/// Block-averaged lower bound (Ld / L) E{C_LB} for the configured scheme.
CapacityEstimate evaluate(const SchemeConfig& cfg, const SimOptions& sim);
/// Same, on a prebuilt pool. The pool must match (nt, nr) and carry
/// eigenvalues for the feedback schemes.
CapacityEstimate evaluate(const SchemeConfig& cfg, const TrialPool& pool, int workers = 0);

/// True when evaluate() needs pool eigenvalues for this scheme.
bool needs_eigenvalues(const Scheme& scheme);

struct GapEstimate {
    CapacityEstimate clb;
    CapacityEstimate cub;
    double gap_ratio = 0.0;  ///< (cub - clb) / clb
};
/// Lower bound plus the Gaussian-input upper bound. Requires trials >= 100.
GapEstimate gap_estimate(const SchemeConfig& cfg, const SimOptions& sim);

/// E{beta sum log2(1 + lambda_i phi Pd / (beta Nt)) + (1 - beta) sum log2(1 + lambda_i q_i)}
/// over Wishart eigenvalues with perfect channel knowledge, q water-filled to
/// (1 - phi) Pd / (1 - beta). beta must lie strictly inside (0, 1).
CapacityEstimate perfect_csi_delayed_clb(std::size_t nt, std::size_t nr, double beta, double phi, double data_power,
                                         const SimOptions& sim);

/// E{log2(1 + sum kappa_i E_i)}, E_i i.i.d. unit exponentials, by quadrature.
double expected_log2_one_plus_weighted_exp(std::span<const double> kappa);

/// nr * E{log2((1 + sum kappa_i) / (1 + sum kappa_i E_i))}: the upper/lower
/// bound gap for one channel draw when R~ Q = diag(kappa). Never negative.
double input_gap(std::span<const double> kappa, std::size_t nr);

/// input_gap() by direct sampling with `draws` exponential vectors.
double input_gap_sampled(std::span<const double> kappa, std::size_t nr, std::size_t draws, RandomStream& stream);

}  // namespace psam
