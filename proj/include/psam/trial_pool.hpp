#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "psam/matrix.hpp"
#include "psam/scheme.hpp"

namespace psam {

/// Runs fn(t) for t in [0, n) and returns the values in trial order.
/// workers == 1 is the plain serial loop; anything else uses OpenMP with a
/// static schedule (0 = default team size). fn must only touch trial-local state.
std::vector<double> map_trials(std::size_t n, int workers, const std::function<double(std::size_t)>& fn);

/// Pairwise (cascade) summation; the result depends only on the values and
/// their order.
double pairwise_sum(std::span<const double> values);

struct SampleStats {
    double mean = 0.0;
    double std_error = 0.0;
};
/// Mean and standard error (sample std / sqrt(n)).
SampleStats sample_stats(std::span<const double> values);

/// Normalized channel draws shared across many evaluations (common random
/// numbers). Trial t holds W_t = H0^H H0 for H0 (nr x nt) drawn from
/// substream(seed, t), and optionally the eigenvalues of W_t, descending.
class TrialPool {
public:
    static TrialPool build(std::size_t nt, std::size_t nr, const SimOptions& sim, bool with_eigenvalues);

    std::size_t nt() const noexcept { return nt_; }
    std::size_t nr() const noexcept { return nr_; }
    std::size_t size() const noexcept { return trials_; }
    bool has_eigenvalues() const noexcept { return !eig_.empty(); }

    std::span<const cplx> gram(std::size_t t) const { return {gram_.data() + t * nt_ * nt_, nt_ * nt_}; }
    std::span<const double> eigenvalues(std::size_t t) const { return {eig_.data() + t * nt_, nt_}; }

private:
    std::size_t nt_ = 0;
    std::size_t nr_ = 0;
    std::size_t trials_ = 0;
    std::vector<cplx> gram_;
    std::vector<double> eig_;
};

}  // namespace psam
