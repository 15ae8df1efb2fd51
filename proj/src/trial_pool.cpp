#include "psam/trial_pool.hpp"

#include <cmath>
#include <exception>

#include <omp.h>

#include "psam/error.hpp"
#include "psam/linalg.hpp"
#include "psam/random.hpp"

namespace psam {

std::vector<double> map_trials(std::size_t n, int workers, const std::function<double(std::size_t)>& fn) {
    std::vector<double> out(n);
    if (workers == 1) {
        for (std::size_t t = 0; t < n; ++t) out[t] = fn(t);
        return out;
    }
    const long long count = static_cast<long long>(n);
    std::exception_ptr first;
#pragma omp parallel for schedule(static) num_threads(workers > 0 ? workers : omp_get_max_threads())
    for (long long t = 0; t < count; ++t) {
        try {
            out[static_cast<std::size_t>(t)] = fn(static_cast<std::size_t>(t));
        } catch (...) {
#pragma omp critical(psam_map_trials)
            if (!first) first = std::current_exception();
        }
    }
    if (first) std::rethrow_exception(first);
    return out;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 16) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SampleStats sample_stats(std::span<const double> values) {
    SampleStats s;
    const std::size_t n = values.size();
    if (n == 0) return s;
    s.mean = pairwise_sum(values) / static_cast<double>(n);
    if (n < 2) return s;
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = (values[i] - s.mean) * (values[i] - s.mean);
    const double var = pairwise_sum(dev) / static_cast<double>(n - 1);
    s.std_error = std::sqrt(var / static_cast<double>(n));
    return s;
}

TrialPool TrialPool::build(std::size_t nt, std::size_t nr, const SimOptions& sim, bool with_eigenvalues) {
    require(nt >= 1 && nt <= 16 && nr >= 1, ErrorKind::Domain, "TrialPool: antenna counts out of range");
    require(sim.trials >= 1, ErrorKind::Domain, "TrialPool: need at least one trial");
    TrialPool pool;
    pool.nt_ = nt;
    pool.nr_ = nr;
    pool.trials_ = sim.trials;
    pool.gram_.resize(sim.trials * nt * nt);
    if (with_eigenvalues) pool.eig_.resize(sim.trials * nt);

    map_trials(sim.trials, sim.workers, [&](std::size_t t) {
        RandomStream stream = RandomStream::substream(sim.seed, t);
        const ComplexMatrix h = sample_zmcscg(nr, nt, stream);
        cplx* w = pool.gram_.data() + t * nt * nt;
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = i; j < nt; ++j) {
                cplx s = 0.0;
                for (std::size_t r = 0; r < nr; ++r) s += std::conj(h(r, i)) * h(r, j);
                if (i == j) s = s.real();
                w[i * nt + j] = s;
                w[j * nt + i] = std::conj(s);
            }
        if (with_eigenvalues)
            hermitian_eigenvalues({w, nt * nt}, nt, {pool.eig_.data() + t * nt, nt});
        return 0.0;
    });
    return pool;
}

}  // namespace psam
