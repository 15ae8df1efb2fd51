#include "psam/waterfill.hpp"

#include <cmath>

#include "psam/error.hpp"

namespace psam {

double waterfill_into(std::span<const double> gains, double budget, std::span<double> alloc, std::size_t& active) {
    const std::size_t n = gains.size();
    require(n > 0 && alloc.size() == n, ErrorKind::Domain, "waterfill: empty gains or output size mismatch");
    require(std::isfinite(budget) && budget >= 0.0, ErrorKind::Domain, "waterfill: budget must be finite and >= 0");
    for (std::size_t i = 0; i < n; ++i) {
        require(std::isfinite(gains[i]) && gains[i] > 0.0, ErrorKind::Domain, "waterfill: gains must be positive");
        require(i == 0 || gains[i] <= gains[i - 1], ErrorKind::Domain, "waterfill: gains must be sorted descending");
    }

    if (budget == 0.0) {
        for (auto& q : alloc) q = 0.0;
        active = 0;
        return 1.0 / gains[0];
    }

    // Prefix sums of 1/g; scan m downwards for the largest feasible count.
    double inv_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) inv_sum += 1.0 / gains[i];

    std::size_t m = n;
    double level = (budget + inv_sum) / static_cast<double>(m);
    while (m > 1 && !(level > 1.0 / gains[m - 1])) {
        inv_sum -= 1.0 / gains[m - 1];
        --m;
        level = (budget + inv_sum) / static_cast<double>(m);
    }

    for (std::size_t i = 0; i < n; ++i) alloc[i] = i < m ? level - 1.0 / gains[i] : 0.0;
    active = m;
    return level;
}

WaterfillResult waterfill(std::span<const double> gains, double budget) {
    WaterfillResult out;
    out.alloc.resize(gains.size());
    out.level = waterfill_into(gains, budget, out.alloc, out.active);
    return out;
}

}  // namespace psam
