#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace psam {

struct WaterfillResult {
    std::vector<double> alloc;
    double level = 0.0;
    std::size_t active = 0;
};

/// Maximizes sum log(1 + gain_i * q_i) subject to sum q = budget, q >= 0.
///
/// Closed form: m is the largest count with (budget + sum_{i<=m} 1/gain_i)/m
/// strictly above 1/gain_m; the level is that ratio. Gains must be positive and
/// sorted descending. A zero budget yields an all-zero allocation with level
/// 1/gains[0], which keeps the level continuous as the budget shrinks to 0.
WaterfillResult waterfill(std::span<const double> gains, double budget);

/// Allocation-free core used inside Monte-Carlo loops: writes the allocation
/// to `alloc` (same length as `gains`), returns the level and sets `active`.
double waterfill_into(std::span<const double> gains, double budget, std::span<double> alloc, std::size_t& active);

}  // namespace psam
