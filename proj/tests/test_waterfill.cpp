#include <cmath>

#include "certificates.hpp"
#include "doctest.h"
#include "psam/error.hpp"
#include "psam/waterfill.hpp"

using namespace psam;

namespace {

double objective(std::span<const double> g, std::span<const double> q) {
    double v = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) v += std::log(1.0 + g[i] * q[i]);
    return v;
}

}  // namespace

TEST_SUITE("waterfill") {

TEST_CASE("hand-worked instances") {
    const auto a = waterfill(std::vector<double>{1, 1}, 2);
    CHECK(a.alloc == std::vector<double>{1, 1});
    CHECK(a.level == doctest::Approx(2));
    CHECK(a.active == 2);

    const auto b = waterfill(std::vector<double>{1, 0.1}, 1);
    CHECK(b.alloc[0] == doctest::Approx(1));
    CHECK(b.alloc[1] == 0.0);
    CHECK(b.level == doctest::Approx(2));
    CHECK(b.active == 1);

    const auto c = waterfill(std::vector<double>{2, 1}, 3);
    CHECK(c.level == doctest::Approx(2.25));
    CHECK(c.alloc[0] == doctest::Approx(1.75));
    CHECK(c.alloc[1] == doctest::Approx(1.25));
    CHECK(c.active == 2);
}

TEST_CASE("zero budget") {
    const auto r = waterfill(std::vector<double>{4, 2, 1}, 0);
    CHECK(r.alloc == std::vector<double>{0, 0, 0});
    CHECK(r.active == 0);
    CHECK(r.level == 0.25);
    // The level approaches the zero-budget convention continuously.
    CHECK(waterfill(std::vector<double>{4, 2, 1}, 1e-12).level == doctest::Approx(0.25));
}

TEST_CASE("invalid gains and budgets") {
    auto kind = [](std::vector<double> g, double b) {
        try {
            waterfill(g, b);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Contract;
    };
    CHECK(kind({1, 2}, 1) == ErrorKind::Domain);
    CHECK(kind({1, 0}, 1) == ErrorKind::Domain);
    CHECK(kind({1, -1}, 1) == ErrorKind::Domain);
    CHECK(kind({1}, -1) == ErrorKind::Domain);
    CHECK(kind({}, 1) == ErrorKind::Domain);
}

TEST_CASE("KKT certificates on random instances") {
    RandomStream s(2718);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + static_cast<std::size_t>(s.next_uniform() * 8);
        const auto g = certificates::random_gains(n, s);
        const double budget = rep % 50 == 0 ? 0.0 : std::pow(10.0, 4.0 * s.next_uniform() - 2.0);
        std::string why;
        const bool ok = certificates::waterfill_kkt(g, budget, waterfill(g, budget), &why);
        CHECK_MESSAGE(ok, why);
    }
}

TEST_CASE("no random feasible allocation beats the water-filling optimum") {
    RandomStream s(31);
    for (int rep = 0; rep < 12; ++rep) {
        const std::size_t n = 2 + static_cast<std::size_t>(rep % 3);
        const auto g = certificates::random_gains(n, s);
        const double budget = 0.5 + 5.0 * s.next_uniform();
        const auto r = waterfill(g, budget);
        const double best = objective(g, r.alloc);
        double sampled = -1.0;
        for (int k = 0; k < 100000; ++k) sampled = std::max(sampled, objective(g, certificates::random_simplex(n, budget, s)));
        CHECK(best >= sampled - 1e-9);
    }
}

TEST_CASE("active count never drops as the budget grows") {
    RandomStream s(8);
    for (int rep = 0; rep < 50; ++rep) {
        const auto g = certificates::random_gains(6, s);
        std::size_t last = 0;
        for (double b = 0.0; b < 200.0; b = b * 1.3 + 0.01) {
            const auto r = waterfill(g, b);
            CHECK(r.active >= last);
            last = r.active;
        }
    }
}

}  // TEST_SUITE
