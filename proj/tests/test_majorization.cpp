#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <isomech/isotonic.hpp>
#include <isomech/majorization.hpp>

#include "support.hpp"

using namespace isomech;
using namespace testsupport;

namespace {

// b obtained from a by averaging random pairs, so a majorizes b in the
// classical (sorted) sense.
std::vector<double> robin_hood(std::mt19937_64& rng, std::vector<double> a, int moves) {
    if (a.size() < 2) return a;
    for (int m = 0; m < moves; ++m) {
        std::size_t i = rng() % a.size();
        std::size_t j = rng() % a.size();
        if (i == j) continue;
        if (a[i] < a[j]) std::swap(i, j);
        const double d = uniform_in(rng, 0.0, 0.5) * (a[i] - a[j]);
        a[i] -= d;
        a[j] += d;
    }
    return a;
}

}  // namespace

TEST_CASE("weak and full majorization frozen cases") {
    REQUIRE(weakly_majorizes({3.0, 1.0}, {2.0, 2.0}));
    REQUIRE(majorizes({3.0, 1.0}, {2.0, 2.0}));
    REQUIRE_FALSE(weakly_majorizes({1.0, 1.0}, {2.0, 2.0}));
    REQUIRE(weakly_majorizes({3.0, 2.0}, {2.0, 2.0}));
    REQUIRE_FALSE(majorizes({3.0, 2.0}, {2.0, 2.0}));  // totals differ

    REQUIRE(majorizes_natural_order({5.0, 1.0, 0.0}, {3.0, 2.0, 1.0}));
    REQUIRE_FALSE(majorizes_natural_order({1.0, 3.0}, {2.0, 2.0}));
    // Sorted sense holds here even though the natural order fails.
    REQUIRE(majorizes({1.0, 3.0}, {2.0, 2.0}));

    REQUIRE_THROWS_AS(majorizes({1.0}, {1.0, 2.0}), DimensionError);
}

TEST_CASE("is_upward_transport frozen cases") {
    REQUIRE(is_upward_transport({3.0, 3.0, 0.0}, {3.0, 2.0, 1.0}));
    REQUIRE_FALSE(is_upward_transport({2.0, 2.0}, {3.0, 1.0}));
    REQUIRE(is_upward_transport({1.0, 2.0}, {1.0, 2.0}));
    REQUIRE(is_upward_transport({4.0}, {4.0}));
    // Mass not conserved on the touched pair.
    REQUIRE_FALSE(is_upward_transport({3.0, 1.0}, {2.0, 1.5}));
    // Three touched coordinates.
    REQUIRE_FALSE(is_upward_transport({3.0, 2.0, 1.0}, {2.0, 3.0, 1.5}));
}

TEST_CASE("transport_decompose frozen chain") {
    const TransportChain chain = transport_decompose({5.0, 1.0, 0.0}, {3.0, 2.0, 1.0});
    REQUIRE(chain.steps.size() == 3);
    REQUIRE(chain.steps[0] == GradeVector{5.0, 1.0, 0.0});
    REQUIRE(chain.steps[1] == GradeVector{3.0, 3.0, 0.0});
    REQUIRE(chain.steps[2] == GradeVector{3.0, 2.0, 1.0});
    REQUIRE(validate_transport_chain(chain));
}

TEST_CASE("transport_decompose reports the failing prefix") {
    try {
        transport_decompose({1.0, 3.0}, {2.0, 2.0});
        FAIL("expected OrderingError");
    } catch (const OrderingError& e) {
        REQUIRE(e.prefix == 1);
    }
    try {
        transport_decompose({3.0, 1.0}, {3.0, 2.0});
        FAIL("expected OrderingError");
    } catch (const OrderingError& e) {
        REQUIRE(e.prefix == 2);  // totals differ
    }
}

TEST_CASE("decomposed chains validate, stay short, and hit both endpoints") {
    auto rng = seeded_rng(2101);
    for (int it = 0; it < 400; ++it) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng() % 12);
        const GradeVector b = random_vector(rng, n, -5.0, 5.0);
        const GradeVector a = random_upward_transports(rng, b, rng() % 8);
        REQUIRE(majorizes_natural_order(a, b, kMajorizationTol));

        const TransportChain chain = transport_decompose(a, b);
        REQUIRE(chain.steps.size() <= std::max<std::size_t>(n, 1));
        REQUIRE(chain.steps.front() == a);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE_THAT(chain.steps.back()[i], Catch::Matchers::WithinAbs(b[i], 1e-9));
        }
        REQUIRE(validate_transport_chain(chain));
    }
}

TEST_CASE("natural-order majorization is transitive along chains") {
    auto rng = seeded_rng(2202);
    for (int it = 0; it < 200; ++it) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 8);
        const GradeVector c = random_vector(rng, n, -5.0, 5.0);
        const GradeVector b = random_upward_transports(rng, c, 3);
        const GradeVector a = random_upward_transports(rng, b, 3);
        REQUIRE(majorizes_natural_order(a, c, kMajorizationTol));
    }
}

TEST_CASE("convex order: image sums respect majorization") {
    auto rng = seeded_rng(2303);
    // Nondecreasing convex maps follow weak majorization; merely convex maps
    // (x^2, |x|) need equal totals.
    const auto monotone_convex = std::vector<double (*)(double)>{
        [](double x) { return x; },
        [](double x) { return x > 0.0 ? x * x : 0.0; },
        [](double x) { return std::exp(std::min(x, 700.0)); },
    };
    const auto convex_only = std::vector<double (*)(double)>{
        [](double x) { return x * x; },
        [](double x) { return std::abs(x); },
    };
    const auto image_sum = [](const GradeVector& v, double (*h)(double)) {
        double s = 0.0;
        for (double x : v) s += h(x);
        return s;
    };
    for (int it = 0; it < 300; ++it) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng() % 8);
        const GradeVector a = random_vector(rng, n, -3.0, 3.0);
        GradeVector b = robin_hood(rng, a, 1 + static_cast<int>(rng() % 5));
        const bool lowered = (it % 2 == 0);
        if (lowered) {
            // Lowering entries keeps weak majorization and breaks equal totals.
            for (double& x : b) x -= uniform_in(rng, 0.0, 0.5);
        }
        REQUIRE(weakly_majorizes(a, b, kMajorizationTol));
        for (auto h : monotone_convex) {
            const double sa = image_sum(a, h);
            REQUIRE(sa >= image_sum(b, h) - 1e-9 * std::max(1.0, std::abs(sa)));
        }
        if (!lowered) {
            REQUIRE(majorizes(a, b, kMajorizationTol));
            for (auto h : convex_only) {
                const double sa = image_sum(a, h);
                REQUIRE(sa >= image_sum(b, h) - 1e-9 * std::max(1.0, std::abs(sa)));
            }
        }
    }
}

TEST_CASE("isotonic fitting preserves natural-order majorization") {
    auto rng = seeded_rng(2404);
    for (int it = 0; it < 1000; ++it) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 19);
        const GradeVector b = random_vector(rng, n, -5.0, 5.0);
        const GradeVector a = random_upward_transports(rng, b, 1 + rng() % 10);
        REQUIRE(majorizes_natural_order(pava_descending(a), pava_descending(b), 1e-9));
    }
}

TEST_CASE("fitted vectors also majorize in the classical sense") {
    // After fitting, both sides are sorted, so the natural order result
    // upgrades to sorted majorization with equal totals.
    auto rng = seeded_rng(2505);
    for (int it = 0; it < 200; ++it) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng() % 10);
        const GradeVector b = random_vector(rng, n, -5.0, 5.0);
        const GradeVector a = random_upward_transports(rng, b, 1 + rng() % 6);
        REQUIRE(majorizes(pava_descending(a), pava_descending(b), 1e-9));
    }
}
