#pragma once

// Shared helpers for the test suites: deterministic generators and slow
// reference implementations that the fast library code is checked against.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <isomech/grades.hpp>
#include <isomech/numeric.hpp>

namespace testsupport {

inline std::mt19937_64 seeded_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo,
                                         double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform_in(rng, lo, hi);
    return v;
}

inline std::vector<double> random_integer_vector(std::mt19937_64& rng, std::size_t n, int lo,
                                                 int hi) {
    std::vector<double> v(n);
    std::uniform_int_distribution<int> dist(lo, hi);
    for (double& x : v) x = static_cast<double>(dist(rng));
    return v;
}

inline isomech::Ranking random_ranking(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    return isomech::Ranking(std::move(order));
}

/// Reference nonincreasing least squares fit by exhausting every split of the
/// index range into consecutive blocks (2^(n-1) candidates, so n <= 12 only).
/// Each candidate is the blockwise-mean fit; infeasible candidates (means
/// increasing somewhere) are discarded and the closest survivor wins.
inline std::vector<double> brute_force_isotonic_descending(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n == 0) return {};
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];

    double best_dist = std::numeric_limits<double>::infinity();
    std::vector<double> best;
    std::vector<double> fit;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
        fit.clear();
        bool feasible = true;
        double prev = std::numeric_limits<double>::infinity();
        std::size_t start = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const bool cut = (k + 1 == n) || ((mask >> k) & 1);
            if (!cut) continue;
            const double mean = (prefix[k + 1] - prefix[start]) / static_cast<double>(k + 1 - start);
            if (mean > prev) {
                feasible = false;
                break;
            }
            fit.insert(fit.end(), k + 1 - start, mean);
            prev = mean;
            start = k + 1;
        }
        if (!feasible) continue;
        const double d = isomech::squared_distance(fit, v);
        if (d < best_dist) {
            best_dist = d;
            best = fit;
        }
    }
    return best;
}

}  // namespace testsupport
