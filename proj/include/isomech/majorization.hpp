#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "errors.hpp"
#include "grades.hpp"
#include "numeric.hpp"

namespace isomech {

/// Absolute tolerance shared by every majorization comparison in this module:
/// prefix-sum inequalities, total-sum equality, and transported mass.
inline constexpr double kMajorizationTol = 1e-9;

namespace detail {

inline std::vector<double> sorted_descending(std::vector<double> v) {
    std::sort(v.rbegin(), v.rend());
    return v;
}

}  // namespace detail

/// True when, for every k, the k largest entries of a sum to at least the k
/// largest entries of b, allowing the caller's slack on each comparison.
inline bool weakly_majorizes(const GradeVector& a, const GradeVector& b, double slack = 0.0) {
    if (a.size() != b.size()) throw DimensionError("weakly_majorizes: length mismatch");
    require_finite(a, "weakly_majorizes");
    require_finite(b, "weakly_majorizes");
    const std::vector<double> sa = detail::sorted_descending(a);
    const std::vector<double> sb = detail::sorted_descending(b);
    double pa = 0.0, pb = 0.0;
    for (std::size_t k = 0; k < sa.size(); ++k) {
        pa += sa[k];
        pb += sb[k];
        if (pa < pb - slack) return false;
    }
    return true;
}

/// Weak majorization plus equal totals (within the module tolerance).
inline bool majorizes(const GradeVector& a, const GradeVector& b, double slack = 0.0) {
    if (!weakly_majorizes(a, b, slack)) return false;
    return std::abs(pairwise_sum(a) - pairwise_sum(b)) <= kMajorizationTol;
}

/// Majorization in the given coordinate order: every proper prefix of a sums
/// to at least the matching prefix of b (within slack), and the totals agree
/// within the module tolerance.
inline bool majorizes_natural_order(const GradeVector& a, const GradeVector& b,
                                    double slack = 0.0) {
    if (a.size() != b.size()) throw DimensionError("majorizes_natural_order: length mismatch");
    require_finite(a, "majorizes_natural_order");
    require_finite(b, "majorizes_natural_order");
    double pa = 0.0, pb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        pa += a[k];
        pb += b[k];
        if (k + 1 < a.size()) {
            if (pa < pb - slack) return false;
        } else if (std::abs(pa - pb) > kMajorizationTol) {
            return false;
        }
    }
    return true;
}

/// True when b arises from a by moving one parcel of mass to a later
/// coordinate: a and b agree except on a pair i < j whose combined mass is
/// conserved and where a holds at least as much as b at the earlier index.
/// Both the mass balance and the direction check share the module tolerance;
/// a == b counts as an empty transport.
inline bool is_upward_transport(const GradeVector& a, const GradeVector& b) {
    if (a.size() != b.size()) throw DimensionError("is_upward_transport: length mismatch");
    require_finite(a, "is_upward_transport");
    require_finite(b, "is_upward_transport");
    std::vector<std::size_t> diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) diff.push_back(i);
    }
    if (diff.empty()) return true;
    if (diff.size() > 2) return false;
    if (diff.size() == 2) {
        const std::size_t i = diff[0], j = diff[1];
        return std::abs((a[i] + a[j]) - (b[i] + b[j])) <= kMajorizationTol &&
               a[i] >= b[i] - kMajorizationTol;
    }
    // A single touched coordinate: its partner contributes no mass, so the
    // touched entry itself must be conserved within tolerance.
    if (a.size() < 2) return false;
    return std::abs(a[diff[0]] - b[diff[0]]) <= kMajorizationTol;
}

/// A witness for natural-order majorization: consecutive elements are single
/// upward transports leading from steps.front() to steps.back().
struct TransportChain {
    std::vector<GradeVector> steps;
};

inline bool validate_transport_chain(const TransportChain& chain) {
    if (chain.steps.empty()) return false;
    const double total = pairwise_sum(chain.steps.front());
    for (std::size_t l = 0; l + 1 < chain.steps.size(); ++l) {
        if (!is_upward_transport(chain.steps[l], chain.steps[l + 1])) return false;
    }
    for (const GradeVector& z : chain.steps) {
        if (std::abs(pairwise_sum(z) - total) > kMajorizationTol) return false;
    }
    return true;
}

/// Decomposes a pair a majorizing b in natural order into a chain of at most
/// n - 1 single transports: coordinates are settled left to right, each step
/// pushing the surplus at one position onto the next. Steps that would move
/// nothing are skipped, so the chain has at most n elements.
inline TransportChain transport_decompose(const GradeVector& a, const GradeVector& b) {
    if (a.size() != b.size()) throw DimensionError("transport_decompose: length mismatch");
    require_finite(a, "transport_decompose");
    require_finite(b, "transport_decompose");
    const std::size_t n = a.size();
    double pa = 0.0, pb = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        pa += a[k];
        pb += b[k];
        const bool bad = (k + 1 < n) ? (pa < pb - kMajorizationTol)
                                     : (std::abs(pa - pb) > kMajorizationTol);
        if (bad) {
            throw OrderingError("transport_decompose: source does not majorize target", k + 1);
        }
    }

    TransportChain chain;
    chain.steps.push_back(a);
    GradeVector cur = a;
    for (std::size_t p = 0; p + 1 < n; ++p) {
        if (cur[p] == b[p]) continue;
        cur[p + 1] = cur[p] + cur[p + 1] - b[p];
        cur[p] = b[p];
        chain.steps.push_back(cur);
    }
    // Rounding can leave dust on the last coordinate; land exactly on b.
    if (chain.steps.back() != b && chain.steps.size() >= 2) chain.steps.back() = b;
    return chain;
}

/// Random vector that majorizes b in natural order, produced by `steps`
/// upward moves of random mass between random coordinate pairs.
inline GradeVector random_upward_transports(std::mt19937_64& rng, const GradeVector& b,
                                            std::size_t steps) {
    GradeVector a = b;
    if (a.size() < 2) return a;
    for (std::size_t s = 0; s < steps; ++s) {
        std::size_t i = rng() % a.size();
        std::size_t j = rng() % a.size();
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        const double mass =
            std::uniform_real_distribution<double>(0.0, 2.0)(rng);
        a[i] += mass;
        a[j] -= mass;
    }
    return a;
}

}  // namespace isomech
