#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "grades.hpp"
#include "isotonic.hpp"
#include "numeric.hpp"

namespace isomech {

/// The adjusted grades released to the owner who reported the full ranking pi.
inline GradeVector isotonic_mechanism(const GradeVector& y, const Ranking& pi) {
    return project_with_ranking(y, pi);
}

/// Ordered blocks of item indices: every item in a block is claimed at least
/// as good as every item in later blocks. Blocks are stored with ascending
/// indices and must partition {0..n-1}.
class CoarseRanking {
public:
    explicit CoarseRanking(std::vector<std::vector<std::size_t>> blocks)
        : blocks_(std::move(blocks)) {
        std::size_t n = 0;
        for (const auto& block : blocks_) {
            if (block.empty()) throw StructureError("CoarseRanking: empty block");
            n += block.size();
        }
        std::vector<bool> seen(n, false);
        for (auto& block : blocks_) {
            std::sort(block.begin(), block.end());
            for (std::size_t item : block) {
                if (item >= n || seen[item]) {
                    throw StructureError("CoarseRanking: blocks do not partition the items");
                }
                seen[item] = true;
            }
        }
    }

    static CoarseRanking from_one_based(std::vector<std::vector<std::size_t>> blocks) {
        for (auto& block : blocks) {
            for (std::size_t& item : block) {
                if (item == 0) throw StructureError("CoarseRanking: indices are 1-based");
                item -= 1;
            }
        }
        return CoarseRanking(std::move(blocks));
    }

    const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }

    std::size_t total_items() const {
        std::size_t n = 0;
        for (const auto& block : blocks_) n += block.size();
        return n;
    }

    std::vector<std::size_t> sizes() const {
        std::vector<std::size_t> s;
        s.reserve(blocks_.size());
        for (const auto& block : blocks_) s.push_back(block.size());
        return s;
    }

    bool operator==(const CoarseRanking&) const = default;

private:
    std::vector<std::vector<std::size_t>> blocks_;
};

/// True when R fits the coarse claim: each block's worst true grade is at
/// least the next block's best.
inline bool coarse_consistent_with(const CoarseRanking& coarse, const GradeVector& R) {
    if (coarse.total_items() != R.size()) {
        throw DimensionError("coarse_consistent_with: length mismatch");
    }
    double prev_min = std::numeric_limits<double>::infinity();
    for (const auto& block : coarse.blocks()) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t item : block) {
            lo = std::min(lo, R[item]);
            hi = std::max(hi, R[item]);
        }
        if (hi > prev_min) return false;
        prev_min = lo;
    }
    return true;
}

/// The full ranking induced by a coarse one: inside each block, items are
/// ordered by observed grade, best first, ties broken by ascending item
/// index. Projecting onto this ranking's cone solves the coarse problem.
inline Ranking build_coarse_permutation(const GradeVector& y, const CoarseRanking& coarse) {
    if (coarse.total_items() != y.size()) {
        throw DimensionError("build_coarse_permutation: length mismatch");
    }
    std::vector<std::size_t> order;
    order.reserve(y.size());
    for (const auto& block : coarse.blocks()) {
        std::vector<std::size_t> sorted = block;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [&](std::size_t i, std::size_t j) { return y[i] > y[j]; });
        order.insert(order.end(), sorted.begin(), sorted.end());
    }
    return Ranking(std::move(order));
}

/// Adjusted grades for an owner who reported only a coarse ranking.
inline GradeVector coarse_isotonic_mechanism(const GradeVector& y, const CoarseRanking& coarse) {
    return isotonic_mechanism(y, build_coarse_permutation(y, coarse));
}

/// Adjusted grades for an owner who ranked several disjoint subsets
/// independently. Each entry of ordered_subsets lists one subset's items from
/// claimed best to claimed worst; together the subsets partition {0..n-1}.
/// Grades outside any ordering constraint pass through unchanged.
inline GradeVector local_ranking_mechanism(
    const GradeVector& y, const std::vector<std::vector<std::size_t>>& ordered_subsets) {
    std::size_t covered = 0;
    for (const auto& subset : ordered_subsets) {
        if (subset.empty()) throw StructureError("local_ranking_mechanism: empty subset");
        covered += subset.size();
    }
    if (covered != y.size()) {
        throw StructureError("local_ranking_mechanism: subsets do not partition the items");
    }
    std::vector<bool> seen(y.size(), false);
    for (const auto& subset : ordered_subsets) {
        for (std::size_t item : subset) {
            if (item >= y.size() || seen[item]) {
                throw StructureError("local_ranking_mechanism: subsets do not partition the items");
            }
            seen[item] = true;
        }
    }
    GradeVector out = y;
    GradeVector slice;
    for (const auto& subset : ordered_subsets) {
        slice.clear();
        for (std::size_t item : subset) slice.push_back(y[item]);
        const GradeVector fit = pava_descending(slice);
        for (std::size_t k = 0; k < subset.size(); ++k) out[subset[k]] = fit[k];
    }
    return out;
}

/// Flips the sign so the first nonzero entry is positive. Both signs name the
/// same line, so reports use this form.
inline GradeVector canonicalize_line_direction(GradeVector u) {
    for (double x : u) {
        if (x != 0.0) {
            if (x < 0.0) {
                for (double& v : u) v = -v;
            }
            break;
        }
    }
    return u;
}

/// Adjusted grades for an owner who claimed R lies on the line spanned by the
/// unit vector u: the orthogonal projection (u . y) u. Changing the sign of u
/// names the same line and gives the same projection.
inline GradeVector line_mechanism(const GradeVector& y, const GradeVector& u) {
    if (y.size() != u.size()) throw DimensionError("line_mechanism: length mismatch");
    require_finite(y, "line_mechanism");
    require_finite(u, "line_mechanism");
    const double norm = std::sqrt(squared_norm(u));
    if (std::abs(norm - 1.0) > 1e-9) {
        throw ParameterError("line_mechanism: direction must have unit norm");
    }
    const double scale = dot(u, y);
    GradeVector out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = scale * u[i];
    return out;
}

}  // namespace isomech
