#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace isomech {

/// Review scores, one per item, in the owner's original item order.
using GradeVector = std::vector<double>;

/// A full ranking. order()[k] is the item placed at sorted position k, so
/// position 0 names the claimed best item. Positions and items are 0-based
/// internally; the CLI and file formats use 1-based indices.
class Ranking {
public:
    Ranking() = default;

    explicit Ranking(std::vector<std::size_t> order) : order_(std::move(order)) {
        std::vector<bool> seen(order_.size(), false);
        for (std::size_t item : order_) {
            if (item >= order_.size() || seen[item]) {
                throw StructureError("Ranking: order is not a permutation");
            }
            seen[item] = true;
        }
    }

    static Ranking identity(std::size_t n) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        return Ranking(std::move(order));
    }

    static Ranking from_one_based(const std::vector<std::size_t>& order) {
        std::vector<std::size_t> shifted(order.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (order[k] == 0) throw StructureError("Ranking: indices are 1-based");
            shifted[k] = order[k] - 1;
        }
        return Ranking(std::move(shifted));
    }

    std::size_t size() const { return order_.size(); }

    /// Item occupying sorted position pos.
    std::size_t operator[](std::size_t pos) const { return order_[pos]; }

    const std::vector<std::size_t>& order() const { return order_; }

    std::vector<std::size_t> to_one_based() const {
        std::vector<std::size_t> out(order_.size());
        for (std::size_t k = 0; k < order_.size(); ++k) out[k] = order_[k] + 1;
        return out;
    }

    Ranking inverse() const {
        std::vector<std::size_t> inv(order_.size());
        for (std::size_t k = 0; k < order_.size(); ++k) inv[order_[k]] = k;
        return Ranking(std::move(inv));
    }

    bool operator==(const Ranking&) const = default;

private:
    std::vector<std::size_t> order_;
};

/// (a[pi[0]], a[pi[1]], ...): the vector rearranged into ranked order.
inline GradeVector apply_permutation(const GradeVector& a, const Ranking& pi) {
    if (a.size() != pi.size()) throw DimensionError("apply_permutation: length mismatch");
    GradeVector out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[pi[k]];
    return out;
}

/// Ranking that sorts v into nonincreasing order. Ties keep ascending item
/// index, so the result is unique.
inline Ranking sort_descending_ranking(const GradeVector& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return v[i] > v[j]; });
    return Ranking(std::move(order));
}

/// True when R is nonincreasing along pi, i.e. pi is a true ranking of R.
inline bool ranking_consistent_with(const Ranking& pi, const GradeVector& R) {
    if (pi.size() != R.size()) throw DimensionError("ranking_consistent_with: length mismatch");
    for (std::size_t k = 0; k + 1 < pi.size(); ++k) {
        if (R[pi[k]] < R[pi[k + 1]]) return false;
    }
    return true;
}

}  // namespace isomech
