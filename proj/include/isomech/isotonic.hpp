#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "errors.hpp"
#include "grades.hpp"
#include "numeric.hpp"

namespace isomech {

/// Euclidean projection of v onto the nonincreasing cone x1 >= x2 >= ... >= xn
/// by adjacent pooling. Blocks carry (sum, count) and merge only on a strict
/// increase of means, so an already nonincreasing input comes back unchanged,
/// entry for entry, and the map is idempotent.
inline GradeVector pava_descending(const GradeVector& v) {
    require_finite(v, "pava_descending");
    struct Block {
        double sum;
        std::size_t count;
        double mean;
    };
    std::vector<Block> blocks;
    blocks.reserve(v.size());
    for (double x : v) {
        Block cur{x, 1, x};
        while (!blocks.empty() && blocks.back().mean < cur.mean) {
            cur.sum += blocks.back().sum;
            cur.count += blocks.back().count;
            cur.mean = cur.sum / static_cast<double>(cur.count);
            blocks.pop_back();
        }
        blocks.push_back(cur);
    }
    GradeVector out;
    out.reserve(v.size());
    for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean);
    return out;
}

/// Independent route to the same fit: entry k equals
///     max over w >= k of  min over u <= k of  mean(v[u..w]).
/// Cubic time; kept as a cross-check for the pooling implementation.
inline GradeVector minmax_oracle(const GradeVector& v) {
    require_finite(v, "minmax_oracle");
    const std::size_t n = v.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];
    GradeVector out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t w = k; w < n; ++w) {
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t u = 0; u <= k; ++u) {
                const double m = (prefix[w + 1] - prefix[u]) / static_cast<double>(w - u + 1);
                if (m < worst) worst = m;
            }
            if (worst > best) best = worst;
        }
        out[k] = best;
    }
    return out;
}

/// Projection of y onto the cone of vectors nonincreasing along pi: permute
/// into ranked order, pool, and scatter back. The result satisfies
/// out[pi[0]] >= out[pi[1]] >= ... >= out[pi[n-1]].
inline GradeVector project_with_ranking(const GradeVector& y, const Ranking& pi) {
    if (y.size() != pi.size()) throw DimensionError("project_with_ranking: length mismatch");
    const GradeVector fit = pava_descending(apply_permutation(y, pi));
    GradeVector out(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) out[pi[k]] = fit[k];
    return out;
}

/// Separable Bregman divergence generator. Every strictly convex smooth
/// generator yields the same projection onto an isotonic cone as squared
/// loss, so the generator only matters for domain checks and for reporting
/// objective values.
class DivergenceSpec {
public:
    enum class Kind { SquaredLoss, BernoulliKL };

    static DivergenceSpec squared_loss() { return DivergenceSpec(Kind::SquaredLoss); }

    /// Generator x*log(x) + (1-x)*log(1-x) on the open unit interval.
    static DivergenceSpec bernoulli_kl() { return DivergenceSpec(Kind::BernoulliKL); }

    Kind kind() const { return kind_; }

    void check_domain(std::span<const double> v, const char* what) const {
        require_finite(v, what);
        if (kind_ == Kind::BernoulliKL) {
            for (double x : v) {
                if (!(x > 0.0 && x < 1.0)) {
                    throw DomainError(std::string(what) + ": entry outside (0,1)");
                }
            }
        }
    }

    double divergence(double p, double q) const {
        switch (kind_) {
            case Kind::SquaredLoss:
                return 0.5 * (p - q) * (p - q);
            case Kind::BernoulliKL:
                return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
        }
        return 0.0;
    }

    /// Sum of coordinatewise divergences from y to r.
    double objective(std::span<const double> y, std::span<const double> r) const {
        if (y.size() != r.size()) throw DimensionError("DivergenceSpec::objective: length mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += divergence(y[i], r[i]);
        return s;
    }

private:
    explicit DivergenceSpec(Kind kind) : kind_(kind) {}

    Kind kind_;
};

/// Bregman projection of y onto the cone of vectors nonincreasing along pi.
/// The minimizer coincides with the squared-loss projection, so this runs the
/// same pooling after validating the generator's domain.
inline GradeVector bregman_project(const GradeVector& y, const DivergenceSpec& phi,
                                   const Ranking& pi) {
    phi.check_domain(y, "bregman_project");
    return project_with_ranking(y, pi);
}

/// Nearest point of the closed complement of the cone selected by pi.
/// Boundary and exterior points are already in that closure and come back
/// unchanged. Interior points move to the cheapest facet: the adjacent pair
/// (in pi order) with the smallest gap is replaced by its average, at
/// Euclidean distance gap / sqrt(2). Ties pick the earliest pair.
inline GradeVector project_complement_isotonic(const GradeVector& y, const Ranking& pi) {
    if (y.size() != pi.size()) {
        throw DimensionError("project_complement_isotonic: length mismatch");
    }
    if (y.size() < 2) {
        throw DimensionError("project_complement_isotonic: complement is empty for n < 2");
    }
    require_finite(y, "project_complement_isotonic");
    const std::size_t n = y.size();
    std::size_t arg = n;
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double gap = y[pi[k]] - y[pi[k + 1]];
        if (gap <= 0.0) return y;
        if (gap < smallest) {
            smallest = gap;
            arg = k;
        }
    }
    GradeVector out = y;
    const double avg = 0.5 * (y[pi[arg]] + y[pi[arg + 1]]);
    out[pi[arg]] = avg;
    out[pi[arg + 1]] = avg;
    return out;
}

}  // namespace isomech
