#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grades.hpp"
#include "numeric.hpp"

namespace isomech {

/// Scalar base maps, each nondecreasing and convex on its domain. Power lives
/// on the nonnegative axis; Exponential clamps its argument at 700 to stay
/// finite in double precision.
enum class BaseFn { Identity, Square, PositivePartSquare, Exponential, Power };

/// Grade factors for grade-dependent utilities: nonnegative and nondecreasing
/// on their domain (Square is meant for nonnegative grade scales).
enum class GradeFactor { One, PositivePart, Square };

inline double eval_base(BaseFn f, double power_exponent, double x) {
    switch (f) {
        case BaseFn::Identity:
            return x;
        case BaseFn::Square:
            return x * x;
        case BaseFn::PositivePartSquare:
            return x > 0.0 ? x * x : 0.0;
        case BaseFn::Exponential:
            return std::exp(std::min(x, 700.0));
        case BaseFn::Power:
            if (x < 0.0) throw DomainError("eval_base: power needs a nonnegative argument");
            return std::pow(x, power_exponent);
    }
    return 0.0;
}

inline double eval_grade_factor(GradeFactor g, double r) {
    switch (g) {
        case GradeFactor::One:
            return 1.0;
        case GradeFactor::PositivePart:
            return r > 0.0 ? r : 0.0;
        case GradeFactor::Square:
            return r * r;
    }
    return 0.0;
}

/// One term of a grade-dependent utility: g(R_i) * h(x_i).
struct GdTerm {
    GradeFactor g = GradeFactor::One;
    BaseFn h = BaseFn::Identity;
    double h_power = 1.0;
};

inline double eval_separable(BaseFn f, double power_exponent, const GradeVector& x) {
    require_finite(x, "eval_separable");
    double s = 0.0;
    for (double v : x) s += eval_base(f, power_exponent, v);
    return s;
}

inline double eval_grade_dependent(const std::vector<GdTerm>& terms, const GradeVector& x,
                                   const GradeVector& R) {
    if (x.size() != R.size()) throw DimensionError("eval_grade_dependent: length mismatch");
    require_finite(x, "eval_grade_dependent");
    require_finite(R, "eval_grade_dependent");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (const GdTerm& t : terms) {
            s += eval_grade_factor(t.g, R[i]) * eval_base(t.h, t.h_power, x[i]);
        }
    }
    return s;
}

/// Sum of h over the k largest entries of x.
inline double eval_schur_top_sum(std::size_t k, BaseFn h, double power_exponent,
                                 const GradeVector& x) {
    require_finite(x, "eval_schur_top_sum");
    if (k == 0 || k > x.size()) {
        throw ParameterError("eval_schur_top_sum: k must lie in 1..n");
    }
    GradeVector sorted = x;
    std::sort(sorted.rbegin(), sorted.rend());
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += eval_base(h, power_exponent, sorted[i]);
    return s;
}

/// Sum of min(x_i, cap). Concave pieces make this the stock nonconvex case;
/// an infinite cap degenerates to the identity sum.
inline double eval_nonconvex_cap(double cap, const GradeVector& x) {
    require_finite(x, "eval_nonconvex_cap");
    double s = 0.0;
    for (double v : x) s += std::min(v, cap);
    return s;
}

namespace detail {

inline void check_base_shape(BaseFn f, double power_exponent) {
    if (f == BaseFn::Power && !(power_exponent >= 1.0)) {
        throw ParameterError("UtilitySpec: power exponent must be >= 1");
    }
    // Spot check monotonicity and midpoint convexity on a probe grid that
    // covers the map's monotone domain (the nonnegative axis for the even
    // powers, the whole line otherwise).
    std::vector<double> grid;
    if (f == BaseFn::Power || f == BaseFn::Square) {
        grid = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    } else {
        grid = {-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0};
    }
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = eval_base(f, power_exponent, grid[i]);
        const double b = eval_base(f, power_exponent, grid[i + 1]);
        if (a > b + 1e-12) throw ParameterError("UtilitySpec: base map is not nondecreasing");
    }
    for (std::size_t i = 0; i + 2 < grid.size(); ++i) {
        const double mid = eval_base(f, power_exponent, 0.5 * (grid[i] + grid[i + 2]));
        const double avg =
            0.5 * (eval_base(f, power_exponent, grid[i]) + eval_base(f, power_exponent, grid[i + 2]));
        if (mid > avg + 1e-9 * std::max(1.0, std::abs(avg))) {
            throw ParameterError("UtilitySpec: base map is not convex");
        }
    }
}

inline void check_grade_factor_shape(GradeFactor g) {
    const std::vector<double> grid =
        (g == GradeFactor::Square) ? std::vector<double>{0.0, 0.5, 1.0, 2.0, 4.0}
                                   : std::vector<double>{-4.0, -1.0, 0.0, 1.0, 4.0};
    double prev = -std::numeric_limits<double>::infinity();
    for (double r : grid) {
        const double v = eval_grade_factor(g, r);
        if (v < 0.0) throw ParameterError("UtilitySpec: grade factor is negative");
        if (v + 1e-12 < prev) throw ParameterError("UtilitySpec: grade factor is not nondecreasing");
        prev = v;
    }
}

}  // namespace detail

/// Tagged description of an owner's utility. Families form a closed
/// enumeration so configurations can name them, and every instance is
/// nondecreasing in each coordinate of its argument.
class UtilitySpec {
public:
    enum class Family { SeparableConvex, GradeDependent, SchurNonseparable, NonconvexCap };

    static UtilitySpec separable(BaseFn f, double power_exponent = 1.0) {
        detail::check_base_shape(f, power_exponent);
        UtilitySpec u;
        u.family_ = Family::SeparableConvex;
        u.base_ = f;
        u.power_ = power_exponent;
        return u;
    }

    static UtilitySpec grade_dependent(std::vector<GdTerm> terms) {
        if (terms.empty()) throw ParameterError("UtilitySpec: no grade-dependent terms");
        for (const GdTerm& t : terms) {
            detail::check_grade_factor_shape(t.g);
            detail::check_base_shape(t.h, t.h_power);
        }
        UtilitySpec u;
        u.family_ = Family::GradeDependent;
        u.terms_ = std::move(terms);
        return u;
    }

    static UtilitySpec schur_top_sum(std::size_t k, BaseFn h, double power_exponent = 1.0) {
        if (k == 0) throw ParameterError("UtilitySpec: k must be positive");
        detail::check_base_shape(h, power_exponent);
        UtilitySpec u;
        u.family_ = Family::SchurNonseparable;
        u.base_ = h;
        u.power_ = power_exponent;
        u.top_k_ = k;
        return u;
    }

    static UtilitySpec nonconvex_cap(double cap) {
        if (std::isnan(cap)) throw ParameterError("UtilitySpec: cap must not be NaN");
        UtilitySpec u;
        u.family_ = Family::NonconvexCap;
        u.cap_ = cap;
        return u;
    }

    Family family() const { return family_; }
    bool needs_grades() const { return family_ == Family::GradeDependent; }
    std::size_t top_k() const { return top_k_; }
    double cap() const { return cap_; }

    /// Value at x; R is the owner's true grade vector, read only by
    /// grade-dependent utilities.
    double evaluate(const GradeVector& x, const GradeVector& R) const {
        switch (family_) {
            case Family::SeparableConvex:
                return eval_separable(base_, power_, x);
            case Family::GradeDependent:
                return eval_grade_dependent(terms_, x, R);
            case Family::SchurNonseparable:
                return eval_schur_top_sum(top_k_, base_, power_, x);
            case Family::NonconvexCap:
                return eval_nonconvex_cap(cap_, x);
        }
        return 0.0;
    }

    double evaluate(const GradeVector& x) const {
        if (needs_grades()) {
            throw ParameterError("UtilitySpec: grade-dependent utility needs the grade vector");
        }
        return evaluate(x, x);
    }

    std::string to_string() const;
    static UtilitySpec parse(const std::string& text);

    bool operator==(const UtilitySpec& o) const {
        if (family_ != o.family_) return false;
        switch (family_) {
            case Family::SeparableConvex:
                return base_ == o.base_ && power_ == o.power_;
            case Family::GradeDependent:
                if (terms_.size() != o.terms_.size()) return false;
                for (std::size_t i = 0; i < terms_.size(); ++i) {
                    if (terms_[i].g != o.terms_[i].g || terms_[i].h != o.terms_[i].h ||
                        terms_[i].h_power != o.terms_[i].h_power) {
                        return false;
                    }
                }
                return true;
            case Family::SchurNonseparable:
                return base_ == o.base_ && power_ == o.power_ && top_k_ == o.top_k_;
            case Family::NonconvexCap:
                return cap_ == o.cap_;
        }
        return false;
    }

private:
    UtilitySpec() = default;

    Family family_ = Family::SeparableConvex;
    BaseFn base_ = BaseFn::Identity;
    double power_ = 1.0;
    std::vector<GdTerm> terms_;
    std::size_t top_k_ = 1;
    double cap_ = 0.0;
};

namespace detail {

inline std::string base_tag(BaseFn f, double power_exponent) {
    switch (f) {
        case BaseFn::Identity:
            return "identity";
        case BaseFn::Square:
            return "square";
        case BaseFn::PositivePartSquare:
            return "pospart-square";
        case BaseFn::Exponential:
            return "exp";
        case BaseFn::Power:
            return "power:" + format_double(power_exponent);
    }
    return "";
}

inline std::string grade_tag(GradeFactor g) {
    switch (g) {
        case GradeFactor::One:
            return "one";
        case GradeFactor::PositivePart:
            return "pospart";
        case GradeFactor::Square:
            return "square";
    }
    return "";
}

inline std::pair<BaseFn, double> parse_base_tag(const std::string& tag) {
    if (tag == "identity") return {BaseFn::Identity, 1.0};
    if (tag == "square") return {BaseFn::Square, 1.0};
    if (tag == "pospart-square") return {BaseFn::PositivePartSquare, 1.0};
    if (tag == "exp") return {BaseFn::Exponential, 1.0};
    if (tag.rfind("power:", 0) == 0) {
        try {
            return {BaseFn::Power, std::stod(tag.substr(6))};
        } catch (const std::exception&) {
            throw ParameterError("UtilitySpec: bad power exponent in '" + tag + "'");
        }
    }
    throw ParameterError("UtilitySpec: unknown base map '" + tag + "'");
}

inline GradeFactor parse_grade_tag(const std::string& tag) {
    if (tag == "one") return GradeFactor::One;
    if (tag == "pospart") return GradeFactor::PositivePart;
    if (tag == "square") return GradeFactor::Square;
    throw ParameterError("UtilitySpec: unknown grade factor '" + tag + "'");
}

}  // namespace detail

inline std::string UtilitySpec::to_string() const {
    switch (family_) {
        case Family::SeparableConvex:
            return detail::base_tag(base_, power_);
        case Family::GradeDependent: {
            std::string out = "gdep:";
            for (std::size_t i = 0; i < terms_.size(); ++i) {
                if (i > 0) out += ";";
                out += detail::grade_tag(terms_[i].g) + "*" +
                       detail::base_tag(terms_[i].h, terms_[i].h_power);
            }
            return out;
        }
        case Family::SchurNonseparable:
            return "topk:" + std::to_string(top_k_) + ":" + detail::base_tag(base_, power_);
        case Family::NonconvexCap:
            return "cap:" + (std::isinf(cap_) ? std::string("inf") : format_double(cap_));
    }
    return "";
}

inline UtilitySpec UtilitySpec::parse(const std::string& text) {
    if (text.rfind("cap:", 0) == 0) {
        const std::string arg = text.substr(4);
        if (arg == "inf") return nonconvex_cap(std::numeric_limits<double>::infinity());
        try {
            return nonconvex_cap(std::stod(arg));
        } catch (const std::exception&) {
            throw ParameterError("UtilitySpec: bad cap in '" + text + "'");
        }
    }
    if (text.rfind("topk:", 0) == 0) {
        const std::size_t sep = text.find(':', 5);
        if (sep == std::string::npos) {
            throw ParameterError("UtilitySpec: expected topk:<k>:<base> in '" + text + "'");
        }
        std::size_t k = 0;
        try {
            k = static_cast<std::size_t>(std::stoull(text.substr(5, sep - 5)));
        } catch (const std::exception&) {
            throw ParameterError("UtilitySpec: bad k in '" + text + "'");
        }
        const auto [h, p] = detail::parse_base_tag(text.substr(sep + 1));
        return schur_top_sum(k, h, p);
    }
    if (text.rfind("gdep:", 0) == 0) {
        std::vector<GdTerm> terms;
        std::string rest = text.substr(5);
        while (!rest.empty()) {
            const std::size_t semi = rest.find(';');
            const std::string piece = rest.substr(0, semi);
            rest = (semi == std::string::npos) ? std::string() : rest.substr(semi + 1);
            const std::size_t star = piece.find('*');
            if (star == std::string::npos) {
                throw ParameterError("UtilitySpec: expected <g>*<h> in '" + piece + "'");
            }
            GdTerm t;
            t.g = detail::parse_grade_tag(piece.substr(0, star));
            const auto [h, p] = detail::parse_base_tag(piece.substr(star + 1));
            t.h = h;
            t.h_power = p;
            terms.push_back(t);
        }
        return grade_dependent(std::move(terms));
    }
    const auto [f, p] = detail::parse_base_tag(text);
    return separable(f, p);
}

}  // namespace isomech
