#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "errors.hpp"
#include "grades.hpp"
#include "numeric.hpp"

namespace isomech {

namespace detail {

// 53-bit uniforms built directly from raw generator words. The standard
// distribution classes are implementation-defined, which would break the
// byte-for-byte reproducibility contract, so the transforms live here.

/// Uniform on (0, 1]. Never returns 0, so it is safe inside log().
inline double unit_open_closed(std::uint64_t bits) {
    return static_cast<double>((bits >> 11) + 1) * 0x1p-53;
}

/// Uniform on (0, 1). Open at both ends.
inline double unit_open_open(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

/// Standard normal via Box-Muller (cosine branch only; two words per draw).
inline double standard_gaussian(std::mt19937_64& rng) {
    const double u1 = unit_open_closed(rng());
    const double u2 = unit_open_open(rng());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Standard Laplace (scale 1, variance 2) by CDF inversion.
inline double standard_laplace(std::mt19937_64& rng) {
    const double u = unit_open_open(rng()) - 0.5;
    const double mag = std::log(1.0 - 2.0 * std::abs(u));
    return u < 0.0 ? mag : -mag;
}

}  // namespace detail

/// Distribution of one noise vector z added to the true grades. The i.i.d.
/// families draw every coordinate independently; the exchangeable-latent
/// family draws one shared offset w per vector and adds i.i.d. base noise on
/// top, which keeps the coordinates exchangeable but correlated.
class NoiseModel {
  public:
    enum class Family { Gaussian, Uniform, Laplace, ExchangeableLatent };

    static NoiseModel gaussian(double sigma) {
        require_scale(sigma, "gaussian sigma");
        NoiseModel m;
        m.family_ = Family::Gaussian;
        m.a_ = sigma;
        return m;
    }

    static NoiseModel uniform(double lo, double hi) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
            throw ParameterError("NoiseModel: uniform needs finite lo <= hi");
        }
        NoiseModel m;
        m.family_ = Family::Uniform;
        m.a_ = lo;
        m.b_ = hi;
        return m;
    }

    static NoiseModel laplace(double scale) {
        require_scale(scale, "laplace scale");
        NoiseModel m;
        m.family_ = Family::Laplace;
        m.a_ = scale;
        return m;
    }

    /// z_i = w + e_i with w ~ N(0, latent_sigma^2) shared across the vector
    /// and e_i i.i.d. from `base` (any non-latent family).
    static NoiseModel exchangeable_latent(double latent_sigma, const NoiseModel& base) {
        require_scale(latent_sigma, "latent sigma");
        if (base.family_ == Family::ExchangeableLatent) {
            throw ParameterError("NoiseModel: latent base must be an i.i.d. family");
        }
        NoiseModel m;
        m.family_ = Family::ExchangeableLatent;
        m.a_ = latent_sigma;
        m.base_family_ = base.family_;
        m.base_a_ = base.a_;
        m.base_b_ = base.b_;
        m.seed_ = base.seed_;
        return m;
    }

    Family family() const { return family_; }
    std::uint64_t seed() const { return seed_; }
    bool iid() const { return family_ != Family::ExchangeableLatent; }

    NoiseModel with_seed(std::uint64_t seed) const {
        NoiseModel m = *this;
        m.seed_ = seed;
        return m;
    }

    /// E[z_1].
    double mean() const {
        switch (family_) {
            case Family::Gaussian:
            case Family::Laplace:
                return 0.0;
            case Family::Uniform:
                return (a_ + b_) / 2.0;
            case Family::ExchangeableLatent:
                return iid_mean(base_family_, base_a_, base_b_);
        }
        return 0.0;
    }

    /// Var[z_1].
    double variance() const {
        switch (family_) {
            case Family::Gaussian:
                return a_ * a_;
            case Family::Uniform:
                return (b_ - a_) * (b_ - a_) / 12.0;
            case Family::Laplace:
                return 2.0 * a_ * a_;
            case Family::ExchangeableLatent:
                return a_ * a_ + iid_variance(base_family_, base_a_, base_b_);
        }
        return 0.0;
    }

    /// E[z_1^2].
    double second_moment() const { return variance() + mean() * mean(); }

    friend bool operator==(const NoiseModel&, const NoiseModel&) = default;

    std::string to_string() const {
        switch (family_) {
            case Family::Gaussian:
                return "gaussian:" + format_double(a_);
            case Family::Uniform:
                return "uniform:" + format_double(a_) + ":" + format_double(b_);
            case Family::Laplace:
                return "laplace:" + format_double(a_);
            case Family::ExchangeableLatent: {
                NoiseModel base;
                base.family_ = base_family_;
                base.a_ = base_a_;
                base.b_ = base_b_;
                return "latent:" + format_double(a_) + ":" + base.to_string();
            }
        }
        return "";
    }

    /// Inverse of to_string(). The seed is not part of the tag; the parsed
    /// model carries seed 0 until with_seed() is applied.
    static NoiseModel parse(const std::string& text) {
        const auto number = [&text](const std::string& field) {
            try {
                return std::stod(field);
            } catch (const std::exception&) {
                throw ParameterError("NoiseModel: bad number in '" + text + "'");
            }
        };
        if (text.rfind("gaussian:", 0) == 0) return gaussian(number(text.substr(9)));
        if (text.rfind("laplace:", 0) == 0) return laplace(number(text.substr(8)));
        if (text.rfind("uniform:", 0) == 0) {
            const std::size_t sep = text.find(':', 8);
            if (sep == std::string::npos) {
                throw ParameterError("NoiseModel: expected uniform:<lo>:<hi> in '" + text + "'");
            }
            return uniform(number(text.substr(8, sep - 8)), number(text.substr(sep + 1)));
        }
        if (text.rfind("latent:", 0) == 0) {
            const std::size_t sep = text.find(':', 7);
            if (sep == std::string::npos) {
                throw ParameterError("NoiseModel: expected latent:<sigma>:<base> in '" + text +
                                     "'");
            }
            return exchangeable_latent(number(text.substr(7, sep - 7)),
                                       parse(text.substr(sep + 1)));
        }
        throw ParameterError("NoiseModel: unknown family in '" + text + "'");
    }

    friend GradeVector sample_noise(const NoiseModel& model, std::size_t n, std::uint64_t draw);

  private:
    static void require_scale(double s, const char* what) {
        if (!std::isfinite(s) || s < 0.0) {
            throw ParameterError(std::string("NoiseModel: ") + what + " must be >= 0");
        }
    }

    static double iid_mean(Family f, double a, double b) {
        return f == Family::Uniform ? (a + b) / 2.0 : 0.0;
    }

    static double iid_variance(Family f, double a, double b) {
        switch (f) {
            case Family::Gaussian:
                return a * a;
            case Family::Uniform:
                return (b - a) * (b - a) / 12.0;
            case Family::Laplace:
                return 2.0 * a * a;
            case Family::ExchangeableLatent:
                break;
        }
        return 0.0;
    }

    static double iid_draw(std::mt19937_64& rng, Family f, double a, double b) {
        switch (f) {
            case Family::Gaussian:
                return a * detail::standard_gaussian(rng);
            case Family::Uniform:
                return a + (b - a) * detail::unit_open_open(rng());
            case Family::Laplace:
                return a * detail::standard_laplace(rng);
            case Family::ExchangeableLatent:
                break;
        }
        return 0.0;
    }

    Family family_ = Family::Gaussian;
    double a_ = 0.0;
    double b_ = 0.0;
    Family base_family_ = Family::Gaussian;
    double base_a_ = 0.0;
    double base_b_ = 0.0;
    std::uint64_t seed_ = 0;
};

/// One noise vector. Deterministic in (model, model.seed, n, draw): each
/// replication owns an independent generator keyed by its draw index, so a
/// parallel sweep over draws reproduces the serial stream exactly.
inline GradeVector sample_noise(const NoiseModel& model, std::size_t n, std::uint64_t draw) {
    if (n == 0) throw DimensionError("sample_noise: need n >= 1");
    std::mt19937_64 rng(mix_seed(model.seed_, draw));
    GradeVector z(n);
    if (model.family_ == NoiseModel::Family::ExchangeableLatent) {
        const double w = model.a_ * detail::standard_gaussian(rng);
        for (double& zi : z) {
            zi = w + NoiseModel::iid_draw(rng, model.base_family_, model.base_a_, model.base_b_);
        }
    } else {
        for (double& zi : z) {
            zi = NoiseModel::iid_draw(rng, model.family_, model.a_, model.b_);
        }
    }
    return z;
}

}  // namespace isomech
