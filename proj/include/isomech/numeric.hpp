#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace isomech {

/// Stateless 64-bit mixer; the backbone of all seed derivation here.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Decorrelates a stream index from its base seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) + stream);
}

/// Shortest decimal form that parses back to the same double. Used for all
/// emitted numbers so that reports are reproducible byte for byte.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline std::string format_vector(std::span<const double> v, char sep = ',') {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += sep;
        out += format_double(v[i]);
    }
    return out;
}

/// Strict inverse of format_double: the whole token must be one number.
inline double parse_double(const std::string& token) {
    try {
        std::size_t used = 0;
        const double x = std::stod(token, &used);
        if (used != token.size()) {
            throw ParameterError("parse_double: trailing junk in '" + token + "'");
        }
        return x;
    } catch (const ParameterError&) {
        throw;
    } catch (const std::exception&) {
        throw ParameterError("parse_double: not a number: '" + token + "'");
    }
}

inline std::vector<double> parse_vector(const std::string& text, char sep = ',') {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = text.find(sep, start);
        out.push_back(parse_double(text.substr(start, end - start)));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

inline void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw DomainError(std::string(what) + ": non-finite entry");
        }
    }
}

/// Fixed-order pairwise summation. The splitting depends only on the length,
/// so the result is identical no matter how surrounding work is threaded.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 32) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("squared_distance: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

struct MeanStdErr {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Two-pass mean and standard error of the mean, both passes pairwise.
inline MeanStdErr mean_std_err(std::span<const double> v) {
    MeanStdErr out;
    out.n = v.size();
    if (v.empty()) return out;
    out.mean = pairwise_sum(v) / static_cast<double>(v.size());
    if (v.size() < 2) return out;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = v[i] - out.mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(v.size()));
    return out;
}

/// Covariance of two paired samples around their pairwise-summed means.
inline double sample_covariance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("sample_covariance: length mismatch");
    if (a.size() < 2) return 0.0;
    const double ma = pairwise_sum(a) / static_cast<double>(a.size());
    const double mb = pairwise_sum(b) / static_cast<double>(b.size());
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
    return pairwise_sum(prod) / static_cast<double>(a.size() - 1);
}

}  // namespace isomech
