#pragma once

// Experiment configuration: a flat key=value text format with a schema
// version line, strict per-experiment key sets, and schema-checked values.
// The command-line front end assembles one of these from an optional config
// file plus flag overrides, so every run is reproducible from its echo.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "experiments.hpp"
#include "grades.hpp"
#include "mechanisms.hpp"
#include "noise.hpp"
#include "numeric.hpp"
#include "utilities.hpp"

namespace isomech {

namespace detail {

inline std::vector<std::string> split_text(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = text.find(sep, start);
        parts.push_back(text.substr(start, end - start));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return parts;
}

inline std::uint64_t parse_unsigned(const std::string& token) {
    if (token.empty() || token[0] == '-' || token[0] == '+') {
        throw ParameterError("expected an unsigned integer, got '" + token + "'");
    }
    try {
        std::size_t used = 0;
        const std::uint64_t x = std::stoull(token, &used);
        if (used != token.size()) {
            throw ParameterError("trailing junk in integer '" + token + "'");
        }
        return x;
    } catch (const ParameterError&) {
        throw;
    } catch (const std::exception&) {
        throw ParameterError("not an integer: '" + token + "'");
    }
}

}  // namespace detail

// Command-line text forms. Vectors are comma-separated decimals, rankings
// comma-separated 1-based indices, coarse rankings '|'-separated blocks.

inline GradeVector parse_grade_list(const std::string& text) {
    GradeVector v = parse_vector(text);
    require_finite(v, "grade list");
    return v;
}

inline Ranking parse_ranking_text(const std::string& text) {
    std::vector<std::size_t> one_based;
    for (const std::string& tok : detail::split_text(text, ',')) {
        one_based.push_back(detail::parse_unsigned(tok));
    }
    return Ranking::from_one_based(one_based);
}

/// Either the word "identity" or an explicit permutation of 1..n.
inline Ranking parse_ranking_text(const std::string& text, std::size_t n) {
    if (text == "identity") return Ranking::identity(n);
    Ranking pi = parse_ranking_text(text);
    if (pi.size() != n) {
        throw ConfigError("ranking has " + std::to_string(pi.size()) + " entries, expected " +
                          std::to_string(n));
    }
    return pi;
}

inline CoarseRanking parse_coarse_text(const std::string& text) {
    std::vector<std::vector<std::size_t>> blocks;
    for (const std::string& block : detail::split_text(text, '|')) {
        std::vector<std::size_t> items;
        for (const std::string& tok : detail::split_text(block, ',')) {
            items.push_back(detail::parse_unsigned(tok));
        }
        blocks.push_back(std::move(items));
    }
    return CoarseRanking::from_one_based(std::move(blocks));
}

inline std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (const std::string& tok : detail::split_text(text, ',')) {
        const std::uint64_t v = detail::parse_unsigned(tok);
        if (v == 0) throw ParameterError("size list: entries must be >= 1");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

/// 1-based "i,j" with i < j; returned 0-based.
inline std::pair<std::size_t, std::size_t> parse_swap_text(const std::string& text) {
    const std::vector<std::string> parts = detail::split_text(text, ',');
    if (parts.size() != 2) throw ParameterError("swap: expected 'i,j'");
    const std::uint64_t i = detail::parse_unsigned(parts[0]);
    const std::uint64_t j = detail::parse_unsigned(parts[1]);
    if (i == 0 || i >= j) throw ParameterError("swap: need 1 <= i < j");
    return {static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1)};
}

/// Semicolon-separated list of direction vectors.
inline std::vector<GradeVector> parse_direction_list(const std::string& text) {
    std::vector<GradeVector> out;
    for (const std::string& part : detail::split_text(text, ';')) {
        out.push_back(parse_grade_list(part));
    }
    return out;
}

/// A finite decimal or the word "inf".
inline double parse_cap_text(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    const double c = parse_double(text);
    if (std::isnan(c)) throw ParameterError("cap: must not be NaN");
    return c;
}

struct ConfigKeySet {
    const char* experiment;
    std::vector<const char*> allowed;
    std::vector<const char*> required;
};

inline const std::vector<ConfigKeySet>& config_key_sets() {
    static const std::vector<ConfigKeySet> sets = {
        {"project", {"input", "ranking", "coarse"}, {"input"}},
        {"truthfulness", {"R", "n", "utility", "noise", "sigma", "N", "seed", "out"}, {"R"}},
        {"coarse-truthfulness",
         {"R", "n", "sizes", "utility", "noise", "sigma", "N", "seed", "out"},
         {"R", "sizes"}},
        {"consistency",
         {"R", "n", "pi2", "swap", "utility", "noise", "sigma", "N", "seed", "out"},
         {"R", "pi2", "swap"}},
        {"risk-curve", {"gen", "n-list", "sigma", "N", "seed", "out"}, {"gen", "n-list"}},
        {"nested-cones", {"R", "sizes", "sigma-list", "N", "seed", "out"}, {"R", "sizes"}},
        {"counterexample-pairwise", {"n", "eps", "sigma", "utility", "N", "seed", "out"}, {}},
        {"counterexample-nonconvex", {"cap", "r1", "r2", "n", "out"}, {}},
        {"owner-partition", {"matrix", "seed", "out"}, {"matrix"}},
        {"line-mechanism", {"R", "u", "noise", "sigma", "N", "seed", "out"}, {"R"}},
    };
    return sets;
}

inline const ConfigKeySet& config_key_set(const std::string& experiment) {
    for (const ConfigKeySet& s : config_key_sets()) {
        if (experiment == s.experiment) return s;
    }
    throw ConfigError("unknown experiment '" + experiment + "'");
}

inline std::vector<std::string> experiment_names() {
    std::vector<std::string> names;
    for (const ConfigKeySet& s : config_key_sets()) names.emplace_back(s.experiment);
    return names;
}

/// One experiment's settings as validated strings. Values keep exactly the
/// text the user supplied, so serialize/parse round-trips are bytewise.
class ExperimentConfig {
public:
    explicit ExperimentConfig(std::string experiment) : experiment_(std::move(experiment)) {
        config_key_set(experiment_);
    }

    const std::string& experiment() const { return experiment_; }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    const std::string& get(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) {
            throw ConfigError(experiment_ + ": missing key '" + key + "'");
        }
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    void set(const std::string& key, const std::string& value) {
        const ConfigKeySet& keys = config_key_set(experiment_);
        const bool allowed = std::any_of(keys.allowed.begin(), keys.allowed.end(),
                                         [&](const char* k) { return key == k; });
        if (!allowed) throw ConfigError(experiment_ + ": unknown key '" + key + "'");
        if (value.find('\n') != std::string::npos) {
            throw ConfigError(experiment_ + ": value for '" + key + "' contains a newline");
        }
        check_value(key, value);
        values_[key] = value;
    }

    void set_default(const std::string& key, const std::string& value) {
        if (!has(key)) set(key, value);
    }

    /// Required keys present plus the cross-field checks that need more than
    /// one value at a time. Call after defaults are applied.
    void validate() const {
        const ConfigKeySet& keys = config_key_set(experiment_);
        for (const char* req : keys.required) {
            if (!has(req)) {
                throw ConfigError(experiment_ + ": missing required key '" + std::string(req) +
                                  "'");
            }
        }
        if (has("sigma") && has("noise")) {
            throw ConfigError(experiment_ + ": give either 'sigma' or 'noise', not both");
        }
        cross_checks();
    }

    /// The noise model for this run: explicit 'noise' tag, or a Gaussian with
    /// scale 'sigma' (default 1), seeded with 'seed' (default 0).
    NoiseModel noise_model() const {
        const NoiseModel base = has("noise")
                                    ? NoiseModel::parse(get("noise"))
                                    : NoiseModel::gaussian(parse_double(get_or("sigma", "1")));
        return base.with_seed(seed());
    }

    std::uint64_t seed() const { return detail::parse_unsigned(get_or("seed", "0")); }

    std::size_t get_size(const std::string& key) const {
        return static_cast<std::size_t>(detail::parse_unsigned(get(key)));
    }

    std::string serialize() const {
        std::string out = "schema=1\nexperiment=" + experiment_ + "\n";
        for (const char* key : config_key_set(experiment_).allowed) {
            const auto it = values_.find(key);
            if (it != values_.end()) {
                out += std::string(key) + "=" + it->second + "\n";
            }
        }
        return out;
    }

    /// Inverse of serialize. Lines are key=value; blank lines and lines
    /// starting with '#' are skipped. The first two effective lines must be
    /// "schema=1" and "experiment=<kind>"; later keys may come in any order
    /// but at most once each.
    static ExperimentConfig parse(const std::string& text) {
        std::vector<std::pair<std::string, std::string>> entries;
        for (const std::string& raw : detail::split_text(text, '\n')) {
            std::string line = raw;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("config: line without '=': '" + line + "'");
            }
            entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
        }
        if (entries.size() < 2 || entries[0].first != "schema") {
            throw ConfigError("config: first line must be 'schema=1'");
        }
        if (entries[0].second != "1") {
            throw ConfigError("config: unsupported schema version '" + entries[0].second + "'");
        }
        if (entries[1].first != "experiment") {
            throw ConfigError("config: second line must name the experiment");
        }
        ExperimentConfig cfg(entries[1].second);
        for (std::size_t k = 2; k < entries.size(); ++k) {
            const auto& [key, value] = entries[k];
            if (key == "schema" || key == "experiment" || cfg.has(key)) {
                throw ConfigError("config: duplicate key '" + key + "'");
            }
            cfg.set(key, value);
        }
        return cfg;
    }

    bool operator==(const ExperimentConfig&) const = default;

private:
    void check_value(const std::string& key, const std::string& value) const {
        try {
            if (key == "R" || key == "input") {
                parse_grade_list(value);
            } else if (key == "ranking" || key == "pi2") {
                if (value != "identity") parse_ranking_text(value);
            } else if (key == "coarse") {
                parse_coarse_text(value);
            } else if (key == "swap") {
                parse_swap_text(value);
            } else if (key == "sizes" || key == "n-list") {
                parse_size_list(value);
            } else if (key == "n" || key == "N") {
                if (detail::parse_unsigned(value) == 0) {
                    throw ParameterError("must be >= 1");
                }
            } else if (key == "seed") {
                detail::parse_unsigned(value);
            } else if (key == "sigma") {
                const double x = parse_double(value);
                if (!(x >= 0.0) || !std::isfinite(x)) {
                    throw ParameterError("must be a nonnegative number");
                }
            } else if (key == "eps") {
                const double x = parse_double(value);
                if (!(x > 0.0) || !std::isfinite(x)) {
                    throw ParameterError("must be a positive number");
                }
            } else if (key == "sigma-list") {
                for (const std::string& tok : detail::split_text(value, ',')) {
                    const double x = parse_double(tok);
                    if (!(x > 0.0) || !std::isfinite(x)) {
                        throw ParameterError("entries must be positive");
                    }
                }
            } else if (key == "utility") {
                UtilitySpec::parse(value);
            } else if (key == "noise") {
                NoiseModel::parse(value);
            } else if (key == "gen") {
                GradeGenerator::parse(value);
            } else if (key == "cap") {
                parse_cap_text(value);
            } else if (key == "r1" || key == "r2") {
                const double x = parse_double(value);
                if (!std::isfinite(x)) throw ParameterError("must be finite");
            } else if (key == "u") {
                parse_direction_list(value);
            } else {
                // out, matrix: free-form paths
                if (value.empty()) throw ParameterError("must not be empty");
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(experiment_ + ": bad value for '" + key + "': " + e.what());
        }
    }

    void cross_checks() const {
        if (experiment_ == "project") {
            const std::size_t n = parse_grade_list(get("input")).size();
            if (has("ranking") && has("coarse")) {
                throw ConfigError("project: give 'ranking' or 'coarse', not both");
            }
            if (has("ranking")) parse_ranking_text(get("ranking"), n);
            if (has("coarse") && parse_coarse_text(get("coarse")).total_items() != n) {
                throw ConfigError("project: coarse ranking does not cover the input");
            }
            return;
        }
        if (!has("R")) return;
        const std::size_t n = parse_grade_list(get("R")).size();
        if (has("n") && get_size("n") != n) {
            throw ConfigError(experiment_ + ": 'n' is " + get("n") + " but 'R' has length " +
                              std::to_string(n));
        }
        if (has("sizes")) {
            std::size_t total = 0;
            for (std::size_t s : parse_size_list(get("sizes"))) total += s;
            if (total != n) {
                throw ConfigError(experiment_ + ": 'sizes' sums to " + std::to_string(total) +
                                  " but 'R' has length " + std::to_string(n));
            }
        }
        if (experiment_ == "consistency") {
            parse_ranking_text(get("pi2"), n);
            if (parse_swap_text(get("swap")).second >= n) {
                throw ConfigError("consistency: swap position out of range");
            }
        }
        if (experiment_ == "line-mechanism" && has("u")) {
            for (const GradeVector& u : parse_direction_list(get("u"))) {
                if (u.size() != n) {
                    throw ConfigError("line-mechanism: direction length mismatch");
                }
            }
        }
    }

    std::string experiment_;
    std::map<std::string, std::string> values_;
};

/// Fills in every optional knob so that the effective configuration is fully
/// explicit before it runs (and before it is echoed).
inline void apply_default_keys(ExperimentConfig& cfg) {
    const std::string& e = cfg.experiment();
    if (e == "project") return;
    cfg.set_default("out", e);
    if (e == "counterexample-nonconvex") {
        cfg.set_default("cap", "1");
        cfg.set_default("r1", "2");
        cfg.set_default("r2", "0");
        cfg.set_default("n", "3");
        return;
    }
    cfg.set_default("seed", "0");
    if (e == "truthfulness" || e == "coarse-truthfulness") {
        cfg.set_default("utility", "square");
        cfg.set_default("N", "200000");
    } else if (e == "consistency") {
        cfg.set_default("utility", "square");
        cfg.set_default("N", "50000");
    } else if (e == "risk-curve") {
        cfg.set_default("sigma", "1");
        cfg.set_default("N", "10000");
    } else if (e == "nested-cones") {
        cfg.set_default("sigma-list", "0.001,1000");
        cfg.set_default("N", "50000");
    } else if (e == "counterexample-pairwise") {
        cfg.set_default("n", "3");
        cfg.set_default("eps", "0.1");
        cfg.set_default("sigma", "1");
        cfg.set_default("utility", "square");
        cfg.set_default("N", "500000");
    } else if (e == "line-mechanism") {
        cfg.set_default("N", "100000");
    }
    const bool takes_noise = e == "truthfulness" || e == "coarse-truthfulness" ||
                             e == "consistency" || e == "line-mechanism";
    if (takes_noise && !cfg.has("noise")) cfg.set_default("sigma", "1");
}

}  // namespace isomech
