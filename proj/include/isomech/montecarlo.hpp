#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "grades.hpp"
#include "noise.hpp"
#include "numeric.hpp"
#include "utilities.hpp"

namespace isomech {

/// A mechanism with the report already bound: maps the raw grade vector y to
/// the adjusted grades handed back to the owner.
using BoundMechanism = std::function<GradeVector(const GradeVector&)>;

namespace detail {

/// Runs body(t) for every t in [0, total), split into contiguous chunks over
/// the workers. The body must write its result into preallocated storage
/// indexed by t, so the outcome cannot depend on the worker count. A failure
/// is rethrown as a SimulationError carrying the lowest failing draw index,
/// which is the index a serial run would have stopped at.
template <typename Body>
void for_each_draw(std::size_t total, unsigned threads, const Body& body) {
    const std::size_t workers =
        std::min<std::size_t>(std::max(threads, 1u), std::max<std::size_t>(total, 1));
    if (workers <= 1) {
        for (std::size_t t = 0; t < total; ++t) {
            try {
                body(t);
            } catch (const std::exception& e) {
                throw SimulationError(e.what(), t);
            }
        }
        return;
    }
    std::mutex fail_mutex;
    std::size_t fail_draw = total;
    std::string fail_what;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = total * w / workers;
            const std::size_t hi = total * (w + 1) / workers;
            for (std::size_t t = lo; t < hi; ++t) {
                try {
                    body(t);
                } catch (const std::exception& e) {
                    const std::lock_guard<std::mutex> lock(fail_mutex);
                    if (t < fail_draw) {
                        fail_draw = t;
                        fail_what = e.what();
                    }
                    return;
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (fail_draw < total) throw SimulationError(fail_what, fail_draw);
}

}  // namespace detail

/// Common-random-numbers evaluator: draws one noise vector per replication and
/// feeds the identical y = R + z to every bound mechanism. Row r of the result
/// holds statistic(mechanisms[r](y)) per draw; differences between rows are
/// the paired estimator. Values are materialized per draw so every reduction
/// over them has a fixed order regardless of the worker count.
template <typename Statistic>
std::vector<std::vector<double>> paired_draws(const GradeVector& R,
                                              const std::vector<BoundMechanism>& mechanisms,
                                              const Statistic& statistic,
                                              const NoiseModel& noise, std::size_t N,
                                              unsigned threads = 1) {
    if (R.empty()) throw DimensionError("paired_draws: empty grade vector");
    require_finite(R, "true grades");
    if (mechanisms.empty()) throw DimensionError("paired_draws: no mechanisms");
    if (N < 100) throw ParameterError("paired_draws: need N >= 100 replications");
    std::vector<std::vector<double>> values(mechanisms.size(), std::vector<double>(N));
    detail::for_each_draw(N, threads, [&](std::size_t t) {
        GradeVector y = sample_noise(noise, R.size(), static_cast<std::uint64_t>(t));
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += R[i];
        for (std::size_t r = 0; r < mechanisms.size(); ++r) {
            values[r][t] = statistic(mechanisms[r](y));
        }
    });
    return values;
}

/// Per-draw utility values for a list of reports on shared noise draws.
inline std::vector<std::vector<double>> utility_draws(const GradeVector& R,
                                                      const std::vector<BoundMechanism>& mechanisms,
                                                      const UtilitySpec& utility,
                                                      const NoiseModel& noise, std::size_t N,
                                                      unsigned threads = 1) {
    return paired_draws(
        R, mechanisms, [&](const GradeVector& fitted) { return utility.evaluate(fitted, R); },
        noise, N, threads);
}

/// Per-draw squared-error losses ||fitted - R||^2 on shared noise draws.
inline std::vector<std::vector<double>> risk_draws(const GradeVector& R,
                                                   const std::vector<BoundMechanism>& mechanisms,
                                                   const NoiseModel& noise, std::size_t N,
                                                   unsigned threads = 1) {
    return paired_draws(
        R, mechanisms, [&](const GradeVector& fitted) { return squared_distance(fitted, R); },
        noise, N, threads);
}

/// Monte Carlo estimate of the owner's expected utility under one report.
inline MeanStdErr estimate_expected_utility(const GradeVector& R, const BoundMechanism& mechanism,
                                            const UtilitySpec& utility, const NoiseModel& noise,
                                            std::size_t N, unsigned threads = 1) {
    return mean_std_err(utility_draws(R, {mechanism}, utility, noise, N, threads)[0]);
}

/// Mean and standard error of the per-draw differences {a_t - b_t}.
inline MeanStdErr paired_difference(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionError("paired_difference: length mismatch");
    std::vector<double> diff(a.size());
    for (std::size_t t = 0; t < a.size(); ++t) diff[t] = a[t] - b[t];
    return mean_std_err(diff);
}

}  // namespace isomech
