#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "isomech/errors.hpp"
#include "isomech/experiments.hpp"
#include "isomech/isotonic.hpp"
#include "isomech/majorization.hpp"
#include "isomech/mechanisms.hpp"
#include "isomech/montecarlo.hpp"
#include "isomech/noise.hpp"
#include "isomech/report.hpp"
#include "isomech/utilities.hpp"
#include "support.hpp"

// The acceptance gate: sixteen end-to-end checks, one test case each, every
// case printing exactly one line. All tolerances, sample counts, and seeds
// are pinned right here.

using namespace isomech;
using namespace testsupport;

namespace {

constexpr double kOracleTol = 1e-10;        // pava vs min-max formula
constexpr double kBregmanTol = 1e-8;        // KL projection vs pava
constexpr double kContractionRelSlack = 1e-12;
constexpr double kContractionAbsSlack = 1e-12;
constexpr double kMoreauRelTol = 1e-8;
constexpr double kPrefixSlack = 1e-9;       // majorization preservation
constexpr double kRiskBound = 7.5625 + 0.5; // normalized risk ceiling
constexpr double kRiskRatioLo = 1.4;        // risk(4096)/risk(512) window
constexpr double kRiskRatioHi = 2.8;

constexpr std::uint64_t kSeedC2 = 202;
constexpr std::uint64_t kSeedC5 = 505;
constexpr std::uint64_t kSeedC9 = 909;
constexpr std::uint64_t kSeedC11 = 1111;
constexpr std::uint64_t kSeedC12 = 1212;
constexpr std::uint64_t kSeedC13 = 1313;
constexpr std::uint64_t kSeedC15 = 1515;

constexpr unsigned kThreads = 4;

void announce(int criterion, bool pass) {
    std::cout << "[criterion " << std::setw(2) << std::setfill('0') << criterion << "] "
              << (pass ? "PASS" : "FAIL") << std::endl;
}

std::vector<ReportElement> all_ranking_elements(std::size_t n) {
    std::vector<ReportElement> out;
    for (const Ranking& pi : all_rankings(n)) out.push_back(ReportElement::full(pi));
    return out;
}

double diff_row_mean_over_se(const ExperimentReport& report, const std::string& id) {
    for (const ReportRow& row : report.rows) {
        if (row.id == id) {
            return row.std_error > 0.0 ? row.mean / row.std_error
                                       : (row.mean > 0.0 ? 1e300 : -1e300);
        }
    }
    throw std::logic_error("row not found: " + id);
}

double row_mean(const ExperimentReport& report, const std::string& id) {
    for (const ReportRow& row : report.rows) {
        if (row.id == id) return row.mean;
    }
    throw std::logic_error("row not found: " + id);
}

const ExperimentReport& criterion5_square_report() {
    static const ExperimentReport report = truthfulness_scan(
        {3.0, 2.0, 1.0, 0.0}, all_ranking_elements(4), UtilitySpec::separable(BaseFn::Square),
        NoiseModel::gaussian(1.0).with_seed(kSeedC5), 200000, kThreads);
    return report;
}

const ExperimentReport& criterion11_report() {
    static const ExperimentReport report = risk_curve(
        GradeGenerator::linear_tv(1.0), {64, 512, 4096}, 1.0, 10000, kSeedC11, kThreads);
    return report;
}

}  // namespace

TEST_CASE("criterion 1: projection oracle equivalence", "[acceptance]") {
    auto rng = seeded_rng(101);
    std::size_t bad = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + rng() % 50;
        const GradeVector v = random_vector(rng, n, -10.0, 10.0);
        const GradeVector fast = pava_descending(v);
        const GradeVector slow = minmax_oracle(v);
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(fast[i] - slow[i]) > kOracleTol) ++bad;
        }
        const GradeVector w = random_vector(rng, n, 0.01, 0.99);
        const Ranking pi = random_ranking(rng, n);
        const GradeVector kl = bregman_project(w, DivergenceSpec::bernoulli_kl(), pi);
        const GradeVector sq = project_with_ranking(w, pi);
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(kl[i] - sq[i]) > kBregmanTol) ++bad;
        }
    }
    announce(1, bad == 0);
    CHECK(bad == 0);
}

TEST_CASE("criterion 2: pathwise risk contraction", "[acceptance]") {
    auto rng = seeded_rng(201);
    const std::size_t n = 50;
    const GradeVector R = random_vector(rng, n, -3.0, 3.0);
    const Ranking truth = sort_descending_ranking(R);
    const NoiseModel noise = NoiseModel::gaussian(1.0).with_seed(kSeedC2);
    std::size_t violations = 0;
    for (std::size_t t = 0; t < 10000; ++t) {
        const GradeVector z = sample_noise(noise, n, t);
        GradeVector y = R;
        for (std::size_t i = 0; i < n; ++i) y[i] += z[i];
        const GradeVector fit = isotonic_mechanism(y, truth);
        const double fit_err = squared_distance(fit, R);
        const double raw_err = squared_distance(y, R);
        if (fit_err > raw_err * (1.0 + kContractionRelSlack) + kContractionAbsSlack) {
            ++violations;
        }
    }
    announce(2, violations == 0);
    CHECK(violations == 0);
}

TEST_CASE("criterion 3: Moreau identity", "[acceptance]") {
    auto rng = seeded_rng(301);
    std::size_t bad = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t n = 1 + rng() % 50;
        const GradeVector v = random_vector(rng, n, -10.0, 10.0);
        const GradeVector fit = project_with_ranking(v, random_ranking(rng, n));
        const double lhs = squared_distance(fit, v) + squared_norm(fit);
        const double rhs = squared_norm(v);
        if (std::abs(lhs - rhs) > kMoreauRelTol * std::max(1.0, rhs)) ++bad;
    }
    announce(3, bad == 0);
    CHECK(bad == 0);
}

TEST_CASE("criterion 4: noiseless exactness", "[acceptance]") {
    auto rng = seeded_rng(401);
    std::size_t bad = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + rng() % 50;
        const GradeVector R = random_vector(rng, n, -10.0, 10.0);
        if (isotonic_mechanism(R, sort_descending_ranking(R)) != R) ++bad;
    }
    announce(4, bad == 0);
    CHECK(bad == 0);
}

TEST_CASE("criterion 5: truthfulness over all rankings", "[acceptance]") {
    const GradeVector R = {3.0, 2.0, 1.0, 0.0};
    const auto elements = all_ranking_elements(4);
    const NoiseModel noise = NoiseModel::gaussian(1.0).with_seed(kSeedC5);

    bool ok = true;
    const ExperimentReport& square = criterion5_square_report();
    ok = ok && square.pass;
    ok = ok && diff_row_mean_over_se(square, "rank:4-3-2-1/diff_vs_truth") > 3.0;
    for (const BaseFn fn : {BaseFn::PositivePartSquare, BaseFn::Exponential}) {
        const ExperimentReport report = truthfulness_scan(
            R, elements, UtilitySpec::separable(fn), noise, 200000, kThreads);
        ok = ok && report.pass;
        ok = ok && diff_row_mean_over_se(report, "rank:4-3-2-1/diff_vs_truth") > 3.0;
    }
    announce(5, ok);
    CHECK(ok);
}

TEST_CASE("criterion 6: grade-dependent truthfulness", "[acceptance]") {
    const ExperimentReport report = truthfulness_scan(
        {3.0, 2.0, 1.0, 0.0}, all_ranking_elements(4),
        UtilitySpec::grade_dependent({GdTerm{GradeFactor::PositivePart, BaseFn::Square, 1.0}}),
        NoiseModel::gaussian(1.0).with_seed(kSeedC5), 200000, kThreads);
    announce(6, report.pass);
    CHECK(report.pass);
}

TEST_CASE("criterion 7: Schur nonseparable truthfulness", "[acceptance]") {
    const GradeVector R = {3.0, 2.0, 1.0, 0.0};
    const auto elements = all_ranking_elements(4);
    const NoiseModel noise = NoiseModel::gaussian(1.0).with_seed(kSeedC5);
    const ExperimentReport top1 = truthfulness_scan(
        R, elements, UtilitySpec::schur_top_sum(1, BaseFn::Identity), noise, 200000, kThreads);
    const ExperimentReport top2 = truthfulness_scan(
        R, elements, UtilitySpec::schur_top_sum(2, BaseFn::Square), noise, 200000, kThreads);
    announce(7, top1.pass && top2.pass);
    CHECK(top1.pass);
    CHECK(top2.pass);
}

TEST_CASE("criterion 8: coarse truthfulness", "[acceptance]") {
    std::vector<ReportElement> elements;
    for (const CoarseRanking& blocks : all_coarse_rankings({2, 2})) {
        elements.push_back(ReportElement::coarse(blocks));
    }
    const ExperimentReport report = truthfulness_scan(
        {4.0, 3.0, 2.0, 1.0}, elements, UtilitySpec::separable(BaseFn::Square),
        NoiseModel::gaussian(1.0).with_seed(kSeedC5), 200000, kThreads, "coarse-truthfulness");
    announce(8, report.pass);
    CHECK(report.pass);
}

TEST_CASE("criterion 9: consistency on random upward swaps", "[acceptance]") {
    auto rng = seeded_rng(kSeedC9);
    const std::size_t n = 5;
    std::size_t failures = 0;
    for (std::size_t k = 0; k < 50; ++k) {
        const GradeVector R = random_vector(rng, n, 0.0, 10.0);
        Ranking pi2 = Ranking::identity(n);
        std::vector<std::pair<std::size_t, std::size_t>> upward;
        while (upward.empty()) {
            pi2 = random_ranking(rng, n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (R[pi2[j]] > R[pi2[i]]) upward.emplace_back(i, j);
                }
            }
        }
        const auto [i, j] = upward[rng() % upward.size()];
        const ExperimentReport report = consistency_experiment(
            R, pi2, i, j, UtilitySpec::separable(BaseFn::Square),
            NoiseModel::gaussian(1.0).with_seed(mix_seed(kSeedC9, k)), 50000, kThreads);
        if (!report.pass) ++failures;
    }
    announce(9, failures == 0);
    CHECK(failures == 0);
}

TEST_CASE("criterion 10: majorization preservation fuzz", "[acceptance]") {
    auto rng = seeded_rng(1010);
    std::size_t bad = 0;
    for (int rep = 0; rep < 10000; ++rep) {
        const std::size_t n = 2 + rng() % 19;
        const GradeVector b = random_vector(rng, n, -5.0, 5.0);
        GradeVector a = b;
        const std::size_t moves = 1 + rng() % 5;
        for (std::size_t m = 0; m < moves; ++m) {
            const std::size_t i = rng() % (n - 1);
            const std::size_t j = i + 1 + rng() % (n - 1 - i);
            const double delta = uniform_in(rng, 0.0, 2.0);
            a[i] += delta;
            a[j] -= delta;
        }
        if (!majorizes_natural_order(pava_descending(a), pava_descending(b), kPrefixSlack)) {
            ++bad;
        }
    }
    announce(10, bad == 0);
    CHECK(bad == 0);
}

TEST_CASE("criterion 11: risk scaling", "[acceptance]") {
    const ExperimentReport& report = criterion11_report();
    bool ok = report.pass;
    for (const std::size_t n : {64, 512, 4096}) {
        const std::string key = "n=" + std::to_string(n);
        ok = ok && row_mean(report, key + "/raw") == static_cast<double>(n);
        ok = ok && row_mean(report, key + "/normalized") <= kRiskBound;
    }
    const double ratio = row_mean(report, "n=4096/fitted") / row_mean(report, "n=512/fitted");
    ok = ok && ratio >= kRiskRatioLo && ratio <= kRiskRatioHi;
    for (const ReportRow& row : report.rows) {
        if (row.id == "n=4096/fitted") ok = ok && row.n_reps == 1000;
        if (row.id == "n=512/fitted") ok = ok && row.n_reps == 10000;
    }
    announce(11, ok);
    CHECK(ok);
}

TEST_CASE("criterion 12: nested cones", "[acceptance]") {
    const GradeVector R = {4.0, 3.0, 2.0, 1.0};
    const ExperimentReport report = nested_cone_experiment(
        R, coarse_truth(R, {2, 2}), {0.001, 1000.0}, 50000, kSeedC12, kThreads);
    announce(12, report.pass);
    CHECK(report.pass);
}

TEST_CASE("criterion 13: pairwise counterexample reproduced", "[acceptance]") {
    const ExperimentReport report = counterexample_pairwise(
        3, 0.1, 1.0, UtilitySpec::separable(BaseFn::Square), 500000, kSeedC13, kThreads);
    const bool ok = report.pass && report.verdict == "REPRODUCED";
    announce(13, ok);
    CHECK(ok);
}

TEST_CASE("criterion 14: nonconvex counterexample exact", "[acceptance]") {
    const ExperimentReport report = counterexample_nonconvex(1.0, 2.0, 0.0, 3);
    const bool ok = report.pass && report.verdict == "REPRODUCED" &&
                    row_mean(report, "truthful") == -2.0 && row_mean(report, "swapped") == -1.0;
    announce(14, ok);
    CHECK(ok);
}

TEST_CASE("criterion 15: line mechanism closed form", "[acceptance]") {
    const ExperimentReport report = line_mechanism_experiment(
        {3.0, 4.0}, {{1.0, 0.0}}, NoiseModel::gaussian(1.0).with_seed(kSeedC15), 100000,
        kThreads);
    const bool ok = report.pass &&
                    row_mean(report, "line:0.6_0.8/mean") > row_mean(report, "line:1_0/mean");
    announce(15, ok);
    CHECK(ok);
}

TEST_CASE("criterion 16: byte-identical reruns across thread counts", "[acceptance]") {
    const ExperimentReport rerun5 = truthfulness_scan(
        {3.0, 2.0, 1.0, 0.0}, all_ranking_elements(4), UtilitySpec::separable(BaseFn::Square),
        NoiseModel::gaussian(1.0).with_seed(kSeedC5), 200000, 1);
    const ExperimentReport rerun11 = risk_curve(
        GradeGenerator::linear_tv(1.0), {64, 512, 4096}, 1.0, 10000, kSeedC11, 1);
    const bool ok = rerun5.to_csv() == criterion5_square_report().to_csv() &&
                    rerun5.to_summary() == criterion5_square_report().to_summary() &&
                    rerun11.to_csv() == criterion11_report().to_csv() &&
                    rerun11.to_summary() == criterion11_report().to_summary();
    announce(16, ok);
    CHECK(ok);
}
