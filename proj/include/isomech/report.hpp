#pragma once

#include <string>
#include <utility>
#include <vector>

#include "numeric.hpp"

namespace isomech {

/// One line of the report table: a Monte Carlo estimate, or an analytic value
/// marked by n_reps = 0, keyed by a report identifier.
struct ReportRow {
    std::string id;
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_reps = 0;
};

/// Outcome of one experiment: the estimate table, the verdict derived from it,
/// and the configuration echo that reproduces the run. The verdict is a pure
/// function of the rows, so a reader can re-derive it from the CSV alone.
/// Wall-clock time is carried for logging but kept out of both serialized
/// forms: identical (config, seed) runs must emit identical bytes.
struct ExperimentReport {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<ReportRow> rows;
    std::string verdict;
    bool pass = false;
    std::string headline;
    double wall_seconds = 0.0;

    std::string to_csv() const {
        std::string out = "report_id,mean,std_error,n_reps\n";
        for (const ReportRow& row : rows) {
            out += row.id + "," + format_double(row.mean) + "," + format_double(row.std_error) +
                   "," + std::to_string(row.n_reps) + "\n";
        }
        return out;
    }

    std::string to_summary() const {
        std::string out = "schema=1\n";
        out += "experiment=" + experiment + "\n";
        out += "verdict=" + verdict + "\n";
        out += std::string("pass=") + (pass ? "1" : "0") + "\n";
        for (const auto& [key, value] : config_echo) out += key + "=" + value + "\n";
        return out;
    }
};

}  // namespace isomech
