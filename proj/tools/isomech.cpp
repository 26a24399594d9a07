// Command-line front end. Each subcommand assembles an ExperimentConfig from
// an optional --config file plus flags (flags win), fills in defaults, runs
// the experiment, and writes <out>.csv and <out>.summary. Exit status: 0 when
// the verdict passes, 1 when it fails, 2 on configuration errors, 3 on
// runtime errors.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <isomech/config.hpp>
#include <isomech/errors.hpp>
#include <isomech/experiments.hpp>
#include <isomech/mechanisms.hpp>
#include <isomech/ownership.hpp>
#include <isomech/report.hpp>

namespace {

using namespace isomech;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string subcommand_help(const std::string& name) {
    if (name == "project") return "project a vector onto the cone of a ranking";
    if (name == "truthfulness") return "scan rankings for the best expected utility";
    if (name == "coarse-truthfulness") return "scan coarse rankings of fixed block sizes";
    if (name == "consistency") return "compare a ranking against its upward swap";
    if (name == "risk-curve") return "estimation risk across vector lengths";
    if (name == "nested-cones") return "full vs coarse cone risk at noise extremes";
    if (name == "counterexample-pairwise") return "complement report vs cone near ties";
    if (name == "counterexample-nonconvex") return "capped utility rewards a swap, exactly";
    if (name == "owner-partition") return "greedy disjoint cover of an ownership matrix";
    if (name == "line-mechanism") return "one-dimensional reports with a closed form";
    return "";
}

std::string key_help(const std::string& key) {
    if (key == "R") return "true grades, comma-separated decimals";
    if (key == "input") return "vector to project, comma-separated decimals";
    if (key == "ranking") return "'identity' or 1-based permutation, e.g. 2,1,3";
    if (key == "coarse") return "coarse ranking blocks, e.g. 1,3|2,4";
    if (key == "pi2") return "baseline ranking (1-based permutation)";
    if (key == "swap") return "1-based positions i,j (i<j) swapped to form the rival";
    if (key == "sizes") return "coarse block sizes, e.g. 2,2";
    if (key == "n") return "number of items (cross-checked against R)";
    if (key == "n-list") return "vector lengths to sweep, e.g. 64,512,4096";
    if (key == "N") return "Monte Carlo replications";
    if (key == "seed") return "RNG seed";
    if (key == "sigma") return "gaussian noise scale (shorthand for --noise gaussian:<s>)";
    if (key == "sigma-list") return "noise scales to sweep, e.g. 0.001,1000";
    if (key == "noise") return "noise tag: gaussian:1, uniform:-1:1, laplace:0.7, latent:0.8:gaussian:0.6";
    if (key == "utility") return "utility tag: square, pospart-square, exp, power:1.5, topk:2:square, cap:1, gdep:pospart*square";
    if (key == "gen") return "grade generator: linear-tv:1, constant:2, custom:3,1,2";
    if (key == "eps") return "grade gap of the nearly tied vector";
    if (key == "cap") return "utility cap, a decimal or 'inf'";
    if (key == "r1") return "first true grade";
    if (key == "r2") return "second true grade";
    if (key == "u") return "rival directions, ';'-separated vectors, e.g. 1,0;0,1";
    if (key == "matrix") return "ownership CSV: header of owner ids, one 0/1 row per item";
    if (key == "out") return "output path prefix for .csv and .summary";
    return "";
}

GradeVector run_project(const ExperimentConfig& cfg) {
    const GradeVector input = parse_grade_list(cfg.get("input"));
    if (cfg.has("coarse")) {
        return coarse_isotonic_mechanism(input, parse_coarse_text(cfg.get("coarse")));
    }
    return isotonic_mechanism(input, parse_ranking_text(cfg.get_or("ranking", "identity"),
                                                        input.size()));
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, unsigned threads) {
    const std::string& e = cfg.experiment();
    if (e == "truthfulness") {
        const GradeVector R = parse_grade_list(cfg.get("R"));
        return truthfulness_scan(R, default_ranking_reports(R, cfg.seed()),
                                 UtilitySpec::parse(cfg.get("utility")), cfg.noise_model(),
                                 cfg.get_size("N"), threads);
    }
    if (e == "coarse-truthfulness") {
        const GradeVector R = parse_grade_list(cfg.get("R"));
        std::vector<ReportElement> reports;
        for (const CoarseRanking& blocks : all_coarse_rankings(parse_size_list(cfg.get("sizes")))) {
            reports.push_back(ReportElement::coarse(blocks));
        }
        return truthfulness_scan(R, reports, UtilitySpec::parse(cfg.get("utility")),
                                 cfg.noise_model(), cfg.get_size("N"), threads,
                                 "coarse-truthfulness");
    }
    if (e == "consistency") {
        const GradeVector R = parse_grade_list(cfg.get("R"));
        const auto [i, j] = parse_swap_text(cfg.get("swap"));
        return consistency_experiment(R, parse_ranking_text(cfg.get("pi2"), R.size()), i, j,
                                      UtilitySpec::parse(cfg.get("utility")), cfg.noise_model(),
                                      cfg.get_size("N"), threads);
    }
    if (e == "risk-curve") {
        return risk_curve(GradeGenerator::parse(cfg.get("gen")),
                          parse_size_list(cfg.get("n-list")), parse_double(cfg.get("sigma")),
                          cfg.get_size("N"), cfg.seed(), threads);
    }
    if (e == "nested-cones") {
        const GradeVector R = parse_grade_list(cfg.get("R"));
        return nested_cone_experiment(R, coarse_truth(R, parse_size_list(cfg.get("sizes"))),
                                      parse_vector(cfg.get("sigma-list")), cfg.get_size("N"),
                                      cfg.seed(), threads);
    }
    if (e == "counterexample-pairwise") {
        return counterexample_pairwise(cfg.get_size("n"), parse_double(cfg.get("eps")),
                                       parse_double(cfg.get("sigma")),
                                       UtilitySpec::parse(cfg.get("utility")), cfg.get_size("N"),
                                       cfg.seed(), threads);
    }
    if (e == "counterexample-nonconvex") {
        return counterexample_nonconvex(parse_cap_text(cfg.get("cap")),
                                        parse_double(cfg.get("r1")), parse_double(cfg.get("r2")),
                                        cfg.get_size("n"));
    }
    if (e == "owner-partition") {
        const OwnershipMatrix matrix = OwnershipMatrix::parse_csv(read_text_file(cfg.get("matrix")));
        return owner_partition_experiment(matrix, cfg.seed());
    }
    if (e == "line-mechanism") {
        const GradeVector R = parse_grade_list(cfg.get("R"));
        std::vector<GradeVector> rivals;
        if (cfg.has("u")) {
            rivals = parse_direction_list(cfg.get("u"));
        } else {
            GradeVector e1(R.size(), 0.0);
            e1[0] = 1.0;
            rivals.push_back(std::move(e1));
        }
        return line_mechanism_experiment(R, rivals, cfg.noise_model(), cfg.get_size("N"),
                                         threads);
    }
    throw ConfigError("unknown experiment '" + e + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Isotonic mechanism toolkit: projections and seeded experiments"};
    app.require_subcommand(1);

    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::string> config_path;
    std::map<std::string, unsigned> threads_of;
    std::map<std::string, std::string> v_sugar;

    for (const std::string& name : isomech::experiment_names()) {
        CLI::App* cmd = app.add_subcommand(name, subcommand_help(name));
        auto& slot = raw[name];
        for (const char* key : isomech::config_key_set(name).allowed) {
            cmd->add_option("--" + std::string(key), slot[key], key_help(key));
        }
        cmd->add_option("--config", config_path[name],
                        "key=value config file; flags override its values");
        if (name != "project") {
            threads_of[name] = 1;
            cmd->add_option("--threads", threads_of[name],
                            "worker threads (never changes results)");
        }
        if (name == "risk-curve") {
            cmd->add_option("--V", v_sugar[name], "shorthand for --gen linear-tv:<V>");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();

    try {
        isomech::ExperimentConfig cfg(name);
        if (cmd->count("--config") > 0) {
            cfg = isomech::ExperimentConfig::parse(read_text_file(config_path[name]));
            if (cfg.experiment() != name) {
                throw isomech::ConfigError("config file is for '" + cfg.experiment() +
                                           "', not '" + name + "'");
            }
        }
        for (const char* key : isomech::config_key_set(name).allowed) {
            if (cmd->count("--" + std::string(key)) > 0) cfg.set(key, raw[name][key]);
        }
        if (name == "risk-curve" && cmd->count("--V") > 0) {
            if (cmd->count("--gen") > 0) {
                throw isomech::ConfigError("risk-curve: give either --gen or --V, not both");
            }
            cfg.set("gen", "linear-tv:" + v_sugar[name]);
        }
        isomech::apply_default_keys(cfg);
        cfg.validate();

        if (name == "project") {
            std::cout << isomech::format_vector(run_project(cfg)) << "\n";
            return 0;
        }

        const auto t0 = std::chrono::steady_clock::now();
        isomech::ExperimentReport report = run_experiment(cfg, threads_of[name]);
        report.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        const std::string out = cfg.get("out");
        write_text_file(out + ".csv", report.to_csv());
        write_text_file(out + ".summary", report.to_summary());
        std::cout << report.headline << "\n";
        std::cerr << "# wrote " << out << ".csv and " << out << ".summary in "
                  << isomech::format_double(report.wall_seconds) << "s\n";
        return report.pass ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << name << ": " << e.what() << "\n";
        return 3;
    }
}
