// motlab command-line front end.
//
// Subcommands:
//   run <config>                      one simulation, artifacts in the output dir
//   sweep <config> --eps a,b,...      regularization sweep with pairwise distances
//   longtime <config> --eta a,b,...   first-crossing times of sup_v and stab_u
//   odebounds verify --seed-range a..b   randomized bound verification (CSV table)
//   plots <dir>                       render SVG plots from a run directory
//
// Exit codes: 0 success, 2 configuration/input error, 3 solver failure,
// 4 invariant or verification failure.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "motlab/config.hpp"
#include "motlab/csv.hpp"
#include "motlab/ode_bounds.hpp"
#include "motlab/plots.hpp"
#include "motlab/runner.hpp"

namespace {

std::vector<double> split_doubles(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string piece =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (piece.empty()) throw std::invalid_argument("empty entry in list '" + text + "'");
        char* end = nullptr;
        const double value = std::strtod(piece.c_str(), &end);
        if (end == piece.c_str() || *end != '\0') {
            throw std::invalid_argument("bad number '" + piece + "' in list");
        }
        out.push_back(value);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    const std::size_t sep = text.find("..");
    if (sep == std::string::npos) {
        throw std::invalid_argument("seed range must look like a..b, got '" + text + "'");
    }
    const std::string lo = text.substr(0, sep), hi = text.substr(sep + 2);
    if (lo.empty() || hi.empty()) throw std::invalid_argument("seed range must look like a..b");
    char* end = nullptr;
    const std::uint64_t a = std::strtoull(lo.c_str(), &end, 10);
    if (end == lo.c_str() || *end != '\0') throw std::invalid_argument("bad seed '" + lo + "'");
    const std::uint64_t b = std::strtoull(hi.c_str(), &end, 10);
    if (end == hi.c_str() || *end != '\0') throw std::invalid_argument("bad seed '" + hi + "'");
    if (b < a) throw std::invalid_argument("seed range must be nondecreasing");
    return {a, b};
}

int cmd_run(const std::string& config_path) {
    const motlab::RunConfig config = motlab::load_run_config(config_path);
    const motlab::RunOutcome outcome = motlab::run_single(config);
    if (!outcome.message.empty()) {
        std::fprintf(stderr, "motlab run: %s\n", outcome.message.c_str());
    }
    if (!outcome.records.empty()) {
        const auto& last = outcome.records.back();
        std::printf("status=%s steps=%lld t=%.6g mass_u=%.12g sup_v=%.6g stab_u=%.6g\n",
                    motlab::run_status_name(outcome.status).c_str(),
                    static_cast<long long>(outcome.n_steps), last.t, last.mass_u, last.sup_v,
                    last.stab_u);
    } else {
        std::printf("status=%s\n", motlab::run_status_name(outcome.status).c_str());
    }
    std::printf("artifacts: %s\n", outcome.directory.string().c_str());
    return motlab::exit_code(outcome.status);
}

int cmd_sweep(const std::string& config_path, const std::string& eps_text, int workers) {
    const motlab::RunConfig config = motlab::load_run_config(config_path);
    const std::vector<double> eps = split_doubles(eps_text);
    const motlab::SweepReport report = motlab::run_epsilon_sweep(config, eps, workers);
    if (!report.message.empty()) {
        std::fprintf(stderr, "motlab sweep: %s\n", report.message.c_str());
    }
    for (std::size_t j = 0; j + 1 < report.epsilons.size() && j < report.distances.size(); ++j) {
        std::printf("d(eps=%.6g, eps=%.6g) = %.12g\n", report.epsilons[j],
                    report.epsilons[j + 1], report.distances[j]);
    }
    std::printf("status=%s monotone=%s\n", motlab::run_status_name(report.status).c_str(),
                report.monotone_pass ? "yes" : "no");
    std::printf("artifacts: %s\n", report.directory.string().c_str());
    return motlab::exit_code(report.status);
}

int cmd_longtime(const std::string& config_path, const std::string& eta_text) {
    const motlab::RunConfig config = motlab::load_run_config(config_path);
    const std::vector<double> etas = split_doubles(eta_text);
    const motlab::LongtimeReport report = motlab::run_longtime_study(config, etas);
    if (!report.message.empty()) {
        std::fprintf(stderr, "motlab longtime: %s\n", report.message.c_str());
    }
    for (std::size_t i = 0; i < report.etas.size() && i < report.v_crossing.size(); ++i) {
        if (report.v_crossing[i].has_value()) {
            std::printf("sup_v <= %.6g first at t=%.12g\n", report.etas[i],
                        *report.v_crossing[i]);
        } else {
            std::printf("sup_v <= %.6g not reached\n", report.etas[i]);
        }
    }
    for (std::size_t i = 0; i < report.etas.size() && i < report.u_crossing.size(); ++i) {
        if (report.u_crossing[i].has_value()) {
            std::printf("stab_u <= %.6g first at t=%.12g\n", report.etas[i],
                        *report.u_crossing[i]);
        } else {
            std::printf("stab_u <= %.6g not reached\n", report.etas[i]);
        }
    }
    std::printf("status=%s\n", motlab::run_status_name(report.status).c_str());
    return motlab::exit_code(report.status);
}

int cmd_odebounds(const std::string& range_text, int n_steps) {
    const auto [seed_begin, seed_end] = parse_seed_range(range_text);
    motlab::VerifyOptions options;
    options.n_steps = n_steps;
    const auto suite = motlab::verify_suite(seed_begin, seed_end, options);
    std::printf("seed,lemma,a,b,lambda,y0,pass,max_excess,worst_time,y_final\n");
    std::size_t failures = 0;
    for (const auto& entry : suite) {
        if (!entry.outcome.pass) ++failures;
        std::printf("%llu,%s,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n",
                    static_cast<unsigned long long>(entry.seed),
                    motlab::ode_lemma_name(entry.lemma), entry.problem.a, entry.problem.b,
                    entry.problem.lambda, entry.problem.y0, entry.outcome.pass ? 1 : 0,
                    entry.outcome.max_excess, entry.outcome.worst_time, entry.outcome.y_final);
    }
    std::fprintf(stderr, "odebounds: %zu verifications, %zu failed\n", suite.size(), failures);
    return failures == 0 ? 0 : 4;
}

int cmd_plots(const std::string& dir) {
    const auto files = motlab::emit_plots(dir);
    for (const auto& file : files) std::printf("%s\n", file.string().c_str());
    std::fprintf(stderr, "plots: wrote %zu files\n", files.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"motlab: mass-conservative simulator for chemotaxis-consumption dynamics "
                 "with signal-dependent motility"};
    app.set_version_flag("--version", motlab::motlab_version());
    app.require_subcommand(1);

    std::string config_path, eps_text, eta_text, seed_range, plot_dir;
    int workers = 0;
    int n_steps = 2000;

    CLI::App* run_cmd = app.add_subcommand("run", "run one configured simulation");
    run_cmd->add_option("config", config_path, "JSON configuration file")->required();

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "regularization sweep over epsilon");
    sweep_cmd->add_option("config", config_path, "JSON configuration file")->required();
    sweep_cmd->add_option("--eps", eps_text, "comma-separated nonincreasing epsilon list")
        ->required();
    sweep_cmd->add_option("--workers", workers, "parallel member runs (0 = automatic)");

    CLI::App* long_cmd = app.add_subcommand("longtime", "first-crossing stabilization study");
    long_cmd->add_option("config", config_path, "JSON configuration file")->required();
    long_cmd->add_option("--eta", eta_text, "comma-separated positive thresholds")->required();

    CLI::App* ode_cmd = app.add_subcommand("odebounds", "comparison-lemma utilities");
    CLI::App* verify_cmd = ode_cmd->add_subcommand("verify", "randomized bound verification");
    verify_cmd->add_option("--seed-range", seed_range, "inclusive seed range a..b")->required();
    verify_cmd->add_option("--n-steps", n_steps, "base RK4 grid (>= 1000)");

    CLI::App* plots_cmd = app.add_subcommand("plots", "render SVG plots from a run directory");
    plots_cmd->add_option("dir", plot_dir, "run directory with diagnostics.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(config_path);
        if (sweep_cmd->parsed()) return cmd_sweep(config_path, eps_text, workers);
        if (long_cmd->parsed()) return cmd_longtime(config_path, eta_text);
        if (ode_cmd->parsed()) {
            if (!verify_cmd->parsed()) {
                std::fprintf(stderr, "motlab odebounds: expected the 'verify' subcommand\n");
                return 2;
            }
            return cmd_odebounds(seed_range, n_steps);
        }
        if (plots_cmd->parsed()) return cmd_plots(plot_dir);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "motlab: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "motlab: %s\n", e.what());
        return 2;
    }
    return 2;
}
