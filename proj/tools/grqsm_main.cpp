// Command-line front end: Monte-Carlo BER sweeps, multiplier statistics and
// the phase-solver runtime benchmark, with CSV/JSON output.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grqsm/grqsm.hpp"

namespace {

std::vector<double> parse_snr_grid(const std::string& text) {
    std::vector<double> grid;
    const auto colon1 = text.find(':');
    if (colon1 != std::string::npos) {
        const auto colon2 = text.find(':', colon1 + 1);
        if (colon2 == std::string::npos)
            throw std::invalid_argument("--snr-db range must be a:b:step");
        const double a = std::stod(text.substr(0, colon1));
        const double b = std::stod(text.substr(colon1 + 1, colon2 - colon1 - 1));
        const double step = std::stod(text.substr(colon2 + 1));
        if (!(step > 0.0)) throw std::invalid_argument("--snr-db step must be > 0");
        for (double v = a; v <= b + step * 1e-9; v += step) grid.push_back(v);
        return grid;
    }
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        grid.push_back(std::stod(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    if (grid.empty()) throw std::invalid_argument("--snr-db grid is empty");
    return grid;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(static_cast<std::size_t>(std::stoull(text.substr(pos, comma - pos))));
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("--n-ris-list is empty");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS-GRQSM link-level simulator"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; command-line flags take precedence");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo BER sweep");
    std::string mode_str = "grqsm-optimal";
    std::size_t n_ris = 256, n_rx = 8, k = 2, trials = 10000, threads = 1;
    std::uint64_t seed = 1;
    double es = 1.0;
    std::string snr_text, out_path, format_str = "csv";
    sim->add_option("--mode", mode_str,
                    "grqsm-optimal|grqsm-suboptimal|benchmark-partitioned|multicast");
    sim->add_option("--n-ris", n_ris, "RIS elements N");
    sim->add_option("--n-rx", n_rx, "receive antennas N_r");
    sim->add_option("--k", k, "selected antennas per branch K");
    sim->add_option("--snr-db", snr_text, "SNR grid, a:b:step or comma list (dB)")->required();
    sim->add_option("--trials", trials, "Monte-Carlo trials per SNR point");
    sim->add_option("--seed", seed, "master seed");
    sim->add_option("--es", es, "symbol energy E_s");
    sim->add_option("--threads", threads, "worker count (results are identical for any value)");
    sim->add_option("--out", out_path, "output file")->required();
    sim->add_option("--format", format_str, "csv|json");

    // stats-lambda
    auto* stats = app.add_subcommand("stats-lambda", "multiplier mean/variance statistics");
    std::string stats_list = "128,256,512", stats_out, stats_format = "csv",
                stats_solver = "kkt";
    std::size_t stats_k = 2, stats_nrx = 8, stats_realizations = 10000, stats_threads = 1;
    std::uint64_t stats_seed = 1;
    stats->add_option("--n-ris-list", stats_list, "comma-separated RIS sizes");
    stats->add_option("--k", stats_k, "selected antennas per branch K");
    stats->add_option("--n-rx", stats_nrx, "receive antennas N_r");
    stats->add_option("--realizations", stats_realizations, "channel realizations per size");
    stats->add_option("--seed", stats_seed, "master seed");
    stats->add_option("--threads", stats_threads, "worker count");
    stats->add_option("--solver", stats_solver, "kkt (Newton fast path) or dual (reference)");
    stats->add_option("--out", stats_out, "output file")->required();
    stats->add_option("--format", stats_format, "csv|json");

    // bench-runtime
    auto* bench = app.add_subcommand("bench-runtime", "multicast solver runtime benchmark");
    std::string bench_list = "128,256,512", bench_out, bench_format = "csv";
    std::size_t bench_nrx = 2, bench_realizations = 10000;
    std::uint64_t bench_seed = 1;
    bench->add_option("--n-ris-list", bench_list, "comma-separated RIS sizes");
    bench->add_option("--n-rx", bench_nrx, "receive antennas N_r");
    bench->add_option("--realizations", bench_realizations, "channel realizations per size");
    bench->add_option("--seed", bench_seed, "master seed");
    bench->add_option("--out", bench_out, "output file")->required();
    bench->add_option("--format", bench_format, "csv|json");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            grqsm::SystemConfig cfg;
            cfg.mode = grqsm::mode_from_string(mode_str);
            cfg.n_ris = n_ris;
            cfg.n_rx = n_rx;
            cfg.k_active = k;
            cfg.es = es;
            cfg.snr_db_grid = parse_snr_grid(snr_text);
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.threads = threads;
            cfg.validate();
            const grqsm::SweepResult result = grqsm::run_ber_sweep(cfg);
            grqsm::emit_results(result.records, out_path,
                                grqsm::format_from_string(format_str));
            std::printf("wrote %zu records to %s\n", result.records.size(), out_path.c_str());
            if (result.nonconverged_trials > 0)
                std::fprintf(stderr, "warning: %llu trials used a non-converged solve\n",
                             static_cast<unsigned long long>(result.nonconverged_trials));
        } else if (stats->parsed()) {
            grqsm::LambdaStatsOptions opts;
            opts.threads = stats_threads;
            if (stats_solver == "kkt")
                opts.use_kkt = true;
            else if (stats_solver == "dual")
                opts.use_kkt = false;
            else
                throw std::invalid_argument("--solver must be kkt or dual");
            const auto records =
                grqsm::run_lambda_stats(parse_size_list(stats_list), stats_k, stats_nrx,
                                        stats_realizations, stats_seed, opts);
            grqsm::emit_stat_records(records, stats_out,
                                     grqsm::format_from_string(stats_format));
            std::printf("wrote %zu records to %s\n", records.size(), stats_out.c_str());
        } else if (bench->parsed()) {
            const auto records = grqsm::run_runtime_bench(parse_size_list(bench_list), bench_nrx,
                                                          bench_realizations, bench_seed);
            grqsm::emit_runtime_records(records, bench_out,
                                        grqsm::format_from_string(bench_format));
            std::printf("wrote %zu records to %s\n", records.size(), bench_out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
