#ifndef GRQSM_SIM_HPP
#define GRQSM_SIM_HPP

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "grqsm/channel.hpp"
#include "grqsm/config.hpp"
#include "grqsm/index_map.hpp"
#include "grqsm/phase_opt.hpp"
#include "grqsm/rng.hpp"
#include "grqsm/transceiver.hpp"

namespace grqsm {

struct BerRecord {
    std::string scheme;
    std::size_t n_ris = 0, n_rx = 0, k = 0;
    double snr_db = 0.0;
    std::size_t trials = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t total_bits = 0;
    double ber = 0.0;
    std::uint64_t seed = 0;
};

struct StatRecord {
    std::size_t n_ris = 0, k = 0, n_rx = 0, realizations = 0;
    double mean_lambda1 = 0.0;
    double var_lambda1 = 0.0;
    std::uint64_t seed = 0;
};

struct RuntimeRecord {
    std::size_t n_ris = 0, n_rx = 0, realizations = 0;
    double mean_solve_seconds = 0.0;
    double mean_dual_value = 0.0; // solver output aggregate; seed-deterministic
    std::uint64_t seed = 0;
};

struct SweepResult {
    std::vector<BerRecord> records;
    std::uint64_t nonconverged_trials = 0;
};

enum class OutputFormat { csv, json };

inline OutputFormat format_from_string(const std::string& s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw std::invalid_argument("unknown output format: " + s);
}

namespace detail {

// stream-id domains so different harness entry points never share substreams
inline constexpr std::uint64_t kDomainBer = 0x42455253ULL;     // "BERS"
inline constexpr std::uint64_t kDomainStats = 0x53544154ULL;   // "STAT"
inline constexpr std::uint64_t kDomainRuntime = 0x52554e54ULL; // "RUNT"

/// Static partition of [0, count) over a worker pool. Each item writes only
/// results indexed by its own id, so the outcome is identical for any worker
/// count.
template <typename Fn>
inline void parallel_items(std::size_t count, std::size_t threads, Fn&& fn) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    threads = std::min(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline std::uint64_t hamming(const BitVec& a, const BitVec& b) {
    std::uint64_t e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] != b[i]) ? 1u : 0u;
    return e;
}

inline std::string fmt_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

inline SpatialSymbol random_symbol(SubStream& rng, std::size_t n_rx, std::size_t k) {
    SpatialSymbol sym;
    const std::uint64_t combos = binomial(static_cast<unsigned>(n_rx), static_cast<unsigned>(k));
    sym.set_i = unrank_combination(rng.next_below(combos), static_cast<int>(n_rx),
                                   static_cast<int>(k));
    sym.set_q = unrank_combination(rng.next_below(combos), static_cast<int>(n_rx),
                                   static_cast<int>(k));
    sym.pol_i.resize(k);
    sym.pol_q.resize(k);
    for (std::size_t j = 0; j < k; ++j) sym.pol_i[j] = rng.next_bit() ? -1 : +1;
    for (std::size_t j = 0; j < k; ++j) sym.pol_q[j] = rng.next_bit() ? -1 : +1;
    return sym;
}

} // namespace detail

/// Monte-Carlo BER sweep over cfg.snr_db_grid. Each (SNR point, trial) owns a
/// derived substream, so records are bit-identical for any worker count. The
/// multicast mode produces two records per SNR point, one for the exact ML
/// detector and one for the approximate (real-coefficient) variant.
inline SweepResult run_ber_sweep(const SystemConfig& cfg) {
    cfg.validate();
    SweepResult result;

    const bool multicast = cfg.mode == Mode::multicast;
    const RatePlan plan = multicast
                              ? RatePlan{}
                              : RatePlan::make(static_cast<int>(cfg.n_rx),
                                               static_cast<int>(cfg.k_active));
    const Constellation qam = make_4qam(cfg.es);
    const std::size_t bits_per_trial =
        multicast ? static_cast<std::size_t>(qam.bits_per_symbol)
                  : static_cast<std::size_t>(plan.total);

    for (std::size_t sp = 0; sp < cfg.snr_db_grid.size(); ++sp) {
        const double snr_db = cfg.snr_db_grid[sp];
        const double n0 = cfg.noise_power(snr_db);

        std::vector<std::uint64_t> err_a(cfg.trials, 0), err_b(cfg.trials, 0);
        std::vector<std::uint8_t> nonconv(cfg.trials, 0);

        detail::parallel_items(cfg.trials, cfg.threads, [&](std::size_t t) {
            SubStream rs(cfg.seed, detail::kDomainBer, sp, t);
            ChannelRealization ch = gen_channel(rs, cfg.n_rx, cfg.n_ris);
            if (multicast) {
                const PhaseSolution sol = multicast_optimize(ch);
                if (!sol.converged) nonconv[t] = 1;
                const int idx = static_cast<int>(rs.next_below(qam.points.size()));
                const EffectiveChannel g = effective_coefficients(ch, sol.omega);
                const auto y = received_signal(ch, sol.omega, qam.points[idx], n0, rs, cfg.es);
                const cplx geff = std::sqrt(cfg.es) * g[0];
                const int hat_exact = multicast_detect(y[0], geff, qam, false);
                const int hat_approx = multicast_detect(y[0], geff, qam, true);
                err_a[t] = static_cast<std::uint64_t>(__builtin_popcount(
                    static_cast<unsigned>(idx ^ hat_exact)));
                err_b[t] = static_cast<std::uint64_t>(__builtin_popcount(
                    static_cast<unsigned>(idx ^ hat_approx)));
                return;
            }
            BitVec bits(plan.total);
            for (auto& b : bits) b = rs.next_bit() ? 1 : 0;
            std::vector<cplx> omega;
            if (cfg.mode == Mode::benchmark_partitioned) {
                const SpatialSymbol sym = bits_to_symbol(bits, plan);
                omega = benchmark_partitioned(ch, sym);
            } else {
                const TransmitMode tm = cfg.mode == Mode::grqsm_optimal
                                            ? TransmitMode::optimal
                                            : TransmitMode::suboptimal;
                TransmitResult tx =
                    grqsm_transmit(bits, ch, static_cast<int>(cfg.k_active), tm);
                if (!tx.solution.converged) nonconv[t] = 1;
                omega = std::move(tx.omega);
            }
            const auto y = received_signal(ch, omega, cplx{1.0, 0.0}, n0, rs, cfg.es);
            const DetectionResult det = grqsm_receive(y, plan);
            err_a[t] = detail::hamming(bits, det.bits_hat);
        });

        std::uint64_t errors_a = 0, errors_b = 0;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            errors_a += err_a[t];
            errors_b += err_b[t];
            result.nonconverged_trials += nonconv[t];
        }

        const std::uint64_t total = static_cast<std::uint64_t>(cfg.trials) * bits_per_trial;
        BerRecord rec;
        rec.scheme = multicast ? "multicast-exact" : to_string(cfg.mode);
        rec.n_ris = cfg.n_ris;
        rec.n_rx = cfg.n_rx;
        rec.k = multicast ? cfg.n_rx : cfg.k_active;
        rec.snr_db = snr_db;
        rec.trials = cfg.trials;
        rec.bit_errors = errors_a;
        rec.total_bits = total;
        rec.ber = static_cast<double>(errors_a) / static_cast<double>(total);
        rec.seed = cfg.seed;
        result.records.push_back(rec);
        if (multicast) {
            rec.scheme = "multicast-approx";
            rec.bit_errors = errors_b;
            rec.ber = static_cast<double>(errors_b) / static_cast<double>(total);
            result.records.push_back(rec);
        }
    }
    return result;
}

struct LambdaStatsOptions {
    std::size_t threads = 1;
    bool use_kkt = true; // Newton fast path (with reference fallback)
};

/// Mean and variance of the first multiplier over random channel/symbol
/// draws, one record per RIS size.
inline std::vector<StatRecord> run_lambda_stats(const std::vector<std::size_t>& n_ris_list,
                                                std::size_t k, std::size_t n_rx,
                                                std::size_t realizations, std::uint64_t seed,
                                                const LambdaStatsOptions& opts = {}) {
    if (realizations < 2) throw std::invalid_argument("run_lambda_stats: realizations < 2");
    if (k < 1 || k > n_rx) throw std::invalid_argument("run_lambda_stats: need 1 <= K <= N_r");
    std::vector<StatRecord> out;
    for (std::size_t ni = 0; ni < n_ris_list.size(); ++ni) {
        const std::size_t n_ris = n_ris_list[ni];
        std::vector<double> lam1(realizations, 0.0);
        detail::parallel_items(realizations, opts.threads, [&](std::size_t r) {
            SubStream rs(seed, detail::kDomainStats, ni, r);
            const ChannelRealization ch = gen_channel(rs, n_rx, n_ris);
            const SpatialSymbol sym = detail::random_symbol(rs, n_rx, k);
            const DualWorkspace w = build_workspace(ch, sym);
            const PhaseSolution sol = opts.use_kkt ? solve_kkt(w) : solve_dual(w);
            lam1[r] = sol.lam[0];
        });
        double mean = 0.0;
        for (double v : lam1) mean += v;
        mean /= static_cast<double>(realizations);
        double var = 0.0;
        for (double v : lam1) var += (v - mean) * (v - mean);
        var /= static_cast<double>(realizations - 1);
        out.push_back(StatRecord{n_ris, k, n_rx, realizations, mean, var, seed});
    }
    return out;
}

/// Wall-clock mean of the multicast phase solve per channel realization.
/// Runs serially so the timings are not polluted by contention; everything
/// except the timing fields is seed-deterministic.
inline std::vector<RuntimeRecord> run_runtime_bench(const std::vector<std::size_t>& n_ris_list,
                                                    std::size_t n_rx, std::size_t realizations,
                                                    std::uint64_t seed) {
    if (realizations < 1) throw std::invalid_argument("run_runtime_bench: realizations < 1");
    std::vector<RuntimeRecord> out;
    for (std::size_t ni = 0; ni < n_ris_list.size(); ++ni) {
        const std::size_t n_ris = n_ris_list[ni];
        double total_seconds = 0.0;
        double total_dual = 0.0;
        for (std::size_t r = 0; r < realizations; ++r) {
            SubStream rs(seed, detail::kDomainRuntime, ni, r);
            const ChannelRealization ch = gen_channel(rs, n_rx, n_ris);
            const auto t0 = std::chrono::steady_clock::now();
            const PhaseSolution sol = multicast_optimize(ch);
            const auto t1 = std::chrono::steady_clock::now();
            total_seconds += std::chrono::duration<double>(t1 - t0).count();
            total_dual += sol.dual_value;
        }
        out.push_back(RuntimeRecord{n_ris, n_rx, realizations,
                                    total_seconds / static_cast<double>(realizations),
                                    total_dual / static_cast<double>(realizations), seed});
    }
    return out;
}

/// CSV schema (fixed): scheme,n_ris,n_rx,k,snr_db,trials,bit_errors,total_bits,ber,seed
/// JSON: array of objects with the same fields.
inline void emit_results(const std::vector<BerRecord>& records, const std::string& path,
                         OutputFormat format) {
    std::ofstream out = detail::open_out(path);
    if (format == OutputFormat::csv) {
        out << "scheme,n_ris,n_rx,k,snr_db,trials,bit_errors,total_bits,ber,seed\n";
        for (const auto& r : records)
            out << r.scheme << ',' << r.n_ris << ',' << r.n_rx << ',' << r.k << ','
                << detail::fmt_double(r.snr_db) << ',' << r.trials << ',' << r.bit_errors << ','
                << r.total_bits << ',' << detail::fmt_double(r.ber) << ',' << r.seed << '\n';
    } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : records)
            arr.push_back({{"scheme", r.scheme},
                           {"n_ris", r.n_ris},
                           {"n_rx", r.n_rx},
                           {"k", r.k},
                           {"snr_db", r.snr_db},
                           {"trials", r.trials},
                           {"bit_errors", r.bit_errors},
                           {"total_bits", r.total_bits},
                           {"ber", r.ber},
                           {"seed", r.seed}});
        out << arr.dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void emit_stat_records(const std::vector<StatRecord>& records, const std::string& path,
                              OutputFormat format) {
    std::ofstream out = detail::open_out(path);
    if (format == OutputFormat::csv) {
        out << "n_ris,k,n_rx,realizations,mean_lambda1,var_lambda1,seed\n";
        for (const auto& r : records)
            out << r.n_ris << ',' << r.k << ',' << r.n_rx << ',' << r.realizations << ','
                << detail::fmt_double(r.mean_lambda1) << ',' << detail::fmt_double(r.var_lambda1)
                << ',' << r.seed << '\n';
    } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : records)
            arr.push_back({{"n_ris", r.n_ris},
                           {"k", r.k},
                           {"n_rx", r.n_rx},
                           {"realizations", r.realizations},
                           {"mean_lambda1", r.mean_lambda1},
                           {"var_lambda1", r.var_lambda1},
                           {"seed", r.seed}});
        out << arr.dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void emit_runtime_records(const std::vector<RuntimeRecord>& records,
                                 const std::string& path, OutputFormat format) {
    std::ofstream out = detail::open_out(path);
    if (format == OutputFormat::csv) {
        out << "n_ris,n_rx,realizations,mean_solve_seconds,mean_dual_value,seed\n";
        for (const auto& r : records)
            out << r.n_ris << ',' << r.n_rx << ',' << r.realizations << ','
                << detail::fmt_double(r.mean_solve_seconds) << ','
                << detail::fmt_double(r.mean_dual_value) << ',' << r.seed << '\n';
    } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : records)
            arr.push_back({{"n_ris", r.n_ris},
                           {"n_rx", r.n_rx},
                           {"realizations", r.realizations},
                           {"mean_solve_seconds", r.mean_solve_seconds},
                           {"mean_dual_value", r.mean_dual_value},
                           {"seed", r.seed}});
        out << arr.dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace grqsm

#endif // GRQSM_SIM_HPP
