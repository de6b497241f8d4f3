#ifndef GRQSM_CONFIG_HPP
#define GRQSM_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace grqsm {

enum class Mode {
    grqsm_optimal,
    grqsm_suboptimal,
    benchmark_partitioned,
    multicast,
};

inline const char* to_string(Mode m) {
    switch (m) {
    case Mode::grqsm_optimal:         return "grqsm-optimal";
    case Mode::grqsm_suboptimal:      return "grqsm-suboptimal";
    case Mode::benchmark_partitioned: return "benchmark-partitioned";
    case Mode::multicast:             return "multicast";
    }
    return "?";
}

inline Mode mode_from_string(const std::string& s) {
    if (s == "grqsm-optimal") return Mode::grqsm_optimal;
    if (s == "grqsm-suboptimal") return Mode::grqsm_suboptimal;
    if (s == "benchmark-partitioned") return Mode::benchmark_partitioned;
    if (s == "multicast") return Mode::multicast;
    throw std::invalid_argument("unknown mode: " + s);
}

/// Full scenario description for one simulation run.
struct SystemConfig {
    std::size_t n_ris = 256;        // RIS elements N
    std::size_t n_rx = 8;           // receive antennas N_r
    std::size_t k_active = 2;       // selected antennas per branch K
    double es = 1.0;                // symbol energy E_s
    std::vector<double> snr_db_grid;
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    Mode mode = Mode::grqsm_optimal;
    std::size_t threads = 1;        // worker count; results do not depend on it

    void validate() const {
        if (n_ris < 1) throw std::invalid_argument("n_ris must be >= 1");
        if (n_rx < 1) throw std::invalid_argument("n_rx must be >= 1");
        if (k_active < 1 || k_active > n_rx)
            throw std::invalid_argument("k_active must satisfy 1 <= K <= N_r");
        if (trials < 1) throw std::invalid_argument("trials must be >= 1");
        if (!(es > 0.0)) throw std::invalid_argument("es must be > 0");
        if (snr_db_grid.empty())
            throw std::invalid_argument("snr_db_grid must not be empty");
        if (mode == Mode::benchmark_partitioned && n_ris < 2 * k_active)
            throw std::invalid_argument("benchmark-partitioned requires N >= 2K");
    }

    /// Noise power for one grid point: N_0 = E_s * 10^(-SNRdB/10).
    double noise_power(double snr_db) const {
        return es * std::pow(10.0, -snr_db / 10.0);
    }
};

} // namespace grqsm

#endif // GRQSM_CONFIG_HPP
