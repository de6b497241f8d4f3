#ifndef GRQSM_TRANSCEIVER_HPP
#define GRQSM_TRANSCEIVER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "grqsm/channel.hpp"
#include "grqsm/index_map.hpp"
#include "grqsm/phase_opt.hpp"

namespace grqsm {

/// Gray-labeled square constellation with average energy es.
struct Constellation {
    std::vector<cplx> points;
    int bits_per_symbol = 0;
};

/// 4-QAM, points (+-1 +- j) sqrt(es/2); first bit -> real sign, second bit
/// -> imaginary sign, 0 maps to +.
inline Constellation make_4qam(double es = 1.0) {
    const double s = std::sqrt(es / 2.0);
    Constellation c;
    c.bits_per_symbol = 2;
    c.points.resize(4);
    for (int idx = 0; idx < 4; ++idx) {
        const double re = (idx & 2) ? -s : s;
        const double im = (idx & 1) ? -s : s;
        c.points[idx] = cplx{re, im};
    }
    return c;
}

struct DetectionResult {
    std::vector<int> set_i_hat, set_q_hat;
    std::vector<int> pol_i_hat, pol_q_hat;
    BitVec bits_hat;
};

struct TransmitResult {
    std::vector<cplx> omega;
    SpatialSymbol symbol;
    PhaseSolution solution;
};

enum class TransmitMode { optimal, suboptimal };

/// Map information bits to a spatial symbol and design the RIS phases for it.
inline TransmitResult grqsm_transmit(const BitVec& bits, const ChannelRealization& ch,
                                     int k_active, TransmitMode mode,
                                     const SolverOptions& opts = {}) {
    const RatePlan plan = RatePlan::make(static_cast<int>(ch.n_rx), k_active);
    TransmitResult tx;
    tx.symbol = bits_to_symbol(bits, plan);
    const DualWorkspace w = build_workspace(ch, tx.symbol);
    tx.solution =
        (mode == TransmitMode::optimal) ? solve_dual(w, opts) : suboptimal_solution(w);
    tx.omega = tx.solution.omega;
    return tx;
}

namespace detail {

/// Indices (1-based, sorted) of the k largest values; ties go to the smaller
/// antenna index. Polarities are the signs at the selected antennas, with
/// sign(0) = +1.
inline void top_k(const std::vector<double>& comp, int k, std::vector<int>& set_out,
                  std::vector<int>& pol_out) {
    const int n = static_cast<int>(comp.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(comp[a]) > std::abs(comp[b]);
    });
    order.resize(k);
    std::sort(order.begin(), order.end());
    set_out.resize(k);
    pol_out.resize(k);
    for (int j = 0; j < k; ++j) {
        set_out[j] = order[j] + 1;
        pol_out[j] = comp[order[j]] < 0.0 ? -1 : +1;
    }
}

inline std::uint64_t clamp_rank(std::uint64_t rank, int bits) {
    const std::uint64_t limit = std::uint64_t{1} << bits;
    return rank < limit ? rank : limit - 1;
}

} // namespace detail

/// Successive greedy detector: the K antennas with the largest |Re(y)| form
/// the I-branch estimate, the K largest |Im(y)| the Q-branch estimate.
inline DetectionResult greedy_detect(const std::vector<cplx>& y, int k) {
    if (k < 1 || k > static_cast<int>(y.size()))
        throw std::invalid_argument("greedy_detect: need 1 <= k <= N_r");
    std::vector<double> re(y.size()), im(y.size());
    for (std::size_t l = 0; l < y.size(); ++l) {
        re[l] = y[l].real();
        im[l] = y[l].imag();
    }
    DetectionResult det;
    detail::top_k(re, k, det.set_i_hat, det.pol_i_hat);
    detail::top_k(im, k, det.set_q_hat, det.pol_q_hat);
    return det;
}

/// Greedy detection followed by the inverse codebook map. A detected antenna
/// set outside the truncated codebook is clamped to the nearest valid rank so
/// the receiver always emits R bits.
inline DetectionResult grqsm_receive(const std::vector<cplx>& y, const RatePlan& plan) {
    if (static_cast<int>(y.size()) != plan.n_rx)
        throw std::invalid_argument("grqsm_receive: y length != N_r");
    DetectionResult det = greedy_detect(y, plan.k);
    const std::uint64_t rank_i =
        detail::clamp_rank(rank_combination(det.set_i_hat, plan.n_rx), plan.bits_index_each);
    const std::uint64_t rank_q =
        detail::clamp_rank(rank_combination(det.set_q_hat, plan.n_rx), plan.bits_index_each);
    det.bits_hat.assign(plan.total, 0);
    int pos = 0;
    grqsm::detail::uint_to_bits(rank_i, det.bits_hat, pos, plan.bits_index_each);
    pos += plan.bits_index_each;
    grqsm::detail::uint_to_bits(rank_q, det.bits_hat, pos, plan.bits_index_each);
    pos += plan.bits_index_each;
    for (int j = 0; j < plan.k; ++j) det.bits_hat[pos + j] = det.pol_i_hat[j] < 0 ? 1 : 0;
    pos += plan.k;
    for (int j = 0; j < plan.k; ++j) det.bits_hat[pos + j] = det.pol_q_hat[j] < 0 ? 1 : 0;
    return det;
}

/// One-dimensional ML detection for the multicast link. Exact mode scores
/// |y - g s|; the approximate variant only needs the real part of the
/// effective coefficient, which the phase design equalizes across users.
inline int multicast_detect(cplx y, cplx g, const Constellation& c, bool approximate) {
    if (c.points.empty()) throw std::invalid_argument("multicast_detect: empty constellation");
    const cplx gc = approximate ? cplx{g.real(), 0.0} : g;
    int best = 0;
    double best_metric = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < c.points.size(); ++idx) {
        const double metric = std::abs(y - gc * c.points[idx]);
        if (metric < best_metric) {
            best_metric = metric;
            best = static_cast<int>(idx);
        }
    }
    return best;
}

/// RIS-partitioning benchmark: 2K contiguous blocks of floor(N/2K) elements
/// (remainder to the last block). Block 2k-1 co-phases its elements toward
/// the real part at antenna m_k with sign xR_k; block 2k steers toward the
/// imaginary part at n_k with sign xI_k.
inline std::vector<cplx> benchmark_partitioned(const ChannelRealization& ch,
                                               const SpatialSymbol& sym) {
    const std::size_t k = sym.set_i.size();
    const std::size_t blocks = 2 * k;
    if (ch.n_ris < blocks)
        throw std::invalid_argument("benchmark_partitioned: need N >= 2K");
    const std::size_t base = ch.n_ris / blocks;
    std::vector<cplx> omega(ch.n_ris, cplx{1.0, 0.0});
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t lo = b * base;
        const std::size_t hi = (b + 1 == blocks) ? ch.n_ris : lo + base;
        const std::size_t kk = b / 2;
        const bool q_branch = (b % 2) != 0;
        const std::size_t ant = static_cast<std::size_t>(q_branch ? sym.set_q[kk] : sym.set_i[kk]) - 1;
        const double sgn = static_cast<double>(q_branch ? sym.pol_q[kk] : sym.pol_i[kk]);
        const cplx* row = ch.h.data() + ant * ch.n_ris;
        for (std::size_t i = lo; i < hi; ++i) {
            const double mag = std::abs(row[i]);
            if (mag == 0.0) continue; // leave omega_i = 1
            cplx w = sgn * std::conj(row[i]) / mag;
            if (q_branch) w *= cplx{0.0, 1.0};
            omega[i] = w;
        }
    }
    return omega;
}

} // namespace grqsm

#endif // GRQSM_TRANSCEIVER_HPP
