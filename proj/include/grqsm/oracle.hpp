#ifndef GRQSM_ORACLE_HPP
#define GRQSM_ORACLE_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "grqsm/channel.hpp"
#include "grqsm/index_map.hpp"

namespace grqsm {

/// Exhaustive phase grid for the brute-force references. The per-element
/// phase runs over [0, 360) degrees in steps of resolution_deg, which must
/// divide 360 evenly.
struct GridSpec {
    double resolution_deg = 1.0;
};

struct GridResult {
    double value = 0.0;
    std::vector<cplx> omega;
};

namespace oracle_detail {

// Deliberately self-contained: the oracle recomputes the targeted component
// values straight from the channel and symbol, sharing no code with the
// solver it is used to check.
struct Rows {
    std::size_t rows = 0, n = 0;
    std::vector<double> p, q; // value_r = sum_i beta_i (p cos a_i + q sin a_i)
};

inline Rows rows_grqsm(const ChannelRealization& ch, const SpatialSymbol& sym) {
    const std::size_t k = sym.set_i.size();
    Rows r;
    r.rows = 2 * k;
    r.n = ch.n_ris;
    r.p.resize(r.rows * r.n);
    r.q.resize(r.rows * r.n);
    for (std::size_t kk = 0; kk < k; ++kk) {
        const cplx* row_m = ch.h.data() + (static_cast<std::size_t>(sym.set_i[kk]) - 1) * ch.n_ris;
        const cplx* row_n = ch.h.data() + (static_cast<std::size_t>(sym.set_q[kk]) - 1) * ch.n_ris;
        const double xr = sym.pol_i[kk], xi = sym.pol_q[kk];
        for (std::size_t i = 0; i < r.n; ++i) {
            r.p[kk * r.n + i] = xr * row_m[i].real();
            r.q[kk * r.n + i] = -xr * row_m[i].imag();
            r.p[(k + kk) * r.n + i] = xi * row_n[i].imag();
            r.q[(k + kk) * r.n + i] = xi * row_n[i].real();
        }
    }
    return r;
}

inline Rows rows_multicast(const ChannelRealization& ch) {
    Rows r;
    r.rows = ch.n_rx;
    r.n = ch.n_ris;
    r.p.resize(r.rows * r.n);
    r.q.resize(r.rows * r.n);
    for (std::size_t l = 0; l < ch.n_rx; ++l)
        for (std::size_t i = 0; i < ch.n_ris; ++i) {
            r.p[l * r.n + i] = ch.at(l, i).real();
            r.q[l * r.n + i] = -ch.at(l, i).imag();
        }
    return r;
}

inline GridResult grid_search(const Rows& rows, const std::vector<double>& beta,
                              const GridSpec& grid) {
    if (rows.n > 3)
        throw std::invalid_argument("grid oracle: oracle-scale-exceeded (N must be <= 3)");
    if (rows.n < 1) throw std::invalid_argument("grid oracle: empty problem");
    const double res = grid.resolution_deg;
    if (!(res > 0.0) || res > 1.0 + 1e-12)
        throw std::invalid_argument("grid oracle: resolution must lie in (0, 1] degrees");
    const double steps = 360.0 / res;
    const std::size_t T = static_cast<std::size_t>(std::llround(steps));
    if (std::abs(steps - static_cast<double>(T)) > 1e-9)
        throw std::invalid_argument("grid oracle: resolution must divide 360 evenly");

    const std::size_t R = rows.rows, N = rows.n;
    // ct[(i*R + r)*T + t] = beta_i * (p cos a_t + q sin a_t)
    std::vector<double> ct(N * R * T);
    for (std::size_t t = 0; t < T; ++t) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(T);
        const double ca = std::cos(a), sa = std::sin(a);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t r = 0; r < R; ++r)
                ct[(i * R + r) * T + t] =
                    beta[i] * (rows.p[r * N + i] * ca + rows.q[r * N + i] * sa);
    }

    double best = -std::numeric_limits<double>::infinity();
    std::size_t bt[3] = {0, 0, 0};
    std::vector<double> acc0(R), acc1(R);

    const auto minrow = [&](const std::vector<double>& base, std::size_t axis, std::size_t t) {
        double mv = base[0] + ct[(axis * R + 0) * T + t];
        for (std::size_t r = 1; r < R; ++r)
            mv = std::min(mv, base[r] + ct[(axis * R + r) * T + t]);
        return mv;
    };

    if (N == 1) {
        std::vector<double> zero(R, 0.0);
        for (std::size_t t0 = 0; t0 < T; ++t0) {
            const double mv = minrow(zero, 0, t0);
            if (mv > best) {
                best = mv;
                bt[0] = t0;
            }
        }
    } else if (N == 2) {
        for (std::size_t t0 = 0; t0 < T; ++t0) {
            for (std::size_t r = 0; r < R; ++r) acc0[r] = ct[(0 * R + r) * T + t0];
            for (std::size_t t1 = 0; t1 < T; ++t1) {
                const double mv = minrow(acc0, 1, t1);
                if (mv > best) {
                    best = mv;
                    bt[0] = t0;
                    bt[1] = t1;
                }
            }
        }
    } else {
        for (std::size_t t0 = 0; t0 < T; ++t0) {
            for (std::size_t r = 0; r < R; ++r) acc0[r] = ct[(0 * R + r) * T + t0];
            for (std::size_t t1 = 0; t1 < T; ++t1) {
                for (std::size_t r = 0; r < R; ++r)
                    acc1[r] = acc0[r] + ct[(1 * R + r) * T + t1];
                // hot loop: pure max first, then a rare rescan for the first
                // achiever keeps the scan order (and thus ties) deterministic
                double local = -std::numeric_limits<double>::infinity();
                if (R == 2) {
                    const double* c0 = &ct[(2 * R + 0) * T];
                    const double* c1 = &ct[(2 * R + 1) * T];
                    const double b0 = acc1[0], b1 = acc1[1];
                    for (std::size_t t2 = 0; t2 < T; ++t2) {
                        const double mv = std::min(b0 + c0[t2], b1 + c1[t2]);
                        local = std::max(local, mv);
                    }
                } else {
                    for (std::size_t t2 = 0; t2 < T; ++t2)
                        local = std::max(local, minrow(acc1, 2, t2));
                }
                if (local > best) {
                    for (std::size_t t2 = 0; t2 < T; ++t2) {
                        if (minrow(acc1, 2, t2) == local) {
                            best = local;
                            bt[0] = t0;
                            bt[1] = t1;
                            bt[2] = t2;
                            break;
                        }
                    }
                }
            }
        }
    }

    GridResult out;
    out.value = best;
    out.omega.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(bt[i]) / static_cast<double>(T);
        out.omega[i] = cplx{std::cos(a), std::sin(a)};
    }
    return out;
}

} // namespace oracle_detail

/// Brute-force reference for the GRQSM max-min value: exhaustively evaluates
/// min{X_k, Y_k} on the phase grid and returns the maximum. Cost is
/// (360/res)^N, so N is capped at 3.
inline GridResult grid_maxmin(const ChannelRealization& ch, const SpatialSymbol& sym,
                              const GridSpec& grid) {
    return oracle_detail::grid_search(oracle_detail::rows_grqsm(ch, sym), ch.beta, grid);
}

/// Brute-force reference for the multicast design: maximizes the smallest
/// real effective coefficient over all receive antennas.
inline GridResult grid_maxmin_multicast(const ChannelRealization& ch, const GridSpec& grid) {
    return oracle_detail::grid_search(oracle_detail::rows_multicast(ch), ch.beta, grid);
}

/// Reference detector: scores every codebook word by the summed selected
/// |Re|/|Im| components and keeps the best (smallest rank on ties). The two
/// branches are independent, so each is scanned separately.
inline BitVec exhaustive_detect(const std::vector<cplx>& y, const RatePlan& plan) {
    if (binomial(plan.n_rx, plan.k) > 10000)
        throw std::invalid_argument("exhaustive_detect: codebook too large for the oracle");
    if (static_cast<int>(y.size()) != plan.n_rx)
        throw std::invalid_argument("exhaustive_detect: y length != N_r");

    const std::uint64_t words = std::uint64_t{1} << plan.bits_index_each;
    const auto scan = [&](bool q_branch) {
        std::uint64_t best_rank = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        std::vector<int> best_set;
        for (std::uint64_t rank = 0; rank < words; ++rank) {
            const std::vector<int> set = unrank_combination(rank, plan.n_rx, plan.k);
            double score = 0.0;
            for (int ant : set) {
                const cplx v = y[static_cast<std::size_t>(ant) - 1];
                score += std::abs(q_branch ? v.imag() : v.real());
            }
            if (score > best_score) {
                best_score = score;
                best_rank = rank;
                best_set = set;
            }
        }
        return std::pair<std::uint64_t, std::vector<int>>{best_rank, best_set};
    };

    const auto [rank_i, set_i] = scan(false);
    const auto [rank_q, set_q] = scan(true);

    BitVec bits(plan.total, 0);
    int pos = 0;
    detail::uint_to_bits(rank_i, bits, pos, plan.bits_index_each);
    pos += plan.bits_index_each;
    detail::uint_to_bits(rank_q, bits, pos, plan.bits_index_each);
    pos += plan.bits_index_each;
    for (int j = 0; j < plan.k; ++j)
        bits[pos + j] = y[static_cast<std::size_t>(set_i[j]) - 1].real() < 0.0 ? 1 : 0;
    pos += plan.k;
    for (int j = 0; j < plan.k; ++j)
        bits[pos + j] = y[static_cast<std::size_t>(set_q[j]) - 1].imag() < 0.0 ? 1 : 0;
    return bits;
}

} // namespace grqsm

#endif // GRQSM_ORACLE_HPP
