#ifndef GRQSM_INDEX_MAP_HPP
#define GRQSM_INDEX_MAP_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace grqsm {

using BitVec = std::vector<std::uint8_t>; // values 0/1

inline std::uint64_t binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 r = 1;
    for (unsigned i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > static_cast<unsigned __int128>(UINT64_MAX))
            throw std::overflow_error("binomial: value does not fit in 64 bits");
    }
    return static_cast<std::uint64_t>(r);
}

inline unsigned floor_log2(std::uint64_t v) {
    unsigned r = 0;
    while (v >>= 1) ++r;
    return r;
}

/// rank-th k-subset of {1..n} in lexicographic order, rank in [0, C(n,k)).
inline std::vector<int> unrank_combination(std::uint64_t rank, int n, int k) {
    if (n < 0 || k < 0 || k > n)
        throw std::invalid_argument("unrank_combination: need 0 <= k <= n");
    if (rank >= binomial(n, k))
        throw std::invalid_argument("unrank_combination: rank out of range");
    std::vector<int> out;
    out.reserve(k);
    int next = 1;
    for (int slot = k; slot > 0; --slot) {
        for (;;) {
            const std::uint64_t block = binomial(n - next, slot - 1);
            if (rank < block) break;
            rank -= block;
            ++next;
        }
        out.push_back(next);
        ++next;
    }
    return out;
}

/// Inverse of unrank_combination; subset must be sorted, elements in [1, n].
inline std::uint64_t rank_combination(const std::vector<int>& subset, int n) {
    const int k = static_cast<int>(subset.size());
    std::uint64_t rank = 0;
    int prev = 0;
    for (int slot = 0; slot < k; ++slot) {
        const int c = subset[slot];
        if (c <= prev || c > n)
            throw std::invalid_argument("rank_combination: subset not sorted or out of range");
        for (int v = prev + 1; v < c; ++v) rank += binomial(n - v, k - slot - 1);
        prev = c;
    }
    return rank;
}

/// Bit budget of one spatial symbol: 2*floor(log2 C(N_r,K)) index bits plus
/// one polarity bit per selected antenna on each branch.
struct RatePlan {
    int n_rx = 0;
    int k = 0;
    int bits_index_each = 0; // floor(log2 C(N_r, K))
    int bits_index = 0;      // 2 * bits_index_each
    int bits_polarity = 0;   // 2K
    int total = 0;           // R = 2(K + floor(log2 C(N_r,K)))

    static RatePlan make(int n_rx, int k) {
        if (k < 1 || k > n_rx) throw std::invalid_argument("RatePlan: need 1 <= K <= N_r");
        RatePlan p;
        p.n_rx = n_rx;
        p.k = k;
        p.bits_index_each = static_cast<int>(floor_log2(binomial(n_rx, k)));
        p.bits_index = 2 * p.bits_index_each;
        p.bits_polarity = 2 * k;
        p.total = p.bits_index + p.bits_polarity;
        return p;
    }
};

/// Two independently selected K-subsets of receive antennas (I and Q branch)
/// plus one +-1 polarity per selection.
struct SpatialSymbol {
    std::vector<int> set_i; // sorted, antennas carrying the real part
    std::vector<int> set_q; // sorted, antennas carrying the imaginary part
    std::vector<int> pol_i; // +-1, x_P real polarities
    std::vector<int> pol_q; // +-1, x_P imaginary polarities
};

namespace detail {

inline std::uint64_t bits_to_uint(const BitVec& bits, int from, int count) {
    std::uint64_t v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | bits[from + i]; // MSB first
    return v;
}

inline void uint_to_bits(std::uint64_t v, BitVec& bits, int from, int count) {
    for (int i = count - 1; i >= 0; --i) {
        bits[from + i] = static_cast<std::uint8_t>(v & 1);
        v >>= 1;
    }
}

} // namespace detail

/// Codebook = the first 2^bits_index_each lexicographic combinations.
/// Polarity convention: bit 0 -> +1, bit 1 -> -1.
inline SpatialSymbol bits_to_symbol(const BitVec& bits, const RatePlan& plan) {
    if (static_cast<int>(bits.size()) != plan.total)
        throw std::invalid_argument("bits_to_symbol: wrong bit count");
    SpatialSymbol sym;
    int pos = 0;
    const std::uint64_t rank_i = detail::bits_to_uint(bits, pos, plan.bits_index_each);
    pos += plan.bits_index_each;
    const std::uint64_t rank_q = detail::bits_to_uint(bits, pos, plan.bits_index_each);
    pos += plan.bits_index_each;
    sym.set_i = unrank_combination(rank_i, plan.n_rx, plan.k);
    sym.set_q = unrank_combination(rank_q, plan.n_rx, plan.k);
    sym.pol_i.resize(plan.k);
    sym.pol_q.resize(plan.k);
    for (int j = 0; j < plan.k; ++j) sym.pol_i[j] = bits[pos + j] ? -1 : +1;
    pos += plan.k;
    for (int j = 0; j < plan.k; ++j) sym.pol_q[j] = bits[pos + j] ? -1 : +1;
    return sym;
}

inline BitVec symbol_to_bits(const SpatialSymbol& sym, const RatePlan& plan) {
    const std::uint64_t rank_i = rank_combination(sym.set_i, plan.n_rx);
    const std::uint64_t rank_q = rank_combination(sym.set_q, plan.n_rx);
    const std::uint64_t limit = std::uint64_t{1} << plan.bits_index_each;
    if (rank_i >= limit || rank_q >= limit)
        throw std::invalid_argument("symbol_to_bits: antenna set outside codebook");
    BitVec bits(plan.total, 0);
    int pos = 0;
    detail::uint_to_bits(rank_i, bits, pos, plan.bits_index_each);
    pos += plan.bits_index_each;
    detail::uint_to_bits(rank_q, bits, pos, plan.bits_index_each);
    pos += plan.bits_index_each;
    for (int j = 0; j < plan.k; ++j) bits[pos + j] = sym.pol_i[j] < 0 ? 1 : 0;
    pos += plan.k;
    for (int j = 0; j < plan.k; ++j) bits[pos + j] = sym.pol_q[j] < 0 ? 1 : 0;
    return bits;
}

} // namespace grqsm

#endif // GRQSM_INDEX_MAP_HPP
