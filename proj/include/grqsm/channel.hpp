#ifndef GRQSM_CHANNEL_HPP
#define GRQSM_CHANNEL_HPP

#include <complex>
#include <stdexcept>
#include <vector>

#include "grqsm/rng.hpp"

namespace grqsm {

using cplx = std::complex<double>;

/// One draw of the fading environment: H (N_r x N, receiver <- RIS) and
/// f (N, RIS <- transmitter), both i.i.d. CN(0,1), plus the amplitude/phase
/// decomposition of f used throughout the phase design.
struct ChannelRealization {
    std::size_t n_rx = 0;
    std::size_t n_ris = 0;
    std::vector<cplx> h;      // row-major n_rx x n_ris
    std::vector<cplx> f;      // n_ris
    std::vector<double> beta; // |f[i]|
    std::vector<double> psi;  // arg(f[i]) in (-pi, pi]

    const cplx& at(std::size_t l, std::size_t i) const { return h[l * n_ris + i]; }
    cplx& at(std::size_t l, std::size_t i) { return h[l * n_ris + i]; }
};

/// Effective RIS-assisted channel coefficients g_l = sum_i beta_i h_{l,i} w_i.
using EffectiveChannel = std::vector<cplx>;

inline ChannelRealization gen_channel(SubStream& rng, std::size_t n_rx, std::size_t n_ris) {
    ChannelRealization ch;
    ch.n_rx = n_rx;
    ch.n_ris = n_ris;
    ch.h.resize(n_rx * n_ris);
    for (auto& v : ch.h) v = rng.next_cgauss(1.0);
    ch.f.resize(n_ris);
    ch.beta.resize(n_ris);
    ch.psi.resize(n_ris);
    for (std::size_t i = 0; i < n_ris; ++i) {
        ch.f[i] = rng.next_cgauss(1.0);
        ch.beta[i] = std::abs(ch.f[i]);
        ch.psi[i] = std::arg(ch.f[i]);
    }
    return ch;
}

/// g_l = sum_i beta_i h_{l,i} omega_i. Equivalent to H(theta (.) f) with
/// theta_i = omega_i e^{-j psi_i}; the f phases cancel by construction.
inline EffectiveChannel effective_coefficients(const ChannelRealization& ch,
                                               const std::vector<cplx>& omega) {
    if (omega.size() != ch.n_ris)
        throw std::invalid_argument("effective_coefficients: omega length != N");
    EffectiveChannel g(ch.n_rx, cplx{0.0, 0.0});
    for (std::size_t l = 0; l < ch.n_rx; ++l) {
        cplx acc{0.0, 0.0};
        const cplx* row = ch.h.data() + l * ch.n_ris;
        for (std::size_t i = 0; i < ch.n_ris; ++i) acc += ch.beta[i] * row[i] * omega[i];
        g[l] = acc;
    }
    return g;
}

/// y = sqrt(es) * g * s + n, noise i.i.d. CN(0, n0) per antenna.
/// GRQSM modes pass s = 1 (the source emits the bare carrier; information
/// rides on omega); multicast passes the modulated symbol.
inline std::vector<cplx> received_signal(const ChannelRealization& ch,
                                         const std::vector<cplx>& omega, cplx s,
                                         double n0, SubStream& rng, double es = 1.0) {
    const EffectiveChannel g = effective_coefficients(ch, omega);
    const double amp = std::sqrt(es);
    std::vector<cplx> y(ch.n_rx);
    for (std::size_t l = 0; l < ch.n_rx; ++l) {
        cplx noise = (n0 > 0.0) ? rng.next_cgauss(n0) : cplx{0.0, 0.0};
        y[l] = amp * g[l] * s + noise;
    }
    return y;
}

} // namespace grqsm

#endif // GRQSM_CHANNEL_HPP
