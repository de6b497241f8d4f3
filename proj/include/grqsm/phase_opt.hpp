#ifndef GRQSM_PHASE_OPT_HPP
#define GRQSM_PHASE_OPT_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "grqsm/channel.hpp"
#include "grqsm/index_map.hpp"

namespace grqsm {

/// Per-instance coefficient tables for the max-min phase design:
/// A_{k,i} = xR_k hR_{m_k,i}   B_{k,i} = xI_k hI_{n_k,i}
/// C_{k,i} = -xR_k hI_{m_k,i}  D_{k,i} = xI_k hR_{n_k,i}
/// All matrices are K x N, row-major. Rebuild whenever the channel or the
/// spatial symbol changes.
struct DualWorkspace {
    std::size_t k = 0;
    std::size_t n = 0;
    std::vector<double> a, b, c, d;
    std::vector<double> beta;
};

inline DualWorkspace build_workspace(const ChannelRealization& ch, const SpatialSymbol& sym) {
    const std::size_t k = sym.set_i.size();
    if (sym.set_q.size() != k || sym.pol_i.size() != k || sym.pol_q.size() != k)
        throw std::invalid_argument("build_workspace: inconsistent symbol");
    DualWorkspace w;
    w.k = k;
    w.n = ch.n_ris;
    w.beta = ch.beta;
    w.a.resize(k * w.n);
    w.b.resize(k * w.n);
    w.c.resize(k * w.n);
    w.d.resize(k * w.n);
    for (std::size_t kk = 0; kk < k; ++kk) {
        const std::size_t m = static_cast<std::size_t>(sym.set_i[kk]) - 1;
        const std::size_t nn = static_cast<std::size_t>(sym.set_q[kk]) - 1;
        if (m >= ch.n_rx || nn >= ch.n_rx)
            throw std::invalid_argument("build_workspace: antenna index out of range");
        const double xr = static_cast<double>(sym.pol_i[kk]);
        const double xi = static_cast<double>(sym.pol_q[kk]);
        const cplx* row_m = ch.h.data() + m * ch.n_ris;
        const cplx* row_n = ch.h.data() + nn * ch.n_ris;
        for (std::size_t i = 0; i < w.n; ++i) {
            w.a[kk * w.n + i] = xr * row_m[i].real();
            w.c[kk * w.n + i] = -xr * row_m[i].imag();
            w.b[kk * w.n + i] = xi * row_n[i].imag();
            w.d[kk * w.n + i] = xi * row_n[i].real();
        }
    }
    return w;
}

struct SolverOptions {
    double rel_obj_tol = 1e-8;  // relative objective change window criterion
    int obj_window = 10;
    double rel_gap_tol = 1e-9;  // duality-gap certificate target
    std::size_t max_iter = 10000;
    bool prefer_newton = false; // try the KKT Newton fast path first
};

struct PhaseSolution {
    std::vector<cplx> omega;
    std::vector<double> lam; // lambda multipliers (X-branch rows)
    std::vector<double> del; // delta multipliers (Y-branch rows)
    double dual_value = 0.0;
    double primal_min = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool fallback = false; // Newton path failed, projected gradient used
};

struct PrimalValues {
    std::vector<double> x;
    std::vector<double> y;
};

/// 2-norm of a coefficient pair; all magnitudes here are O(N) at most, so the
/// overflow protection of std::hypot is unnecessary and its cost is not.
inline double detail_rad2(double x, double y) { return std::sqrt(x * x + y * y); }

namespace detail {

/// Generalized form shared by the GRQSM and multicast designs. Row r holds
/// two length-N coefficient vectors (p, q); its constraint value at a phase
/// configuration is val_r = sum_i beta_i (p_{r,i} wR_i + q_{r,i} wI_i).
/// The GRQSM problem contributes K X-rows (p=A,q=C) followed by K Y-rows
/// (p=B,q=D); multicast contributes one X-type row per receive antenna.
struct MaxMinRows {
    std::size_t rows = 0;
    std::size_t n = 0;
    std::vector<double> p, q; // rows x N, row-major
    std::vector<double> beta;
};

inline MaxMinRows rows_from_workspace(const DualWorkspace& w) {
    MaxMinRows r;
    r.rows = 2 * w.k;
    r.n = w.n;
    r.beta = w.beta;
    r.p.resize(r.rows * r.n);
    r.q.resize(r.rows * r.n);
    std::copy(w.a.begin(), w.a.end(), r.p.begin());
    std::copy(w.b.begin(), w.b.end(), r.p.begin() + w.k * w.n);
    std::copy(w.c.begin(), w.c.end(), r.q.begin());
    std::copy(w.d.begin(), w.d.end(), r.q.begin() + w.k * w.n);
    return r;
}

inline MaxMinRows rows_from_channel(const ChannelRealization& ch) {
    MaxMinRows r;
    r.rows = ch.n_rx;
    r.n = ch.n_ris;
    r.beta = ch.beta;
    r.p.resize(r.rows * r.n);
    r.q.resize(r.rows * r.n);
    for (std::size_t l = 0; l < ch.n_rx; ++l)
        for (std::size_t i = 0; i < ch.n_ris; ++i) {
            r.p[l * r.n + i] = ch.at(l, i).real();
            r.q[l * r.n + i] = -ch.at(l, i).imag();
        }
    return r;
}

/// One fused sweep over the RIS elements. Returns the dual objective and
/// fills, per row, both the dual gradient and the primal constraint value at
/// the recovered omega. The two coincide except on degenerate elements
/// (P=Q=0), where omega falls back to 1+0j and only the constraint value
/// picks up the p-coefficient.
struct Eval {
    double objective = 0.0;
    std::vector<double> grad;   // d objective / d v_r
    std::vector<double> vals;   // constraint values at omega(v)
    std::vector<double> wr, wi; // omega(v) components
    std::vector<double> radius; // |(P_i, Q_i)| per element
};

inline void evaluate(const MaxMinRows& m, const std::vector<double>& v, Eval& e) {
    const std::size_t R = m.rows, N = m.n;
    e.objective = 0.0;
    e.grad.assign(R, 0.0);
    e.vals.assign(R, 0.0);
    e.wr.resize(N);
    e.wi.resize(N);
    e.radius.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        double P = 0.0, Q = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            P += v[r] * m.p[r * N + i];
            Q += v[r] * m.q[r * N + i];
        }
        const double rad = detail_rad2(P, Q);
        e.radius[i] = rad;
        if (rad > 0.0) {
            const double bi = m.beta[i];
            e.objective += bi * rad;
            const double cr = P / rad, ci = Q / rad;
            e.wr[i] = cr;
            e.wi[i] = ci;
            for (std::size_t r = 0; r < R; ++r) {
                const double g = bi * (m.p[r * N + i] * cr + m.q[r * N + i] * ci);
                e.grad[r] += g;
                e.vals[r] += g;
            }
        } else {
            // zero-numerator element: omega = 1 by convention, zero subgradient
            e.wr[i] = 1.0;
            e.wi[i] = 0.0;
            for (std::size_t r = 0; r < R; ++r) e.vals[r] += m.beta[i] * m.p[r * N + i];
        }
    }
}

/// Per-element magnitude of the largest row coefficient pair; used to spot
/// elements whose combined numerator nearly vanishes.
inline std::vector<double> row_scales(const MaxMinRows& m) {
    std::vector<double> s(m.n, 0.0);
    for (std::size_t i = 0; i < m.n; ++i) {
        double mx = 0.0;
        for (std::size_t r = 0; r < m.rows; ++r)
            mx = std::max(mx, detail_rad2(m.p[r * m.n + i], m.q[r * m.n + i]));
        s[i] = mx;
    }
    return s;
}

/// The dual optimum regularly lands on a kink of the sum-of-norms objective:
/// some element's numerator pair (P_i, Q_i) is driven to zero, and the
/// closed-form phase recovery for that element becomes meaningless noise.
/// The phase of such an element is completed directly: with every other
/// element frozen, maximizing the smallest constraint value over one phase
/// is a max-min over offset sinusoids, whose optimum lies either at a row
/// peak or at a pairwise crossing. The current phase is always kept as a
/// candidate, so the completion can only raise the primal minimum.
inline bool polish_degenerate(const MaxMinRows& m, const std::vector<double>& scales, Eval& e) {
    const std::size_t R = m.rows, N = m.n;
    std::vector<std::size_t> suspects;
    for (std::size_t i = 0; i < N; ++i)
        if (scales[i] > 0.0 && e.radius[i] <= 1e-2 * scales[i]) suspects.push_back(i);
    if (suspects.empty()) return false;

    std::vector<double> a(R), b(R), c(R);
    for (int pass = 0; pass < 4; ++pass) {
        bool improved = false;
        for (const std::size_t i : suspects) {
            const double bi = m.beta[i];
            for (std::size_t r = 0; r < R; ++r) {
                a[r] = bi * m.p[r * N + i];
                b[r] = bi * m.q[r * N + i];
                c[r] = e.vals[r] - (a[r] * e.wr[i] + b[r] * e.wi[i]);
            }
            const auto score = [&](double cr, double ci) {
                double mv = c[0] + a[0] * cr + b[0] * ci;
                for (std::size_t r = 1; r < R; ++r)
                    mv = std::min(mv, c[r] + a[r] * cr + b[r] * ci);
                return mv;
            };
            double best_cr = e.wr[i], best_ci = e.wi[i];
            double best = score(best_cr, best_ci);
            const double base = best;
            const auto consider = [&](double cr, double ci) {
                const double sc = score(cr, ci);
                if (sc > best) {
                    best = sc;
                    best_cr = cr;
                    best_ci = ci;
                }
            };
            for (std::size_t r = 0; r < R; ++r) {
                const double h = detail_rad2(a[r], b[r]);
                if (h > 0.0) consider(a[r] / h, b[r] / h);
            }
            for (std::size_t r = 0; r < R; ++r)
                for (std::size_t s = r + 1; s < R; ++s) {
                    const double A = a[r] - a[s], B = b[r] - b[s], C = c[s] - c[r];
                    const double h = detail_rad2(A, B);
                    if (h <= 0.0 || std::abs(C) > h) continue;
                    const double phi = std::atan2(B, A);
                    const double off = std::acos(std::clamp(C / h, -1.0, 1.0));
                    consider(std::cos(phi + off), std::sin(phi + off));
                    consider(std::cos(phi - off), std::sin(phi - off));
                }
            if (best > base + 1e-15 * std::max(1.0, std::abs(base))) {
                for (std::size_t r = 0; r < R; ++r)
                    e.vals[r] = c[r] + a[r] * best_cr + b[r] * best_ci;
                e.wr[i] = best_cr;
                e.wi[i] = best_ci;
                improved = true;
            }
        }
        if (!improved) break;
    }
    return true;
}

inline double objective_only(const MaxMinRows& m, const std::vector<double>& v) {
    const std::size_t R = m.rows, N = m.n;
    double f = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double P = 0.0, Q = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            P += v[r] * m.p[r * N + i];
            Q += v[r] * m.q[r * N + i];
        }
        f += m.beta[i] * detail_rad2(P, Q);
    }
    return f;
}

/// Euclidean projection onto the probability simplex {v >= 0, sum v = 1}.
inline void project_simplex(std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    std::size_t rho = 0;
    for (std::size_t j = 0; j < n; ++j) {
        cum += u[j];
        const double t = (cum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            rho = j + 1;
            tau = t;
        }
    }
    for (auto& x : v) x = std::max(0.0, x - tau);
}

/// Dense solve, partial pivoting; n is small (at most a few constraint
/// rows). Returns false on a singular pivot.
inline bool solve_linear(std::vector<double>& a, std::vector<double>& rhs, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-13) return false;
        if (piv != col) {
            for (std::size_t cc = 0; cc < n; ++cc) std::swap(a[col * n + cc], a[piv * n + cc]);
            std::swap(rhs[col], rhs[piv]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t cc = col; cc < n; ++cc) a[r * n + cc] -= f * a[col * n + cc];
            rhs[r] -= f * rhs[col];
        }
    }
    for (std::size_t r = n; r-- > 0;) {
        double acc = rhs[r];
        for (std::size_t cc = r + 1; cc < n; ++cc) acc -= a[r * n + cc] * rhs[cc];
        rhs[r] = acc / a[r * n + r];
    }
    return true;
}

struct CoreResult {
    std::vector<double> v;
    Eval eval;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Active-set refinement for kink optima. When the dual minimizer sits on a
/// manifold where one or two elements' numerators vanish exactly, plain
/// (sub)gradient steps stall: the value looks converged while the certificate
/// gap stays finite. This pins the vanishing elements (M_i v = 0 as hard
/// equalities), minimizes the remaining smooth sum on that manifold with a
/// damped Newton iteration, and hands the result back for certification.
inline bool pin_refine(const MaxMinRows& m, const std::vector<double>& scales,
                       std::vector<double>& v, Eval& e) {
    const std::size_t R = m.rows, N = m.n;
    if (R < 3) return false; // not enough freedom to pin anything
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t i = 0; i < N; ++i)
        if (scales[i] > 0.0 && e.radius[i] <= 1e-3 * scales[i])
            cand.push_back({e.radius[i] / scales[i], i});
    if (cand.empty()) return false;
    std::sort(cand.begin(), cand.end());
    const std::size_t max_pin = (R - 1) / 2;
    if (cand.size() > max_pin) cand.resize(max_pin);

    std::vector<std::size_t> pinned;
    std::vector<bool> is_pinned(N, false);
    for (const auto& [rel, i] : cand) {
        pinned.push_back(i);
        is_pinned[i] = true;
    }

    // constraint matrix: sum(v) = 1 plus P_i(v) = Q_i(v) = 0 per pinned element
    const std::size_t me = 1 + 2 * pinned.size();
    std::vector<double> E(me * R, 0.0), b(me, 0.0);
    for (std::size_t r = 0; r < R; ++r) E[r] = 1.0;
    b[0] = 1.0;
    for (std::size_t j = 0; j < pinned.size(); ++j) {
        const std::size_t i = pinned[j];
        for (std::size_t r = 0; r < R; ++r) {
            E[(1 + 2 * j) * R + r] = m.p[r * N + i];
            E[(2 + 2 * j) * R + r] = m.q[r * N + i];
        }
    }

    // Gram matrix with a tiny ridge; used for both the affine projection and
    // the nullspace construction
    std::vector<double> gram(me * me, 0.0);
    for (std::size_t r1 = 0; r1 < me; ++r1)
        for (std::size_t r2 = 0; r2 < me; ++r2) {
            double acc = 0.0;
            for (std::size_t cc = 0; cc < R; ++cc) acc += E[r1 * R + cc] * E[r2 * R + cc];
            gram[r1 * me + r2] = acc;
        }
    double ridge = 0.0;
    for (std::size_t r = 0; r < me; ++r) ridge = std::max(ridge, gram[r * me + r]);
    ridge = std::max(ridge, 1.0) * 1e-13;
    for (std::size_t r = 0; r < me; ++r) gram[r * me + r] += ridge;

    const auto solve_gram = [&](std::vector<double>& rhs) {
        std::vector<double> g2(gram);
        return solve_linear(g2, rhs, me);
    };

    // project the iterate onto the constraint manifold
    std::vector<double> vv(v);
    {
        std::vector<double> resid(me, 0.0);
        for (std::size_t r1 = 0; r1 < me; ++r1) {
            double acc = -b[r1];
            for (std::size_t cc = 0; cc < R; ++cc) acc += E[r1 * R + cc] * vv[cc];
            resid[r1] = acc;
        }
        if (!solve_gram(resid)) return false;
        for (std::size_t cc = 0; cc < R; ++cc)
            for (std::size_t r1 = 0; r1 < me; ++r1) vv[cc] -= E[r1 * R + cc] * resid[r1];
    }

    // orthonormal nullspace basis of E
    std::vector<std::vector<double>> basis;
    for (std::size_t jcol = 0; jcol < R; ++jcol) {
        std::vector<double> z(R, 0.0);
        z[jcol] = 1.0;
        std::vector<double> w(me, 0.0);
        for (std::size_t r1 = 0; r1 < me; ++r1) w[r1] = E[r1 * R + jcol];
        if (!solve_gram(w)) return false;
        for (std::size_t cc = 0; cc < R; ++cc)
            for (std::size_t r1 = 0; r1 < me; ++r1) z[cc] -= E[r1 * R + cc] * w[r1];
        for (const auto& zb : basis) {
            double dot = 0.0;
            for (std::size_t cc = 0; cc < R; ++cc) dot += z[cc] * zb[cc];
            for (std::size_t cc = 0; cc < R; ++cc) z[cc] -= dot * zb[cc];
        }
        double nrm = 0.0;
        for (double x : z) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm > 1e-6) {
            for (double& x : z) x /= nrm;
            basis.push_back(std::move(z));
        }
    }
    const std::size_t dim = basis.size();

    // smooth part (pinned elements excluded) with gradient and Hessian
    std::vector<double> grad(R), hess(R * R), w(R);
    const auto smooth_eval = [&](const std::vector<double>& x, bool second) {
        double G = 0.0;
        std::fill(grad.begin(), grad.end(), 0.0);
        if (second) std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            if (is_pinned[i]) continue;
            double P = 0.0, Q = 0.0;
            for (std::size_t r = 0; r < R; ++r) {
                P += x[r] * m.p[r * N + i];
                Q += x[r] * m.q[r * N + i];
            }
            const double rad = detail_rad2(P, Q);
            if (rad <= 1e-300) continue;
            const double bi = m.beta[i];
            G += bi * rad;
            for (std::size_t r = 0; r < R; ++r) {
                w[r] = (P * m.p[r * N + i] + Q * m.q[r * N + i]) / rad;
                grad[r] += bi * w[r];
            }
            if (second) {
                const double birad = bi / rad;
                for (std::size_t r = 0; r < R; ++r)
                    for (std::size_t cc = r; cc < R; ++cc)
                        hess[r * R + cc] +=
                            birad * (m.p[r * N + i] * m.p[cc * N + i] +
                                     m.q[r * N + i] * m.q[cc * N + i] - w[r] * w[cc]);
            }
        }
        if (second)
            for (std::size_t r = 0; r < R; ++r)
                for (std::size_t cc = 0; cc < r; ++cc) hess[r * R + cc] = hess[cc * R + r];
        return G;
    };

    double G = smooth_eval(vv, true);
    if (dim > 0) {
        std::vector<double> gu(dim), hu(dim * dim), du(dim), vt(R);
        for (int it = 0; it < 30; ++it) {
            double gmax = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                double acc = 0.0;
                for (std::size_t cc = 0; cc < R; ++cc) acc += basis[j][cc] * grad[cc];
                gu[j] = acc;
                gmax = std::max(gmax, std::abs(acc));
            }
            if (gmax <= 1e-11 * std::max(1.0, G)) break;
            for (std::size_t j = 0; j < dim; ++j)
                for (std::size_t j2 = 0; j2 < dim; ++j2) {
                    double acc = 0.0;
                    for (std::size_t r = 0; r < R; ++r) {
                        double hz = 0.0;
                        for (std::size_t cc = 0; cc < R; ++cc)
                            hz += hess[r * R + cc] * basis[j2][cc];
                        acc += basis[j][r] * hz;
                    }
                    hu[j * dim + j2] = acc;
                }
            for (std::size_t j = 0; j < dim; ++j) du[j] = -gu[j];
            std::vector<double> hcopy(hu);
            if (!solve_linear(hcopy, du, dim)) break;
            double slope = 0.0;
            for (std::size_t j = 0; j < dim; ++j) slope += gu[j] * du[j];
            if (slope >= 0.0) break;
            double t = 1.0;
            bool ok = false;
            for (int bt = 0; bt < 40 && !ok; ++bt) {
                for (std::size_t cc = 0; cc < R; ++cc) {
                    double mv = 0.0;
                    for (std::size_t j = 0; j < dim; ++j) mv += basis[j][cc] * t * du[j];
                    vt[cc] = vv[cc] + mv;
                }
                bool feasible = true;
                for (double x : vt)
                    if (x < -1e-12) feasible = false;
                if (feasible) {
                    const double gt = smooth_eval(vt, false);
                    if (gt <= G + 1e-4 * t * slope) {
                        vv = vt;
                        G = smooth_eval(vv, true);
                        ok = true;
                    }
                }
                t *= 0.5;
            }
            if (!ok) break;
        }
    }

    for (double x : vv)
        if (x < -1e-10) return false;
    for (double& x : vv) x = std::max(0.0, x);
    v = vv;
    evaluate(m, v, e);
    return true;
}

/// Local primal ascent on the true unit-modulus problem: cyclic sweeps of
/// the exact one-element completion over every element. Monotone in the
/// smallest constraint value; used when the dual certificate cannot close
/// (the relaxed optimum is not unit-modulus attainable), where it recovers
/// the best locally-achievable phase configuration.
inline void ascent_all_phases(const MaxMinRows& m, Eval& e, int max_sweeps = 50) {
    const std::size_t R = m.rows, N = m.n;
    std::vector<double> a(R), b(R), c(R);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool improved = false;
        for (std::size_t i = 0; i < N; ++i) {
            const double bi = m.beta[i];
            if (bi == 0.0) continue;
            for (std::size_t r = 0; r < R; ++r) {
                a[r] = bi * m.p[r * N + i];
                b[r] = bi * m.q[r * N + i];
                c[r] = e.vals[r] - (a[r] * e.wr[i] + b[r] * e.wi[i]);
            }
            const auto score = [&](double cr, double ci) {
                double mv = c[0] + a[0] * cr + b[0] * ci;
                for (std::size_t r = 1; r < R; ++r)
                    mv = std::min(mv, c[r] + a[r] * cr + b[r] * ci);
                return mv;
            };
            double best_cr = e.wr[i], best_ci = e.wi[i];
            double best = score(best_cr, best_ci);
            const double base = best;
            const auto consider = [&](double cr, double ci) {
                const double sc = score(cr, ci);
                if (sc > best) {
                    best = sc;
                    best_cr = cr;
                    best_ci = ci;
                }
            };
            for (std::size_t r = 0; r < R; ++r) {
                const double h = detail_rad2(a[r], b[r]);
                if (h > 0.0) consider(a[r] / h, b[r] / h);
            }
            for (std::size_t r = 0; r < R; ++r)
                for (std::size_t s = r + 1; s < R; ++s) {
                    const double A = a[r] - a[s], B = b[r] - b[s], C = c[s] - c[r];
                    const double h = detail_rad2(A, B);
                    if (h <= 0.0 || std::abs(C) > h) continue;
                    const double phi = std::atan2(B, A);
                    const double off = std::acos(std::clamp(C / h, -1.0, 1.0));
                    consider(std::cos(phi + off), std::sin(phi + off));
                    consider(std::cos(phi - off), std::sin(phi - off));
                }
            if (best > base + 1e-13 * std::max(1.0, std::abs(base))) {
                for (std::size_t r = 0; r < R; ++r)
                    e.vals[r] = c[r] + a[r] * best_cr + b[r] * best_ci;
                e.wr[i] = best_cr;
                e.wi[i] = best_ci;
                improved = true;
            }
        }
        if (!improved) break;
    }
}

/// Derivative-free pattern search over the phase torus, used as the local
/// refiner on tiny instances where coordinate-wise moves stall. Evaluates the
/// full neighbor stencil at the current step, moves to the best improvement,
/// halves the step otherwise.
inline void pattern_search_phases(const MaxMinRows& m, Eval& e) {
    const std::size_t R = m.rows, N = m.n;
    std::vector<double> theta(N), cand(N), best(N);
    for (std::size_t i = 0; i < N; ++i) theta[i] = std::atan2(e.wi[i], e.wr[i]);
    const auto minval = [&](const std::vector<double>& th) {
        double mv = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < R; ++r) {
            double acc = 0.0;
            for (std::size_t i = 0; i < N; ++i)
                acc += m.beta[i] * (m.p[r * N + i] * std::cos(th[i]) +
                                    m.q[r * N + i] * std::sin(th[i]));
            mv = std::min(mv, acc);
        }
        return mv;
    };
    double cur = minval(theta);
    std::size_t total = 1;
    for (std::size_t i = 0; i < N; ++i) total *= 3;
    for (double h = 0.05; h >= 1e-7;) {
        double best_val = cur;
        bool moved = false;
        for (std::size_t code = 0; code < total; ++code) {
            std::size_t c = code;
            bool all_zero = true;
            for (std::size_t i = 0; i < N; ++i) {
                const int d = static_cast<int>(c % 3) - 1;
                c /= 3;
                cand[i] = theta[i] + h * d;
                if (d != 0) all_zero = false;
            }
            if (all_zero) continue;
            const double val = minval(cand);
            if (val > best_val) {
                best_val = val;
                best = cand;
                moved = true;
            }
        }
        if (moved) {
            theta = best;
            cur = best_val;
        } else {
            h *= 0.5;
        }
    }
    // adopt only on improvement; rebuild the constraint values exactly
    const double old_min = *std::min_element(e.vals.begin(), e.vals.end());
    if (cur > old_min) {
        for (std::size_t i = 0; i < N; ++i) {
            e.wr[i] = std::cos(theta[i]);
            e.wi[i] = std::sin(theta[i]);
        }
        e.vals.assign(R, 0.0);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t r = 0; r < R; ++r)
                e.vals[r] +=
                    m.beta[i] * (m.p[r * N + i] * e.wr[i] + m.q[r * N + i] * e.wi[i]);
    }
}

/// Global search fallback for tiny instances (the scale the grid oracle can
/// also reach). The plain cyclic ascent can sit in a joint-move local basin,
/// so seed it from a coarse deterministic phase lattice (basin-deduplicated
/// best tuples) plus a Kronecker sequence of starts, and keep the best.
inline void small_instance_salvage(const MaxMinRows& m, Eval& e) {
    const std::size_t R = m.rows, N = m.n;
    Eval cand;
    cand.objective = e.objective;
    cand.grad = e.grad;
    const auto try_start = [&](const std::vector<double>& wr, const std::vector<double>& wi) {
        cand.wr = wr;
        cand.wi = wi;
        cand.vals.assign(R, 0.0);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t r = 0; r < R; ++r)
                cand.vals[r] +=
                    m.beta[i] * (m.p[r * N + i] * cand.wr[i] + m.q[r * N + i] * cand.wi[i]);
        ascent_all_phases(m, cand);
        if (N <= 3) pattern_search_phases(m, cand);
        if (*std::min_element(cand.vals.begin(), cand.vals.end()) >
            *std::min_element(e.vals.begin(), e.vals.end())) {
            e.vals = cand.vals;
            e.wr = cand.wr;
            e.wi = cand.wi;
        }
    };

    std::vector<double> wr(N), wi(N);
    if (N <= 3) {
        // coarse lattice scan, keep the best tuple per basin
        const int T = 120; // 3-degree steps
        std::vector<double> ct(N * R * T), cs(T), sn(T);
        for (int t = 0; t < T; ++t) {
            const double a = 2.0 * std::numbers::pi * t / T;
            cs[t] = std::cos(a);
            sn[t] = std::sin(a);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t r = 0; r < R; ++r)
                    ct[(i * R + r) * T + t] =
                        m.beta[i] * (m.p[r * N + i] * cs[t] + m.q[r * N + i] * sn[t]);
        }
        struct Kept {
            double val;
            int t[3];
        };
        std::vector<Kept> kept;
        const auto offer = [&](double val, int t0, int t1, int t2) {
            const int tt[3] = {t0, t1, t2};
            for (auto& k : kept) {
                bool same = true;
                for (std::size_t i = 0; i < N; ++i) {
                    const int d = std::abs(k.t[i] - tt[i]);
                    if (std::min(d, T - d) > T / 12) same = false;
                }
                if (same) {
                    if (val > k.val) {
                        k.val = val;
                        for (int i = 0; i < 3; ++i) k.t[i] = tt[i];
                    }
                    return;
                }
            }
            kept.push_back({val, {t0, t1, t2}});
            if (kept.size() > 8) {
                std::size_t worst = 0;
                for (std::size_t j = 1; j < kept.size(); ++j)
                    if (kept[j].val < kept[worst].val) worst = j;
                kept.erase(kept.begin() + worst);
            }
        };
        std::vector<double> acc(R);
        const int T1 = N >= 2 ? T : 1, T2 = N >= 3 ? T : 1;
        for (int t0 = 0; t0 < T; ++t0)
            for (int t1 = 0; t1 < T1; ++t1) {
                for (std::size_t r = 0; r < R; ++r) {
                    acc[r] = ct[(0 * R + r) * T + t0];
                    if (N >= 2) acc[r] += ct[(1 * R + r) * T + t1];
                }
                for (int t2 = 0; t2 < T2; ++t2) {
                    double mv = acc[0] + (N >= 3 ? ct[(2 * R + 0) * T + t2] : 0.0);
                    for (std::size_t r = 1; r < R; ++r)
                        mv = std::min(mv, acc[r] + (N >= 3 ? ct[(2 * R + r) * T + t2] : 0.0));
                    offer(mv, t0, t1, t2);
                }
            }
        for (const auto& k : kept) {
            for (std::size_t i = 0; i < N; ++i) {
                wr[i] = cs[k.t[i]];
                wi[i] = sn[k.t[i]];
            }
            try_start(wr, wi);
        }
    } else {
        // Kronecker sequence: independent irrationals per element so the
        // starting phases equidistribute over the torus
        static constexpr double kIrr[8] = {1.4142135623730951, 1.7320508075688772,
                                           2.23606797749979,   2.6457513110645907,
                                           3.3166247903554,    3.605551275463989,
                                           4.123105625617661,  4.358898943540674};
        for (int restart = 1; restart <= 96; ++restart) {
            for (std::size_t i = 0; i < N; ++i) {
                const double frac = std::fmod(restart * kIrr[i % 8], 1.0);
                const double ang = 2.0 * std::numbers::pi * frac;
                wr[i] = std::cos(ang);
                wi[i] = std::sin(ang);
            }
            try_start(wr, wi);
        }
    }
}

/// Steepest-descent direction at a kink: the negated minimum-norm element of
/// the subdifferential, with the vanishing elements' direction vectors free
/// inside the unit ball and the simplex equality absorbed by nu. Returns the
/// subgradient (not negated); a (near-)zero result means first-order optimal.
inline std::vector<double> min_norm_subgrad(const MaxMinRows& m,
                                            const std::vector<std::size_t>& kinks,
                                            const std::vector<double>& v) {
    const std::size_t R = m.rows, N = m.n;
    // gradient of the smooth part (kink elements excluded)
    std::vector<double> g0(R, 0.0);
    {
        std::vector<bool> is_kink(N, false);
        for (std::size_t i : kinks) is_kink[i] = true;
        for (std::size_t i = 0; i < N; ++i) {
            if (is_kink[i]) continue;
            double P = 0.0, Q = 0.0;
            for (std::size_t r = 0; r < R; ++r) {
                P += v[r] * m.p[r * N + i];
                Q += v[r] * m.q[r * N + i];
            }
            const double rad = detail_rad2(P, Q);
            if (rad <= 1e-300) continue;
            const double bi = m.beta[i];
            for (std::size_t r = 0; r < R; ++r)
                g0[r] += bi * (P * m.p[r * N + i] + Q * m.q[r * N + i]) / rad;
        }
    }

    const std::size_t nk = kinks.size();
    const std::size_t nx = 2 * nk + 1; // (uP, uQ) per kink element plus nu
    std::vector<double> A(R * nx);
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t j = 0; j < nk; ++j) {
            const std::size_t i = kinks[j];
            A[r * nx + 2 * j] = m.beta[i] * m.p[r * N + i];
            A[r * nx + 2 * j + 1] = m.beta[i] * m.q[r * N + i];
        }
        A[r * nx + 2 * nk] = 1.0;
    }

    std::vector<double> x(nx, 0.0);
    for (int pass = 0; pass < 3; ++pass) {
        // least squares for min ||g0 + A x||, then project the u pairs onto
        // their unit balls and re-center nu
        std::vector<double> ata(nx * nx, 0.0), rhs(nx, 0.0);
        for (std::size_t c1 = 0; c1 < nx; ++c1) {
            for (std::size_t c2 = 0; c2 < nx; ++c2) {
                double acc = 0.0;
                for (std::size_t r = 0; r < R; ++r) acc += A[r * nx + c1] * A[r * nx + c2];
                ata[c1 * nx + c2] = acc;
            }
            double acc = 0.0;
            for (std::size_t r = 0; r < R; ++r) acc -= A[r * nx + c1] * g0[r];
            rhs[c1] = acc;
        }
        double dmax = 1.0;
        for (std::size_t c1 = 0; c1 < nx; ++c1) dmax = std::max(dmax, ata[c1 * nx + c1]);
        for (std::size_t c1 = 0; c1 < nx; ++c1) ata[c1 * nx + c1] += 1e-12 * dmax;
        if (!solve_linear(ata, rhs, nx)) break;
        x = rhs;
        bool clamped = false;
        for (std::size_t j = 0; j < nk; ++j) {
            const double nu = detail_rad2(x[2 * j], x[2 * j + 1]);
            if (nu > 1.0) {
                x[2 * j] /= nu;
                x[2 * j + 1] /= nu;
                clamped = true;
            }
        }
        if (!clamped) break;
        // fold clamped contributions into g0 and re-fit nu alone
        std::vector<double> g1(g0);
        for (std::size_t r = 0; r < R; ++r)
            for (std::size_t j = 0; j < nk; ++j)
                g1[r] += A[r * nx + 2 * j] * x[2 * j] + A[r * nx + 2 * j + 1] * x[2 * j + 1];
        double mean = 0.0;
        for (double g : g1) mean += g;
        x[2 * nk] = -mean / static_cast<double>(R);
        break;
    }

    std::vector<double> sg(R, 0.0);
    for (std::size_t r = 0; r < R; ++r) {
        double acc = g0[r];
        for (std::size_t c1 = 0; c1 < nx; ++c1) acc += A[r * nx + c1] * x[c1];
        sg[r] = acc;
    }
    return sg;
}

/// Reference solver: projected (sub)gradient on the simplex with a
/// Barzilai-Borwein step and Armijo backtracking. Stops on the duality-gap
/// certificate gap = F(v) - min_r val_r(omega(v)), which bounds the distance
/// to the optimum from both sides.
inline CoreResult solve_pg(const MaxMinRows& m, std::vector<double> v, const SolverOptions& opts) {
    CoreResult res;
    const std::size_t R = m.rows;
    project_simplex(v);
    Eval e;
    evaluate(m, v, e);
    const std::vector<double> scales = row_scales(m);
    const auto gap_ok = [&](Eval& ev, double scale) {
        polish_degenerate(m, scales, ev);
        const double pm = *std::min_element(ev.vals.begin(), ev.vals.end());
        return ev.objective - pm <= scale * std::max(1.0, ev.objective);
    };

    double step = 1.0;
    {
        double gmax = 0.0;
        for (double g : e.grad) gmax = std::max(gmax, std::abs(g));
        if (gmax > 0.0) step = 1.0 / gmax;
    }

    int small_change = 0;
    int escapes_left = 60;
    std::size_t it = 0;
    std::vector<double> vt(R), s(R), y(R), prev_grad(R);

    // One projection-arc backtracking step along `dir`; returns true when a
    // sufficient-decrease point was accepted (v, e updated).
    const auto arc_step = [&](const std::vector<double>& dir, double t0) {
        double t = t0;
        const double f_old = e.objective;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t r = 0; r < R; ++r) vt[r] = v[r] - t * dir[r];
            project_simplex(vt);
            double dir_dot = 0.0, move2 = 0.0;
            for (std::size_t r = 0; r < R; ++r) {
                const double dvr = vt[r] - v[r];
                dir_dot += dir[r] * dvr;
                move2 += dvr * dvr;
            }
            if (move2 == 0.0) return false;
            const double f_try = objective_only(m, vt);
            if (f_try <= f_old + 1e-4 * dir_dot) {
                for (std::size_t r = 0; r < R; ++r) s[r] = vt[r] - v[r];
                prev_grad = e.grad;
                v.swap(vt);
                evaluate(m, v, e);
                step = t;
                return true;
            }
            t *= 0.5;
        }
        return false;
    };

    // Stall handling: 0 = certified optimal, 1 = escaped and can continue,
    // 2 = give up with the best iterate. A stall away from any kink is
    // accepted when the certificate is adequate; at a kink the manifold
    // refinement is tried first, then a minimum-norm-subgradient escape step.
    const auto on_stall = [&]() -> int {
        if (gap_ok(e, opts.rel_gap_tol)) return 0;
        std::vector<std::size_t> kinks;
        for (std::size_t i = 0; i < m.n; ++i)
            if (scales[i] > 0.0 && e.radius[i] <= 1e-4 * scales[i]) kinks.push_back(i);
        if (kinks.empty()) return gap_ok(e, 1e-6) ? 0 : 2;
        if (pin_refine(m, scales, v, e) && gap_ok(e, opts.rel_gap_tol)) return 0;
        if (escapes_left-- <= 0) return 2;
        kinks.clear();
        for (std::size_t i = 0; i < m.n; ++i)
            if (scales[i] > 0.0 && e.radius[i] <= 1e-4 * scales[i]) kinks.push_back(i);
        if (kinks.empty()) return gap_ok(e, 1e-6) ? 0 : 2;
        std::vector<double> sg = min_norm_subgrad(m, kinks, v);
        double smax = 0.0;
        for (double g : sg) smax = std::max(smax, std::abs(g));
        if (smax <= 1e-10 * std::max(1.0, e.objective)) return 2;
        if (arc_step(sg, 1.0 / smax)) return 1;
        return 2;
    };

    for (; it < opts.max_iter; ++it) {
        if (gap_ok(e, opts.rel_gap_tol)) {
            res.converged = true;
            break;
        }

        const double f_old = e.objective;
        if (!arc_step(e.grad, step)) {
            const int verdict = on_stall();
            if (verdict == 1) {
                small_change = 0;
                continue;
            }
            res.converged = verdict == 0;
            break;
        }

        // Barzilai-Borwein step for the next iteration
        double sy = 0.0, ss = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            y[r] = e.grad[r] - prev_grad[r];
            sy += s[r] * y[r];
            ss += s[r] * s[r];
        }
        if (sy > 1e-300) step = ss / sy;

        const double denom = std::max(1.0, std::abs(f_old));
        if (std::abs(f_old - e.objective) <= opts.rel_obj_tol * denom) {
            if (++small_change >= opts.obj_window) {
                const int verdict = on_stall();
                if (verdict != 1) {
                    res.converged = verdict == 0;
                    ++it;
                    break;
                }
                small_change = 0;
            }
        } else {
            small_change = 0;
        }
    }

    if (!res.converged) {
        // The relaxed (dual) optimum is not attainable with unit-modulus
        // phases here; salvage the best feasible configuration and certify
        // against the looser strong-duality contract.
        polish_degenerate(m, scales, e);
        ascent_all_phases(m, e);
        if (m.n <= 8) small_instance_salvage(m, e);
        const double pm = *std::min_element(e.vals.begin(), e.vals.end());
        res.converged = e.objective - pm <= 1e-6 * std::max(1.0, e.objective);
    }
    res.v = std::move(v);
    res.eval = std::move(e);
    res.iterations = it;
    return res;
}

/// KKT fast path: damped Newton on the stationarity system of the dual,
/// reduced to the sum-one hyperplane (basis e_j - e_last). The stationarity
/// conditions are re-derived from the dual objective itself: all directional
/// derivatives (equivalently, all constraint values at omega(v)) must be
/// equal. Assumes an interior optimum; any iterate leaving the nonnegative
/// orthant, a singular reduced Hessian, or a stalled line search reports
/// failure so the caller can fall back to the projected-gradient reference.
inline bool solve_newton(const MaxMinRows& m, std::vector<double> v, const SolverOptions& opts,
                         CoreResult& out) {
    const std::size_t R = m.rows, N = m.n;
    if (R == 0) return false;
    Eval e;
    evaluate(m, v, e);
    const std::vector<double> scales = row_scales(m);
    if (R == 1) { // single constraint: co-phasing, any simplex point is optimal
        polish_degenerate(m, scales, e);
        out.v = std::move(v);
        out.eval = std::move(e);
        out.iterations = 0;
        out.converged = true;
        return true;
    }
    const std::size_t dim = R - 1;
    std::vector<double> hess(R * R), hred(dim * dim), gred(dim), d(dim), vt(R);
    const std::size_t max_newton = std::min<std::size_t>(opts.max_iter, 50);
    for (std::size_t it = 0; it <= max_newton; ++it) {
        // stop on the same duality-gap certificate as the reference solver
        polish_degenerate(m, scales, e);
        const double pm = *std::min_element(e.vals.begin(), e.vals.end());
        if (e.objective - pm <= opts.rel_gap_tol * std::max(1.0, e.objective)) {
            out.v = std::move(v);
            out.eval = std::move(e);
            out.iterations = it;
            out.converged = true;
            return true;
        }
        if (it == max_newton) return false;
        // a vanishing reduced gradient without a certified gap means the
        // interior stationarity assumption does not hold here; hand over
        double gmax = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            gred[j] = e.grad[j] - e.grad[R - 1];
            gmax = std::max(gmax, std::abs(gred[j]));
        }
        if (gmax <= 1e-12 * std::max(1.0, e.objective)) return false;

        // Hessian of sum_i beta_i |M_i v|: PSD, assembled per element
        std::fill(hess.begin(), hess.end(), 0.0);
        std::vector<double> w(R);
        for (std::size_t i = 0; i < N; ++i) {
            double P = 0.0, Q = 0.0;
            for (std::size_t r = 0; r < R; ++r) {
                P += v[r] * m.p[r * N + i];
                Q += v[r] * m.q[r * N + i];
            }
            const double rad = detail_rad2(P, Q);
            if (rad <= 1e-300) continue;
            const double bi = m.beta[i] / rad;
            for (std::size_t r = 0; r < R; ++r)
                w[r] = (P * m.p[r * N + i] + Q * m.q[r * N + i]) / rad;
            for (std::size_t r = 0; r < R; ++r) {
                const double pr = m.p[r * N + i], qr = m.q[r * N + i], wr = w[r];
                for (std::size_t cc = r; cc < R; ++cc) {
                    const double hv =
                        bi * (pr * m.p[cc * N + i] + qr * m.q[cc * N + i] - wr * w[cc]);
                    hess[r * R + cc] += hv;
                }
            }
        }
        for (std::size_t r = 0; r < R; ++r)
            for (std::size_t cc = 0; cc < r; ++cc) hess[r * R + cc] = hess[cc * R + r];

        for (std::size_t j = 0; j < dim; ++j)
            for (std::size_t j2 = 0; j2 < dim; ++j2)
                hred[j * dim + j2] = hess[j * R + j2] - hess[j * R + (R - 1)] -
                                     hess[(R - 1) * R + j2] + hess[(R - 1) * R + (R - 1)];

        for (std::size_t j = 0; j < dim; ++j) d[j] = -gred[j];
        std::vector<double> hcopy(hred);
        if (!solve_linear(hcopy, d, dim)) return false;

        double slope = 0.0;
        for (std::size_t j = 0; j < dim; ++j) slope += gred[j] * d[j];
        if (slope >= 0.0) return false; // not a descent direction

        double t = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            double dsum = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                vt[j] = v[j] + t * d[j];
                dsum += t * d[j];
            }
            vt[R - 1] = v[R - 1] - dsum;
            const double f_try = objective_only(m, vt);
            if (f_try <= e.objective + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) return false;
        for (std::size_t r = 0; r < R; ++r) {
            if (vt[r] < 0.0) {
                if (vt[r] < -1e-14) return false; // left the nonnegative orthant
                vt[r] = 0.0;
            }
        }
        v = vt;
        evaluate(m, v, e);
    }
    return false;
}

inline PhaseSolution assemble(const CoreResult& core, std::size_t n_lam, bool fallback) {
    PhaseSolution sol;
    const std::size_t R = core.v.size();
    sol.lam.assign(core.v.begin(), core.v.begin() + n_lam);
    sol.del.assign(core.v.begin() + n_lam, core.v.end());
    sol.omega.resize(core.eval.wr.size());
    for (std::size_t i = 0; i < sol.omega.size(); ++i)
        sol.omega[i] = cplx{core.eval.wr[i], core.eval.wi[i]};
    sol.dual_value = core.eval.objective;
    sol.primal_min = R ? *std::min_element(core.eval.vals.begin(), core.eval.vals.end()) : 0.0;
    sol.iterations = core.iterations;
    sol.converged = core.converged;
    sol.fallback = fallback;
    return sol;
}

inline PhaseSolution solve_rows(const detail::MaxMinRows& rows, std::size_t n_lam,
                                std::vector<double> init, const SolverOptions& opts) {
    if (opts.prefer_newton) {
        detail::CoreResult core;
        if (detail::solve_newton(rows, init, opts, core)) return detail::assemble(core, n_lam, false);
        detail::CoreResult pg =
            detail::solve_pg(rows, std::vector<double>(rows.rows, 1.0 / rows.rows), opts);
        return detail::assemble(pg, n_lam, true);
    }
    detail::CoreResult core = detail::solve_pg(rows, std::move(init), opts);
    return detail::assemble(core, n_lam, false);
}

} // namespace detail

/// Eq.-style dual objective: sum_i beta_i sqrt(P_i^2 + Q_i^2) with
/// P = lam'A + del'B, Q = lam'C + del'D.
inline double dual_objective(const std::vector<double>& lam, const std::vector<double>& del,
                             const DualWorkspace& w) {
    if (lam.size() != w.k || del.size() != w.k)
        throw std::invalid_argument("dual_objective: multiplier length != K");
    detail::MaxMinRows rows = detail::rows_from_workspace(w);
    std::vector<double> v(lam);
    v.insert(v.end(), del.begin(), del.end());
    return detail::objective_only(rows, v);
}

/// Unit-modulus phases from the multipliers; elements whose numerator sums
/// both vanish default to omega = 1.
inline std::vector<cplx> recover_omega(const std::vector<double>& lam,
                                       const std::vector<double>& del, const DualWorkspace& w) {
    if (lam.size() != w.k || del.size() != w.k)
        throw std::invalid_argument("recover_omega: multiplier length != K");
    std::vector<cplx> omega(w.n);
    for (std::size_t i = 0; i < w.n; ++i) {
        double P = 0.0, Q = 0.0;
        for (std::size_t kk = 0; kk < w.k; ++kk) {
            P += lam[kk] * w.a[kk * w.n + i] + del[kk] * w.b[kk * w.n + i];
            Q += lam[kk] * w.c[kk * w.n + i] + del[kk] * w.d[kk * w.n + i];
        }
        const double rad = detail_rad2(P, Q);
        omega[i] = (rad > 0.0) ? cplx{P / rad, Q / rad} : cplx{1.0, 0.0};
    }
    return omega;
}

/// Targeted noise-free component values:
/// X_k = xR_k sum_i beta_i (hR_{m_k,i} wR_i - hI_{m_k,i} wI_i)
/// Y_k = xI_k sum_i beta_i (hR_{n_k,i} wI_i + hI_{n_k,i} wR_i)
inline PrimalValues primal_values(const std::vector<cplx>& omega, const ChannelRealization& ch,
                                  const SpatialSymbol& sym) {
    if (omega.size() != ch.n_ris)
        throw std::invalid_argument("primal_values: omega length != N");
    const std::size_t k = sym.set_i.size();
    PrimalValues pv;
    pv.x.resize(k);
    pv.y.resize(k);
    for (std::size_t kk = 0; kk < k; ++kk) {
        const cplx* row_m = ch.h.data() + (static_cast<std::size_t>(sym.set_i[kk]) - 1) * ch.n_ris;
        const cplx* row_n = ch.h.data() + (static_cast<std::size_t>(sym.set_q[kk]) - 1) * ch.n_ris;
        double xs = 0.0, ys = 0.0;
        for (std::size_t i = 0; i < ch.n_ris; ++i) {
            xs += ch.beta[i] * (row_m[i].real() * omega[i].real() - row_m[i].imag() * omega[i].imag());
            ys += ch.beta[i] * (row_n[i].real() * omega[i].imag() + row_n[i].imag() * omega[i].real());
        }
        pv.x[kk] = sym.pol_i[kk] * xs;
        pv.y[kk] = sym.pol_q[kk] * ys;
    }
    return pv;
}

/// Reference solver for the dual problem (projected gradient on the simplex,
/// warm-started at the multiplier mean 1/(2K)).
inline PhaseSolution solve_dual(const DualWorkspace& w, const SolverOptions& opts = {}) {
    if (w.k < 1 || w.n < 1) throw std::invalid_argument("solve_dual: need K >= 1 and N >= 1");
    detail::MaxMinRows rows = detail::rows_from_workspace(w);
    std::vector<double> init(rows.rows, 1.0 / static_cast<double>(rows.rows));
    detail::CoreResult core = detail::solve_pg(rows, std::move(init), opts);
    return detail::assemble(core, w.k, false);
}

/// KKT fast path from a caller-supplied simplex point; falls back to
/// solve_dual (and flags it) when the Newton iteration is not usable.
inline PhaseSolution solve_kkt(const DualWorkspace& w, const std::vector<double>& init,
                               const SolverOptions& opts = {}) {
    if (w.k < 1) throw std::invalid_argument("solve_kkt: need K >= 1");
    if (init.size() != 2 * w.k) throw std::invalid_argument("solve_kkt: init length != 2K");
    detail::MaxMinRows rows = detail::rows_from_workspace(w);
    detail::CoreResult core;
    if (detail::solve_newton(rows, init, opts, core)) return detail::assemble(core, w.k, false);
    PhaseSolution sol = solve_dual(w, opts);
    sol.fallback = true;
    return sol;
}

inline PhaseSolution solve_kkt(const DualWorkspace& w, const SolverOptions& opts = {}) {
    return solve_kkt(w, std::vector<double>(2 * w.k, 1.0 / (2.0 * static_cast<double>(w.k))), opts);
}

/// Closed-form rule: every multiplier at its ensemble mean 1/(2K).
inline PhaseSolution suboptimal_solution(const DualWorkspace& w) {
    if (w.k < 1) throw std::invalid_argument("suboptimal_solution: need K >= 1");
    detail::MaxMinRows rows = detail::rows_from_workspace(w);
    detail::CoreResult core;
    core.v.assign(rows.rows, 1.0 / static_cast<double>(rows.rows));
    detail::evaluate(rows, core.v, core.eval);
    core.iterations = 0;
    core.converged = true;
    return detail::assemble(core, w.k, false);
}

inline SolverOptions multicast_defaults() {
    SolverOptions o;
    o.prefer_newton = true;
    return o;
}

/// Multicast phase design: equalize the real effective coefficients of all
/// N_r receive antennas. Same dual machinery with one X-type row per antenna
/// and N_r simplex multipliers; solved by the Newton fast path with the
/// projected-gradient reference as fallback.
inline PhaseSolution multicast_optimize(const ChannelRealization& ch,
                                        const SolverOptions& opts = multicast_defaults()) {
    if (ch.n_rx < 1) throw std::invalid_argument("multicast_optimize: need N_r >= 1");
    detail::MaxMinRows rows = detail::rows_from_channel(ch);
    std::vector<double> init(rows.rows, 1.0 / static_cast<double>(rows.rows));
    return detail::solve_rows(rows, rows.rows, std::move(init), opts);
}

} // namespace grqsm

#endif // GRQSM_PHASE_OPT_HPP
