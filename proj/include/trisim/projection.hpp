#pragma once

#include <array>
#include <cmath>

#include "trisim/state.hpp"

namespace trisim {

/// Which linear momentum constraints project_constraints enforces.
struct ConstraintFlags {
    bool zero_linear = true;  ///< Σ p_i = 0
    bool zero_angular = true; ///< Σ q_i ∧ p_i = 0
    bool zero_dIdt = true;    ///< Σ q_i · p_i = 0
};

namespace detail {

/// Solves the small symmetric system G λ = b in place by Gaussian elimination
/// with partial pivoting. Throws on (near) singularity.
template <int N>
inline std::array<double, N> solve_sym(std::array<std::array<double, N>, N> G,
                                       std::array<double, N> b) {
    double scale = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) scale = std::max(scale, std::fabs(G[i][j]));
    for (int c = 0; c < N; ++c) {
        int piv = c;
        for (int r = c + 1; r < N; ++r)
            if (std::fabs(G[r][c]) > std::fabs(G[piv][c])) piv = r;
        if (std::fabs(G[piv][c]) <= 1e-13 * std::max(scale, 1e-300)) throw Error("rank deficient");
        std::swap(G[c], G[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < N; ++r) {
            const double f = G[r][c] / G[c][c];
            for (int j = c; j < N; ++j) G[r][j] -= f * G[c][j];
            b[r] -= f * b[c];
        }
    }
    std::array<double, N> x{};
    for (int r = N - 1; r >= 0; --r) {
        double s = b[r];
        for (int j = r + 1; j < N; ++j) s -= G[r][j] * x[j];
        x[r] = s / G[r][r];
    }
    return x;
}

} // namespace detail

/// Recentres positions to Σ m_i q_i = 0 and applies the minimal correction to
/// the momenta, in the kinetic metric Σ|δp_k|²/m_k, that enforces the flagged
/// constraints (all linear in p at fixed q). A feasible state is a fixed point;
/// the correction is applied twice to polish roundoff.
inline PhaseState project_constraints(const PhaseState& s, const Masses& m,
                                      const ConstraintFlags& flags = {}) {
    require_finite(s);
    if (!flags.zero_linear && !flags.zero_angular && !flags.zero_dIdt)
        throw Error("no constraints requested");

    PhaseState out = s;
    const Vec2 c = barycentre(out.q, m);
    for (int k = 0; k < 3; ++k) out.q[k] -= c;

    // Constraint rows over the 6 momentum components (q held fixed).
    int rows = 0;
    std::array<std::array<double, 6>, 4> A{};
    auto add_row = [&](std::array<double, 6> r) { A[static_cast<std::size_t>(rows++)] = r; };
    if (flags.zero_linear) {
        add_row({1, 0, 1, 0, 1, 0});
        add_row({0, 1, 0, 1, 0, 1});
    }
    if (flags.zero_angular)
        add_row({-out.q[0].y, out.q[0].x, -out.q[1].y, out.q[1].x, -out.q[2].y, out.q[2].x});
    if (flags.zero_dIdt)
        add_row({out.q[0].x, out.q[0].y, out.q[1].x, out.q[1].y, out.q[2].x, out.q[2].y});

    auto project_once = [&]() {
        std::array<double, 6> p = {out.p[0].x, out.p[0].y, out.p[1].x,
                                   out.p[1].y, out.p[2].x, out.p[2].y};
        const std::array<double, 6> w = {m[0], m[0], m[1], m[1], m[2], m[2]};
        std::array<std::array<double, 4>, 4> G{};
        std::array<double, 4> b{};
        for (int r = 0; r < rows; ++r) {
            for (int cidx = 0; cidx < rows; ++cidx)
                for (int k = 0; k < 6; ++k) G[r][cidx] += A[r][k] * w[k] * A[cidx][k];
            for (int k = 0; k < 6; ++k) b[r] -= A[r][k] * p[k];
        }
        // Unused rows get a unit diagonal so the fixed-size solve stays regular.
        for (int r = rows; r < 4; ++r) G[r][r] = 1.0;
        const auto lambda = detail::solve_sym<4>(G, b);
        for (int k = 0; k < 6; ++k) {
            double dp = 0.0;
            for (int r = 0; r < rows; ++r) dp += w[k] * A[r][k] * lambda[r];
            p[k] += dp;
        }
        out.p = {Vec2{p[0], p[1]}, Vec2{p[2], p[3]}, Vec2{p[4], p[5]}};
    };
    project_once();
    project_once();
    return out;
}

} // namespace trisim
