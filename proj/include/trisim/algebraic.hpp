#pragma once

#include <array>
#include <cmath>

#include "trisim/error.hpp"
#include "trisim/random.hpp"
#include "trisim/vec2.hpp"

namespace trisim {

/// Inputs of the algebraic similar-triangles theorem: positive weights μ_i and
/// two vector triplets ξ_i, ξ̄_i constrained by
///   Σ μ_i ξ_i = 0,  Σ μ_i ξ̄_i = 0,  Σ μ_i ξ_i∧ξ̄_i = 0,  Σ μ_i ξ_i·ξ̄_i = 0.
struct AlgebraicTriplet {
    std::array<double, 3> mu;
    std::array<Vec2, 3> xi;
    std::array<Vec2, 3> xibar;
};

/// Moment function I(η) = Σ μ_i η_i².
inline double moment_function(const std::array<double, 3>& mu, const std::array<Vec2, 3>& eta) {
    return mu[0] * norm2(eta[0]) + mu[1] * norm2(eta[1]) + mu[2] * norm2(eta[2]);
}

/// Scaled residuals of the four hypothesis constraints.
struct TripletHypotheses {
    double sum_xi, sum_xibar, wedge_sum, dot_sum;
    double max_abs() const {
        return std::max({sum_xi, sum_xibar, wedge_sum, dot_sum});
    }
};

inline TripletHypotheses triplet_hypotheses(const AlgebraicTriplet& tr) {
    Vec2 s1{}, s2{};
    double w = 0.0, d = 0.0;
    for (int k = 0; k < 3; ++k) {
        s1 += tr.mu[k] * tr.xi[k];
        s2 += tr.mu[k] * tr.xibar[k];
        w += tr.mu[k] * wedge(tr.xi[k], tr.xibar[k]);
        d += tr.mu[k] * dot(tr.xi[k], tr.xibar[k]);
    }
    const double mu_sum = tr.mu[0] + tr.mu[1] + tr.mu[2];
    const double Ix = moment_function(tr.mu, tr.xi), Ib = moment_function(tr.mu, tr.xibar);
    const double cross = std::sqrt(Ix * Ib);
    TripletHypotheses h{};
    h.sum_xi = Ix > 0.0 ? norm(s1) / std::sqrt(mu_sum * Ix) : norm(s1);
    h.sum_xibar = Ib > 0.0 ? norm(s2) / std::sqrt(mu_sum * Ib) : norm(s2);
    h.wedge_sum = cross > 0.0 ? std::fabs(w) / cross : std::fabs(w);
    h.dot_sum = cross > 0.0 ? std::fabs(d) / cross : std::fabs(d);
    return h;
}

/// Residuals of the four families of equalities; index k runs over the cyclic
/// permutations (i,j,k). Every entry is dimensionless and vanishes exactly for
/// a valid triplet.
struct Theorem5Report {
    std::array<double, 3> vertex_vs_side; ///< μ_k ξ_k²/I(ξ) − μ_iμ_j(ξ̄_i−ξ̄_j)²/(Σμ I(ξ̄))
    std::array<double, 3> side_vs_vertex; ///< μ_iμ_j(ξ_i−ξ_j)²/(Σμ I(ξ)) − μ_k ξ̄_k²/I(ξ̄)
    std::array<double, 3> vertex_sum;     ///< μ_k ξ_k²/I(ξ) + μ_k ξ̄_k²/I(ξ̄) − (μ_i+μ_j)/Σμ
    std::array<double, 3> area_pair;      ///< ξ_i∧ξ_j/I(ξ) + ξ̄_i∧ξ̄_j/I(ξ̄)

    double max_abs() const {
        double r = 0.0;
        for (int k = 0; k < 3; ++k)
            r = std::max({r, std::fabs(vertex_vs_side[k]), std::fabs(side_vs_vertex[k]),
                          std::fabs(vertex_sum[k]), std::fabs(area_pair[k])});
        return r;
    }
};

inline Theorem5Report theorem5_verify(const AlgebraicTriplet& tr, double hyp_tol = 1e-10) {
    for (double mu : tr.mu)
        if (!(mu > 0.0)) throw Error("not a Theorem 5 instance: weights must be positive");
    const double Ix = moment_function(tr.mu, tr.xi), Ib = moment_function(tr.mu, tr.xibar);
    if (!(Ix > 0.0) || !(Ib > 0.0))
        throw Error("not a Theorem 5 instance: degenerate triplet (zero moment)");
    if (triplet_hypotheses(tr).max_abs() > hyp_tol)
        throw Error("not a Theorem 5 instance: constraint residual above tolerance");

    const double mu_sum = tr.mu[0] + tr.mu[1] + tr.mu[2];
    Theorem5Report rep{};
    for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3, j = (k + 2) % 3;
        const double vx = tr.mu[k] * norm2(tr.xi[k]) / Ix;
        const double vb = tr.mu[k] * norm2(tr.xibar[k]) / Ib;
        const double sx = tr.mu[i] * tr.mu[j] * norm2(tr.xi[i] - tr.xi[j]) / (mu_sum * Ix);
        const double sb = tr.mu[i] * tr.mu[j] * norm2(tr.xibar[i] - tr.xibar[j]) / (mu_sum * Ib);
        rep.vertex_vs_side[k] = vx - sb;
        rep.side_vs_vertex[k] = sx - vb;
        rep.vertex_sum[k] = vx + vb - (tr.mu[i] + tr.mu[j]) / mu_sum;
        rep.area_pair[k] =
            wedge(tr.xi[i], tr.xi[j]) / Ix + wedge(tr.xibar[i], tr.xibar[j]) / Ib;
    }
    return rep;
}

/// Jacobi coordinates (a, b) of a μ-centred triplet, and the inverse map.
/// With ρ = √((μ1+μ2)Σμ/μ3), σ = √(μ1μ2/(μ1+μ2)):
///   a = ρ (μ1ξ1 + μ2ξ2)/(μ1+μ2),  b = σ (ξ1 − ξ2),  and a² + b² = I(ξ).
inline std::array<Vec2, 3> triplet_from_jacobi(Vec2 a, Vec2 b, const std::array<double, 3>& mu) {
    const double mu12 = mu[0] + mu[1];
    const double rho = std::sqrt(mu12 * (mu12 + mu[2]) / mu[2]);
    const double sigma = std::sqrt(mu[0] * mu[1] / mu12);
    return {a / rho + (mu[1] / mu12) * (b / sigma),
            a / rho - (mu[0] / mu12) * (b / sigma),
            -(mu12 / mu[2]) * (a / rho)};
}

/// Constructive sampler: draws weights and Jacobi vectors a, b, ā freely, then
/// closes the constraints with |b̄| = |a||ā|/|b| and the angle rule
/// β̄ = ᾱ − α + β + π, so the output satisfies all four hypotheses exactly.
inline AlgebraicTriplet theorem5_sample(Rng& rng) {
    AlgebraicTriplet tr;
    for (auto& mu : tr.mu) mu = rng.log_uniform(0.1, 10.0);
    const Vec2 a = rng.log_uniform(0.3, 3.0) * rng.unit_vec();
    const Vec2 b = rng.log_uniform(0.3, 3.0) * rng.unit_vec();
    const Vec2 abar = rng.log_uniform(0.3, 3.0) * rng.unit_vec();
    const double bbar_len = norm(a) * norm(abar) / norm(b);
    const double beta_bar = std::atan2(abar.y, abar.x) - std::atan2(a.y, a.x) +
                            std::atan2(b.y, b.x) + 3.14159265358979323846;
    const Vec2 bbar = bbar_len * Vec2{std::cos(beta_bar), std::sin(beta_bar)};
    tr.xi = triplet_from_jacobi(a, b, tr.mu);
    tr.xibar = triplet_from_jacobi(abar, bbar, tr.mu);
    return tr;
}

inline AlgebraicTriplet theorem5_sample(std::uint64_t seed) {
    Rng rng(seed);
    return theorem5_sample(rng);
}

} // namespace trisim
