#pragma once

#include <array>
#include <cmath>

#include "trisim/potential.hpp"
#include "trisim/state.hpp"

namespace trisim {

/// Scalar quantities derived from a state.
///   M     total mass
///   I     moment of inertia Σ m_k q_k² about the origin
///   K     twice the kinetic energy Σ m_k v_k²
///   L     angular momentum Σ q_k ∧ p_k
///   dIdt  2 Σ q_k · p_k
///   V, E  potential and total energy (E = K/2 + V)
///   kappa √(m1 m2 m3 K / (M I)), which equals every ratio |p_k|/r_ij when
///         the state has L = 0 and dI/dt = 0
///   Delta oriented triangle area ½ (q2−q1)∧(q3−q1)
///   r     mutual distances {r12, r23, r31}
struct DerivedQuantities {
    double M, I, K, L, dIdt, V, E, kappa, Delta;
    std::array<double, 3> r;

    /// Distance of the pair opposite body k (k=0 -> r23, 1 -> r31, 2 -> r12).
    double r_opposite(int k) const { return r[static_cast<std::size_t>((k + 1) % 3)]; }
};

inline DerivedQuantities derived_quantities(const PhaseState& s, const Masses& m,
                                            const PotentialSpec& pot) {
    require_finite(s);
    detail::require_separated(s.q, pot.alpha);

    DerivedQuantities d{};
    d.M = m.total();
    for (int k = 0; k < 3; ++k) {
        d.I += m[k] * norm2(s.q[k]);
        d.K += norm2(s.p[k]) / m[k];
        d.L += wedge(s.q[k], s.p[k]);
        d.dIdt += 2.0 * dot(s.q[k], s.p[k]);
    }
    d.r = {norm(s.q[0] - s.q[1]), norm(s.q[1] - s.q[2]), norm(s.q[2] - s.q[0])};
    d.V = detail::potential_raw(s.q, pot.alpha, pot.masses);
    d.E = 0.5 * d.K + d.V;
    if (d.I <= 0.0) throw Error("triple collision");
    d.kappa = std::sqrt(m[0] * m[1] * m[2] * d.K / (d.M * d.I));
    d.Delta = 0.5 * wedge(s.q[1] - s.q[0], s.q[2] - s.q[0]);
    return d;
}

/// Oriented area without the rest of the bundle.
inline double oriented_area(const PhaseState& s) {
    return 0.5 * wedge(s.q[1] - s.q[0], s.q[2] - s.q[0]);
}

/// Residual of m_i m_j (η_i−η_j)² + M m_k η_k² − (m_i+m_j) Σ m_l η_l²,
/// an identity for any mass-centred vector triplet. The caller recentres;
/// a non-centred input is rejected.
inline double lagrange_identity_residual(const std::array<Vec2, 3>& eta, const Masses& m, int k) {
    if (k < 0 || k > 2) throw Error("body index must be 0, 1 or 2");
    Vec2 c{};
    double scale = 0.0;
    for (int l = 0; l < 3; ++l) {
        c += m[l] * eta[l];
        scale += m[l] * norm(eta[l]);
    }
    if (norm(c) > 1e-12 * std::max(1.0, scale)) throw Error("centroid not removed");
    const int i = cyc_i(k), j = cyc_j(k);
    double sum = 0.0;
    for (int l = 0; l < 3; ++l) sum += m[l] * norm2(eta[l]);
    return m[i] * m[j] * norm2(eta[i] - eta[j]) + m.total() * m[k] * norm2(eta[k]) -
           (m[i] + m[j]) * sum;
}

} // namespace trisim
