#pragma once

#include <array>
#include <cmath>

#include "trisim/error.hpp"
#include "trisim/state.hpp"

namespace trisim {

/// Homogeneous pair potential of degree alpha:
///   V_a = (1/a) Σ_{i<j} m_i m_j r_ij^a   for a ≠ 0,
///   V_0 = Σ_{i<j} m_i m_j log r_ij.
/// alpha = -1 is Newtonian gravity (G = 1), alpha = -2 the strong-force case.
struct PotentialSpec {
    double alpha;
    Masses masses;
};

namespace detail {

/// r^e from the squared distance; e = 0 short-circuits to 1 so that the
/// alpha = 2 force law has no singularity at coincidence.
inline double pow_r(double r2, double e) {
    if (e == 0.0) return 1.0;
    return std::pow(r2, 0.5 * e);
}

/// Accelerations without precondition checks; coincident pairs propagate
/// inf/nan instead of throwing (the integrator relies on this).
inline std::array<Vec2, 3> accel_raw(const std::array<Vec2, 3>& q, double alpha, const Masses& m) {
    std::array<Vec2, 3> a{};
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const Vec2 d = q[j] - q[i]; // points i -> j
            const double w = pow_r(norm2(d), alpha - 2.0);
            a[i] += (m[j] * w) * d;
            a[j] -= (m[i] * w) * d;
        }
    return a;
}

inline double potential_raw(const std::array<Vec2, 3>& q, double alpha, const Masses& m) {
    double v = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double r2 = norm2(q[j] - q[i]);
            v += (alpha == 0.0) ? m[i] * m[j] * 0.5 * std::log(r2)
                                : m[i] * m[j] * pow_r(r2, alpha) / alpha;
        }
    return v;
}

inline void require_separated(const std::array<Vec2, 3>& q, double alpha) {
    if (alpha >= 2.0) return;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (norm2(q[j] - q[i]) == 0.0) throw Error("collision singularity");
}

} // namespace detail

inline double potential_energy(const PhaseState& s, const PotentialSpec& pot) {
    require_finite(s);
    detail::require_separated(s.q, pot.alpha);
    return detail::potential_raw(s.q, pot.alpha, pot.masses);
}

/// a_i = Σ_{j≠i} m_j r_ij^(alpha-2) (q_j − q_i); the same formula covers the
/// logarithmic branch (alpha = 0). Σ m_i a_i = 0 identically.
inline std::array<Vec2, 3> acceleration(const PhaseState& s, const PotentialSpec& pot) {
    require_finite(s);
    detail::require_separated(s.q, pot.alpha);
    return detail::accel_raw(s.q, pot.alpha, pot.masses);
}

/// Forces f_k = m_k a_k = dp_k/dt.
inline std::array<Vec2, 3> forces(const PhaseState& s, const PotentialSpec& pot) {
    auto a = acceleration(s, pot);
    for (int k = 0; k < 3; ++k) a[k] *= pot.masses[k];
    return a;
}

} // namespace trisim
