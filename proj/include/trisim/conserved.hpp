#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "trisim/algebraic.hpp"
#include "trisim/derived.hpp"
#include "trisim/geometry.hpp"
#include "trisim/integrate.hpp"

namespace trisim {

/// The cyclic momentum sum Σ m_i m_j |p_k|^alpha (log form at alpha = 0).
/// Constant along any solution orbit with L = 0 and constant moment of
/// inertia; for alpha = −2 its value is M·I/(m1 m2 m3).
inline double homogeneous_constant(const PhaseState& s, const Masses& m, double alpha) {
    require_finite(s);
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double p2 = norm2(s.p[k]);
        if (p2 == 0.0 && alpha <= 0.0) throw Error("stationary body, constant undefined");
        sum += (alpha == 0.0) ? m[cyc_i(k)] * m[cyc_j(k)] * 0.5 * std::log(p2)
                              : m[cyc_i(k)] * m[cyc_j(k)] * detail::pow_r(p2, alpha);
    }
    return sum;
}

/// The momentum constant sampled along a trajectory.
struct ConstantReport {
    double alpha;
    std::vector<std::array<double, 2>> series; ///< (t, value)
    double drift;                              ///< max |value − mean| / |mean|
    bool has_reference;                        ///< alpha == −2 only
    double reference;                          ///< M·I/(m1 m2 m3), I averaged
    double reference_residual;                 ///< max |value − reference| / |reference|
    double min_momentum;                       ///< min |p_k| observed (no-stop record)
};

inline ConstantReport constant_report(const Trajectory& traj, int n_samples = 200) {
    const Masses& m = traj.masses();
    const double alpha = traj.alpha();
    ConstantReport rep{};
    rep.alpha = alpha;
    rep.min_momentum = std::numeric_limits<double>::infinity();

    double value_sum = 0.0, abs_sum = 0.0, I_sum = 0.0;
    for (int n = 0; n <= n_samples; ++n) {
        const double t = traj.t_begin() + traj.span() * n / n_samples;
        const PhaseState s = traj.state_at(t);
        const double v = homogeneous_constant(s, m, alpha);
        rep.series.push_back({t, v});
        value_sum += v;
        abs_sum += std::fabs(v);
        for (int k = 0; k < 3; ++k) {
            I_sum += m[k] * norm2(s.q[k]) / (n_samples + 1);
            rep.min_momentum = std::min(rep.min_momentum, norm(s.p[k]));
        }
    }
    const double mean = value_sum / static_cast<double>(rep.series.size());
    // The log form can average near zero; measure relative to the magnitude.
    const double denom = std::max(std::fabs(mean), abs_sum / static_cast<double>(rep.series.size()));
    for (const auto& tv : rep.series)
        rep.drift = std::max(rep.drift, std::fabs(tv[1] - mean) / std::max(denom, 1e-300));
    if (alpha == -2.0) {
        rep.has_reference = true;
        rep.reference = m.total() * I_sum / (m[0] * m[1] * m[2]);
        for (const auto& tv : rep.series)
            rep.reference_residual = std::max(
                rep.reference_residual, std::fabs(tv[1] - rep.reference) / std::fabs(rep.reference));
    }
    return rep;
}

/// Energy-partition residuals along a constant-I trajectory:
///   alpha ≠ 0, −2:  K = Σ m_i m_j r_ij^alpha = 2alpha/(2+alpha) E
///   alpha = 0:      K = Σ m_i m_j
///   alpha = −2:     K = −2 V (zero total energy)
/// with K and V individually constant (alpha ≠ −2 keeps both fixed).
struct EnergyPartitionReport {
    double alpha;
    double I_drift;           ///< relative, must sit below the hypothesis tol
    double partition_max;     ///< worst relative residual of the K relation
    double energy_relation_max; ///< alpha ≠ 0,−2: |K − 2a/(2+a) E|/K
    double K_drift, V_drift;  ///< relative constancy drifts
    double E_abs_max;         ///< alpha = −2: max |E| (zero-energy check)
};

inline EnergyPartitionReport energy_partition_check(const Trajectory& traj, int n_samples = 200,
                                                    double i_const_tol = 1e-6) {
    const Masses& m = traj.masses();
    const double alpha = traj.alpha();
    std::vector<DerivedQuantities> d;
    for (int n = 0; n <= n_samples; ++n) {
        const double t = traj.t_begin() + traj.span() * n / n_samples;
        d.push_back(derived_quantities(traj.state_at(t), m, traj.potential()));
    }
    double I_min = d[0].I, I_max = d[0].I;
    for (const auto& q : d) {
        I_min = std::min(I_min, q.I);
        I_max = std::max(I_max, q.I);
    }
    EnergyPartitionReport rep{};
    rep.alpha = alpha;
    rep.I_drift = (I_max - I_min) / (0.5 * (I_max + I_min));
    if (rep.I_drift > i_const_tol) throw Error("hypothesis I=const violated");

    double K_min = d[0].K, K_max = d[0].K, V_min = d[0].V, V_max = d[0].V;
    for (const auto& q : d) {
        K_min = std::min(K_min, q.K);
        K_max = std::max(K_max, q.K);
        V_min = std::min(V_min, q.V);
        V_max = std::max(V_max, q.V);
        double pair_sum = 0.0; // Σ m_i m_j r_ij^alpha (Σ m_i m_j at alpha = 0)
        for (int k = 0; k < 3; ++k)
            pair_sum += m[cyc_i(k)] * m[cyc_j(k)] *
                        (alpha == 0.0 ? 1.0 : std::pow(q.r_opposite(k), alpha));
        if (alpha == -2.0) {
            rep.partition_max = std::max(rep.partition_max, std::fabs(q.K + 2.0 * q.V) / q.K);
            rep.E_abs_max = std::max(rep.E_abs_max, std::fabs(q.E));
        } else if (alpha == 0.0) {
            rep.partition_max =
                std::max(rep.partition_max, std::fabs(q.K - pair_sum) / pair_sum);
        } else {
            rep.partition_max = std::max(rep.partition_max, std::fabs(q.K - pair_sum) / q.K);
            rep.energy_relation_max =
                std::max(rep.energy_relation_max,
                         std::fabs(q.K - 2.0 * alpha / (2.0 + alpha) * q.E) / q.K);
        }
    }
    // For alpha = −2 the swing of K and V is informational (they may vary);
    // otherwise both must be constant.
    rep.K_drift = (K_max - K_min) / std::fabs(0.5 * (K_max + K_min));
    rep.V_drift = (V_max - V_min) / std::fabs(0.5 * (V_max + V_min));
    return rep;
}

/// Momentum/force-space residuals at one state:
///   inner = Σ_cyc m_i m_j r_ij^(a−2) p_k·f_k   (zero along constant-I orbits)
///   outer = Σ_cyc m_i m_j r_ij^(a−2) p_k∧f_k   (zero for every L = 0 state)
/// plus the weighted triplet (μ, p/μ, f/μ) feeding the algebraic theorem.
struct MomentumForceResult {
    double inner, outer;
    double inner_scale, outer_scale; ///< sums of term magnitudes
    AlgebraicTriplet triplet;
};

inline MomentumForceResult momentum_force_residuals(const PhaseState& s, const Masses& m,
                                                    double alpha, double hyp_tol = 1e-10) {
    require_finite(s);
    detail::require_separated(s.q, alpha);
    const auto hyp = detail::hypothesis_residuals(s, m);
    if (hyp.sum_p > hyp_tol) throw Error("hypotheses violated: sum p = 0");

    const PotentialSpec pot{alpha, m};
    const auto f = forces(s, pot);
    MomentumForceResult res{};
    for (int k = 0; k < 3; ++k) {
        const int i = cyc_i(k), j = cyc_j(k);
        const double w = m[i] * m[j] * detail::pow_r(norm2(s.q[i] - s.q[j]), alpha - 2.0);
        res.inner += w * dot(s.p[k], f[k]);
        res.outer += w * wedge(s.p[k], f[k]);
        const double mag = w * norm(s.p[k]) * norm(f[k]);
        res.inner_scale += mag;
        res.outer_scale += mag;
        res.triplet.mu[k] = 1.0 / w;
        res.triplet.xi[k] = w * s.p[k];
        res.triplet.xibar[k] = w * f[k];
    }
    return res;
}

} // namespace trisim
