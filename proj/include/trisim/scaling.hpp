#pragma once

#include <array>
#include <cmath>

#include "trisim/algebraic.hpp"
#include "trisim/derived.hpp"
#include "trisim/state.hpp"

namespace trisim {

/// Scaled variables q̃_i = q_i/√I and ṽ_i = dq̃_i/dt, which have unit moment
/// of inertia by construction. Valid for any state with I > 0; the four
/// constraint sums vanish whenever the original state has L = 0 in the
/// centre-of-mass frame.
struct ScaledState {
    double t;
    std::array<Vec2, 3> qt, vt;
    double Kt;   ///< Σ m_k ṽ_k²
    double I;    ///< moment of inertia of the original state
    double dIdt; ///< 2 Σ q_k·p_k of the original state
};

/// ṽ is evaluated from the closed form v/√I − q (dI/dt)/(2 I^{3/2}), never by
/// numerical differentiation.
inline ScaledState scale_state(const PhaseState& s, const Masses& m) {
    require_finite(s);
    double I = 0.0, dIdt = 0.0;
    for (int k = 0; k < 3; ++k) {
        I += m[k] * norm2(s.q[k]);
        dIdt += 2.0 * dot(s.q[k], s.p[k]);
    }
    if (!(I > 1e-280)) throw Error("triple collision, scaling undefined");

    ScaledState sc{};
    sc.t = s.t;
    sc.I = I;
    sc.dIdt = dIdt;
    const double root_i = std::sqrt(I);
    const auto v = velocities(s, m);
    for (int k = 0; k < 3; ++k) {
        sc.qt[k] = s.q[k] / root_i;
        sc.vt[k] = v[k] / root_i - s.q[k] * (dIdt / (2.0 * I * root_i));
        sc.Kt += m[k] * norm2(sc.vt[k]);
    }
    return sc;
}

/// Scaled residuals of the four constraint sums and the unit moment of
/// inertia for a scaled state.
struct ScaledConstraintResiduals {
    double sum_q, sum_v, wedge_sum, dot_sum, unit_inertia;
    double max_abs() const {
        return std::max({sum_q, sum_v, wedge_sum, dot_sum, unit_inertia});
    }
};

inline ScaledConstraintResiduals scaled_constraints(const ScaledState& sc, const Masses& m) {
    Vec2 sq{}, sv{};
    double w = 0.0, d = 0.0, inertia = 0.0;
    for (int k = 0; k < 3; ++k) {
        sq += m[k] * sc.qt[k];
        sv += m[k] * sc.vt[k];
        w += m[k] * wedge(sc.qt[k], sc.vt[k]);
        d += m[k] * dot(sc.qt[k], sc.vt[k]);
        inertia += m[k] * norm2(sc.qt[k]);
    }
    const double M = m.total();
    const double vscale = std::sqrt(std::max(sc.Kt, 1e-300));
    ScaledConstraintResiduals r{};
    r.sum_q = norm(sq) / std::sqrt(M);
    r.sum_v = norm(sv) / (std::sqrt(M) * vscale);
    r.wedge_sum = std::fabs(w) / vscale;
    r.dot_sum = std::fabs(d) / vscale;
    r.unit_inertia = std::fabs(inertia - 1.0);
    return r;
}

/// Residual of K q_i∧q_j + I v_i∧v_j − ½ (dI/dt) d(q_i∧q_j)/dt, the area
/// identity valid for every zero-angular-momentum orbit regardless of I(t).
/// `scale` is K·I; the relation holds to roundoff relative to it.
struct GeneralAreaResidual {
    double value;
    double scale;
};

inline GeneralAreaResidual general_area_residual(const PhaseState& s, const Masses& m, int i,
                                                 int j, double hyp_tol = 1e-10) {
    require_finite(s);
    if (i < 0 || i > 2 || j < 0 || j > 2 || i == j) throw Error("pair indices must differ");
    double I = 0.0, K = 0.0, L = 0.0, dIdt = 0.0;
    for (int k = 0; k < 3; ++k) {
        I += m[k] * norm2(s.q[k]);
        K += norm2(s.p[k]) / m[k];
        L += wedge(s.q[k], s.p[k]);
        dIdt += 2.0 * dot(s.q[k], s.p[k]);
    }
    const double lscale = std::sqrt(I * K);
    if (lscale > 0.0 && std::fabs(L) / lscale > hyp_tol)
        throw Error("zero angular momentum required");

    const auto v = velocities(s, m);
    const double darea_dt = wedge(v[i], s.q[j]) + wedge(s.q[i], v[j]);
    const double value =
        K * wedge(s.q[i], s.q[j]) + I * wedge(v[i], v[j]) - 0.5 * dIdt * darea_dt;
    return {value, K * I};
}

/// Synchronised similar triangles for the scaled variables: the algebraic
/// theorem applied to (m, q̃, ṽ), plus the scaled area pairs
/// q̃_i∧q̃_j + ṽ_i∧ṽ_j / K̃ (unit scaled inertia folds I(q̃) away).
struct ScaledSimilarityReport {
    Theorem5Report triangles;
    std::array<double, 3> area_pair;
    double max_abs() const {
        double r = triangles.max_abs();
        for (double a : area_pair) r = std::max(r, std::fabs(a));
        return r;
    }
};

inline ScaledSimilarityReport scaled_similarity_report(const ScaledState& sc, const Masses& m,
                                                       double hyp_tol = 1e-10) {
    AlgebraicTriplet tr{{m[0], m[1], m[2]}, sc.qt, sc.vt};
    ScaledSimilarityReport rep{};
    rep.triangles = theorem5_verify(tr, hyp_tol);
    for (int k = 0; k < 3; ++k) {
        const int i = cyc_i(k), j = cyc_j(k);
        rep.area_pair[k] = wedge(sc.qt[i], sc.qt[j]) + wedge(sc.vt[i], sc.vt[j]) / sc.Kt;
    }
    return rep;
}

} // namespace trisim
