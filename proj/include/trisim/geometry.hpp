#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "trisim/derived.hpp"
#include "trisim/state.hpp"

namespace trisim {

/// Concurrency of three lines: either a common point or a common direction.
/// `residual` is the distance of the worst line to the point (point kind),
/// or the largest pairwise unit-direction wedge (parallel kind).
struct Concurrency {
    enum class Kind { point, parallel };
    Kind kind{Kind::point};
    Vec2 point{};
    Vec2 direction{};
    double residual{0.0};
};

struct Circumdata {
    Vec2 center;
    double radius;
};

namespace detail {

struct HypothesisResiduals {
    double sum_p{}, angular{}, radial{}; // scaled |Σp|, |Σq∧p|, |Σq·p|
};

inline HypothesisResiduals hypothesis_residuals(const PhaseState& s, const Masses& m) {
    Vec2 sp{};
    double L = 0.0, qp = 0.0, I = 0.0, K = 0.0;
    for (int k = 0; k < 3; ++k) {
        sp += s.p[k];
        L += wedge(s.q[k], s.p[k]);
        qp += dot(s.q[k], s.p[k]);
        I += m[k] * norm2(s.q[k]);
        K += norm2(s.p[k]) / m[k];
    }
    HypothesisResiduals r;
    const double pscale = std::sqrt(m.total() * K), ikscale = std::sqrt(I * K);
    r.sum_p = pscale > 0.0 ? norm(sp) / pscale : 0.0;
    r.angular = ikscale > 0.0 ? std::fabs(L) / ikscale : 0.0;
    r.radial = ikscale > 0.0 ? std::fabs(qp) / ikscale : 0.0;
    return r;
}

/// Intersection / parallelism of three lines through base[k] along dir[k].
/// The two best-conditioned lines (largest direction wedge) fix the point;
/// the third contributes the residual.
inline Concurrency concurrency_of_lines(const std::array<Vec2, 3>& base,
                                        const std::array<Vec2, 3>& dir,
                                        double parallel_tol = 1e-10) {
    std::array<Vec2, 3> u;
    for (int k = 0; k < 3; ++k) u[k] = dir[k] / norm(dir[k]);

    double best = -1.0;
    int a = 0, b = 1;
    double max_wedge = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double w = std::fabs(wedge(u[i], u[j]));
            max_wedge = std::max(max_wedge, w);
            if (w > best) {
                best = w;
                a = i;
                b = j;
            }
        }

    Concurrency c;
    if (max_wedge < parallel_tol) {
        c.kind = Concurrency::Kind::parallel;
        Vec2 d = u[0];
        if (d.x < 0.0 || (d.x == 0.0 && d.y < 0.0)) d = -d; // canonical sign
        c.direction = d;
        c.residual = max_wedge;
        return c;
    }
    const double s = wedge(base[b] - base[a], u[b]) / wedge(u[a], u[b]);
    c.kind = Concurrency::Kind::point;
    c.point = base[a] + s * u[a];
    const int third = 3 - a - b;
    c.residual = std::fabs(wedge(c.point - base[third], u[third]));
    return c;
}

inline double stationary_threshold(const PhaseState& s, const Masses& m) {
    double K = 0.0;
    for (int k = 0; k < 3; ++k) K += norm2(s.p[k]) / m[k];
    return 1e-12 * std::sqrt(K * m.total() / 3.0);
}

} // namespace detail

/// Concurrency point C_t of the three tangent lines (lines through q_k along
/// p_k). Requires Σp = 0 and L = 0.
inline Concurrency centre_of_tangents(const PhaseState& s, const Masses& m,
                                      double hyp_tol = 1e-10) {
    require_finite(s);
    const auto hyp = detail::hypothesis_residuals(s, m);
    if (hyp.sum_p > hyp_tol) throw Error("hypotheses violated: sum p = 0");
    if (hyp.angular > hyp_tol) throw Error("hypotheses violated: L = 0");
    const double eps_p = detail::stationary_threshold(s, m);
    for (int k = 0; k < 3; ++k)
        if (norm(s.p[k]) <= eps_p) throw Error("undefined tangent (stationary body)");
    return detail::concurrency_of_lines(s.q, s.p);
}

/// Concurrency point C_n of the three normal lines (momenta rotated 90°).
/// Requires Σp = 0 and Σq·p = 0 (constant moment of inertia).
inline Concurrency centre_of_normals(const PhaseState& s, const Masses& m,
                                     double hyp_tol = 1e-10) {
    require_finite(s);
    const auto hyp = detail::hypothesis_residuals(s, m);
    if (hyp.sum_p > hyp_tol) throw Error("hypotheses violated: sum p = 0");
    if (hyp.radial > hyp_tol) throw Error("hypothesis I=const violated (sum q.p != 0)");
    const double eps_p = detail::stationary_threshold(s, m);
    for (int k = 0; k < 3; ++k)
        if (norm(s.p[k]) <= eps_p) throw Error("undefined tangent (stationary body)");
    return detail::concurrency_of_lines(s.q, {rot90(s.p[0]), rot90(s.p[1]), rot90(s.p[2])});
}

/// C_t and C_n as endpoints of a circumcircle diameter.
struct CircumcircleReport {
    Circumdata circ;
    Vec2 ct, cn;
    double midpoint_residual;  ///< |midpoint(C_t, C_n) − C_o|
    double radius_residual_ct; ///< ||C_t − C_o| − radius|
    double radius_residual_cn;
    double line_residual_t, line_residual_n; ///< third-line distances
    double max_abs() const {
        return std::max({midpoint_residual, radius_residual_ct, radius_residual_cn,
                         line_residual_t, line_residual_n});
    }
};

/// Circumcenter from the perpendicular bisectors of the two longest sides.
inline Circumdata circumcircle(const std::array<Vec2, 3>& q) {
    int shortest = 0; // pair index (k) with the shortest opposite side (i,j)
    double smin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        const double len = norm2(q[cyc_i(k)] - q[cyc_j(k)]);
        if (len < smin) {
            smin = len;
            shortest = k;
        }
    }
    const int a = cyc_i(shortest), b = cyc_j(shortest); // two longest sides: (k,a), (k,b)
    const Vec2 m1 = 0.5 * (q[shortest] + q[a]), d1 = rot90(q[a] - q[shortest]);
    const Vec2 m2 = 0.5 * (q[shortest] + q[b]), d2 = rot90(q[b] - q[shortest]);
    const double den = wedge(d1, d2);
    if (den == 0.0) throw Error("degenerate circumcircle");
    const double s = wedge(m2 - m1, d2) / den;
    const Vec2 c = m1 + s * d1;
    return {c, norm(q[0] - c)};
}

inline CircumcircleReport circumcircle_check(const PhaseState& s, const Masses& m,
                                             double hyp_tol = 1e-10) {
    require_finite(s);
    const auto hyp = detail::hypothesis_residuals(s, m);
    if (hyp.sum_p > hyp_tol) throw Error("hypotheses violated: sum p = 0");
    if (hyp.angular > hyp_tol) throw Error("hypotheses violated: L = 0");
    if (hyp.radial > hyp_tol) throw Error("hypothesis I=const violated (sum q.p != 0)");

    double I = 0.0;
    for (int k = 0; k < 3; ++k) I += m[k] * norm2(s.q[k]);
    if (std::fabs(oriented_area(s)) < 1e-10 * I / (m.total() / 3.0))
        throw Error("degenerate circumcircle");

    const Concurrency ct = centre_of_tangents(s, m, hyp_tol);
    const Concurrency cn = centre_of_normals(s, m, hyp_tol);
    if (ct.kind != Concurrency::Kind::point || cn.kind != Concurrency::Kind::point)
        throw Error("diameter undefined");

    CircumcircleReport rep{};
    rep.circ = circumcircle(s.q);
    rep.ct = ct.point;
    rep.cn = cn.point;
    rep.midpoint_residual = norm(0.5 * (ct.point + cn.point) - rep.circ.center);
    rep.radius_residual_ct = std::fabs(norm(ct.point - rep.circ.center) - rep.circ.radius);
    rep.radius_residual_cn = std::fabs(norm(cn.point - rep.circ.center) - rep.circ.radius);
    rep.line_residual_t = ct.residual;
    rep.line_residual_n = cn.residual;
    return rep;
}

/// Residuals of the synchronised-similar-triangles equalities at one state
/// with Σp = 0, L = 0, Σq·p = 0. All entries are dimensionless; index k runs
/// over the cyclic pairs (i,j,k).
struct SimilarityReport {
    double kappa; ///< √(m1 m2 m3 K / (M I))
    std::array<double, 3> ratio;       ///< |p_k|/r_ij − κ
    std::array<double, 3> side_vertex; ///< m_i m_j r_ij²/(M I) − m_k v_k²/K
    std::array<double, 3> vertex_sum;  ///< m_k q_k²/I + m_k v_k²/K − (m_i+m_j)/M
    std::array<double, 3> area_pair;   ///< q_i∧q_j/I + v_i∧v_j/K

    double max_abs() const {
        double r = 0.0;
        for (int k = 0; k < 3; ++k)
            r = std::max({r, std::fabs(ratio[k]), std::fabs(side_vertex[k]),
                          std::fabs(vertex_sum[k]), std::fabs(area_pair[k])});
        return r;
    }
};

inline SimilarityReport similarity_report(const PhaseState& s, const Masses& m,
                                          double hyp_tol = 1e-10) {
    require_finite(s);
    detail::require_separated(s.q, 0.0); // distinct bodies: the ratios divide by r_ij
    const auto hyp = detail::hypothesis_residuals(s, m);
    if (hyp.sum_p > hyp_tol) throw Error("hypotheses violated: sum p = 0");
    if (hyp.angular > hyp_tol) throw Error("hypotheses violated: L = 0");
    if (hyp.radial > hyp_tol) throw Error("hypothesis I=const violated (sum q.p != 0)");

    double I = 0.0, K = 0.0;
    for (int k = 0; k < 3; ++k) {
        I += m[k] * norm2(s.q[k]);
        K += norm2(s.p[k]) / m[k];
    }
    if (K <= 0.0) throw Error("degenerate similarity: all momenta zero");
    const double M = m.total();
    const auto v = velocities(s, m);

    SimilarityReport rep{};
    rep.kappa = std::sqrt(m[0] * m[1] * m[2] * K / (M * I));
    for (int k = 0; k < 3; ++k) {
        const int i = cyc_i(k), j = cyc_j(k);
        const double rij = norm(s.q[i] - s.q[j]);
        rep.ratio[k] = norm(s.p[k]) / rij - rep.kappa;
        rep.side_vertex[k] = m[i] * m[j] * rij * rij / (M * I) - m[k] * norm2(v[k]) / K;
        rep.vertex_sum[k] =
            m[k] * norm2(s.q[k]) / I + m[k] * norm2(v[k]) / K - (m[i] + m[j]) / M;
        rep.area_pair[k] = wedge(s.q[i], s.q[j]) / I + wedge(v[i], v[j]) / K;
    }
    return rep;
}

} // namespace trisim
