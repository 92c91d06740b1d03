#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "trisim/derived.hpp"
#include "trisim/integrate.hpp"

namespace trisim {

/// Oriented area Δ and its normalisation S = Δ/√I sampled along a trajectory.
struct DeltaSample {
    double t, delta, S;
};

/// Samples Δ densely enough for sign-change bracketing: every accepted step is
/// subdivided, and the spacing is additionally capped by max_dt when given
/// (pass T0/8 from an oscillation bound).
inline std::vector<DeltaSample> delta_series(const Trajectory& traj, double max_dt = 0.0) {
    std::vector<DeltaSample> out;
    const Masses& m = traj.masses();
    auto push = [&](double t) {
        const PhaseState s = traj.state_at(t);
        double I = 0.0;
        for (int k = 0; k < 3; ++k) I += m[k] * norm2(s.q[k]);
        const double delta = oriented_area(s);
        out.push_back({t, delta, I > 0.0 ? delta / std::sqrt(I) : 0.0});
    };
    push(traj.t_begin());
    const double t_stop = traj.t_end();
    for (const auto& step : traj.steps()) {
        const double t1 = traj.forward() ? std::min(step.t0 + step.h, t_stop)
                                         : std::max(step.t0 + step.h, t_stop);
        const double span = t1 - step.t0;
        if (span == 0.0) continue;
        int nsub = 4;
        if (max_dt > 0.0)
            nsub = std::clamp(static_cast<int>(std::ceil(std::fabs(span) / max_dt)), 4, 256);
        for (int n = 1; n <= nsub; ++n) push(step.t0 + span * n / nsub);
        if (t1 == t_stop && ((traj.forward() && step.t0 + step.h > t_stop) ||
                             (!traj.forward() && step.t0 + step.h < t_stop)))
            break;
    }
    return out;
}

/// Residual of the oriented-area equation of motion
///   d²Δ/dt² + (2K/I + Σ_{k<l} (m_k+m_l) r_kl^(a−2)) Δ − (1/I)(dI/dt) dΔ/dt,
/// with d²Δ/dt² assembled analytically from (v, a) pairs. `scale` sums the
/// magnitudes of the three terms plus the oscillator's rate times dΔ/dt; the
/// latter keeps the measure meaningful at syzygies of constant-I orbits,
/// where all three terms cross zero together.
struct DeltaOdeResidual {
    double value, scale;
};

inline DeltaOdeResidual delta_ode_residual(const Trajectory& traj, double t) {
    const PhaseState s = traj.state_at(t);
    const Masses& m = traj.masses();
    const auto a = acceleration(s, traj.potential());
    const auto v = velocities(s, m);

    double I = 0.0, K = 0.0, dIdt = 0.0;
    for (int k = 0; k < 3; ++k) {
        I += m[k] * norm2(s.q[k]);
        K += norm2(s.p[k]) / m[k];
        dIdt += 2.0 * dot(s.q[k], s.p[k]);
    }
    double delta = 0.0, ddelta = 0.0, d2delta = 0.0, pair_term = 0.0;
    for (int k = 0; k < 3; ++k) {
        const int i = cyc_i(k), j = cyc_j(k);
        delta += 0.5 * wedge(s.q[i], s.q[j]);
        ddelta += 0.5 * (wedge(v[i], s.q[j]) + wedge(s.q[i], v[j]));
        d2delta += 0.5 * (2.0 * wedge(v[i], v[j]) + wedge(a[i], s.q[j]) + wedge(s.q[i], a[j]));
        pair_term += (m[i] + m[j]) *
                     detail::pow_r(norm2(s.q[i] - s.q[j]), traj.alpha() - 2.0);
    }
    const double coeff = 2.0 * K / I + pair_term; // strictly positive
    const double value = d2delta + coeff * delta - (dIdt / I) * ddelta;
    const double scale = std::fabs(d2delta) + std::fabs(coeff * delta) +
                         std::fabs((dIdt / I) * ddelta) + std::sqrt(coeff) * std::fabs(ddelta);
    return {value, scale};
}

/// Uniform lower bound for the oscillation rate of S = Δ/√I:
///   ω0² = M (m_min²/(M I_max))^((2−a)/2),  T0 = π/ω0.
/// min_omega_sq_observed is the pointwise minimum of
///   ω²(t) = (M/I) Σ_cyc m_k q_k² r_ij^(a−2) + 3K/I − (3/4I²)(dI/dt)²
/// over the trajectory samples; the theorem guarantees ω² ≥ ω0².
struct OscillationBound {
    double omega0_sq, T0, I_max, m_min, alpha;
    double min_omega_sq_observed;
};

inline double omega_sq(const PhaseState& s, const Masses& m, double alpha) {
    double I = 0.0, K = 0.0, dIdt = 0.0;
    for (int k = 0; k < 3; ++k) {
        I += m[k] * norm2(s.q[k]);
        K += norm2(s.p[k]) / m[k];
        dIdt += 2.0 * dot(s.q[k], s.p[k]);
    }
    double sum = 0.0;
    for (int k = 0; k < 3; ++k)
        sum += m[k] * norm2(s.q[k]) *
               detail::pow_r(norm2(s.q[cyc_i(k)] - s.q[cyc_j(k)]), alpha - 2.0);
    return m.total() / I * sum + 3.0 * K / I - 0.75 * dIdt * dIdt / (I * I);
}

inline OscillationBound omega_bound(const Trajectory& traj) {
    const double alpha = traj.alpha();
    if (alpha > 2.0) throw Error("bound requires alpha <= 2");
    const Masses& m = traj.masses();
    OscillationBound b{};
    b.alpha = alpha;
    b.I_max = traj.meta().I_max;
    b.m_min = m.min();
    b.omega0_sq =
        m.total() * std::pow(b.m_min * b.m_min / (m.total() * b.I_max), 0.5 * (2.0 - alpha));
    b.T0 = 3.14159265358979323846 / std::sqrt(b.omega0_sq);
    b.min_omega_sq_observed = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.samples())
        b.min_omega_sq_observed = std::min(b.min_omega_sq_observed, omega_sq(s, m, alpha));
    return b;
}

/// A zero of the oriented area, classified by the state at the root.
struct SyzygyEvent {
    enum class Kind { syzygy, pair_collision, triple_collision };
    double t;
    Kind kind;
    /// syzygy: 1-based index of the middle body; pair_collision: pair code
    /// 12/23/31; triple_collision: 0.
    int detail;
};

struct EventOptions {
    double time_tol = 1e-12;         ///< root refinement tolerance in t
    double collision_factor = 1e-6;  ///< × initial length scale √(I0/M)
    double triple_factor = 1e-12;    ///< × I0
    double max_dt = 0.0;             ///< sampling cap; 0 = T0/8 when alpha ≤ 2
    double zero_tol = 1e-10;         ///< |Δ| below this × the area scale is an event
};

namespace detail {

inline int middle_body(const std::array<Vec2, 3>& q) {
    // Project on the direction of the farthest pair; the median projection
    // is the body between the other two.
    int a = 0, b = 1;
    double best = -1.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (norm2(q[j] - q[i]) > best) {
                best = norm2(q[j] - q[i]);
                a = i;
                b = j;
            }
    const Vec2 d = q[b] - q[a];
    std::array<double, 3> s{};
    for (int k = 0; k < 3; ++k) s[k] = dot(q[k], d);
    for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3, j = (k + 2) % 3;
        if ((s[k] >= s[i] && s[k] <= s[j]) || (s[k] <= s[i] && s[k] >= s[j])) return k;
    }
    return a; // unreachable for distinct projections
}

} // namespace detail

/// Brackets every sign change of Δ along the dense output, refines each root
/// by bisection to the time tolerance, and classifies it. A trajectory that
/// ended in a close approach contributes a final collision event.
inline std::vector<SyzygyEvent> detect_events(const Trajectory& traj,
                                              const EventOptions& opts = {}) {
    const Masses& m = traj.masses();
    double max_dt = opts.max_dt;
    if (max_dt == 0.0 && traj.alpha() <= 2.0) max_dt = omega_bound(traj).T0 / 8.0;
    const auto series = delta_series(traj, max_dt);

    double I0 = 0.0;
    for (int k = 0; k < 3; ++k) I0 += m[k] * norm2(traj.samples().front().q[k]);
    const double r_col = opts.collision_factor * std::sqrt(I0 / m.total());
    const double I_col = opts.triple_factor * I0;
    const double delta_scale = I0 / (m.total() / 3.0);

    auto classify = [&](double t) -> SyzygyEvent {
        const PhaseState s = traj.state_at(t);
        double I = 0.0;
        for (int k = 0; k < 3; ++k) I += m[k] * norm2(s.q[k]);
        if (I < I_col) return {t, SyzygyEvent::Kind::triple_collision, 0};
        int ci = 0, cj = 1;
        double rmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                if (norm(s.q[j] - s.q[i]) < rmin) {
                    rmin = norm(s.q[j] - s.q[i]);
                    ci = i;
                    cj = j;
                }
        if (rmin < r_col) {
            const int code = (ci == 0 && cj == 1) ? 12 : (ci == 1 && cj == 2) ? 23 : 31;
            return {t, SyzygyEvent::Kind::pair_collision, code};
        }
        return {t, SyzygyEvent::Kind::syzygy, detail::middle_body(s.q) + 1};
    };

    std::vector<SyzygyEvent> events;
    const double zero_tol = opts.zero_tol * delta_scale;

    // A collinear span start is itself an event.
    std::size_t start = 0;
    if (std::fabs(series.front().delta) <= zero_tol) {
        events.push_back(classify(series.front().t));
        while (start < series.size() && std::fabs(series[start].delta) <= zero_tol) ++start;
    }

    bool prev_valid = start < series.size();
    double prev_t = prev_valid ? series[start].t : 0.0;
    double prev_d = prev_valid ? series[start].delta : 0.0;
    for (std::size_t n = start + 1; n < series.size(); ++n) {
        const double t1 = series[n].t, d1 = series[n].delta;
        if (d1 == 0.0) { // sampled the root exactly
            events.push_back(classify(t1));
            prev_valid = false;
            continue;
        }
        if (prev_valid && ((prev_d < 0.0) != (d1 < 0.0))) {
            double lo = prev_t, hi = t1, dlo = prev_d;
            while (std::fabs(hi - lo) > opts.time_tol) {
                const double mid = 0.5 * (lo + hi);
                const double dm = oriented_area(traj.state_at(mid));
                if (dm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((dm < 0.0) == (dlo < 0.0)) {
                    lo = mid;
                    dlo = dm;
                } else {
                    hi = mid;
                }
            }
            events.push_back(classify(0.5 * (lo + hi)));
        }
        prev_t = t1;
        prev_d = d1;
        prev_valid = true;
    }

    if (traj.meta().termination == Termination::collision_approach) {
        const PhaseState s_end = traj.state_at(traj.t_end());
        double I_end = 0.0;
        for (int k = 0; k < 3; ++k) I_end += m[k] * norm2(s_end.q[k]);
        int ci = 0, cj = 1;
        double rmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                if (norm(s_end.q[j] - s_end.q[i]) < rmin) {
                    rmin = norm(s_end.q[j] - s_end.q[i]);
                    ci = i;
                    cj = j;
                }
        SyzygyEvent last{traj.t_end(), SyzygyEvent::Kind::pair_collision,
                         (ci == 0 && cj == 1) ? 12 : (ci == 1 && cj == 2) ? 23 : 31};
        if (I_end < I_col) last = {traj.t_end(), SyzygyEvent::Kind::triple_collision, 0};
        const bool duplicate =
            !events.empty() && events.back().kind != SyzygyEvent::Kind::syzygy &&
            std::fabs(events.back().t - last.t) <= std::max(1e-9, 4.0 * opts.time_tol);
        if (!duplicate) events.push_back(last);
    }
    return events;
}

/// Certificate that consecutive zeros of Δ are separated by less than
/// T0 = π/ω0, and that the first zero arrives within T0 of the span start.
struct GapCertificate {
    struct Gap {
        double t_prev, t_next, gap;
        bool pass;
    };
    double T0;
    std::vector<Gap> gaps;
    bool first_event_within_T0;
    bool first_check_vacuous; ///< span shorter than T0 with no event
    bool all_pass;
};

inline GapCertificate gap_certificate(const std::vector<SyzygyEvent>& events,
                                      const OscillationBound& bound, double t_begin,
                                      double t_end) {
    GapCertificate cert{};
    cert.T0 = bound.T0;
    const double slack = 1e-9 * bound.T0;
    const double span = std::fabs(t_end - t_begin);

    if (events.empty()) {
        cert.first_check_vacuous = span < bound.T0;
        cert.first_event_within_T0 = cert.first_check_vacuous;
        cert.all_pass = cert.first_check_vacuous;
        return cert;
    }
    cert.first_event_within_T0 = std::fabs(events.front().t - t_begin) < bound.T0 + slack;
    cert.all_pass = cert.first_event_within_T0;
    for (std::size_t n = 1; n < events.size(); ++n) {
        const double gap = std::fabs(events[n].t - events[n - 1].t);
        const bool pass = gap < bound.T0 + slack;
        cert.gaps.push_back({events[n - 1].t, events[n].t, gap, pass});
        cert.all_pass = cert.all_pass && pass;
    }
    return cert;
}

} // namespace trisim
