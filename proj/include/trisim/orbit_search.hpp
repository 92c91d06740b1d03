#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "trisim/conserved.hpp"
#include "trisim/geometry.hpp"
#include "trisim/integrate.hpp"
#include "trisim/io.hpp"
#include "trisim/projection.hpp"
#include "trisim/scaling.hpp"
#include "trisim/syzygy.hpp"

namespace trisim {

/// A periodic-orbit solution (or a guess for one). The initial state is kept
/// in the Euler-configuration gauge: body 3 at the origin, bodies 1 and 2
/// antipodal, velocities balancing both momentum sums, which makes Σp = 0 and
/// L = 0 exact by construction.
struct OrbitRecord {
    double alpha;
    Masses masses;
    PhaseState initial;
    double period;
    struct Residuals {
        double periodicity; ///< |Φ_T(z0) − z0| in the scaled phase-space norm
        double L_max;       ///< max |L| over the period
        double E_residual;  ///< |E| for alpha = −2, energy drift otherwise
        double I_drift;     ///< relative swing of I over the period
    } residuals{};
    struct Provenance {
        std::string guess_source;
        int iterations;
        double shoot_tol, rtol, atol;
    } provenance{};
};

struct ShootOptions {
    double tol = 1e-9; ///< required scaled periodicity residual
    int max_iterations = 60;
    double fd_step = 1e-7; ///< relative finite-difference step for the Jacobian
    /// The closure measurement is amplified by the orbit's monodromy, so the
    /// flow must be integrated well below the target residual.
    double rtol = 1e-13, atol = 1e-15;
};

/// Builds the Euler-gauge state: q1 given, q2 = −(m1/m2) q1, q3 = 0,
/// v1 = v2 = −m3 v3/(m1+m2). Both Σ m q, Σ p and L vanish identically.
inline PhaseState euler_configuration_state(const Masses& m, Vec2 q1, Vec2 v3) {
    PhaseState s;
    s.t = 0.0;
    s.q = {q1, -(m[0] / m[1]) * q1, Vec2{}};
    const Vec2 v12 = -(m[2] / (m[0] + m[1])) * v3;
    s.p = {m[0] * v12, m[1] * v12, m[2] * v3};
    return s;
}

namespace detail {

/// Scaled sup-norm distance between two states: positions against √(I/M),
/// velocities against √(K/M) of the reference.
inline double scaled_state_distance(const PhaseState& a, const PhaseState& b, const Masses& m) {
    double I = 0.0, K = 0.0;
    for (int k = 0; k < 3; ++k) {
        I += m[k] * norm2(a.q[k]);
        K += norm2(a.p[k]) / m[k];
    }
    const double lq = std::sqrt(I / m.total()), lv = std::sqrt(K / m.total());
    double r = 0.0;
    for (int k = 0; k < 3; ++k) {
        r = std::max(r, norm(a.q[k] - b.q[k]) / lq);
        r = std::max(r, norm(a.p[k] / m[k] - b.p[k] / m[k]) / lv);
    }
    return r;
}

/// Rescales the velocities of an Euler-gauge state so the total energy is
/// exactly zero (K = −2V). Requires V < 0, true for every alpha < 0 state.
inline Vec2 zero_energy_v3(const Masses& m, Vec2 q1, Vec2 v3, double alpha) {
    const PhaseState s = euler_configuration_state(m, q1, v3);
    const double V = potential_raw(s.q, alpha, m);
    double K = 0.0;
    for (int k = 0; k < 3; ++k) K += norm2(s.p[k]) / m[k];
    if (!(V < 0.0) || !(K > 0.0)) throw Error("cannot normalise to zero energy");
    return std::sqrt(-2.0 * V / K) * v3;
}

/// Residuals of the quarter-period map. At t = T/4 a figure-eight orbit
/// started from the body-3 Euler configuration reaches a configuration that
/// is mirror-symmetric about the x axis with body 3 on the axis. The mirror
/// conditions q1y + q2y = 0 and v1x + v2x = 0 are dropped: the flow conserves
/// the momentum sums, which makes them copies of the first two rows. Together
/// with the scale gauge this leaves a square five-by-five system.
struct QuarterShot {
    std::array<double, 5> residual;
    double max_abs() const {
        double r = 0.0;
        for (double v : residual) r = std::max(r, std::fabs(v));
        return r;
    }
};

inline QuarterShot quarter_residuals(const Masses& m, double alpha, Vec2 q1, Vec2 v3,
                                     double tau, double I_target, bool zero_energy,
                                     const ShootOptions& opts) {
    if (!(tau > 0.0)) throw Error("quarter period must be positive");
    if (zero_energy) v3 = zero_energy_v3(m, q1, v3, alpha);
    const PhaseState s0 = euler_configuration_state(m, q1, v3);

    double I0 = 0.0, K0 = 0.0;
    for (int k = 0; k < 3; ++k) {
        I0 += m[k] * norm2(s0.q[k]);
        K0 += norm2(s0.p[k]) / m[k];
    }
    const double lq = std::sqrt(I0 / m.total()), lv = std::sqrt(K0 / m.total());

    IntegrateOptions iopts;
    iopts.rtol = opts.rtol;
    iopts.atol = opts.atol;
    const Trajectory traj = integrate(s0, PotentialSpec{alpha, m}, tau, iopts);
    if (traj.meta().termination != Termination::span_end)
        throw Error("collision during shooting");
    const PhaseState e = traj.state_at(tau);
    const auto v = velocities(e, m);

    QuarterShot shot{};
    shot.residual = {e.q[2].y / lq,
                     v[2].x / lv,
                     (e.q[0].x - e.q[1].x) / lq,
                     (v[0].y - v[1].y) / lv,
                     (I0 - I_target) / I_target};
    return shot;
}

/// Solves the square system J du = -f by partial-pivot elimination.
inline std::array<double, 5> newton_step(std::array<std::array<double, 5>, 5> J,
                                         std::array<double, 5> f) {
    std::array<double, 5> b;
    for (int r = 0; r < 5; ++r) b[r] = -f[r];
    double scale = 0.0;
    for (auto& row : J)
        for (double v : row) scale = std::max(scale, std::fabs(v));
    for (int c = 0; c < 5; ++c) {
        int piv = c;
        for (int r = c + 1; r < 5; ++r)
            if (std::fabs(J[r][c]) > std::fabs(J[piv][c])) piv = r;
        if (std::fabs(J[piv][c]) <= 1e-14 * std::max(scale, 1e-300))
            throw Error("singular shooting Jacobian");
        std::swap(J[c], J[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < 5; ++r) {
            const double f2 = J[r][c] / J[c][c];
            for (int k = c; k < 5; ++k) J[r][k] -= f2 * J[c][k];
            b[r] -= f2 * b[c];
        }
    }
    std::array<double, 5> x{};
    for (int r = 4; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < 5; ++k) s -= J[r][k] * x[k];
        x[r] = s / J[r][r];
    }
    return x;
}

} // namespace detail

class ShootError : public Error {
public:
    ShootError(const std::string& what, double best_residual, int iterations)
        : Error(what), best_residual(best_residual), iterations(iterations) {}
    double best_residual;
    int iterations;
};

/// Damped Newton shooting on the symmetry-reduced quarter-period map.
/// Unknowns: the Euler-configuration parameters (q1, v3) and the quarter
/// period against the square residual system of quarter_residuals. Steps are
/// halved until the residual decreases; a singular Jacobian falls back to a
/// Tikhonov-damped least-squares step. The scale gauge keeps I(0) at the
/// guess's value; for alpha = −2 the momenta are rescaled every iteration so
/// E = 0 exactly.
inline OrbitRecord shoot_periodic(const OrbitRecord& guess, const ShootOptions& opts = {}) {
    const Masses& m = guess.masses;
    const double alpha = guess.alpha;
    const bool zero_energy = (alpha == -2.0);

    // Extract the Euler-gauge unknowns from the guess state.
    if (norm(guess.initial.q[2]) > 1e-9 * norm(guess.initial.q[0]))
        throw Error("guess is not in the Euler-configuration gauge (body 3 at origin)");
    std::array<double, 5> u = {guess.initial.q[0].x, guess.initial.q[0].y,
                               guess.initial.p[2].x / m[2], guess.initial.p[2].y / m[2],
                               guess.period / 4.0};
    double I_target = 0.0;
    {
        const PhaseState s0 = euler_configuration_state(m, {u[0], u[1]}, {u[2], u[3]});
        for (int k = 0; k < 3; ++k) I_target += m[k] * norm2(s0.q[k]);
    }

    auto eval = [&](const std::array<double, 5>& p) {
        return detail::quarter_residuals(m, alpha, {p[0], p[1]}, {p[2], p[3]}, p[4], I_target,
                                         zero_energy, opts);
    };

    detail::QuarterShot shot = eval(u);
    double fnorm = shot.max_abs();
    int iter = 0;
    const double quarter_tol = 1e-13; // numerical floor of the quarter map

    while (fnorm > quarter_tol && iter < opts.max_iterations) {
        ++iter;
        std::array<std::array<double, 5>, 5> J{};
        for (int c = 0; c < 5; ++c) {
            auto up = u;
            const double du = opts.fd_step * std::max(1.0, std::fabs(u[c]));
            up[c] += du;
            const auto shot_p = eval(up);
            for (int r = 0; r < 5; ++r)
                J[r][c] = (shot_p.residual[r] - shot.residual[r]) / du;
        }

        std::array<double, 5> step{};
        try {
            step = detail::newton_step(J, shot.residual);
        } catch (const Error&) {
            // Tikhonov fallback for a (near-)singular Jacobian.
            std::array<std::array<double, 5>, 5> JtJ{};
            std::array<double, 5> rhs{};
            double diag_max = 1e-30;
            for (int r = 0; r < 5; ++r)
                for (int a = 0; a < 5; ++a) {
                    rhs[a] -= J[r][a] * shot.residual[r];
                    for (int b = 0; b < 5; ++b) JtJ[a][b] += J[r][a] * J[r][b];
                }
            for (int a = 0; a < 5; ++a) diag_max = std::max(diag_max, JtJ[a][a]);
            for (int a = 0; a < 5; ++a) JtJ[a][a] += 1e-6 * diag_max;
            step = detail::solve_sym<5>(JtJ, rhs);
        }

        bool improved = false;
        double damp = 1.0;
        for (int attempt = 0; attempt < 10 && !improved; ++attempt, damp *= 0.5) {
            auto ut = u;
            for (int a = 0; a < 5; ++a) ut[a] += damp * step[a];
            try {
                const auto shot_t = eval(ut);
                if (shot_t.max_abs() < fnorm) {
                    u = ut;
                    shot = shot_t;
                    fnorm = shot_t.max_abs();
                    improved = true;
                }
            } catch (const Error&) {
                // collision or invalid trial: shorten the step
            }
        }
        if (!improved) break;
    }

    // Assemble the candidate orbit and certify the full period.
    Vec2 q1{u[0], u[1]}, v3{u[2], u[3]};
    if (zero_energy) v3 = detail::zero_energy_v3(m, q1, v3, alpha);
    const PhaseState s0 = euler_configuration_state(m, q1, v3);
    const double period = 4.0 * u[4];

    IntegrateOptions iopts;
    iopts.rtol = opts.rtol;
    iopts.atol = opts.atol;
    const Trajectory traj = integrate(s0, PotentialSpec{alpha, m}, period, iopts);
    if (traj.meta().termination != Termination::span_end)
        throw ShootError("collision during shooting", fnorm, iter);
    const double periodicity = detail::scaled_state_distance(s0, traj.state_at(period), m);
    if (!(periodicity < opts.tol))
        throw ShootError("shooting did not converge: periodicity residual " +
                             format_g17(periodicity) + " after " + std::to_string(iter) +
                             " iterations (quarter-map residual " + format_g17(fnorm) + ")",
                         std::min(periodicity, fnorm), iter);

    OrbitRecord rec{alpha, m, s0, period, {}, {}};
    rec.residuals.periodicity = periodicity;
    double I0 = 0.0;
    for (int k = 0; k < 3; ++k) I0 += m[k] * norm2(s0.q[k]);
    double I_min = I0, I_max = I0;
    const DerivedQuantities d0 = derived_quantities(s0, m, traj.potential());
    for (int n = 0; n <= 256; ++n) {
        const DerivedQuantities d =
            derived_quantities(traj.state_at(period * n / 256.0), m, traj.potential());
        rec.residuals.L_max = std::max(rec.residuals.L_max, std::fabs(d.L));
        I_min = std::min(I_min, d.I);
        I_max = std::max(I_max, d.I);
        rec.residuals.E_residual =
            std::max(rec.residuals.E_residual,
                     zero_energy ? std::fabs(d.E) : std::fabs(d.E - d0.E));
    }
    rec.residuals.I_drift = (I_max - I_min) / (0.5 * (I_max + I_min));
    rec.provenance = {guess.provenance.guess_source, iter, opts.tol, opts.rtol, opts.atol};
    return rec;
}

/// Full certification report for a stored orbit, produced by reintegrating at
/// tightened tolerance and re-running every identity that applies.
struct OrbitCertification {
    OrbitRecord::Residuals residuals;
    bool similarity_applicable; ///< constant-I identities apply (alpha = −2 orbits)
    std::string similarity_error;
    double similarity_max;        ///< worst unscaled-similarity residual, if applicable
    double scaled_similarity_max; ///< worst scaled-similarity residual (always applies)
    double constant_drift;
    double constant_reference_residual; ///< alpha = −2 only
    double min_momentum;
    bool partition_applicable;
    std::string partition_error;
    double partition_max;
    double inner_max, outer_max; ///< momentum/force residuals, scaled
    int syzygy_count;
};

struct VerifyOrbitOptions {
    double rtol = 1e-13, atol = 1e-15;
    int n_samples = 256;
};

inline OrbitCertification verify_orbit(const OrbitRecord& rec,
                                       const VerifyOrbitOptions& opts = {}) {
    const Masses& m = rec.masses;
    IntegrateOptions iopts;
    iopts.rtol = opts.rtol;
    iopts.atol = opts.atol;
    const PotentialSpec pot{rec.alpha, m};
    const Trajectory traj = integrate(rec.initial, pot, rec.initial.t + rec.period, iopts);
    if (traj.meta().termination != Termination::span_end)
        throw Error("orbit not integrable over one period");

    OrbitCertification cert{};
    cert.residuals.periodicity =
        detail::scaled_state_distance(rec.initial, traj.state_at(traj.t_end()), m);

    const DerivedQuantities d0 = derived_quantities(rec.initial, m, pot);
    double I_min = d0.I, I_max = d0.I;
    cert.similarity_applicable = true;
    cert.min_momentum = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= opts.n_samples; ++n) {
        const double t = traj.t_begin() + traj.span() * n / opts.n_samples;
        const PhaseState s = traj.state_at(t);
        const DerivedQuantities d = derived_quantities(s, m, pot);
        cert.residuals.L_max = std::max(cert.residuals.L_max, std::fabs(d.L));
        cert.residuals.E_residual = std::max(
            cert.residuals.E_residual,
            rec.alpha == -2.0 ? std::fabs(d.E) : std::fabs(d.E - d0.E));
        I_min = std::min(I_min, d.I);
        I_max = std::max(I_max, d.I);
        for (int k = 0; k < 3; ++k) cert.min_momentum = std::min(cert.min_momentum, norm(s.p[k]));

        if (cert.similarity_applicable) {
            try {
                cert.similarity_max =
                    std::max(cert.similarity_max, similarity_report(s, m).max_abs());
            } catch (const Error& e) {
                cert.similarity_applicable = false;
                cert.similarity_error = e.what();
            }
        }
        cert.scaled_similarity_max = std::max(
            cert.scaled_similarity_max,
            scaled_similarity_report(scale_state(s, m), m).max_abs());

        const auto mf = momentum_force_residuals(s, m, rec.alpha);
        cert.inner_max = std::max(cert.inner_max, std::fabs(mf.inner) / mf.inner_scale);
        cert.outer_max = std::max(cert.outer_max, std::fabs(mf.outer) / mf.outer_scale);
    }
    cert.residuals.I_drift = (I_max - I_min) / (0.5 * (I_max + I_min));

    const ConstantReport con = constant_report(traj, opts.n_samples);
    cert.constant_drift = con.drift;
    cert.constant_reference_residual = con.reference_residual;

    try {
        const EnergyPartitionReport part = energy_partition_check(traj, opts.n_samples);
        cert.partition_applicable = true;
        cert.partition_max = std::max(part.partition_max, part.energy_relation_max);
    } catch (const Error& e) {
        cert.partition_applicable = false;
        cert.partition_error = e.what();
    }

    int count = 0;
    for (const auto& ev : detect_events(traj))
        if (ev.kind == SyzygyEvent::Kind::syzygy && ev.t < traj.t_end() - 1e-6) ++count;
    cert.syzygy_count = count;
    return cert;
}

// --- Orbit library -----------------------------------------------------------
//
// Append-only, line-delimited. Each line is the state literal followed by
// `alpha <a> period <T> residuals <periodicity> <L> <E> <Idrift> iters <n>
// src <token> checksum <hex>`, where the checksum is the FNV-1a 64 hash of
// everything before " checksum".

inline std::string format_orbit_record(const OrbitRecord& rec) {
    std::ostringstream out;
    out << format_state_literal(rec.masses, rec.initial);
    out << " alpha " << format_g17(rec.alpha) << " period " << format_g17(rec.period);
    out << " residuals " << format_g17(rec.residuals.periodicity) << ' '
        << format_g17(rec.residuals.L_max) << ' ' << format_g17(rec.residuals.E_residual) << ' '
        << format_g17(rec.residuals.I_drift);
    out << " iters " << rec.provenance.iterations;
    std::string src = rec.provenance.guess_source.empty() ? "-" : rec.provenance.guess_source;
    for (char& c : src)
        if (std::isspace(static_cast<unsigned char>(c))) c = '_';
    out << " src " << src;
    const std::string body = out.str();
    return body + " checksum " + to_hex(fnv1a64(body));
}

inline OrbitRecord parse_orbit_record(const std::string& line) {
    const auto pos = line.rfind(" checksum ");
    if (pos == std::string::npos) throw Error("orbit record: missing checksum field");
    const std::string body = line.substr(0, pos);
    const std::string given = line.substr(pos + 10);
    if (to_hex(fnv1a64(body)) != given) throw Error("orbit record: checksum mismatch");

    std::istringstream in(body);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.size() < 17 + 12) throw Error("orbit record: truncated line");
    std::string literal;
    for (int i = 0; i < 17; ++i) literal += tok[static_cast<std::size_t>(i)] + " ";
    const StateLiteral sl = parse_state_literal(literal);

    auto field = [&](const char* name, std::size_t offset) -> double {
        for (std::size_t i = 17; i < tok.size(); ++i)
            if (tok[i] == name) {
                if (i + offset >= tok.size()) throw Error("orbit record: truncated field");
                return std::stod(tok[i + offset]);
            }
        throw Error(std::string("orbit record: missing field ") + name);
    };
    OrbitRecord rec{field("alpha", 1), sl.masses, sl.state, field("period", 1), {}, {}};
    rec.residuals.periodicity = field("residuals", 1);
    rec.residuals.L_max = field("residuals", 2);
    rec.residuals.E_residual = field("residuals", 3);
    rec.residuals.I_drift = field("residuals", 4);
    rec.provenance.iterations = static_cast<int>(field("iters", 1));
    for (std::size_t i = 17; i < tok.size(); ++i)
        if (tok[i] == "src" && i + 1 < tok.size()) rec.provenance.guess_source = tok[i + 1];
    return rec;
}

inline void append_orbit_record(const std::string& path, const OrbitRecord& rec) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("cannot open orbit library for append: " + path);
    out << format_orbit_record(rec) << '\n';
}

inline std::vector<OrbitRecord> read_orbit_library(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open orbit library: " + path);
    std::vector<OrbitRecord> out;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        out.push_back(parse_orbit_record(line));
    }
    return out;
}

} // namespace trisim
