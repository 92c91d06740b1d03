#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <vector>

#include "trisim/derived.hpp"
#include "trisim/potential.hpp"
#include "trisim/state.hpp"

namespace trisim {

struct IntegrateOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    /// Terminate when min r_ij drops below close_approach_factor × √(I0/M).
    /// Only active for alpha < 2, where coincidence is singular.
    bool stop_on_close_approach = true;
    double close_approach_factor = 1e-6;
    double initial_step = 0.0; ///< 0 selects the automatic estimate
    std::size_t max_steps = 10'000'000;
};

enum class Termination { span_end, collision_approach };

struct TrajectoryMeta {
    double rtol{}, atol{};
    Termination termination{Termination::span_end};
    double I_max{};        ///< max of I over the dense output
    double min_r{};        ///< min mutual distance observed
    double energy_drift{}; ///< max |E(t) − E(0)|
    double L_drift{};      ///< max |L(t) − L(0)|
    std::size_t n_accepted{}, n_rejected{}, n_rhs{};
};

namespace detail {

using StateVec = std::array<double, 12>; // q1x q1y q2x q2y q3x q3y v1x ... v3y

inline StateVec to_vec(const PhaseState& s, const Masses& m) {
    StateVec y{};
    for (int k = 0; k < 3; ++k) {
        y[2 * k] = s.q[k].x;
        y[2 * k + 1] = s.q[k].y;
        y[6 + 2 * k] = s.p[k].x / m[k];
        y[7 + 2 * k] = s.p[k].y / m[k];
    }
    return y;
}

inline PhaseState to_state(double t, const StateVec& y, const Masses& m) {
    PhaseState s;
    s.t = t;
    for (int k = 0; k < 3; ++k) {
        s.q[k] = {y[2 * k], y[2 * k + 1]};
        s.p[k] = {m[k] * y[6 + 2 * k], m[k] * y[7 + 2 * k]};
    }
    return s;
}

inline std::array<Vec2, 3> positions_of(const StateVec& y) {
    return {Vec2{y[0], y[1]}, Vec2{y[2], y[3]}, Vec2{y[4], y[5]}};
}

} // namespace detail

/// One accepted integrator step with its dense-output polynomial.
struct DenseStep {
    double t0, h;
    std::array<detail::StateVec, 8> cont;

    detail::StateVec eval(double t) const {
        const double s = (t - t0) / h, s1 = 1.0 - s;
        detail::StateVec y;
        for (int i = 0; i < 12; ++i)
            y[i] = cont[0][i] +
                   s * (cont[1][i] +
                        s1 * (cont[2][i] +
                              s * (cont[3][i] +
                                   s1 * (cont[4][i] +
                                         s * (cont[5][i] +
                                              s1 * (cont[6][i] + s * cont[7][i]))))));
        return y;
    }
};

/// Adaptive dense-output trajectory of the three-body flow. Immutable once
/// returned; state_at interpolates anywhere inside the integrated span.
class Trajectory {
public:
    Trajectory(PotentialSpec pot, PhaseState initial, IntegrateOptions opts)
        : pot_(pot), opts_(opts) {
        samples_.push_back(initial);
    }

    const PotentialSpec& potential() const { return pot_; }
    const Masses& masses() const { return pot_.masses; }
    double alpha() const { return pot_.alpha; }
    const IntegrateOptions& options() const { return opts_; }
    const TrajectoryMeta& meta() const { return meta_; }
    const std::vector<PhaseState>& samples() const { return samples_; }
    const std::vector<DenseStep>& steps() const { return steps_; }

    double t_begin() const { return samples_.front().t; }
    double t_end() const { return samples_.back().t; }
    double span() const { return t_end() - t_begin(); }
    bool forward() const { return t_end() >= t_begin(); }

    PhaseState state_at(double t) const {
        if (steps_.empty()) return samples_.front();
        const double lo = std::min(t_begin(), t_end()), hi = std::max(t_begin(), t_end());
        if (t < lo - 1e-9 * (hi - lo + 1.0) || t > hi + 1e-9 * (hi - lo + 1.0))
            throw Error("time outside trajectory span");
        t = std::clamp(t, lo, hi);
        // Binary search for the step containing t.
        std::size_t a = 0, b = steps_.size() - 1;
        const bool fwd = forward();
        while (a < b) {
            const std::size_t mid = (a + b + 1) / 2;
            const bool before = fwd ? (steps_[mid].t0 <= t) : (steps_[mid].t0 >= t);
            if (before) a = mid; else b = mid - 1;
        }
        return detail::to_state(t, steps_[a].eval(t), pot_.masses);
    }

private:
    friend Trajectory integrate(const PhaseState&, const PotentialSpec&, double,
                                const IntegrateOptions&);

    PotentialSpec pot_;
    IntegrateOptions opts_;
    std::vector<PhaseState> samples_;
    std::vector<DenseStep> steps_;
    TrajectoryMeta meta_{};
};

namespace detail {

/// Dormand–Prince 8(5,3) pair with 7th-order dense output (the classic
/// DOP853 coefficients of Hairer, Nørsett & Wanner).
struct Dop853 {
    // clang-format off
    static constexpr double
        c2  = 0.526001519587677318785587544488e-01, c3  = 0.789002279381515978178381316732e-01,
        c4  = 0.118350341907227396726757197510e+00, c5  = 0.281649658092772603273242802490e+00,
        c6  = 0.333333333333333333333333333333e+00, c7  = 0.25e+00,
        c8  = 0.307692307692307692307692307692e+00, c9  = 0.651282051282051282051282051282e+00,
        c10 = 0.6e+00,                              c11 = 0.857142857142857142857142857142e+00,

        b1  =  5.42937341165687622380535766363e-2,  b6  =  4.45031289275240888144113950566e0,
        b7  =  1.89151789931450038304281599044e0,   b8  = -5.8012039600105847814672114227e0,
        b9  =  3.1116436695781989440891606237e-1,   b10 = -1.52160949662516078556178806805e-1,
        b11 =  2.01365400804030348374776537501e-1,  b12 =  4.47106157277725905176885569043e-2,

        bhh1 = 0.244094488188976377952755905512e+00, bhh2 = 0.733846688281611857341361741547e+00,
        bhh3 = 0.220588235294117647058823529412e-01,

        er1  =  0.1312004499419488073250102996e-01, er6  = -0.1225156446376204440720569753e+01,
        er7  = -0.4957589496572501915214079952e+00, er8  =  0.1664377182454986536961530415e+01,
        er9  = -0.3503288487499736816886487290e+00, er10 =  0.3341791187130174790297318841e+00,
        er11 =  0.8192320648511571246570742613e-01, er12 = -0.2235530786388629525884427845e-01,

        a21 = 5.26001519587677318785587544488e-2,
        a31 = 1.97250569845378994544595329183e-2,  a32 = 5.91751709536136983633785987549e-2,
        a41 = 2.95875854768068491816892993775e-2,  a43 = 8.87627564304205475450678981324e-2,
        a51 = 2.41365134159266685502369798665e-1,  a53 = -8.84549479328286085344864962717e-1,
        a54 = 9.24834003261792003115737966543e-1,
        a61 = 3.7037037037037037037037037037e-2,   a64 = 1.70828608729473871279604482173e-1,
        a65 = 1.25467687566822425016691814123e-1,
        a71 = 3.7109375e-2,                        a74 = 1.70252211019544039314978060272e-1,
        a75 = 6.02165389804559606850219397283e-2,  a76 = -1.7578125e-2,
        a81 = 3.70920001185047927108779319836e-2,  a84 = 1.70383925712239993810214054705e-1,
        a85 = 1.07262030446373284651809199168e-1,  a86 = -1.53194377486244017527936158236e-2,
        a87 = 8.27378916381402288758473766002e-3,
        a91 = 6.24110958716075717114429577812e-1,  a94 = -3.36089262944694129406857109825e0,
        a95 = -8.68219346841726006818189891453e-1, a96 = 2.75920996994467083049415600797e1,
        a97 = 2.01540675504778934086186788979e1,   a98 = -4.34898841810699588477366255144e1,
        a101 = 4.77662536438264365890433908527e-1, a104 = -2.48811461997166764192642586468e0,
        a105 = -5.90290826836842996371446475743e-1,a106 = 2.12300514481811942347288949897e1,
        a107 = 1.52792336328824235832596922938e1,  a108 = -3.32882109689848629194453265587e1,
        a109 = -2.03312017085086261358222928593e-2,
        a111 = -9.3714243008598732571704021658e-1, a114 = 5.18637242884406370830023853209e0,
        a115 = 1.09143734899672957818500254654e0,  a116 = -8.14978701074692612513997267357e0,
        a117 = -1.85200656599969598641566180701e1, a118 = 2.27394870993505042818970056734e1,
        a119 = 2.49360555267965238987089396762e0,  a1110 = -3.0467644718982195003823669022e0,
        a121 = 2.27331014751653820792359768449e0,  a124 = -1.05344954667372501984066689879e1,
        a125 = -2.00087205822486249909675718444e0, a126 = -1.79589318631187989172765950534e1,
        a127 = 2.79488845294199600508499808837e1,  a128 = -2.85899827713502369474065508674e0,
        a129 = -8.87285693353062954433549289258e0, a1210 = 1.23605671757943030647266201528e1,
        a1211 = 6.43392746015763530355970484046e-1,

        c14 = 0.1e+00, c15 = 0.2e+00, c16 = 0.777777777777777777777777777778e+00,
        a141 = 5.61675022830479523392909219681e-2,  a147 = 2.53500210216624811088794765333e-1,
        a148 = -2.46239037470802489917441475441e-1, a149 = -1.24191423263816360469010140626e-1,
        a1410 = 1.5329179827876569731206322685e-1,  a1411 = 8.20105229563468988491666602057e-3,
        a1412 = 7.56789766054569976138603589584e-3, a1413 = -8.298e-3,
        a151 = 3.18346481635021405060768473261e-2,  a156 = 2.83009096723667755288322961402e-2,
        a157 = 5.35419883074385676223797384372e-2,  a158 = -5.49237485713909884646569340306e-2,
        a1511 = -1.08347328697249322858509316994e-4,a1512 = 3.82571090835658412954920192323e-4,
        a1513 = -3.40465008687404560802977114492e-4,a1514 = 1.41312443674632500278074618366e-1,
        a161 = -4.28896301583791923408573538692e-1, a166 = -4.69762141536116384314449447206e0,
        a167 = 7.68342119606259904184240953878e0,   a168 = 4.06898981839711007970213554331e0,
        a169 = 3.56727187455281109270669543021e-1,  a1613 = -1.39902416515901462129418009734e-3,
        a1614 = 2.9475147891527723389556272149e0,   a1615 = -9.15095847217987001081870187138e0,

        d41 = -0.84289382761090128651353491142e+01, d46 = 0.56671495351937776962531783590e+00,
        d47 = -0.30689499459498916912797304727e+01, d48 = 0.23846676565120698287728149680e+01,
        d49 = 0.21170345824450282767155149946e+01,  d410 = -0.87139158377797299206789907490e+00,
        d411 = 0.22404374302607882758541771650e+01, d412 = 0.63157877876946881815570249290e+00,
        d413 = -0.88990336451333310820698117400e-01,d414 = 0.18148505520854727256656404962e+02,
        d415 = -0.91946323924783554000451984436e+01,d416 = -0.44360363875948939664310572000e+01,

        d51 = 0.10427508642579134603413151009e+02,  d56 = 0.24228349177525818288430175319e+03,
        d57 = 0.16520045171727028198505394887e+03,  d58 = -0.37454675472269020279518312152e+03,
        d59 = -0.22113666853125306036270938578e+02, d510 = 0.77334326684722638389603898808e+01,
        d511 = -0.30674084731089398182061213626e+02,d512 = -0.93321305264302278729567221706e+01,
        d513 = 0.15697238121770843886131091075e+02, d514 = -0.31139403219565177677282850411e+02,
        d515 = -0.93529243588444783865713862664e+01,d516 = 0.35816841486394083752465898540e+02,

        d61 = 0.19985053242002433820987653617e+02,  d66 = -0.38703730874935176555105901742e+03,
        d67 = -0.18917813819516756882830838328e+03, d68 = 0.52780815920542364900561016686e+03,
        d69 = -0.11573902539959630126141871134e+02, d610 = 0.68812326946963000169666922661e+01,
        d611 = -0.10006050966910838403183860980e+01,d612 = 0.77771377980534432092869265740e+00,
        d613 = -0.27782057523535084065932004339e+01,d614 = -0.60196695231264120758267380846e+02,
        d615 = 0.84320405506677161018159903784e+02, d616 = 0.11992291136182789328035130030e+02,

        d71 = -0.25693933462703749003312586129e+02, d76 = -0.15418974869023643374053993627e+03,
        d77 = -0.23152937917604549567536039109e+03, d78 = 0.35763911791061412378285349910e+03,
        d79 = 0.93405324183624310003907691704e+02,  d710 = -0.37458323136451633156875139351e+02,
        d711 = 0.10409964950896230045147246184e+03, d712 = 0.29840293426660503123344363579e+02,
        d713 = -0.43533456590011143754432175058e+02,d714 = 0.96324553959188282948394950600e+02,
        d715 = -0.39177261675615439165231486172e+02,d716 = -0.14972683625798562581422125276e+03;
    // clang-format on
};

/// RHS of the first-order system: dq/dt = v, dv/dt = a(q).
struct ThreeBodyRhs {
    double alpha;
    const Masses& m;
    mutable std::size_t evals = 0;

    void operator()(const StateVec& y, StateVec& dy) const {
        ++evals;
        const auto a = accel_raw(positions_of(y), alpha, m);
        for (int i = 0; i < 6; ++i) dy[i] = y[6 + i];
        for (int k = 0; k < 3; ++k) {
            dy[6 + 2 * k] = a[k].x;
            dy[7 + 2 * k] = a[k].y;
        }
    }
};

} // namespace detail

/// Integrates the equations of motion from `initial` (at initial.t) to
/// t_final, forward or backward. Local error is controlled by the embedded
/// 8(5,3) pair at (rtol, atol); every accepted step carries a 7th-order
/// dense-output polynomial. A close approach below the stop radius, or a
/// step-size underflow near a singularity, terminates the trajectory with
/// reason collision_approach instead of failing.
inline Trajectory integrate(const PhaseState& initial, const PotentialSpec& pot, double t_final,
                            const IntegrateOptions& opts = {}) {
    using detail::StateVec;
    using C = detail::Dop853;
    require_finite(initial);
    detail::require_separated(initial.q, pot.alpha);
    if (!(std::fabs(t_final - initial.t) > 0.0)) throw Error("empty integration span");

    Trajectory traj(pot, initial, opts);
    const Masses& m = pot.masses;
    detail::ThreeBodyRhs rhs{pot.alpha, m};

    const double uround = 2.3e-16;
    const double posneg = t_final > initial.t ? 1.0 : -1.0;
    const double hmax = std::fabs(t_final - initial.t);
    const double safe = 0.9, fac1 = 1.0 / 3.0, fac2 = 6.0;
    const double facc1 = 1.0 / fac1, facc2 = 1.0 / fac2, expo1 = 0.125;

    double t = initial.t;
    StateVec w = detail::to_vec(initial, m);
    StateVec k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, ww1, wnew;

    // Monitoring baselines.
    DerivedQuantities d0 = derived_quantities(initial, m, pot);
    const double E0 = d0.E, L0 = d0.L;
    double I_max = d0.I;
    double min_r = std::min({d0.r[0], d0.r[1], d0.r[2]});
    double e_drift = 0.0, l_drift = 0.0;
    const double r_stop = (opts.stop_on_close_approach && pot.alpha < 2.0)
                              ? opts.close_approach_factor * std::sqrt(d0.I / d0.M)
                              : 0.0;

    rhs(w, k1);
    auto sample_monitor = [&](const StateVec& y) -> double {
        // Returns the min pair distance at y and folds I into the running max.
        const auto q = detail::positions_of(y);
        double I = 0.0;
        for (int k = 0; k < 3; ++k) I += m[k] * norm2(q[k]);
        I_max = std::max(I_max, I);
        const double r = std::min({norm(q[0] - q[1]), norm(q[1] - q[2]), norm(q[2] - q[0])});
        min_r = std::min(min_r, r);
        return r;
    };

    // Initial step estimate (Hairer's hinit).
    double h = opts.initial_step != 0.0 ? posneg * std::fabs(opts.initial_step) : 0.0;
    if (h == 0.0) {
        double dnf = 0.0, dny = 0.0;
        for (int i = 0; i < 12; ++i) {
            const double sk = opts.atol + opts.rtol * std::fabs(w[i]);
            dnf += (k1[i] / sk) * (k1[i] / sk);
            dny += (w[i] / sk) * (w[i] / sk);
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, hmax) * posneg;
        for (int i = 0; i < 12; ++i) ww1[i] = w[i] + h * k1[i];
        rhs(ww1, k2);
        double der2 = 0.0;
        for (int i = 0; i < 12; ++i) {
            const double sk = opts.atol + opts.rtol * std::fabs(w[i]);
            der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
        }
        der2 = std::sqrt(der2) / std::fabs(h);
        const double der12 = std::max(der2, std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::fabs(h) * 1e-3)
                                         : std::pow(0.01 / der12, 0.125);
        h = std::min({100.0 * std::fabs(h), h1, hmax}) * posneg;
    }

    bool reject = false, last = false;
    std::size_t n_acc = 0, n_rej = 0;
    Termination termination = Termination::span_end;
    double t_truncate = 0.0;

    while (true) {
        if (n_acc + n_rej > opts.max_steps) throw Error("integration exceeded max step count");
        if (0.1 * std::fabs(h) <= std::fabs(t) * uround) {
            termination = Termination::collision_approach; // step-size underflow
            break;
        }
        if ((t + 1.01 * h - t_final) * posneg > 0.0) {
            h = t_final - t;
            last = true;
        }

        // The twelve stages.
        for (int i = 0; i < 12; ++i) ww1[i] = w[i] + h * C::a21 * k1[i];
        rhs(ww1, k2);
        for (int i = 0; i < 12; ++i) ww1[i] = w[i] + h * (C::a31 * k1[i] + C::a32 * k2[i]);
        rhs(ww1, k3);
        for (int i = 0; i < 12; ++i) ww1[i] = w[i] + h * (C::a41 * k1[i] + C::a43 * k3[i]);
        rhs(ww1, k4);
        for (int i = 0; i < 12; ++i)
            ww1[i] = w[i] + h * (C::a51 * k1[i] + C::a53 * k3[i] + C::a54 * k4[i]);
        rhs(ww1, k5);
        for (int i = 0; i < 12; ++i)
            ww1[i] = w[i] + h * (C::a61 * k1[i] + C::a64 * k4[i] + C::a65 * k5[i]);
        rhs(ww1, k6);
        for (int i = 0; i < 12; ++i)
            ww1[i] = w[i] + h * (C::a71 * k1[i] + C::a74 * k4[i] + C::a75 * k5[i] + C::a76 * k6[i]);
        rhs(ww1, k7);
        for (int i = 0; i < 12; ++i)
            ww1[i] = w[i] + h * (C::a81 * k1[i] + C::a84 * k4[i] + C::a85 * k5[i] +
                                 C::a86 * k6[i] + C::a87 * k7[i]);
        rhs(ww1, k8);
        for (int i = 0; i < 12; ++i)
            ww1[i] = w[i] + h * (C::a91 * k1[i] + C::a94 * k4[i] + C::a95 * k5[i] +
                                 C::a96 * k6[i] + C::a97 * k7[i] + C::a98 * k8[i]);
        rhs(ww1, k9);
        for (int i = 0; i < 12; ++i)
            ww1[i] = w[i] + h * (C::a101 * k1[i] + C::a104 * k4[i] + C::a105 * k5[i] +
                                 C::a106 * k6[i] + C::a107 * k7[i] + C::a108 * k8[i] +
                                 C::a109 * k9[i]);
        rhs(ww1, k10);
        for (int i = 0; i < 12; ++i)
            ww1[i] = w[i] + h * (C::a111 * k1[i] + C::a114 * k4[i] + C::a115 * k5[i] +
                                 C::a116 * k6[i] + C::a117 * k7[i] + C::a118 * k8[i] +
                                 C::a119 * k9[i] + C::a1110 * k10[i]);
        StateVec k11;
        rhs(ww1, k11);
        const double tph = t + h;
        for (int i = 0; i < 12; ++i)
            ww1[i] = w[i] + h * (C::a121 * k1[i] + C::a124 * k4[i] + C::a125 * k5[i] +
                                 C::a126 * k6[i] + C::a127 * k7[i] + C::a128 * k8[i] +
                                 C::a129 * k9[i] + C::a1210 * k10[i] + C::a1211 * k11[i]);
        StateVec k12;
        rhs(ww1, k12);
        StateVec ksum; // b-weighted derivative combination
        for (int i = 0; i < 12; ++i) {
            ksum[i] = C::b1 * k1[i] + C::b6 * k6[i] + C::b7 * k7[i] + C::b8 * k8[i] +
                      C::b9 * k9[i] + C::b10 * k10[i] + C::b11 * k11[i] + C::b12 * k12[i];
            wnew[i] = w[i] + h * ksum[i];
        }

        // Embedded error estimate (5th- and 3rd-order combination).
        double err = 0.0, err2 = 0.0;
        for (int i = 0; i < 12; ++i) {
            const double sk = 1.0 / (opts.atol + opts.rtol * std::max(std::fabs(w[i]),
                                                                      std::fabs(wnew[i])));
            double sqr = (ksum[i] - C::bhh1 * k1[i] - C::bhh2 * k9[i] - C::bhh3 * k12[i]) * sk;
            err2 += sqr * sqr;
            sqr = (C::er1 * k1[i] + C::er6 * k6[i] + C::er7 * k7[i] + C::er8 * k8[i] +
                   C::er9 * k9[i] + C::er10 * k10[i] + C::er11 * k11[i] + C::er12 * k12[i]) *
                  sk;
            err += sqr * sqr;
        }
        double deno = err + 0.01 * err2;
        if (deno <= 0.0) deno = 12.0;
        err = std::fabs(h) * err * std::sqrt(1.0 / (12.0 * deno));

        if (!std::isfinite(err)) { // singular force evaluation inside the trial step
            h *= 0.25;
            reject = true;
            last = false;
            ++n_rej;
            continue;
        }

        const double fac11 = std::pow(err, expo1);
        const double fac = std::max(facc2, std::min(facc1, fac11 / safe));
        double hnew = h / fac;

        if (err <= 1.0) {
            // Accept: complete the FSAL evaluation and the dense output.
            ++n_acc;
            StateVec kend;
            rhs(wnew, kend);

            DenseStep step;
            step.t0 = t;
            step.h = h;
            for (int i = 0; i < 12; ++i) {
                step.cont[0][i] = w[i];
                const double ydiff = wnew[i] - w[i];
                step.cont[1][i] = ydiff;
                const double bspl = h * k1[i] - ydiff;
                step.cont[2][i] = bspl;
                step.cont[3][i] = ydiff - h * kend[i] - bspl;
                step.cont[4][i] = C::d41 * k1[i] + C::d46 * k6[i] + C::d47 * k7[i] +
                                  C::d48 * k8[i] + C::d49 * k9[i] + C::d410 * k10[i] +
                                  C::d411 * k11[i] + C::d412 * k12[i];
                step.cont[5][i] = C::d51 * k1[i] + C::d56 * k6[i] + C::d57 * k7[i] +
                                  C::d58 * k8[i] + C::d59 * k9[i] + C::d510 * k10[i] +
                                  C::d511 * k11[i] + C::d512 * k12[i];
                step.cont[6][i] = C::d61 * k1[i] + C::d66 * k6[i] + C::d67 * k7[i] +
                                  C::d68 * k8[i] + C::d69 * k9[i] + C::d610 * k10[i] +
                                  C::d611 * k11[i] + C::d612 * k12[i];
                step.cont[7][i] = C::d71 * k1[i] + C::d76 * k6[i] + C::d77 * k7[i] +
                                  C::d78 * k8[i] + C::d79 * k9[i] + C::d710 * k10[i] +
                                  C::d711 * k11[i] + C::d712 * k12[i];
            }
            // Three extra stages for the 7th-order interpolant.
            for (int i = 0; i < 12; ++i)
                ww1[i] = w[i] + h * (C::a141 * k1[i] + C::a147 * k7[i] + C::a148 * k8[i] +
                                     C::a149 * k9[i] + C::a1410 * k10[i] + C::a1411 * k11[i] +
                                     C::a1412 * k12[i] + C::a1413 * kend[i]);
            StateVec k14;
            rhs(ww1, k14);
            for (int i = 0; i < 12; ++i)
                ww1[i] = w[i] + h * (C::a151 * k1[i] + C::a156 * k6[i] + C::a157 * k7[i] +
                                     C::a158 * k8[i] + C::a1511 * k11[i] + C::a1512 * k12[i] +
                                     C::a1513 * kend[i] + C::a1514 * k14[i]);
            StateVec k15;
            rhs(ww1, k15);
            for (int i = 0; i < 12; ++i)
                ww1[i] = w[i] + h * (C::a161 * k1[i] + C::a166 * k6[i] + C::a167 * k7[i] +
                                     C::a168 * k8[i] + C::a169 * k9[i] + C::a1613 * kend[i] +
                                     C::a1614 * k14[i] + C::a1615 * k15[i]);
            StateVec k16;
            rhs(ww1, k16);
            for (int i = 0; i < 12; ++i) {
                step.cont[4][i] = h * (step.cont[4][i] + C::d413 * kend[i] + C::d414 * k14[i] +
                                       C::d415 * k15[i] + C::d416 * k16[i]);
                step.cont[5][i] = h * (step.cont[5][i] + C::d513 * kend[i] + C::d514 * k14[i] +
                                       C::d515 * k15[i] + C::d516 * k16[i]);
                step.cont[6][i] = h * (step.cont[6][i] + C::d613 * kend[i] + C::d614 * k14[i] +
                                       C::d615 * k15[i] + C::d616 * k16[i]);
                step.cont[7][i] = h * (step.cont[7][i] + C::d713 * kend[i] + C::d714 * k14[i] +
                                       C::d715 * k15[i] + C::d716 * k16[i]);
            }
            traj.steps_.push_back(step);

            // Monitor I_max / min r over the step; detect close approach.
            bool approach = false;
            for (int sub = 1; sub <= 8; ++sub) {
                const double ts = t + h * (sub / 8.0);
                const double r = sample_monitor(step.eval(ts));
                if (r_stop > 0.0 && r < r_stop) {
                    approach = true;
                    t_truncate = ts;
                    break;
                }
            }

            w = wnew;
            k1 = kend;
            t = tph;

            if (approach) {
                termination = Termination::collision_approach;
                traj.samples_.push_back(detail::to_state(t_truncate, step.eval(t_truncate), m));
                break;
            }

            traj.samples_.push_back(detail::to_state(t, w, m));
            {
                const DerivedQuantities d = derived_quantities(traj.samples_.back(), m, pot);
                e_drift = std::max(e_drift, std::fabs(d.E - E0));
                l_drift = std::max(l_drift, std::fabs(d.L - L0));
            }

            if (last) break;
            if (std::fabs(hnew) > hmax) hnew = posneg * hmax;
            if (reject) hnew = posneg * std::min(std::fabs(hnew), std::fabs(h));
            reject = false;
        } else {
            hnew = h / std::min(facc1, fac11 / safe);
            reject = true;
            last = false;
            if (n_acc >= 1) ++n_rej;
        }
        h = hnew;
    }

    traj.meta_.rtol = opts.rtol;
    traj.meta_.atol = opts.atol;
    traj.meta_.termination = termination;
    traj.meta_.I_max = I_max;
    traj.meta_.min_r = min_r;
    traj.meta_.energy_drift = e_drift;
    traj.meta_.L_drift = l_drift;
    traj.meta_.n_accepted = n_acc;
    traj.meta_.n_rejected = n_rej;
    traj.meta_.n_rhs = rhs.evals;
    return traj;
}

} // namespace trisim
