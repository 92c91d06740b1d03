#pragma once

#include <array>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "trisim/error.hpp"
#include "trisim/vec2.hpp"

namespace trisim {

/// Strictly positive body masses.
class Masses {
public:
    Masses(double m1, double m2, double m3) : m_{m1, m2, m3} {
        for (double m : m_)
            if (!(m > 0.0) || !std::isfinite(m))
                throw Error("masses must be strictly positive and finite");
    }

    double operator[](int i) const { return m_[static_cast<std::size_t>(i)]; }
    double total() const { return m_[0] + m_[1] + m_[2]; }
    double min() const { return std::min(m_[0], std::min(m_[1], m_[2])); }

private:
    std::array<double, 3> m_;
};

/// Time, positions and momenta of the three bodies. Velocities v_i = p_i/m_i
/// are derived, never stored. No constraint (centre of mass, momentum sums)
/// is assumed; residuals are always computed from the fields.
struct PhaseState {
    double t{0.0};
    std::array<Vec2, 3> q{};
    std::array<Vec2, 3> p{};
};

/// Cyclic permutations (i,j,k) = (1,2,3), (2,3,1), (3,1,2), zero-based:
/// for body k the opposite pair is (cyc_i(k), cyc_j(k)).
constexpr int cyc_i(int k) { return (k + 1) % 3; }
constexpr int cyc_j(int k) { return (k + 2) % 3; }

inline bool is_finite(const PhaseState& s) {
    if (!std::isfinite(s.t)) return false;
    for (int k = 0; k < 3; ++k)
        if (!is_finite(s.q[k]) || !is_finite(s.p[k])) return false;
    return true;
}

inline void require_finite(const PhaseState& s) {
    if (!is_finite(s)) throw Error("non-finite phase state");
}

inline std::array<Vec2, 3> velocities(const PhaseState& s, const Masses& m) {
    return {s.p[0] / m[0], s.p[1] / m[1], s.p[2] / m[2]};
}

/// Centre-of-mass position weighted by the masses.
inline Vec2 barycentre(const std::array<Vec2, 3>& q, const Masses& m) {
    return (m[0] * q[0] + m[1] * q[1] + m[2] * q[2]) / m.total();
}

/// Formats a double with 17 significant digits (round-trip exact).
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// State literal: `m1 m2 m3 / q1x q1y q2x q2y q3x q3y / p1x p1y ... p3y`,
/// whitespace-separated, slashes as standalone tokens.
inline std::string format_state_literal(const Masses& m, const PhaseState& s) {
    std::ostringstream out;
    out << format_g17(m[0]) << ' ' << format_g17(m[1]) << ' ' << format_g17(m[2]) << " /";
    for (int k = 0; k < 3; ++k) out << ' ' << format_g17(s.q[k].x) << ' ' << format_g17(s.q[k].y);
    out << " /";
    for (int k = 0; k < 3; ++k) out << ' ' << format_g17(s.p[k].x) << ' ' << format_g17(s.p[k].y);
    return out.str();
}

struct StateLiteral {
    Masses masses;
    PhaseState state;
};

inline StateLiteral parse_state_literal(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.size() != 17 || tok[3] != "/" || tok[10] != "/")
        throw Error("state literal must be `m1 m2 m3 / q... / p...` (17 tokens, got " +
                    std::to_string(tok.size()) + ")");
    auto num = [&](std::size_t i) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(tok[i], &pos);
        } catch (const std::exception&) {
            throw Error("state literal: bad number `" + tok[i] + "`");
        }
        if (pos != tok[i].size() || !std::isfinite(v))
            throw Error("state literal: bad number `" + tok[i] + "`");
        return v;
    };
    Masses m(num(0), num(1), num(2));
    PhaseState s;
    for (int k = 0; k < 3; ++k) s.q[k] = {num(4 + 2 * k), num(5 + 2 * k)};
    for (int k = 0; k < 3; ++k) s.p[k] = {num(11 + 2 * k), num(12 + 2 * k)};
    return {m, s};
}

} // namespace trisim
