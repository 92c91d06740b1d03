#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include "trisim/derived.hpp"
#include "trisim/integrate.hpp"

namespace trisim {

/// FNV-1a 64-bit hash; used as the whole-line checksum of orbit-library rows.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Writes one row per accepted step:
/// t,q1x,q1y,q2x,q2y,q3x,q3y,p1x,...,p3y,I,K,L,E,Delta (17 significant digits).
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,q1x,q1y,q2x,q2y,q3x,q3y,p1x,p1y,p2x,p2y,p3x,p3y,I,K,L,E,Delta\n";
    for (const PhaseState& s : traj.samples()) {
        const DerivedQuantities d = derived_quantities(s, traj.masses(), traj.potential());
        out << format_g17(s.t);
        for (int k = 0; k < 3; ++k) out << ',' << format_g17(s.q[k].x) << ',' << format_g17(s.q[k].y);
        for (int k = 0; k < 3; ++k) out << ',' << format_g17(s.p[k].x) << ',' << format_g17(s.p[k].y);
        out << ',' << format_g17(d.I) << ',' << format_g17(d.K) << ',' << format_g17(d.L) << ','
            << format_g17(d.E) << ',' << format_g17(d.Delta) << '\n';
    }
}

} // namespace trisim
