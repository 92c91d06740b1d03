#pragma once

#include <cmath>

namespace trisim {

/// Planar vector; used for positions, velocities, momenta and forces.
struct Vec2 {
    double x{0.0};
    double y{0.0};

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr Vec2& operator/=(double s) { x /= s; y /= s; return *this; }
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return s * a; }
constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Outer product u∧w = u_x w_y − u_y w_x (signed parallelogram area).
constexpr double wedge(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

constexpr double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Counter-clockwise quarter turn.
constexpr Vec2 rot90(Vec2 a) { return {-a.y, a.x}; }

inline bool is_finite(Vec2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

} // namespace trisim
