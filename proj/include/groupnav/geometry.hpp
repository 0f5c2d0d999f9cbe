#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace groupnav::geom {

/// 2D vector, double precision. Used for positions, velocities, goals
/// and forces alike; the unit is whatever the caller stores in it.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& r) { x += r.x; y += r.y; return *this; }
    Vec2& operator-=(const Vec2& r) { x -= r.x; y -= r.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    friend constexpr Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }
    friend constexpr bool operator==(const Vec2& a, const Vec2& b) = default;

    constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
    constexpr double cross(const Vec2& r) const { return x * r.y - y * r.x; }
    constexpr double norm_sq() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }

    /// Unit vector; {0,0} when the norm is at or below eps.
    Vec2 normalized(double eps = 0.0) const {
        const double n = norm();
        if (n <= eps || n == 0.0) return {0.0, 0.0};
        return {x / n, y / n};
    }

    /// Counter-clockwise rotation by `angle` radians.
    Vec2 rotated(double angle) const {
        const double c = std::cos(angle), s = std::sin(angle);
        return {c * x - s * y, s * x + c * y};
    }

    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

/// Convex polygon, vertices in strictly counter-clockwise order (no
/// collinear triples). Degenerate hulls with 1 or 2 vertices are valid.
struct Polygon {
    std::vector<Vec2> vertices;

    bool empty() const { return vertices.empty(); }
    size_t size() const { return vertices.size(); }
};

/// Orientation of the triangle (a, b, c): positive when counter-clockwise.
inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b - a).cross(c - a);
}

/// Convex hull by Andrew's monotone chain, O(n log n). Collinear boundary
/// points are dropped; 1- and 2-point inputs yield degenerate polygons.
/// Throws std::invalid_argument on an empty or non-finite input.
Polygon convex_hull(std::span<const Vec2> points);

/// True when p lies inside or on the boundary of a convex CCW polygon.
bool point_in_polygon(const Vec2& p, const Polygon& poly);

/// Euclidean distance from p to the nearest point of the polygon
/// (boundary or interior); 0 when p is inside or on the boundary.
double distance_to_polygon(const Vec2& p, const Polygon& poly);

/// Distance from p to the segment [a, b].
double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b);

/// Unsigned angle between two vectors in degrees, in [0, 180].
/// Either vector being zero yields 0 (callers exclude such samples).
double angle_between_deg(const Vec2& a, const Vec2& b);

}  // namespace groupnav::geom
