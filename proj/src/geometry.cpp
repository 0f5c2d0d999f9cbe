#include "groupnav/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace groupnav::geom {

Polygon convex_hull(std::span<const Vec2> points) {
    if (points.empty()) throw std::invalid_argument("convex_hull: empty point set");
    for (const Vec2& p : points)
        if (!p.finite()) throw std::invalid_argument("convex_hull: non-finite point");

    std::vector<Vec2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    const size_t n = pts.size();
    if (n <= 2) return Polygon{std::move(pts)};

    // Lower then upper chain; cross <= 0 pops, so collinear points go.
    std::vector<Vec2> hull;
    hull.reserve(2 * n);
    for (const Vec2& p : pts) {
        while (hull.size() >= 2 && orient(hull[hull.size() - 2], hull.back(), p) <= 0.0)
            hull.pop_back();
        hull.push_back(p);
    }
    const size_t lower = hull.size() + 1;
    for (size_t i = n - 1; i-- > 0;) {
        const Vec2& p = pts[i];
        while (hull.size() >= lower && orient(hull[hull.size() - 2], hull.back(), p) <= 0.0)
            hull.pop_back();
        hull.push_back(p);
    }
    hull.pop_back();  // last point repeats the first
    if (hull.size() < 2) {
        // fully collinear input collapses to its two extremes
        hull = {pts.front(), pts.back()};
    }
    return Polygon{std::move(hull)};
}

bool point_in_polygon(const Vec2& p, const Polygon& poly) {
    const auto& v = poly.vertices;
    if (v.empty()) return false;
    if (v.size() == 1) return p == v[0];
    if (v.size() == 2) return distance_to_segment(p, v[0], v[1]) == 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        const Vec2& a = v[i];
        const Vec2& b = v[(i + 1) % v.size()];
        if (orient(a, b, p) < 0.0) return false;
    }
    return true;
}

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len_sq = ab.norm_sq();
    if (len_sq == 0.0) return (p - a).norm();
    double t = (p - a).dot(ab) / len_sq;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

double distance_to_polygon(const Vec2& p, const Polygon& poly) {
    const auto& v = poly.vertices;
    if (v.empty()) throw std::invalid_argument("distance_to_polygon: empty polygon");
    if (v.size() == 1) return (p - v[0]).norm();
    if (v.size() == 2) return distance_to_segment(p, v[0], v[1]);
    if (point_in_polygon(p, poly)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < v.size(); ++i)
        best = std::min(best, distance_to_segment(p, v[i], v[(i + 1) % v.size()]));
    return best;
}

double angle_between_deg(const Vec2& a, const Vec2& b) {
    if ((a.x == 0.0 && a.y == 0.0) || (b.x == 0.0 && b.y == 0.0)) return 0.0;
    // atan2(|cross|, dot) is stable for near-parallel vectors
    const double angle = std::atan2(std::abs(a.cross(b)), a.dot(b));
    return angle * 180.0 / M_PI;
}

}  // namespace groupnav::geom
