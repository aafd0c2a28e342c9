#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace polydg {

using Point = Eigen::Vector2d;

struct BoundingBox
{
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    Point center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    bool contains(const Point& p, double tol = 0.0) const
    {
        return p.x() >= xmin - tol && p.x() <= xmax + tol && p.y() >= ymin - tol &&
               p.y() <= ymax + tol;
    }
};

inline double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Shoelace signed area; positive for counter-clockwise polygons.
inline double signed_area(std::span<const Point> poly)
{
    const std::size_t n = poly.size();
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        a += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * a;
}

/// Area centroid. The polygon is shifted to its first vertex to limit cancellation.
inline Point polygon_centroid(std::span<const Point> poly)
{
    const std::size_t n = poly.size();
    const Point o = poly[0];
    double a = 0.0;
    Point c = Point::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const Point p = poly[i] - o;
        const Point q = poly[(i + 1) % n] - o;
        const double w = cross(p, q);
        a += w;
        c += w * (p + q);
    }
    return o + c / (3.0 * a);
}

inline double polygon_diameter(std::span<const Point> poly)
{
    double h = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        for (std::size_t j = i + 1; j < poly.size(); ++j)
            h = std::max(h, (poly[i] - poly[j]).norm());
    return h;
}

inline BoundingBox bounding_box(std::span<const Point> poly)
{
    BoundingBox b{std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest(),
                  std::numeric_limits<double>::max(), std::numeric_limits<double>::lowest()};
    for (const auto& p : poly) {
        b.xmin = std::min(b.xmin, p.x());
        b.xmax = std::max(b.xmax, p.x());
        b.ymin = std::min(b.ymin, p.y());
        b.ymax = std::max(b.ymax, p.y());
    }
    return b;
}

namespace detail {

inline int orientation(const Point& a, const Point& b, const Point& c, double tol)
{
    const double v = cross(b - a, c - a);
    if (v > tol)
        return 1;
    if (v < -tol)
        return -1;
    return 0;
}

inline bool on_segment(const Point& a, const Point& b, const Point& p, double tol)
{
    return std::min(a.x(), b.x()) - tol <= p.x() && p.x() <= std::max(a.x(), b.x()) + tol &&
           std::min(a.y(), b.y()) - tol <= p.y() && p.y() <= std::max(a.y(), b.y()) + tol;
}

} // namespace detail

/// Closed-segment intersection test with an absolute tolerance on orientation.
inline bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2,
                               double tol = 0.0)
{
    using detail::on_segment;
    using detail::orientation;
    const int o1 = orientation(p1, p2, q1, tol);
    const int o2 = orientation(p1, p2, q2, tol);
    const int o3 = orientation(q1, q2, p1, tol);
    const int o4 = orientation(q1, q2, p2, tol);
    if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0)
        return true;
    if (o1 == 0 && on_segment(p1, p2, q1, tol))
        return true;
    if (o2 == 0 && on_segment(p1, p2, q2, tol))
        return true;
    if (o3 == 0 && on_segment(q1, q2, p1, tol))
        return true;
    if (o4 == 0 && on_segment(q1, q2, p2, tol))
        return true;
    return false;
}

/// True when the closed polygon has no repeated vertices and no two non-adjacent
/// edges touch. Collinear consecutive vertices are allowed.
inline bool is_simple_polygon(std::span<const Point> poly)
{
    const std::size_t n = poly.size();
    if (n < 3)
        return false;
    double scale = 0.0;
    for (const auto& p : poly)
        scale = std::max(scale, p.cwiseAbs().maxCoeff());
    const double tol = 1e-14 * std::max(scale * scale, 1e-300);

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if ((poly[i] - poly[j]).squaredNorm() == 0.0)
                return false;

    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            const Point& c = poly[j];
            const Point& d = poly[(j + 1) % n];
            if (adjacent) {
                // Adjacent edges may only share their common vertex: reject a fold-back.
                const Point& shared = (j == i + 1) ? b : a;
                const Point& e1 = (j == i + 1) ? a : b;
                const Point& e2 = (j == i + 1) ? d : c;
                const Point u = e1 - shared, v = e2 - shared;
                if (std::abs(cross(u, v)) <= tol && u.dot(v) > 0.0)
                    return false;
                continue;
            }
            if (segments_intersect(a, b, c, d, tol))
                return false;
        }
    }
    return true;
}

inline double point_segment_distance(const Point& p, const Point& a, const Point& b)
{
    const Point ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

/// Winding-number point location; points on the boundary are reported inside.
inline bool point_in_polygon(const Point& p, std::span<const Point> poly)
{
    int winding = 0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        if (point_segment_distance(p, a, b) == 0.0)
            return true;
        if (a.y() <= p.y()) {
            if (b.y() > p.y() && cross(b - a, p - a) > 0.0)
                ++winding;
        } else if (b.y() <= p.y() && cross(b - a, p - a) < 0.0) {
            --winding;
        }
    }
    return winding != 0;
}

/// Distance from p to the polygon boundary.
inline double boundary_distance(const Point& p, std::span<const Point> poly)
{
    double d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < poly.size(); ++i)
        d = std::min(d, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
    return d;
}

/// Sutherland-Hodgman clip against the half-plane { x : normal·x <= offset }.
inline std::vector<Point> clip_halfplane(std::span<const Point> poly, const Point& normal,
                                         double offset)
{
    std::vector<Point> out;
    const std::size_t n = poly.size();
    if (n == 0)
        return out;
    out.reserve(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        const double da = normal.dot(a) - offset;
        const double db = normal.dot(b) - offset;
        if (da <= 0.0)
            out.push_back(a);
        if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
            const double t = da / (da - db);
            out.push_back(a + t * (b - a));
        }
    }
    return out;
}

} // namespace polydg
