#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>


#include "error.hpp"
#include "geometry.hpp"
#include "mesh.hpp"

namespace polydg {

namespace detail {

/// Uniform bucket grid over seed points for nearest-first neighbour sweeps.
class SeedGrid
{
public:
    SeedGrid(std::span<const Point> seeds, const BoundingBox& box)
        : seeds_(seeds), box_(box)
    {
        const double n = static_cast<double>(std::max<std::size_t>(seeds.size(), 1));
        cell_ = std::sqrt(box.width() * box.height() / n);
        nx_ = std::max(1, static_cast<int>(std::ceil(box.width() / cell_)));
        ny_ = std::max(1, static_cast<int>(std::ceil(box.height() / cell_)));
        buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            auto [bx, by] = bucket(seeds[i]);
            buckets_[static_cast<std::size_t>(by * nx_ + bx)].push_back(static_cast<int>(i));
        }
    }

    std::pair<int, int> bucket(const Point& p) const
    {
        const int bx = std::clamp(static_cast<int>((p.x() - box_.xmin) / cell_), 0, nx_ - 1);
        const int by = std::clamp(static_cast<int>((p.y() - box_.ymin) / cell_), 0, ny_ - 1);
        return {bx, by};
    }

    double cell_size() const { return cell_; }
    int max_ring() const { return std::max(nx_, ny_); }

    /// Seeds in the square ring at Chebyshev distance r from bucket (bx, by).
    void ring(int bx, int by, int r, std::vector<int>& out) const
    {
        out.clear();
        for (int j = by - r; j <= by + r; ++j) {
            if (j < 0 || j >= ny_)
                continue;
            for (int i = bx - r; i <= bx + r; ++i) {
                if (i < 0 || i >= nx_)
                    continue;
                if (std::max(std::abs(i - bx), std::abs(j - by)) != r)
                    continue;
                const auto& b = buckets_[static_cast<std::size_t>(j * nx_ + i)];
                out.insert(out.end(), b.begin(), b.end());
            }
        }
    }

private:
    std::span<const Point> seeds_;
    BoundingBox box_;
    double cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> buckets_;
};

inline bool is_convex_polygon(std::span<const Point> poly)
{
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i)
        if (cross(poly[(i + 1) % n] - poly[i], poly[(i + 2) % n] - poly[(i + 1) % n]) < 0.0)
            return false;
    return n >= 3;
}

/// Voronoi cell of seed `i` inside the convex domain: the bisector half-plane of every
/// sufficiently close seed, nearest first, clips the domain.
inline std::vector<Point> voronoi_cell(std::size_t i, std::span<const Point> seeds, const SeedGrid& grid,
                                       std::span<const Point> domain)
{
    std::vector<Point> cell(domain.begin(), domain.end());
    const Point& s = seeds[i];
    auto [bx, by] = grid.bucket(s);
    std::vector<int> candidates;
    for (int r = 0; r <= grid.max_ring(); ++r) {
        grid.ring(bx, by, r, candidates);
        std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
            const double da = (seeds[static_cast<std::size_t>(a)] - s).squaredNorm();
            const double db = (seeds[static_cast<std::size_t>(b)] - s).squaredNorm();
            return da < db || (da == db && a < b);
        });
        for (int j : candidates) {
            if (static_cast<std::size_t>(j) == i)
                continue;
            const Point& t = seeds[static_cast<std::size_t>(j)];
            const Point normal = t - s;
            const double offset = 0.5 * (t.squaredNorm() - s.squaredNorm());
            cell = clip_halfplane(cell, normal, offset);
        }
        // Seeds beyond ring r are at least r·cell away; they cannot cut the cell once
        // that distance exceeds twice the cell's circumradius about the seed.
        double radius = 0.0;
        for (const auto& p : cell)
            radius = std::max(radius, (p - s).norm());
        if (static_cast<double>(r) * grid.cell_size() > 2.0 * radius)
            break;
    }
    return cell;
}

/// Merges coordinates closer than `tol` into a single vertex index.
class VertexWelder
{
public:
    explicit VertexWelder(double tol) : tol_(tol) {}

    int insert(const Point& p)
    {
        const auto kx = static_cast<std::int64_t>(std::floor(p.x() / tol_));
        const auto ky = static_cast<std::int64_t>(std::floor(p.y() / tol_));
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = map_.find(key(kx + dx, ky + dy));
                if (it == map_.end())
                    continue;
                for (int v : it->second)
                    if ((points_[static_cast<std::size_t>(v)] - p).norm() <= tol_)
                        return v;
            }
        const int id = static_cast<int>(points_.size());
        points_.push_back(p);
        map_[key(kx, ky)].push_back(id);
        return id;
    }

    std::vector<Point> release() { return std::move(points_); }

private:
    static std::uint64_t key(std::int64_t x, std::int64_t y)
    {
        return static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(y);
    }

    double tol_;
    std::vector<Point> points_;
    std::unordered_map<std::uint64_t, std::vector<int>> map_;
};

/// Inserts every vertex lying inside an element edge into that edge, so that pieces
/// cut from a non-convex domain meet conformingly.
inline void split_hanging_vertices(const std::vector<Point>& vertices, std::vector<std::vector<int>>& elements,
                                   double tol)
{
    const BoundingBox box = bounding_box(vertices);
    const SeedGrid grid(vertices, box);
    std::vector<int> ring;
    for (auto& loop : elements) {
        std::vector<int> out;
        const std::size_t n = loop.size();
        for (std::size_t e = 0; e < n; ++e) {
            const int ia = loop[e], ib = loop[(e + 1) % n];
            const Point a = vertices[static_cast<std::size_t>(ia)], b = vertices[static_cast<std::size_t>(ib)];
            out.push_back(ia);
            const Point d = b - a;
            const double len2 = d.squaredNorm();
            // Candidates from the buckets covering the edge.
            const auto [x0, y0] = grid.bucket({std::min(a.x(), b.x()), std::min(a.y(), b.y())});
            const auto [x1, y1] = grid.bucket({std::max(a.x(), b.x()), std::max(a.y(), b.y())});
            const int cx = (x0 + x1) / 2, cy = (y0 + y1) / 2;
            const int reach = std::max(x1 - x0, y1 - y0) / 2 + 1;
            std::vector<std::pair<double, int>> hits;
            for (int r = 0; r <= reach; ++r) {
                grid.ring(cx, cy, r, ring);
                for (int v : ring) {
                    if (v == ia || v == ib)
                        continue;
                    const Point p = vertices[static_cast<std::size_t>(v)];
                    const double t = (p - a).dot(d) / len2;
                    if (t <= 0.0 || t >= 1.0)
                        continue;
                    if ((a + t * d - p).norm() <= tol)
                        hits.emplace_back(t, v);
                }
            }
            std::sort(hits.begin(), hits.end());
            for (const auto& h : hits)
                out.push_back(h.second);
        }
        loop = std::move(out);
    }
}

inline std::vector<Point> random_points_in(std::span<const Point> domain, std::size_t n,
                                           std::uint64_t seed)
{
    const BoundingBox box = bounding_box(domain);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(box.xmin, box.xmax), uy(box.ymin, box.ymax);
    std::vector<Point> pts;
    pts.reserve(n);
    while (pts.size() < n) {
        Point p(ux(rng), uy(rng));
        if (point_in_polygon(p, domain) && boundary_distance(p, domain) > 0.0)
            pts.push_back(p);
    }
    return pts;
}

/// Lloyd-relaxed Voronoi cells of a convex domain, in seed order.
inline std::vector<std::vector<Point>> convex_voronoi_cells(std::span<const Point> domain, int n,
                                                           int lloyd_iterations, std::uint64_t seed)
{
    const BoundingBox box = bounding_box(domain);
    std::vector<Point> seeds = random_points_in(domain, static_cast<std::size_t>(n), seed);
    std::vector<std::vector<Point>> cells(seeds.size());
    for (int it = 0; it <= lloyd_iterations; ++it) {
        const SeedGrid grid(seeds, box);
        for (std::size_t i = 0; i < seeds.size(); ++i)
            cells[i] = voronoi_cell(i, seeds, grid, domain);
        if (it == lloyd_iterations)
            break;
        for (std::size_t i = 0; i < seeds.size(); ++i)
            if (cells[i].size() >= 3 && signed_area(cells[i]) > 0.0)
                seeds[i] = polygon_centroid(cells[i]);
    }
    return cells;
}

/// Welds cell polygons into a mesh. With several parts, vertices of one part lying on
/// an edge of the other are inserted there so the cut is conforming.
inline PolyMesh stitch_cells(const std::vector<std::vector<Point>>& polys, std::span<const std::vector<Point>> parts,
                             double scale, const std::function<int(const Point&, const Point&)>& label,
                             const std::function<Point(const Point&)>& snap)
{
    VertexWelder welder(1e-10 * scale);
    std::vector<std::vector<int>> elements;
    elements.reserve(polys.size());
    for (std::size_t i = 0; i < polys.size(); ++i) {
        std::vector<int> loop;
        for (const auto& p : polys[i]) {
            const int v = welder.insert(snap(p));
            if (loop.empty() || loop.back() != v)
                loop.push_back(v);
        }
        while (loop.size() > 1 && loop.front() == loop.back())
            loop.pop_back();
        if (loop.size() < 3)
            throw NumericalError("generate_voronoi_mesh: degenerate cell " + std::to_string(i));
        elements.push_back(std::move(loop));
    }
    auto vertices = welder.release();
    if (parts.size() > 1)
        split_hanging_vertices(vertices, elements, 1e-9 * scale);
    PolyMesh mesh = make_mesh(std::move(vertices), std::move(elements), {});

    // A boundary face off the outer boundary means two cells disagree on a shared
    // edge. Cuts between parts are interior, so they never qualify.
    for (const auto& f : mesh.faces) {
        if (!f.is_boundary())
            continue;
        const Point a = mesh.vertices[static_cast<std::size_t>(f.v0)];
        const Point b = mesh.vertices[static_cast<std::size_t>(f.v1)];
        const Point mid = 0.5 * (a + b);
        bool on_boundary = false;
        for (const auto& part : parts)
            on_boundary = on_boundary || boundary_distance(mid, part) <= 1e-8 * scale;
        if (!on_boundary)
            throw NumericalError("generate_voronoi_mesh: inconsistent cell topology near (" +
                                 std::to_string(mid.x()) + ", " + std::to_string(mid.y()) + ")");
    }
    relabel_boundary(mesh, label);
    return mesh;
}

inline void check_lloyd_args(int n, int lloyd_iterations)
{
    if (n < 1)
        throw ValidationError("generate_voronoi_mesh: element count must be >= 1");
    if (lloyd_iterations < 0)
        throw ValidationError("generate_voronoi_mesh: negative Lloyd iteration count");
}

} // namespace detail

/// Lloyd-relaxed Voronoi tessellation of a rectangle with exactly `n` convex cells.
/// Cells are clipped to the rectangle; boundary faces are labelled by side.
/// Deterministic for a fixed seed.
inline PolyMesh generate_voronoi_mesh(const Rectangle& r, int n, int lloyd_iterations,
                                      std::uint64_t seed)
{
    r.validate();
    detail::check_lloyd_args(n, lloyd_iterations);
    const std::vector<std::vector<Point>> parts{{{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}}};
    const double scale = std::max(r.x1 - r.x0, r.y1 - r.y0);
    const double tol = 1e-10 * scale;
    auto snap = [r, tol](const Point& p) {
        Point q = p;
        if (std::abs(q.x() - r.x0) <= tol) q.x() = r.x0;
        if (std::abs(q.x() - r.x1) <= tol) q.x() = r.x1;
        if (std::abs(q.y() - r.y0) <= tol) q.y() = r.y0;
        if (std::abs(q.y() - r.y1) <= tol) q.y() = r.y1;
        return q;
    };
    const auto cells = detail::convex_voronoi_cells(parts[0], n, lloyd_iterations, seed);
    return detail::stitch_cells(cells, parts, scale, rectangle_side_label, snap);
}

/// Voronoi tessellation of a domain given as convex counter-clockwise parts that meet
/// edge to edge (a non-convex domain cut along chords). Each part receives a share of
/// the `n` cells proportional to its area and is relaxed independently; the cuts become
/// interior faces. Boundary faces are labelled with label(midpoint, outward normal).
inline PolyMesh generate_voronoi_mesh(std::span<const std::vector<Point>> parts, int n, int lloyd_iterations,
                                      std::uint64_t seed,
                                      const std::function<int(const Point&, const Point&)>& label)
{
    detail::check_lloyd_args(n, lloyd_iterations);
    if (parts.empty() || static_cast<std::size_t>(n) < parts.size())
        throw ValidationError("generate_voronoi_mesh: need at least one cell per domain part");
    double total = 0.0;
    std::vector<Point> all;
    for (const auto& part : parts) {
        if (!detail::is_convex_polygon(part) || !(signed_area(part) > 0.0))
            throw ValidationError("generate_voronoi_mesh: domain parts must be convex counter-clockwise polygons");
        total += signed_area(part);
        all.insert(all.end(), part.begin(), part.end());
    }
    // Largest-remainder split of n, at least one cell each.
    std::vector<int> count(parts.size(), 1);
    std::vector<std::pair<double, std::size_t>> rest;
    int left = n - static_cast<int>(parts.size());
    int given = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const double share = left * signed_area(parts[k]) / total;
        count[k] += static_cast<int>(std::floor(share));
        given += static_cast<int>(std::floor(share));
        rest.emplace_back(-(share - std::floor(share)), k);
    }
    std::sort(rest.begin(), rest.end());
    for (int k = 0; k < left - given; ++k)
        ++count[rest[static_cast<std::size_t>(k)].second];

    std::vector<std::vector<Point>> polys;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        auto cells = detail::convex_voronoi_cells(parts[k], count[k], lloyd_iterations, seed + k);
        std::move(cells.begin(), cells.end(), std::back_inserter(polys));
    }
    const BoundingBox box = bounding_box(all);
    return detail::stitch_cells(polys, parts, std::max(box.width(), box.height()), label,
                                [](const Point& p) { return p; });
}

} // namespace polydg
