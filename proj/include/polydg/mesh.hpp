#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace polydg {

/// Boundary labels produced by the rectangle generators.
namespace side {
inline constexpr int bottom = 1;
inline constexpr int right = 2;
inline constexpr int top = 3;
inline constexpr int left = 4;
} // namespace side

struct Face
{
    int v0 = -1, v1 = -1; ///< endpoints, ordered counter-clockwise along the owner
    int owner = -1;       ///< element κ⁺
    int neighbor = -1;    ///< element κ⁻, or -1 on the boundary
    int owner_edge = -1;  ///< local edge index in the owner
    int neighbor_edge = -1;
    Point normal = Point::Zero(); ///< unit normal, outward from the owner
    double length = 0.0;
    int label = 0; ///< boundary label; 0 on internal faces

    bool is_boundary() const { return neighbor < 0; }
};

/// An input boundary edge annotation: unordered vertex pair plus label.
struct BoundaryEdge
{
    int va = -1, vb = -1;
    int label = 0;
};

struct ElementGeometry
{
    double area = 0.0;
    Point centroid = Point::Zero();
    double diameter = 0.0;
    BoundingBox bbox;
};

/// Polygonal tessellation with face connectivity and per-element geometry.
///
/// Built through make_mesh(), which validates the polygons, computes geometry and
/// classifies every edge as internal or boundary. A finished mesh is not mutated.
struct PolyMesh
{
    std::vector<Point> vertices;
    std::vector<std::vector<int>> elements; ///< counter-clockwise vertex loops
    std::vector<int> element_tag;
    std::vector<Face> faces;
    std::vector<std::vector<int>> element_faces; ///< face index of local edge (i, i+1)
    std::vector<ElementGeometry> geometry;

    std::size_t num_elements() const { return elements.size(); }

    std::vector<Point> polygon(std::size_t k) const
    {
        std::vector<Point> p;
        p.reserve(elements[k].size());
        for (int v : elements[k])
            p.push_back(vertices[static_cast<std::size_t>(v)]);
        return p;
    }

    /// Largest element diameter.
    double max_diameter() const
    {
        double h = 0.0;
        for (const auto& g : geometry)
            h = std::max(h, g.diameter);
        return h;
    }

    double total_area() const
    {
        double a = 0.0;
        for (const auto& g : geometry)
            a += g.area;
        return a;
    }

    std::size_t num_internal_faces() const
    {
        return static_cast<std::size_t>(
            std::count_if(faces.begin(), faces.end(), [](const Face& f) { return !f.is_boundary(); }));
    }
    std::size_t num_boundary_faces() const { return faces.size() - num_internal_faces(); }

    std::vector<BoundaryEdge> boundary_edges() const
    {
        std::vector<BoundaryEdge> out;
        for (const auto& f : faces)
            if (f.is_boundary())
                out.push_back({f.v0, f.v1, f.label});
        return out;
    }

    double mean_vertices_per_element() const
    {
        if (elements.empty())
            return 0.0;
        std::size_t n = 0;
        for (const auto& e : elements)
            n += e.size();
        return static_cast<double>(n) / static_cast<double>(elements.size());
    }

    /// Mesh-quality diagnostic: max over internal faces of h_{κ⁺}/h_{κ⁻} (either order).
    double max_neighbor_diameter_ratio() const
    {
        double r = 1.0;
        for (const auto& f : faces) {
            if (f.is_boundary())
                continue;
            const double a = geometry[static_cast<std::size_t>(f.owner)].diameter;
            const double b = geometry[static_cast<std::size_t>(f.neighbor)].diameter;
            r = std::max(r, std::max(a / b, b / a));
        }
        return r;
    }
};

/// Area, centroid, diameter and bounding box of one polygon.
inline ElementGeometry compute_element_geometry(std::span<const Point> poly)
{
    ElementGeometry g;
    g.area = signed_area(poly);
    if (!(g.area > 0.0))
        throw ValidationError("degenerate element: non-positive area " + std::to_string(g.area));
    g.centroid = polygon_centroid(poly);
    g.diameter = polygon_diameter(poly);
    g.bbox = bounding_box(poly);
    return g;
}

/// Per-element geometry of a mesh; throws on zero-area polygons.
inline std::vector<ElementGeometry> element_geometry(const PolyMesh& mesh)
{
    std::vector<ElementGeometry> out(mesh.num_elements());
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        try {
            out[k] = compute_element_geometry(mesh.polygon(k));
        } catch (const ValidationError& e) {
            throw ValidationError("element " + std::to_string(k) + ": " + e.what());
        }
    }
    return out;
}

namespace detail {
inline std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}
} // namespace detail

/// Classifies every element edge as an internal face (two elements) or a boundary
/// face (one element). Boundary faces take their label from `labels` when the
/// vertex pair is listed there, and 0 otherwise.
inline void build_connectivity(PolyMesh& mesh, std::span<const BoundaryEdge> labels = {})
{
    struct Incidence
    {
        int element, edge;
    };
    std::unordered_map<std::uint64_t, std::vector<Incidence>> edges;
    std::vector<std::uint64_t> order; // first-seen order keeps face numbering deterministic
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        const auto& loop = mesh.elements[k];
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const auto key = detail::edge_key(loop[i], loop[(i + 1) % loop.size()]);
            auto& inc = edges[key];
            if (inc.empty())
                order.push_back(key);
            inc.push_back({static_cast<int>(k), static_cast<int>(i)});
        }
    }

    std::unordered_map<std::uint64_t, int> label_of;
    for (const auto& b : labels)
        label_of[detail::edge_key(b.va, b.vb)] = b.label;

    mesh.faces.clear();
    mesh.element_faces.assign(mesh.num_elements(), {});
    for (std::size_t k = 0; k < mesh.num_elements(); ++k)
        mesh.element_faces[k].assign(mesh.elements[k].size(), -1);

    for (const auto key : order) {
        const auto& inc = edges[key];
        if (inc.size() > 2)
            throw ValidationError("non-manifold mesh: edge shared by " + std::to_string(inc.size()) +
                                  " elements (first element " + std::to_string(inc[0].element) + ")");
        Face f;
        const auto& own = inc[0];
        const auto& loop = mesh.elements[static_cast<std::size_t>(own.element)];
        f.v0 = loop[static_cast<std::size_t>(own.edge)];
        f.v1 = loop[(static_cast<std::size_t>(own.edge) + 1) % loop.size()];
        f.owner = own.element;
        f.owner_edge = own.edge;
        const Point a = mesh.vertices[static_cast<std::size_t>(f.v0)];
        const Point b = mesh.vertices[static_cast<std::size_t>(f.v1)];
        const Point t = b - a;
        f.length = t.norm();
        if (!(f.length > 0.0))
            throw ValidationError("zero-length edge in element " + std::to_string(own.element));
        f.normal = Point(t.y(), -t.x()) / f.length;
        if (inc.size() == 2) {
            const auto& nb = inc[1];
            const auto& nloop = mesh.elements[static_cast<std::size_t>(nb.element)];
            const int n0 = nloop[static_cast<std::size_t>(nb.edge)];
            if (n0 != f.v1)
                throw ValidationError("inconsistent orientation between elements " +
                                      std::to_string(own.element) + " and " +
                                      std::to_string(nb.element));
            f.neighbor = nb.element;
            f.neighbor_edge = nb.edge;
        } else {
            auto it = label_of.find(key);
            f.label = it == label_of.end() ? 0 : it->second;
        }
        const int id = static_cast<int>(mesh.faces.size());
        mesh.faces.push_back(f);
        for (const auto& i : inc)
            mesh.element_faces[static_cast<std::size_t>(i.element)][static_cast<std::size_t>(i.edge)] = id;
    }
}

/// Validates raw polygon data and returns a mesh with geometry and connectivity.
/// Errors name the offending element.
inline PolyMesh make_mesh(std::vector<Point> vertices, std::vector<std::vector<int>> elements,
                          std::vector<int> tags, std::span<const BoundaryEdge> boundary = {})
{
    if (tags.empty())
        tags.assign(elements.size(), 1);
    if (tags.size() != elements.size())
        throw ValidationError("element tag count does not match element count");
    const int nv = static_cast<int>(vertices.size());
    for (std::size_t k = 0; k < elements.size(); ++k) {
        const auto& loop = elements[k];
        if (loop.size() < 3)
            throw ValidationError("element " + std::to_string(k) + ": fewer than 3 vertices");
        for (int v : loop)
            if (v < 0 || v >= nv)
                throw ValidationError("element " + std::to_string(k) + ": vertex index " +
                                      std::to_string(v) + " out of range [0, " +
                                      std::to_string(nv) + ")");
    }
    for (const auto& b : boundary)
        if (b.va < 0 || b.va >= nv || b.vb < 0 || b.vb >= nv)
            throw ValidationError("boundary edge references vertex out of range");

    PolyMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.elements = std::move(elements);
    mesh.element_tag = std::move(tags);
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        const auto poly = mesh.polygon(k);
        if (!is_simple_polygon(poly))
            throw ValidationError("element " + std::to_string(k) + ": polygon is not simple");
        if (!(signed_area(poly) > 0.0))
            throw ValidationError("element " + std::to_string(k) +
                                  ": polygon is not counter-clockwise");
    }
    mesh.geometry = element_geometry(mesh);
    build_connectivity(mesh, boundary);
    return mesh;
}

/// Re-labels boundary faces with label(midpoint, outward normal).
inline void relabel_boundary(PolyMesh& mesh, const std::function<int(const Point&, const Point&)>& label)
{
    for (auto& f : mesh.faces)
        if (f.is_boundary()) {
            const Point mid = 0.5 * (mesh.vertices[static_cast<std::size_t>(f.v0)] +
                                     mesh.vertices[static_cast<std::size_t>(f.v1)]);
            f.label = label(mid, f.normal);
        }
}

/// Labels boundary faces of an axis-aligned rectangle by side (see polydg::side).
inline int rectangle_side_label(const Point& mid, const Point& normal)
{
    (void)mid;
    if (std::abs(normal.y() + 1.0) < 1e-8)
        return side::bottom;
    if (std::abs(normal.x() - 1.0) < 1e-8)
        return side::right;
    if (std::abs(normal.y() - 1.0) < 1e-8)
        return side::top;
    return side::left;
}

/// Label given to faces that become boundary faces when a mesh is split into
/// subdomains (the interface between them).
inline constexpr int interface_label = -1;

/// Elements of a parent mesh selected by tag, with index maps back to the parent.
struct SubMesh
{
    std::shared_ptr<const PolyMesh> mesh;
    std::vector<int> parent_element; ///< sub element -> parent element
    std::vector<int> sub_element;    ///< parent element -> sub element, or -1
    std::vector<int> parent_face;    ///< sub face -> parent face
};

/// Extracts the elements whose tag satisfies `keep`. Parent boundary faces keep their
/// labels; parent internal faces cut by the selection are labelled interface_label.
inline SubMesh extract_submesh(const PolyMesh& parent, const std::function<bool(int)>& keep)
{
    SubMesh sub;
    sub.sub_element.assign(parent.num_elements(), -1);
    std::vector<int> remap(parent.vertices.size(), -1);
    std::vector<Point> verts;
    std::vector<std::vector<int>> elems;
    std::vector<int> tags;
    for (std::size_t k = 0; k < parent.num_elements(); ++k) {
        if (!keep(parent.element_tag[k]))
            continue;
        sub.sub_element[k] = static_cast<int>(elems.size());
        sub.parent_element.push_back(static_cast<int>(k));
        std::vector<int> loop;
        for (int v : parent.elements[k]) {
            auto& r = remap[static_cast<std::size_t>(v)];
            if (r < 0) {
                r = static_cast<int>(verts.size());
                verts.push_back(parent.vertices[static_cast<std::size_t>(v)]);
            }
            loop.push_back(r);
        }
        elems.push_back(std::move(loop));
        tags.push_back(parent.element_tag[k]);
    }
    if (elems.empty())
        throw ValidationError("extract_submesh: no element matches the selection");
    std::vector<BoundaryEdge> labels;
    std::unordered_map<std::uint64_t, int> face_of;
    for (std::size_t f = 0; f < parent.faces.size(); ++f) {
        const Face& face = parent.faces[f];
        const int a = remap[static_cast<std::size_t>(face.v0)], b = remap[static_cast<std::size_t>(face.v1)];
        if (a < 0 || b < 0)
            continue;
        const bool own_in = sub.sub_element[static_cast<std::size_t>(face.owner)] >= 0;
        const bool nb_in = !face.is_boundary() && sub.sub_element[static_cast<std::size_t>(face.neighbor)] >= 0;
        if (!own_in && !nb_in)
            continue;
        face_of[detail::edge_key(a, b)] = static_cast<int>(f);
        if (face.is_boundary())
            labels.push_back({a, b, face.label});
        else if (own_in != nb_in)
            labels.push_back({a, b, interface_label});
    }
    auto m = std::make_shared<PolyMesh>(make_mesh(std::move(verts), std::move(elems), std::move(tags), labels));
    sub.parent_face.resize(m->faces.size());
    for (std::size_t f = 0; f < m->faces.size(); ++f)
        sub.parent_face[f] = face_of.at(detail::edge_key(m->faces[f].v0, m->faces[f].v1));
    sub.mesh = std::move(m);
    return sub;
}

struct Rectangle
{
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    double area() const { return (x1 - x0) * (y1 - y0); }
    void validate() const
    {
        if (!(x1 > x0) || !(y1 > y0) || !std::isfinite(area()))
            throw ValidationError("degenerate rectangle");
    }
};

/// nx·ny axis-aligned quadrilaterals, boundary labelled by side.
inline PolyMesh cartesian_mesh(int nx, int ny, const Rectangle& r = {})
{
    r.validate();
    if (nx < 1 || ny < 1)
        throw ValidationError("cartesian_mesh: nx and ny must be >= 1");
    std::vector<Point> verts;
    verts.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const double x = i == nx ? r.x1 : r.x0 + (r.x1 - r.x0) * i / nx;
            const double y = j == ny ? r.y1 : r.y0 + (r.y1 - r.y0) * j / ny;
            verts.emplace_back(x, y);
        }
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<std::vector<int>> elems;
    elems.reserve(static_cast<std::size_t>(nx * ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            elems.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    PolyMesh m = make_mesh(std::move(verts), std::move(elems), {});
    relabel_boundary(m, rectangle_side_label);
    return m;
}

} // namespace polydg
