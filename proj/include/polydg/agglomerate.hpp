#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"

namespace polydg {

struct Agglomeration
{
    PolyMesh mesh;
    std::vector<int> membership; ///< fine element -> agglomerate index
    std::vector<std::string> warnings;
};

namespace detail {

/// Element adjacency restricted to neighbours carrying the same tag.
inline std::vector<std::vector<int>> same_tag_adjacency(const PolyMesh& mesh)
{
    std::vector<std::vector<int>> adj(mesh.num_elements());
    for (const auto& f : mesh.faces) {
        if (f.is_boundary())
            continue;
        const auto a = static_cast<std::size_t>(f.owner), b = static_cast<std::size_t>(f.neighbor);
        if (mesh.element_tag[a] != mesh.element_tag[b])
            continue;
        adj[a].push_back(f.neighbor);
        adj[b].push_back(f.owner);
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    return adj;
}

/// Traces the outer boundary loop of a group of elements. Returns nullopt when the
/// union is not a simple, simply connected polygon (hole or pinch vertex).
inline std::optional<std::vector<int>> trace_union(const PolyMesh& mesh, const std::vector<int>& members,
                                                   const std::vector<int>& group_of, int group)
{
    std::map<int, int> next; // start vertex -> end vertex of each outer directed edge
    for (int k : members) {
        const auto& loop = mesh.elements[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const Face& f = mesh.faces[static_cast<std::size_t>(mesh.element_faces[static_cast<std::size_t>(k)][i])];
            const int other = f.owner == k ? f.neighbor : f.owner;
            if (other >= 0 && group_of[static_cast<std::size_t>(other)] == group)
                continue;
            const int a = loop[i], b = loop[(i + 1) % loop.size()];
            if (!next.emplace(a, b).second)
                return std::nullopt; // two outgoing edges: pinch vertex
        }
    }
    if (next.empty())
        return std::nullopt;
    std::vector<int> out;
    const int start = next.begin()->first;
    int v = start;
    do {
        out.push_back(v);
        auto it = next.find(v);
        if (it == next.end())
            return std::nullopt;
        v = it->second;
        if (out.size() > next.size())
            return std::nullopt;
    } while (v != start);
    if (out.size() != next.size())
        return std::nullopt; // more than one loop: the group has a hole
    return out;
}

/// Picks `count` well-spread seed elements of a component by farthest-point sampling
/// from a random start.
inline std::vector<int> spread_seeds(const PolyMesh& mesh, const std::vector<int>& component,
                                     std::size_t count, std::mt19937_64& rng)
{
    std::vector<int> seeds;
    std::uniform_int_distribution<std::size_t> pick(0, component.size() - 1);
    seeds.push_back(component[pick(rng)]);
    std::vector<double> dist(component.size(), std::numeric_limits<double>::max());
    while (seeds.size() < count) {
        const Point& last = mesh.geometry[static_cast<std::size_t>(seeds.back())].centroid;
        std::size_t best = 0;
        double best_d = -1.0;
        for (std::size_t i = 0; i < component.size(); ++i) {
            const double d = (mesh.geometry[static_cast<std::size_t>(component[i])].centroid - last).squaredNorm();
            dist[i] = std::min(dist[i], d);
            if (dist[i] > best_d) {
                best_d = dist[i];
                best = i;
            }
        }
        seeds.push_back(component[best]);
    }
    return seeds;
}

} // namespace detail

/// Merges elements of `mesh` into `target_n` connected agglomerates by seeded region
/// growing over the same-tag adjacency graph. Agglomerates may be non-convex but are
/// always simple polygons; shared interior edges are removed and collinear vertices kept.
inline Agglomeration agglomerate_with_report(const PolyMesh& mesh, std::size_t target_n,
                                             std::uint64_t seed)
{
    const std::size_t n = mesh.num_elements();
    if (target_n == 0 || target_n > n)
        throw ValidationError("agglomerate: target_n must be in [1, element count]");
    Agglomeration result;
    if (target_n == n) {
        result.mesh = mesh;
        result.membership.resize(n);
        for (std::size_t k = 0; k < n; ++k)
            result.membership[k] = static_cast<int>(k);
        return result;
    }

    const auto adj = detail::same_tag_adjacency(mesh);
    std::vector<std::vector<int>> components;
    {
        std::vector<int> comp(n, -1);
        for (std::size_t s = 0; s < n; ++s) {
            if (comp[s] >= 0)
                continue;
            components.emplace_back();
            std::deque<int> q{static_cast<int>(s)};
            comp[s] = static_cast<int>(components.size() - 1);
            while (!q.empty()) {
                const int k = q.front();
                q.pop_front();
                components.back().push_back(k);
                for (int m : adj[static_cast<std::size_t>(k)])
                    if (comp[static_cast<std::size_t>(m)] < 0) {
                        comp[static_cast<std::size_t>(m)] = comp[s];
                        q.push_back(m);
                    }
            }
            std::sort(components.back().begin(), components.back().end());
        }
    }
    if (components.size() > target_n)
        throw ValidationError("agglomerate: mesh has " + std::to_string(components.size()) +
                              " same-tag components, more than target_n");

    // Distribute agglomerate counts over components by size; components smaller than
    // the requested granularity are kept whole.
    const double granularity = static_cast<double>(n) / static_cast<double>(target_n);
    std::vector<std::size_t> share(components.size(), 1);
    {
        std::size_t assigned = 0, big_total = 0;
        for (std::size_t c = 0; c < components.size(); ++c) {
            if (static_cast<double>(components[c].size()) < granularity) {
                if (components.size() > 1)
                    result.warnings.push_back("component of " + std::to_string(components[c].size()) +
                                              " elements is smaller than the requested granularity; kept whole");
                ++assigned;
            } else {
                big_total += components[c].size();
            }
        }
        std::size_t remaining = target_n - assigned;
        std::vector<std::size_t> big;
        for (std::size_t c = 0; c < components.size(); ++c)
            if (static_cast<double>(components[c].size()) >= granularity)
                big.push_back(c);
        std::size_t given = 0;
        for (std::size_t i = 0; i < big.size(); ++i) {
            const std::size_t c = big[i];
            std::size_t s = i + 1 == big.size()
                                ? remaining - given
                                : std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                                               static_cast<double>(remaining) *
                                                               static_cast<double>(components[c].size()) /
                                                               static_cast<double>(big_total))));
            s = std::clamp<std::size_t>(s, 1, components[c].size());
            share[c] = s;
            given += s;
        }
    }

    constexpr int max_attempts = 64;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ull);
        std::vector<int> group_of(n, -1);
        std::vector<std::vector<int>> groups;
        std::deque<std::pair<int, int>> frontier; // (element, group)
        for (std::size_t c = 0; c < components.size(); ++c) {
            for (int s : detail::spread_seeds(mesh, components[c], share[c], rng)) {
                const int g = static_cast<int>(groups.size());
                groups.push_back({});
                group_of[static_cast<std::size_t>(s)] = g;
                frontier.emplace_back(s, g);
            }
        }
        while (!frontier.empty()) {
            auto [k, g] = frontier.front();
            frontier.pop_front();
            groups[static_cast<std::size_t>(g)].push_back(k);
            for (int m : adj[static_cast<std::size_t>(k)])
                if (group_of[static_cast<std::size_t>(m)] < 0) {
                    group_of[static_cast<std::size_t>(m)] = g;
                    frontier.emplace_back(m, g);
                }
        }

        std::vector<std::vector<int>> loops;
        bool ok = true;
        for (std::size_t g = 0; g < groups.size() && ok; ++g) {
            std::sort(groups[g].begin(), groups[g].end());
            auto loop = detail::trace_union(mesh, groups[g], group_of, static_cast<int>(g));
            if (!loop)
                ok = false;
            else
                loops.push_back(std::move(*loop));
        }
        if (!ok)
            continue;

        // Compact vertex numbering in first-use order.
        std::vector<int> remap(mesh.vertices.size(), -1);
        std::vector<Point> verts;
        for (auto& loop : loops)
            for (int& v : loop) {
                if (remap[static_cast<std::size_t>(v)] < 0) {
                    remap[static_cast<std::size_t>(v)] = static_cast<int>(verts.size());
                    verts.push_back(mesh.vertices[static_cast<std::size_t>(v)]);
                }
                v = remap[static_cast<std::size_t>(v)];
            }
        std::vector<int> tags;
        for (const auto& g : groups)
            tags.push_back(mesh.element_tag[static_cast<std::size_t>(g.front())]);
        std::vector<BoundaryEdge> labels;
        for (const auto& f : mesh.faces)
            if (f.is_boundary())
                labels.push_back({remap[static_cast<std::size_t>(f.v0)], remap[static_cast<std::size_t>(f.v1)], f.label});

        try {
            result.mesh = make_mesh(std::move(verts), std::move(loops), std::move(tags), labels);
        } catch (const ValidationError&) {
            continue;
        }
        result.membership = std::move(group_of);
        return result;
    }
    throw NumericalError("agglomerate: could not build simply connected agglomerates after " +
                         std::to_string(max_attempts) + " attempts");
}

inline PolyMesh agglomerate(const PolyMesh& mesh, std::size_t target_n, std::uint64_t seed)
{
    return agglomerate_with_report(mesh, target_n, seed).mesh;
}

} // namespace polydg
