#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "../basis.hpp"
#include "../quadrature.hpp"

namespace polydg {

/// Field sampled at the vertices of every sub-triangle. Samples are stored per
/// triangle, so sample count = 3 · (number of sub-triangles).
struct FieldSnapshot
{
    double time = 0.0;
    std::vector<Point> points;
    std::vector<std::string> names;          ///< one per component
    std::vector<std::vector<double>> values; ///< [component][sample]

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty() || names.empty(); }
};

/// Reconstructs ncomp component-major fields from the DOF vector U.
inline FieldSnapshot sample_field(const FeSpace& space, const Vector& U, std::vector<std::string> names,
                                  double t = 0.0, int first_dof = 0)
{
    const int ncomp = static_cast<int>(names.size());
    const int ndof = space.ndof();
    if (ncomp < 1 || first_dof < 0 || U.size() < first_dof + ncomp * ndof)
        throw ValidationError("snapshot: DOF vector does not match the space");
    FieldSnapshot s;
    s.time = t;
    s.names = std::move(names);
    s.values.resize(static_cast<std::size_t>(ncomp));
    const auto& mesh = space.mesh();
    for (std::size_t k = 0; k < space.num_elements(); ++k) {
        std::vector<Point> pts;
        for (const auto& tri : subtessellate(mesh.polygon(k)))
            for (const auto& v : tri)
                pts.push_back(v);
        for (int c = 0; c < ncomp; ++c) {
            const Eigen::VectorXd v = eval_field(space, k, pts, U.segment(first_dof + c * ndof, ndof));
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                if (!std::isfinite(v(i)))
                    throw NumericalError("snapshot: non-finite field value");
                s.values[static_cast<std::size_t>(c)].push_back(v(i));
            }
        }
        s.points.insert(s.points.end(), pts.begin(), pts.end());
    }
    return s;
}

} // namespace polydg
