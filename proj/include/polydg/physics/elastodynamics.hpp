#pragma once

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "../assembly.hpp"
#include "time_integration.hpp"

namespace polydg {

/// S(t) = (1 − 8π²(t−0.5)²) exp(−4π²(t−0.5)²)
inline double ricker_source(double t)
{
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    const double s = (t - 0.5) * (t - 0.5);
    return (1.0 - 8.0 * pi2 * s) * std::exp(-4.0 * pi2 * s);
}

/// The seven-layer material set (ρ [kg/m³], c_S, c_P [m/s]) of the sedimentary basin
/// model, tagged 1..7.
inline CoefficientField layered_basin_materials()
{
    const double rho[7] = {1800, 1800, 2050, 2050, 2050, 2400, 2450};
    const double cs[7] = {294, 450, 600, 600, 600, 1515, 1600};
    const double cp[7] = {1321, 2024, 1920, 1920, 1920, 3030, 3200};
    CoefficientField c;
    for (int i = 0; i < 7; ++i)
        c.set(i + 1, Material::from_wave_speeds(rho[i], cs[i], cp[i]));
    return c;
}

inline void validate_elastic(const Material& m)
{
    if (!(m.rho > 0.0) || !(m.shear > 0.0) || !(m.lambda + m.shear > 0.0) || !std::isfinite(m.lambda))
        throw ValidationError("elastic material needs rho > 0, mu > 0 and lambda + mu > 0");
}

/// Point force f = −∇δ(x − x_s) S(t) (isotropic moment tensor).
struct PointSource
{
    Point position = Point::Zero();
    std::function<double(double)> time_function = ricker_source;
};

/// Element containing x strictly in its interior. Throws if x lies on an element
/// boundary or outside the mesh.
inline std::size_t locate_interior_point(const PolyMesh& mesh, const Point& x)
{
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        const auto poly = mesh.polygon(k);
        const auto& bb = mesh.geometry[k].bbox;
        if (x.x() < bb.xmin || x.x() > bb.xmax || x.y() < bb.ymin || x.y() > bb.ymax)
            continue;
        const double tol = 1e-10 * mesh.geometry[k].diameter;
        if (boundary_distance(x, poly) <= tol)
            throw ValidationError("point source lies on an element boundary; choose an interior point");
        if (point_in_polygon(x, poly))
            return k;
    }
    throw ValidationError("point source lies outside the mesh");
}

/// Spatial part of the double-couple load: entry (i, c) = ∂_c φ_i(x_s), nonzero only
/// on the containing element. The load at time t is S(t) times this vector.
inline Vector double_couple_source(const FeSpace& space, const Point& xs)
{
    const std::size_t k = locate_interior_point(space.mesh(), xs);
    const std::vector<Point> pt{xs};
    const auto t = eval_basis(space, k, pt);
    Vector F = Vector::Zero(2 * space.ndof());
    const int nb = space.nbases(k), off = space.offset(k);
    F.segment(off, nb) = t.dx.row(0).transpose();
    F.segment(space.ndof() + off, nb) = t.dy.row(0).transpose();
    return F;
}

/// ρ ü − ∇·σ(u) = f, u = g on Dirichlet faces, σ(u)n = 0 elsewhere.
struct ElastodynamicsProblem
{
    std::shared_ptr<const PolyMesh> mesh;
    int degree = 1;
    CoefficientField materials; ///< rho, lambda, shear per tag
    VectorField f;
    VectorField g;
    std::map<int, VectorField> g_by_label;
    VectorField u0;
    VectorField v0;
    std::vector<PointSource> sources;
    std::set<int> dirichlet;
    PenaltySpec penalty;
    NewmarkParams newmark;
    TimeGrid time;
};

struct ElasticSystem
{
    FeSpace space;
    FaceCoefficients coef;
    std::vector<double> rho;
    SparseMatrix M;
    SparseMatrix A;
};

inline ElasticSystem assemble_elastic_system(std::shared_ptr<const PolyMesh> mesh, int degree,
                                             const CoefficientField& materials, const std::set<int>& dirichlet,
                                             const PenaltySpec& penalty)
{
    if (!mesh)
        throw ValidationError("no mesh");
    for (int tag : mesh->element_tag)
        validate_elastic(materials.at(tag));
    FeSpace space(mesh, degree);
    FaceCoefficients coef{materials.per_element(*mesh, &Material::shear),
                          materials.per_element(*mesh, &Material::lambda)};
    auto rho = materials.per_element(*mesh, &Material::rho);
    SparseMatrix M = block_diagonal(assemble_volume_qf(space, VolumeForm::mass, rho), 2);
    const auto V = assemble_volume_qf(space, VolumeForm::elastic, coef.primary, coef.lambda);
    const auto faces = assemble_faces(space, FacePhysics::elastic, coef, penalty, dirichlet);
    SparseMatrix A = combine_dg_operator(V, faces.IA, faces.SA);
    return {std::move(space), std::move(coef), std::move(rho), std::move(M), std::move(A)};
}

struct ElastodynamicsSolution
{
    FeSpace space;
    FaceCoefficients coef;
    SparseMatrix M;
    SparseMatrix A;
    std::vector<Snapshot> trajectory;
};

inline ElastodynamicsSolution solve_elastodynamics(const ElastodynamicsProblem& p,
                                                   const SnapshotObserver& observer = {})
{
    auto sys = assemble_elastic_system(p.mesh, p.degree, p.materials, p.dirichlet, p.penalty);
    const auto& space = sys.space;
    std::vector<Vector> source_shapes;
    for (const auto& s : p.sources)
        source_shapes.push_back(double_couple_source(space, s.position));

    const RhsData data = vector_rhs_data(p.f, p.g, p.g_by_label);
    SecondOrderSystem ode{sys.M, {}, sys.A, {}, true};
    ode.load = [&](double t) {
        Vector F = assemble_rhs(space, FacePhysics::elastic, sys.coef, p.penalty, p.dirichlet, data, t);
        for (std::size_t i = 0; i < source_shapes.size(); ++i)
            F += p.sources[i].time_function(t) * source_shapes[i];
        return F;
    };
    Vector U0 = p.u0 ? l2_project(space, p.u0) : Vector::Zero(2 * space.ndof());
    Vector V0 = p.v0 ? l2_project(space, p.v0) : Vector::Zero(2 * space.ndof());
    auto traj = newmark(ode, std::move(U0), std::move(V0), p.newmark, p.time, observer);
    return {std::move(sys.space), std::move(sys.coef), std::move(sys.M), std::move(sys.A), std::move(traj)};
}

} // namespace polydg
