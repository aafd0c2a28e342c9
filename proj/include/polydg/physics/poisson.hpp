#pragma once

#include <memory>
#include <set>
#include <string>

#include "../assembly.hpp"
#include "time_integration.hpp"

namespace polydg {

inline const std::set<int> all_rectangle_sides{side::bottom, side::right, side::top, side::left};

/// −∇·(μ∇u) = f in Ω, u = g on the Dirichlet-labelled boundary, μ∇u·n = 0 elsewhere.
struct PoissonProblem
{
    std::shared_ptr<const PolyMesh> mesh;
    int degree = 1;
    CoefficientField materials; ///< uses Material::mu; empty means μ = 1 everywhere
    ScalarField f;
    ScalarField g;
    std::map<int, ScalarField> g_by_label; ///< per-label Dirichlet data, overrides g
    std::set<int> dirichlet = all_rectangle_sides;
    PenaltySpec penalty;
    Integration integration = Integration::quadrature_free;
};

struct ScalarSystem
{
    FeSpace space;
    std::vector<double> mu;
    SparseMatrix A;
};

inline std::vector<double> diffusion_coefficient(const PolyMesh& mesh, const CoefficientField& materials)
{
    if (materials.materials().empty())
        return constant_field(mesh, 1.0);
    auto mu = materials.per_element(mesh, &Material::mu);
    for (double m : mu)
        if (!(m > 0.0) || !std::isfinite(m))
            throw ValidationError("diffusion coefficient mu must be positive");
    return mu;
}

inline bool has_dirichlet_face(const PolyMesh& mesh, const std::set<int>& labels)
{
    for (const auto& f : mesh.faces)
        if (f.is_boundary() && labels.count(f.label))
            return true;
    return false;
}

/// A_dG = V − IA − IAᵀ + SA for the scalar diffusion form.
inline ScalarSystem assemble_scalar_operator(std::shared_ptr<const PolyMesh> mesh, int degree,
                                             const CoefficientField& materials, const std::set<int>& dirichlet,
                                             const PenaltySpec& penalty,
                                             Integration integration = Integration::quadrature_free)
{
    if (!mesh)
        throw ValidationError("no mesh");
    FeSpace space(mesh, degree);
    auto mu = diffusion_coefficient(*mesh, materials);
    const auto V = assemble_volume(space, VolumeForm::stiffness, mu, {}, integration);
    const auto faces = assemble_faces(space, FacePhysics::scalar, {mu, {}}, penalty, dirichlet);
    auto A = combine_dg_operator(V, faces.IA, faces.SA);
    return {std::move(space), std::move(mu), std::move(A)};
}

struct PoissonSolution
{
    FeSpace space;
    std::vector<double> mu;
    SparseMatrix A;
    Vector F;
    Vector U;
};

inline PoissonSolution solve_poisson(const PoissonProblem& p)
{
    if (!p.mesh)
        throw ValidationError("no mesh");
    if (!has_dirichlet_face(*p.mesh, p.dirichlet))
        throw ValidationError("no Dirichlet face: the pure Neumann operator is singular");
    auto sys = assemble_scalar_operator(p.mesh, p.degree, p.materials, p.dirichlet, p.penalty, p.integration);
    Vector F = assemble_rhs(sys.space, p.f, p.g, sys.mu, p.penalty, p.dirichlet, 0.0, p.g_by_label);
    const LinearSolver solver(sys.A, true, "Poisson operator");
    Vector U = solver.solve(F);
    return {std::move(sys.space), std::move(sys.mu), std::move(sys.A), std::move(F), std::move(U)};
}

} // namespace polydg
