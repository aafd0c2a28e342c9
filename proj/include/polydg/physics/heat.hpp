#pragma once

#include <optional>

#include "poisson.hpp"

namespace polydg {

/// ∂u/∂t − ∇·(μ∇u) = f, u = g on Dirichlet faces, u(0) = u0.
struct HeatProblem
{
    std::shared_ptr<const PolyMesh> mesh;
    int degree = 1;
    CoefficientField materials;
    ScalarField f;
    ScalarField g;
    std::map<int, ScalarField> g_by_label;
    ScalarField u0;
    std::optional<Vector> initial_dofs; ///< overrides the projection of u0
    std::set<int> dirichlet = all_rectangle_sides;
    PenaltySpec penalty;
    double theta = 0.5;
    TimeGrid time;
};

struct HeatSolution
{
    FeSpace space;
    std::vector<double> mu;
    SparseMatrix M;
    SparseMatrix A;
    std::vector<Snapshot> trajectory;
};

inline HeatSolution solve_heat(const HeatProblem& p, const SnapshotObserver& observer = {})
{
    if (!(p.theta >= 0.0 && p.theta <= 1.0))
        throw ValidationError("theta out of [0,1]");
    if (!p.mesh)
        throw ValidationError("no mesh");
    auto sys = assemble_scalar_operator(p.mesh, p.degree, p.materials, p.dirichlet, p.penalty);
    const auto& space = sys.space;
    SparseMatrix M = assemble_volume_qf(space, VolumeForm::mass, constant_field(space.mesh(), 1.0));

    Vector U0;
    if (p.initial_dofs) {
        if (p.initial_dofs->size() != space.ndof())
            throw ValidationError("initial DOF vector has the wrong length");
        U0 = *p.initial_dofs;
    } else if (p.u0) {
        U0 = l2_project(space, p.u0);
    } else {
        U0 = Vector::Zero(space.ndof());
    }
    const auto& mu = sys.mu;
    auto load = [&](double t) { return assemble_rhs(space, p.f, p.g, mu, p.penalty, p.dirichlet, t, p.g_by_label); };
    auto traj = theta_method(M, sys.A, load, std::move(U0), p.theta, p.time, observer);
    return {std::move(sys.space), std::move(sys.mu), std::move(M), std::move(sys.A), std::move(traj)};
}

} // namespace polydg
