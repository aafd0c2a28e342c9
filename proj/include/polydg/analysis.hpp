#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "assembly.hpp"
#include "physics/poisson.hpp"
#include "physics/time_integration.hpp"

namespace polydg {

using TensorField = std::function<Eigen::Matrix2d(const Point&, double)>; ///< (i, j) = ∂_j u_i

struct ErrorReport
{
    std::size_t Nel = 0;
    double h = 0.0;
    int p = 0;
    double L2 = 0.0;
    double dG = 0.0;
};

namespace detail {

inline int error_face_points(const FeSpace& space, const Face& f) { return face_points(space, f) + 1; }

} // namespace detail

/// L² and dG errors of a scalar solution against an exact solution u with gradient
/// ∇u. dG² = ‖√μ ∇(u − u_h)‖² + Σ_{internal e} α_e‖[u_h]‖²_e + Σ_{Dirichlet e} α_e‖u_h − u‖²_e.
/// Volume integrals use the degree 2ℓ+3 sub-tessellation rule.
inline ErrorReport compute_errors(const FeSpace& space, const Vector& U, const ScalarField& u,
                                  const VectorField& grad_u, std::span<const double> mu, const PenaltySpec& penalty,
                                  const std::set<int>& dirichlet, double t = 0.0)
{
    if (U.size() != space.ndof())
        throw ValidationError("compute_errors: DOF vector has the wrong length");
    const auto& mesh = space.mesh();
    const std::size_t nel = space.num_elements();
    std::vector<double> l2(nel, 0.0), grad(nel, 0.0);
    parallel_for(nel, [&](std::size_t k) {
        const auto rule = polygon_rule(mesh.polygon(k), space.degree(k) + 1);
        const auto tab = eval_basis(space, k, rule.nodes);
        const auto Uk = U.segment(space.offset(k), space.nbases(k));
        const Eigen::VectorXd uh = tab.values * Uk, dx = tab.dx * Uk, dy = tab.dy * Uk;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const auto Q = static_cast<Eigen::Index>(q);
            const double e = u(rule.nodes[q], t) - uh(Q);
            const Eigen::Vector2d ge = grad_u(rule.nodes[q], t) - Eigen::Vector2d(dx(Q), dy(Q));
            l2[k] += rule.weights[q] * e * e;
            grad[k] += rule.weights[q] * mu[k] * ge.squaredNorm();
        }
    });
    std::vector<double> jump(mesh.faces.size(), 0.0);
    parallel_for(mesh.faces.size(), [&](std::size_t fi) {
        const Face& f = mesh.faces[fi];
        if (!detail::face_active(f, dirichlet))
            return;
        const double alpha = penalty_coefficient(space, f, mu, penalty.c_alpha);
        const auto q = detail::face_quadrature(mesh, f, detail::error_face_points(space, f));
        const Eigen::VectorXd own = eval_field(space, static_cast<std::size_t>(f.owner), q.points, U);
        Eigen::VectorXd other(own.size());
        if (f.is_boundary())
            for (std::size_t p = 0; p < q.points.size(); ++p)
                other(static_cast<Eigen::Index>(p)) = u(q.points[p], t);
        else
            other = eval_field(space, static_cast<std::size_t>(f.neighbor), q.points, U);
        jump[fi] = alpha * q.weights.dot((own - other).cwiseAbs2());
    });
    ErrorReport r;
    r.Nel = nel;
    r.h = mesh.max_diameter();
    r.p = space.max_degree_used();
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < nel; ++k) {
        a += l2[k];
        b += grad[k];
    }
    for (double j : jump)
        b += j;
    r.L2 = std::sqrt(a);
    r.dG = std::sqrt(b);
    return r;
}

/// Elastic analogue: energy term Σ(σ(e), ε(e)) and η_e-weighted vector jumps.
inline ErrorReport compute_errors_elastic(const FeSpace& space, const Vector& U, const VectorField& u,
                                          const TensorField& grad_u, const FaceCoefficients& coef,
                                          const PenaltySpec& penalty, const std::set<int>& dirichlet, double t = 0.0)
{
    const int ndof = space.ndof();
    if (U.size() != 2 * ndof)
        throw ValidationError("compute_errors_elastic: DOF vector has the wrong length");
    const auto& mesh = space.mesh();
    const std::size_t nel = space.num_elements();
    std::vector<double> l2(nel, 0.0), energy(nel, 0.0);
    parallel_for(nel, [&](std::size_t k) {
        const auto rule = polygon_rule(mesh.polygon(k), space.degree(k) + 1);
        const auto tab = eval_basis(space, k, rule.nodes);
        const int nb = space.nbases(k), off = space.offset(k);
        const auto U1 = U.segment(off, nb), U2 = U.segment(ndof + off, nb);
        const Eigen::VectorXd u1 = tab.values * U1, u2 = tab.values * U2;
        const Eigen::VectorXd u1x = tab.dx * U1, u1y = tab.dy * U1, u2x = tab.dx * U2, u2y = tab.dy * U2;
        const double mu = coef.primary[k], lambda = coef.lambda[k];
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const auto Q = static_cast<Eigen::Index>(q);
            const Eigen::Vector2d e = u(rule.nodes[q], t) - Eigen::Vector2d(u1(Q), u2(Q));
            Eigen::Matrix2d G = grad_u(rule.nodes[q], t);
            G(0, 0) -= u1x(Q);
            G(0, 1) -= u1y(Q);
            G(1, 0) -= u2x(Q);
            G(1, 1) -= u2y(Q);
            const Eigen::Matrix2d eps = 0.5 * (G + G.transpose());
            const double tr = eps.trace();
            l2[k] += rule.weights[q] * e.squaredNorm();
            energy[k] += rule.weights[q] * (2.0 * mu * eps.squaredNorm() + lambda * tr * tr);
        }
    });
    std::vector<double> jump(mesh.faces.size(), 0.0);
    parallel_for(mesh.faces.size(), [&](std::size_t fi) {
        const Face& f = mesh.faces[fi];
        if (!detail::face_active(f, dirichlet))
            return;
        const double eta = detail::face_penalty(space, f, FacePhysics::elastic, coef, penalty.c_alpha);
        const auto q = detail::face_quadrature(mesh, f, detail::error_face_points(space, f));
        auto trace = [&](int k) {
            const auto e = static_cast<std::size_t>(k);
            const auto tab = eval_basis(space, e, q.points);
            Eigen::MatrixXd v(static_cast<Eigen::Index>(q.points.size()), 2);
            v.col(0) = tab.values * U.segment(space.offset(e), space.nbases(e));
            v.col(1) = tab.values * U.segment(ndof + space.offset(e), space.nbases(e));
            return v;
        };
        const Eigen::MatrixXd own = trace(f.owner);
        Eigen::MatrixXd other(own.rows(), 2);
        if (f.is_boundary())
            for (std::size_t p = 0; p < q.points.size(); ++p)
                other.row(static_cast<Eigen::Index>(p)) = u(q.points[p], t).transpose();
        else
            other = trace(f.neighbor);
        jump[fi] = eta * q.weights.dot((own - other).rowwise().squaredNorm());
    });
    ErrorReport r;
    r.Nel = nel;
    r.h = mesh.max_diameter();
    r.p = space.max_degree_used();
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < nel; ++k) {
        a += l2[k];
        b += energy[k];
    }
    for (double j : jump)
        b += j;
    r.L2 = std::sqrt(a);
    r.dG = std::sqrt(b);
    return r;
}

/// log(e₁/e₂) / log(h₁/h₂)
inline double eoc(double e1, double e2, double h1, double h2) { return std::log(e1 / e2) / std::log(h1 / h2); }

struct ConvergenceTable
{
    std::vector<ErrorReport> rows;
    std::vector<std::optional<double>> eoc_L2; ///< empty for the first row
    std::vector<std::optional<double>> eoc_dG;
};

/// Errors at or below this are treated as round-off and leave the order undefined.
inline constexpr double eoc_roundoff_floor = 1e-10;

/// Orders between consecutive rows; h must decrease strictly.
inline ConvergenceTable h_table(std::vector<ErrorReport> rows, double floor = eoc_roundoff_floor)
{
    ConvergenceTable t;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].h < rows[i - 1].h))
            throw ValidationError("h sequence is not strictly decreasing");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == 0) {
            t.eoc_L2.emplace_back();
            t.eoc_dG.emplace_back();
            continue;
        }
        const auto& a = rows[i - 1];
        const auto& b = rows[i];
        auto order = [&](double e1, double e2) -> std::optional<double> {
            if (!(e1 > floor) || !(e2 > floor))
                return std::nullopt;
            return eoc(e1, e2, a.h, b.h);
        };
        t.eoc_L2.push_back(order(a.L2, b.L2));
        t.eoc_dG.push_back(order(a.dG, b.dG));
    }
    t.rows = std::move(rows);
    return t;
}

/// Table keyed by degree; no orders.
inline ConvergenceTable p_table(std::vector<ErrorReport> rows)
{
    ConvergenceTable t;
    t.eoc_L2.resize(rows.size());
    t.eoc_dG.resize(rows.size());
    t.rows = std::move(rows);
    return t;
}

struct Regression
{
    double slope = 0.0;
    double intercept = 0.0;
    double r = 0.0; ///< Pearson correlation
};

inline Regression linear_regression(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw ValidationError("regression needs at least two points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    Regression r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.r = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
    return r;
}

/// Least-squares line of ln(error) against ℓ.
inline Regression log_error_slope(const ConvergenceTable& t, bool dg = false)
{
    std::vector<double> x, y;
    for (const auto& r : t.rows) {
        x.push_back(r.p);
        y.push_back(std::log(dg ? r.dG : r.L2));
    }
    return linear_regression(x, y);
}

/// Exact data for the scalar convergence studies.
struct ExactSolution
{
    ScalarField u;
    VectorField grad;
};

/// Solves the problem on each mesh (degree fixed) and tabulates errors with orders.
inline ConvergenceTable h_convergence(const PoissonProblem& base, const ExactSolution& exact,
                                      const std::vector<std::shared_ptr<const PolyMesh>>& meshes, int degree)
{
    if (meshes.size() < 3)
        throw ValidationError("h_convergence needs at least three meshes");
    std::vector<ErrorReport> rows;
    for (const auto& m : meshes) {
        PoissonProblem p = base;
        p.mesh = m;
        p.degree = degree;
        const auto sol = solve_poisson(p);
        rows.push_back(compute_errors(sol.space, sol.U, exact.u, exact.grad, sol.mu, p.penalty, p.dirichlet));
    }
    return h_table(std::move(rows));
}

/// Fixed mesh, ascending degrees.
inline ConvergenceTable p_convergence(const PoissonProblem& base, const ExactSolution& exact,
                                      std::shared_ptr<const PolyMesh> mesh, const std::vector<int>& degrees)
{
    for (std::size_t i = 1; i < degrees.size(); ++i)
        if (degrees[i] <= degrees[i - 1])
            throw ValidationError("degree range must be ascending");
    std::vector<ErrorReport> rows;
    for (int ell : degrees) {
        PoissonProblem p = base;
        p.mesh = mesh;
        p.degree = ell;
        const auto sol = solve_poisson(p);
        rows.push_back(compute_errors(sol.space, sol.U, exact.u, exact.grad, sol.mu, p.penalty, p.dirichlet));
    }
    return p_table(std::move(rows));
}

/// Mean of the discrete scalar field over each element (component 0 of U).
inline std::vector<double> element_means(const FeSpace& space, const Vector& U)
{
    if (U.size() < space.ndof())
        throw ValidationError("element_means: DOF vector is too short");
    std::vector<double> out(space.num_elements());
    parallel_for(space.num_elements(), [&](std::size_t k) {
        const auto rule = polygon_rule(space.mesh().polygon(k), space.degree(k));
        const Eigen::VectorXd uh = eval_basis(space, k, rule.nodes).values * U.segment(space.offset(k), space.nbases(k));
        double integral = 0.0, area = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            integral += rule.weights[q] * uh(static_cast<Eigen::Index>(q));
            area += rule.weights[q];
        }
        out[k] = integral / area;
    });
    return out;
}

/// E^n = ½(VᵀMV + UᵀAU) for each stored level.
inline std::vector<double> energy_trace(const std::vector<Snapshot>& trajectory, const SparseMatrix& M,
                                        const SparseMatrix& A)
{
    std::vector<double> e;
    e.reserve(trajectory.size());
    for (const auto& s : trajectory) {
        if (s.V.size() != s.U.size())
            throw ValidationError("energy_trace needs velocities");
        e.push_back(discrete_energy(M, A, s.U, s.V));
    }
    return e;
}

/// max_n |E^n − E⁰| / E⁰
inline double relative_energy_drift(std::span<const double> e)
{
    if (e.empty() || e[0] == 0.0)
        return 0.0;
    double d = 0.0;
    for (double v : e)
        d = std::max(d, std::abs(v - e[0]));
    return d / std::abs(e[0]);
}

/// Largest relative increase between consecutive entries (0 for a non-increasing trace).
inline double max_energy_uptick(std::span<const double> e)
{
    double u = 0.0;
    for (std::size_t i = 1; i < e.size(); ++i)
        if (e[i - 1] > 0.0)
            u = std::max(u, (e[i] - e[i - 1]) / e[i - 1]);
    return u;
}

} // namespace polydg
