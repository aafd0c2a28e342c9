#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "../error.hpp"
#include "../sparse.hpp"

namespace polydg {

/// Sparse direct solver: LDLᵀ for symmetric operators, LU otherwise. Factorized
/// once, reused for every right-hand side.
class LinearSolver
{
public:
    LinearSolver() = default;

    LinearSolver(const SparseMatrix& a, bool symmetric, const std::string& what = "operator") { factorize(a, symmetric, what); }

    void factorize(const SparseMatrix& a, bool symmetric, const std::string& what = "operator")
    {
        if (a.rows() != a.cols())
            throw ValidationError(what + " is not square");
        what_ = what;
        n_ = a.rows();
        if (symmetric) {
            lu_.reset();
            ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>();
            ldlt_->compute(a);
            if (ldlt_->info() != Eigen::Success)
                throw NumericalError("factorization of " + what + " failed (n=" + std::to_string(n_) +
                                     ", max|a|=" + std::to_string(max_abs(a)) + ")");
            const auto d = ldlt_->vectorD();
            if (d.size() > 0 && (d.cwiseAbs().minCoeff() <= 1e-14 * d.cwiseAbs().maxCoeff() || !d.allFinite()))
                throw NumericalError(what + " is singular to working precision (n=" + std::to_string(n_) + ")");
        } else {
            ldlt_.reset();
            lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
            SparseMatrix c = a;
            c.makeCompressed();
            lu_->compute(c);
            if (lu_->info() != Eigen::Success)
                throw NumericalError("factorization of " + what + " failed: " + lu_->lastErrorMessage());
        }
    }

    Vector solve(const Vector& b) const
    {
        if (b.size() != n_)
            throw ValidationError("right-hand side size does not match " + what_);
        Vector x = ldlt_ ? Vector(ldlt_->solve(b)) : Vector(lu_->solve(b));
        if (!x.allFinite())
            throw NumericalError("non-finite solution of " + what_);
        return x;
    }

private:
    std::string what_;
    Eigen::Index n_ = 0;
    std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
    std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

/// One stored time level. V is empty for first-order problems.
struct Snapshot
{
    double t = 0.0;
    Vector U;
    Vector V;
};

using SnapshotObserver = std::function<void(const Snapshot&)>;

struct TimeGrid
{
    double dt = 0.0;
    double T = 0.0;
    int stride = 1; ///< store every stride-th level (the first and last are always stored)

    int steps() const
    {
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw ValidationError("dt must be positive");
        if (!(T >= dt))
            throw ValidationError("T must be at least dt");
        if (stride < 1)
            throw ValidationError("stride must be >= 1");
        const double n = T / dt;
        const double r = std::round(n);
        if (std::abs(n - r) > 1e-9 * n)
            throw ValidationError("T must be an integer multiple of dt");
        return static_cast<int>(r);
    }
    double time(int n) const { return n == steps() ? T : n * dt; }
};

inline bool stores(const TimeGrid& g, int n, int nsteps) { return n == 0 || n == nsteps || n % g.stride == 0; }

/// θ-method for M U' + A U = F(t):
/// (M + θΔtA)U^{n+1} = (M − (1−θ)ΔtA)U^n + Δt(θF^{n+1} + (1−θ)F^n).
inline std::vector<Snapshot> theta_method(const SparseMatrix& M, const SparseMatrix& A,
                                          const std::function<Vector(double)>& load, Vector U0, double theta,
                                          const TimeGrid& grid, const SnapshotObserver& observer = {})
{
    if (!(theta >= 0.0 && theta <= 1.0))
        throw ValidationError("theta out of [0,1]");
    const int nsteps = grid.steps();
    const double dt = grid.dt;
    const SparseMatrix lhs = M + (theta * dt) * A;
    const SparseMatrix rhs_op = M - ((1.0 - theta) * dt) * A;
    const LinearSolver solver(lhs, true, "theta-method operator");

    std::vector<Snapshot> out;
    Vector U = std::move(U0);
    Vector F_old = load ? load(0.0) : Vector::Zero(U.size());
    auto emit = [&](double t) {
        Snapshot s{t, U, {}};
        if (observer)
            observer(s);
        out.push_back(std::move(s));
    };
    emit(0.0);
    for (int n = 1; n <= nsteps; ++n) {
        const double t = grid.time(n);
        const Vector F_new = load ? load(t) : Vector::Zero(U.size());
        const Vector b = rhs_op * U + dt * (theta * F_new + (1.0 - theta) * F_old);
        U = solver.solve(b);
        F_old = F_new;
        if (stores(grid, n, nsteps))
            emit(t);
    }
    return out;
}

/// M A'' + C U' + A U = F(t). C may be empty (no first-order term).
struct SecondOrderSystem
{
    SparseMatrix M;
    SparseMatrix C;
    SparseMatrix A;
    std::function<Vector(double)> load;
    bool symmetric = true; ///< M + γΔtC + βΔt²A symmetric
};

struct NewmarkParams
{
    double beta = 0.25;
    double gamma = 0.5;
};

/// ½ VᵀMV + ½ UᵀAU
inline double discrete_energy(const SparseMatrix& M, const SparseMatrix& A, const Vector& U, const Vector& V)
{
    return 0.5 * V.dot(M * V) + 0.5 * U.dot(A * U);
}

/// Newmark scheme in acceleration form. The initial acceleration solves
/// M Acc⁰ = F(0) − C V⁰ − A U⁰; each step predicts, solves
/// (M + γΔtC + βΔt²A) Acc = F − C Ṽ − A Ũ and corrects.
inline std::vector<Snapshot> newmark(const SecondOrderSystem& sys, Vector U0, Vector V0, const NewmarkParams& p,
                                     const TimeGrid& grid, const SnapshotObserver& observer = {})
{
    if (!(p.beta > 0.0 && p.beta <= 0.5) || !(p.gamma >= 0.5 && p.gamma <= 1.0))
        throw ValidationError("Newmark parameters out of range (need 0 < beta <= 1/2, 1/2 <= gamma <= 1)");
    const Eigen::Index n = sys.M.rows();
    if (U0.size() != n || V0.size() != n || sys.A.rows() != n)
        throw ValidationError("Newmark: initial data size does not match the system");
    const bool damped = sys.C.nonZeros() > 0;
    if (damped && sys.C.rows() != n)
        throw ValidationError("Newmark: damping block size mismatch");
    const int nsteps = grid.steps();
    const double dt = grid.dt;

    auto load = [&](double t) -> Vector { return sys.load ? sys.load(t) : Vector::Zero(n); };
    auto damping = [&](const Vector& v) -> Vector { return damped ? Vector(sys.C * v) : Vector::Zero(n); };

    const LinearSolver mass(sys.M, true, "mass matrix");
    SparseMatrix eff = sys.M + (p.beta * dt * dt) * sys.A;
    if (damped)
        eff += (p.gamma * dt) * sys.C;
    const LinearSolver solver(eff, sys.symmetric, "Newmark operator");

    Vector U = std::move(U0), V = std::move(V0);
    Vector Acc = mass.solve(load(0.0) - damping(V) - sys.A * U);

    std::vector<Snapshot> out;
    auto emit = [&](double t) {
        Snapshot s{t, U, V};
        if (observer)
            observer(s);
        out.push_back(std::move(s));
    };
    emit(0.0);
    for (int k = 1; k <= nsteps; ++k) {
        const double t = grid.time(k);
        const Vector Ut = U + dt * V + (dt * dt * (0.5 - p.beta)) * Acc;
        const Vector Vt = V + (dt * (1.0 - p.gamma)) * Acc;
        Acc = solver.solve(load(t) - damping(Vt) - sys.A * Ut);
        U = Ut + (p.beta * dt * dt) * Acc;
        V = Vt + (p.gamma * dt) * Acc;
        if (stores(grid, k, nsteps))
            emit(t);
    }
    return out;
}

} // namespace polydg
