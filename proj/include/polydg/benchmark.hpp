#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

#include "analysis.hpp"
#include "assembly.hpp"
#include "io/csv.hpp"
#include "io/snapshot.hpp"
#include "physics/poisson.hpp"

namespace polydg {

/// Median wall-clock seconds per phase, plus the QF/ST cross-check.
struct BenchmarkRecord
{
    std::size_t Nel = 0;
    int degree = 0;
    int repetitions = 0;
    double mean_vertices = 0.0;
    double qf = 0.0;
    double st = 0.0;
    double rhs = 0.0;
    double solve = 0.0;
    double output = 0.0;
    double agreement = 0.0; ///< max relative Frobenius difference of QF and ST matrices
};

inline double median(std::vector<double> v)
{
    if (v.empty())
        throw ValidationError("median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace detail {

template <typename F>
double seconds(F&& f)
{
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

} // namespace detail

/// Times mass + stiffness assembly with both integration methods, then the RHS, the
/// solve and the output phase of a Poisson run on the same mesh. Throws NumericalError
/// (and reports no timings) when the QF and ST matrices disagree beyond 1e−10.
inline BenchmarkRecord benchmark_assembly(std::shared_ptr<const PolyMesh> mesh, int degree, int repetitions)
{
    if (repetitions < 3)
        throw ValidationError("benchmark needs at least 3 repetitions");
    const FeSpace space(mesh, degree);
    const auto one = constant_field(*mesh, 1.0);
    std::vector<double> tq, ts, tr, tsol, tout;
    SparseMatrix Mq, Kq, Ms, Ks;
    for (int r = 0; r < repetitions; ++r) {
        tq.push_back(detail::seconds([&] {
            Mq = assemble_volume_qf(space, VolumeForm::mass, one);
            Kq = assemble_volume_qf(space, VolumeForm::stiffness, one);
        }));
        ts.push_back(detail::seconds([&] {
            Ms = assemble_volume_st(space, VolumeForm::mass, one);
            Ks = assemble_volume_st(space, VolumeForm::stiffness, one);
        }));
    }
    BenchmarkRecord rec;
    rec.agreement = std::max(relative_frobenius(Mq, Ms), relative_frobenius(Kq, Ks));
    if (!(rec.agreement <= 1e-10))
        throw NumericalError("quadrature-free and sub-tessellated matrices disagree (relative difference " +
                             csv::number(rec.agreement) + ")");

    const double pi = std::numbers::pi;
    const ScalarField u = [pi](const Point& p, double) { return std::sin(2 * pi * p.x()) * std::cos(2 * pi * p.y()); };
    const ScalarField f = [pi, u](const Point& p, double t) { return 8 * pi * pi * u(p, t); };
    const auto sys = assemble_scalar_operator(mesh, degree, {}, all_rectangle_sides, {}, Integration::quadrature_free);
    Vector F, U;
    for (int r = 0; r < repetitions; ++r) {
        tr.push_back(detail::seconds(
            [&] { F = assemble_rhs(sys.space, f, u, sys.mu, PenaltySpec{}, all_rectangle_sides, 0.0); }));
        tsol.push_back(detail::seconds([&] { U = LinearSolver(sys.A, true, "Poisson operator").solve(F); }));
        tout.push_back(detail::seconds([&] {
            std::ostringstream os;
            write_csv(os, sample_field(sys.space, U, {"u"}));
        }));
    }
    rec.Nel = mesh->num_elements();
    rec.degree = degree;
    rec.repetitions = repetitions;
    rec.mean_vertices = mesh->mean_vertices_per_element();
    rec.qf = median(tq);
    rec.st = median(ts);
    rec.rhs = median(tr);
    rec.solve = median(tsol);
    rec.output = median(tout);
    return rec;
}

inline void write_json(std::ostream& os, const std::vector<BenchmarkRecord>& recs)
{
    os << "[\n";
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        os << "  {\"Nel\": " << r.Nel << ", \"p\": " << r.degree << ", \"repetitions\": " << r.repetitions
           << ", \"mean_vertices\": " << csv::number(r.mean_vertices) << ", \"QF\": " << csv::number(r.qf)
           << ", \"ST\": " << csv::number(r.st) << ", \"RHS\": " << csv::number(r.rhs)
           << ", \"solve\": " << csv::number(r.solve) << ", \"outputs\": " << csv::number(r.output)
           << ", \"agreement\": " << csv::number(r.agreement) << "}" << (i + 1 < recs.size() ? "," : "") << "\n";
    }
    os << "]\n";
}

} // namespace polydg
