// Acceptance driver: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "polydg/polydg.hpp"

namespace fs = std::filesystem;
using namespace polydg;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome
{
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

fs::path source_dir() { return POLYDG_SOURCE_DIR; }
fs::path fixture(const char* name) { return source_dir() / "configs" / name; }

fs::path scratch_root()
{
    static const fs::path root = fs::temp_directory_path() / ("polydg_acceptance_" + std::to_string(::getpid()));
    return root;
}

fs::path scratch(const std::string& name)
{
    const auto p = scratch_root() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::shared_ptr<const PolyMesh> shared(PolyMesh m) { return std::make_shared<const PolyMesh>(std::move(m)); }

double vector_max(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// ---------------------------------------------------------------- 1

void poisson_verification(Outcome& o)
{
    const auto cfg = load_config(fixture("poisson_verification.json"));
    const auto res = run_solve(cfg, scratch("c1"));
    o.check(res.report.has_value(), "error report");
    const auto& r = *res.report;
    o.detail << "Nel=" << r.Nel << " p=" << r.p << " h=" << fmt(r.h) << " L2=" << fmt(r.L2) << " dG=" << fmt(r.dG);
    o.check(r.Nel == 30 && r.p == 3, "Nel=30, degree 3");
    o.check(r.L2 >= 9e-4 && r.L2 <= 8e-3, "L2 in [9e-4, 8e-3]");
    o.check(r.dG >= 0.11 && r.dG <= 1.0, "dG in [0.11, 1]");
}

// ---------------------------------------------------------------- 2

void h_convergence_study(Outcome& o)
{
    const auto cfg = load_config(fixture("conv.json"));
    const auto t = run_h_convergence(cfg);
    o.check(t.rows.size() == 4 && cfg.convergence.degree == 4, "four meshes at degree 4");
    for (const auto& r : t.rows)
        o.detail << r.Nel << ":" << fmt(r.L2) << "/" << fmt(r.dG) << " ";
    const double l2 = t.eoc_L2.back().value_or(NAN), dg = t.eoc_dG.back().value_or(NAN);
    o.detail << "EOC_L2=" << fmt(l2) << " EOC_dG=" << fmt(dg);
    o.check(std::abs(l2 - 5.0) <= 0.4, "EOC_L2 = 5 +- 0.4");
    o.check(std::abs(dg - 4.0) <= 0.4, "EOC_dG = 4 +- 0.4");
}

// ---------------------------------------------------------------- 3

void p_convergence_study(Outcome& o)
{
    const auto cfg = load_config(fixture("conv.json"));
    const auto t = run_p_convergence(cfg);
    o.check(t.rows.size() == 5 && t.rows.front().Nel == 100, "100 elements, degrees 1..5");
    bool decreasing = true;
    for (std::size_t i = 1; i < t.rows.size(); ++i)
        decreasing = decreasing && t.rows[i].L2 < t.rows[i - 1].L2 && t.rows[i].dG < t.rows[i - 1].dG;
    o.check(decreasing, "strictly decreasing errors");
    const auto l2 = log_error_slope(t, false), dg = log_error_slope(t, true);
    o.detail << "slope_L2=" << fmt(l2.slope) << " r=" << fmt(l2.r) << " slope_dG=" << fmt(dg.slope)
             << " r=" << fmt(dg.r);
    o.check(l2.slope <= -1.0 && dg.slope <= -1.0, "slopes <= -1");
    o.check(std::abs(l2.r) >= 0.98 && std::abs(dg.r) >= 0.98, "|r| >= 0.98");
}

// ---------------------------------------------------------------- 4

void qf_st_equivalence(Outcome& o)
{
    double worst = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto mesh = shared(generate_voronoi_mesh(Rectangle{}, 30, 5, seed));
        std::vector<double> c1, c2;
        for (std::size_t k = 0; k < mesh->num_elements(); ++k) {
            c1.push_back(1.0 + 0.1 * static_cast<double>(k % 7));
            c2.push_back(2.0 - 0.05 * static_cast<double>(k % 5));
        }
        for (int ell = 0; ell <= 5; ++ell) {
            const FeSpace space(mesh, ell);
            for (auto form : {VolumeForm::mass, VolumeForm::stiffness, VolumeForm::divdiv, VolumeForm::elastic})
                worst = std::max(worst, relative_frobenius(assemble_volume_qf(space, form, c1, c2),
                                                           assemble_volume_st(space, form, c1, c2)));
        }
    }
    o.detail << "max_rel_frobenius=" << fmt(worst);
    o.check(worst <= 1e-10, "QF/ST agreement 1e-10");

    const auto cfg = load_config(fixture("bench.json"));
    const auto mesh = shared(generate_voronoi_mesh(cfg.mesh.domain, cfg.benchmark.elements,
                                                   std::max(cfg.mesh.lloyd, 100), cfg.mesh.seed));
    const auto r = benchmark_assembly(mesh, 5, cfg.benchmark.repetitions);
    o.detail << " Nel=" << r.Nel << " mean_vertices=" << fmt(r.mean_vertices) << " QF=" << fmt(r.qf)
             << "s ST=" << fmt(r.st) << "s";
    o.check(cfg.benchmark.repetitions == 5, "5 repetitions");
    o.check(r.mean_vertices >= 5.5, "hexagon-dominant mesh");
    o.check(r.qf <= r.st, "median QF <= median ST");
}

// ---------------------------------------------------------------- 5

std::vector<Point> random_polygon(std::mt19937_64& rng, bool convex)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = convex ? std::uniform_int_distribution<int>(3, 9)(rng) : std::uniform_int_distribution<int>(5, 10)(rng);
    std::vector<Point> p;
    if (convex) {
        std::vector<double> th(static_cast<std::size_t>(n));
        for (auto& t : th)
            t = 2 * pi * u(rng);
        std::sort(th.begin(), th.end());
        for (double t : th)
            p.emplace_back(std::cos(t), std::sin(t));
    } else {
        for (int i = 0; i < n; ++i) {
            const double th = 2 * pi * (i + 0.3 * u(rng)) / n;
            const double r = 0.3 + 0.7 * u(rng);
            p.emplace_back(r * std::cos(th), r * std::sin(th));
        }
    }
    // Into [-1,1]² by the bounding box, where high-order monomials stay O(1).
    const auto b = bounding_box(p);
    for (auto& q : p)
        q = Point((2 * q.x() - (b.xmin + b.xmax)) / b.width(), (2 * q.y() - (b.ymin + b.ymax)) / b.height());
    return p;
}

void monomial_oracle(Outcome& o)
{
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    int tested = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = random_polygon(rng, trial % 2 == 1);
        if (!is_simple_polygon(p))
            continue;
        ++tested;
        const auto I = monomial_polygon_integrals(p, 16, 16);
        const auto rule = polygon_rule(p, 8);
        const double scale = std::abs(I(0, 0));
        for (int k = 0; k <= 16; ++k)
            for (int q = 0; k + q <= 16; ++q) {
                double s = 0.0;
                for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                    s += rule.weights[i] * std::pow(rule.nodes[i].x(), k) * std::pow(rule.nodes[i].y(), q);
                worst = std::max(worst, std::abs(I(k, q) - s) / scale);
            }
    }
    o.detail << "polygons=" << tested << " max_rel=" << fmt(worst);
    o.check(tested == 100, "100 simple polygons");
    o.check(worst <= 1e-12, "relative difference <= 1e-12");
}

// ---------------------------------------------------------------- 6

void heat(Outcome& o)
{
    // Separable data e^{-t}·(space): the semi-discrete solution is e^{-t}W with (A − M)W = F₀.
    const auto mesh = shared(cartesian_mesh(4, 4));
    const ScalarField f = [](const Point& x, double t) {
        return (8 * pi * pi - 1) * std::exp(-t) * std::sin(2 * pi * x.x()) * std::cos(2 * pi * x.y());
    };
    const ScalarField g = [](const Point& x, double t) {
        return std::exp(-t) * std::sin(2 * pi * x.x()) * std::cos(2 * pi * x.y());
    };
    const auto sys = assemble_scalar_operator(mesh, 3, {}, all_rectangle_sides, {});
    const SparseMatrix M = assemble_volume_qf(sys.space, VolumeForm::mass, constant_field(*mesh, 1.0));
    const Vector F0 = assemble_rhs(sys.space, f, g, sys.mu, {}, all_rectangle_sides, 0.0);
    const Vector W = LinearSolver(SparseMatrix(M.rows(), M.cols()) + sys.A - M, false).solve(F0);
    const double T = 0.4;
    std::vector<double> err;
    for (int n : {10, 20, 40, 80}) {
        HeatProblem p;
        p.mesh = mesh;
        p.degree = 3;
        p.f = f;
        p.g = g;
        p.initial_dofs = W;
        p.theta = 0.5;
        p.time = {T / n, T, n};
        const Vector d = solve_heat(p).trajectory.back().U - std::exp(-T) * W;
        err.push_back(std::sqrt(d.dot(M * d)));
    }
    const double eoc = std::log2(err[err.size() - 2] / err.back());
    o.detail << "CN_EOC=" << fmt(eoc);
    o.check(std::abs(eoc - 2.0) <= 0.2, "Crank-Nicolson EOC = 2 +- 0.2");

    PoissonProblem ps;
    ps.mesh = shared(generate_voronoi_mesh(Rectangle{}, 25, 5, 2));
    ps.degree = 2;
    ps.f = [](const Point& x, double) { return std::exp(x.x()) + x.y(); };
    ps.g = [](const Point& x, double) { return x.x() * x.y(); };
    const auto steady = solve_poisson(ps);
    HeatProblem hp;
    hp.mesh = ps.mesh;
    hp.degree = 2;
    hp.f = ps.f;
    hp.g = ps.g;
    hp.initial_dofs = steady.U;
    hp.time = {0.01, 0.2, 1};
    const auto traj = solve_heat(hp).trajectory;
    double drift = 0.0;
    for (std::size_t n = 1; n < traj.size(); ++n)
        drift = std::max(drift, vector_max(traj[n].U - traj[n - 1].U) / vector_max(steady.U));
    o.detail << " steady_residual=" << fmt(drift);
    o.check(drift <= 1e-9, "steady-state residual <= 1e-9 per step");

    // Two-circle smoke run, checked on element means at T=1.
    const auto cfg = load_config(fixture("heat_two_circles.json"));
    const auto tc = build_mesh(cfg.mesh);
    const auto base = detail::poisson_problem(cfg, tc);
    HeatProblem q;
    q.mesh = tc;
    q.degree = cfg.degree;
    q.materials = base.materials;
    q.f = base.f;
    q.g = base.g;
    q.g_by_label = base.g_by_label;
    q.dirichlet = base.dirichlet;
    q.penalty = base.penalty;
    q.theta = cfg.time->theta;
    q.time = detail::time_grid(cfg);
    q.u0 = to_scalar(cfg.initial_u[0]);
    const auto sol = solve_heat(q);
    const auto& last = sol.trajectory.back();
    const auto means = element_means(sol.space, last.U);
    const auto samples = sample_field(sol.space, last.U, {"u"});
    const auto [mlo, mhi] = std::minmax_element(means.begin(), means.end());
    const auto [plo, phi] = std::minmax_element(samples.values[0].begin(), samples.values[0].end());
    o.detail << " two_circles T=" << fmt(last.t) << " means=[" << fmt(*mlo) << "," << fmt(*mhi) << "] pointwise=["
             << fmt(*plo) << "," << fmt(*phi) << "]";
    o.check(std::abs(last.t - 1.0) < 1e-12, "reaches T=1");
    o.check(*mlo >= -1e-3 && *mhi <= 1.0 + 1e-3, "element means in [0,1] up to 1e-3");
}

// ---------------------------------------------------------------- 7

void elastodynamics(Outcome& o)
{
    auto cfg = load_config(fixture("elastic_manufactured.json"));
    cfg.output.formats = {"csv"};
    cfg.output.stride = 1 << 20;
    cfg.time->dt = 0.0025;
    cfg.mesh.lloyd = 100;
    for (int ell : {2, 3}) {
        std::vector<ErrorReport> rows;
        for (int n : {100, 400, 1600}) {
            cfg.degree = ell;
            cfg.mesh.elements = n;
            rows.push_back(*run_solve(cfg, scratch("c7")).report);
        }
        const auto t = h_table(rows);
        const double e = t.eoc_dG.back().value_or(NAN);
        o.detail << "EOC_dG(l=" << ell << ")=" << fmt(e) << " ";
        o.check(std::abs(e - ell) <= 0.4, "spatial dG EOC = degree +- 0.4");
    }

    ElastodynamicsProblem p;
    p.mesh = shared(generate_voronoi_mesh(Rectangle{}, 30, 5, 4));
    p.degree = 2;
    Material unit;
    unit.rho = unit.lambda = unit.shear = 1.0;
    p.materials = CoefficientField({{1, unit}});
    p.dirichlet = all_rectangle_sides;
    p.u0 = [](const Point& x, double) {
        const double b = std::sin(pi * x.x()) * std::sin(pi * x.y());
        return Eigen::Vector2d(0.7 * b, -0.3 * b * x.x());
    };
    p.v0 = [](const Point& x, double) { return Eigen::Vector2d(x.y() * (1 - x.y()), 0.0); };
    p.time = {0.01, 1.0, 1};
    const auto sol = solve_elastodynamics(p);
    const double drift = relative_energy_drift(energy_trace(sol.trajectory, sol.M, sol.A));
    o.detail << "steps=" << sol.trajectory.size() - 1 << " energy_drift=" << fmt(drift);
    o.check(sol.trajectory.size() == 101, "100 steps");
    o.check(drift <= 1e-8, "energy drift <= 1e-8");

    const auto layered = load_config(fixture("elastic_layered.json"));
    const auto table = materials_from_config(layered);
    bool exact = table.materials().size() == 7;
    for (const auto& [tag, m] : table.materials()) {
        const auto& j = layered.materials.at(tag);
        const double rho = j.at("rho"), cs = j.at("cs"), cp = j.at("cp");
        exact = exact && m.shear == rho * cs * cs && m.lambda == rho * (cp * cp - 2 * cs * cs);
    }
    o.check(exact, "7-material table converts exactly");

    const auto res = run_solve(layered, scratch("c7_layered"));
    std::size_t vtk = 0;
    for (const auto& f : res.files)
        vtk += f.extension() == ".vtk";
    o.detail << " layered Nel=" << res.num_elements << " p=" << res.degree << " vtk=" << vtk;
    o.check(res.num_elements == 500 && res.degree == 2 && layered.time->T == 0.5, "500 elements, degree 2, T=0.5");
    o.check(vtk >= 2, "VTK snapshots written");
    o.check(std::all_of(res.energy.begin(), res.energy.end(), [](double e) { return std::isfinite(e); }),
            "finite energy");
}

// ---------------------------------------------------------------- 8

bool blocks_equal(const SparseMatrix& big, Eigen::Index r, Eigen::Index c, const SparseMatrix& small)
{
    const Eigen::MatrixXd B(big), S(small);
    return (B.block(r, c, S.rows(), S.cols()) - S).cwiseAbs().maxCoeff() == 0.0;
}

void poroacoustics(Outcome& o)
{
    PoroAcousticProblem p;
    auto m = cartesian_mesh(4, 4, {-1, 1, -1, 1});
    for (std::size_t k = 0; k < m.num_elements(); ++k)
        m.element_tag[k] = m.geometry[k].centroid.x() < 0.0 ? 1 : 2;
    p.mesh = shared(std::move(m));
    p.degree = 2;
    p.materials = CoefficientField({{1, poroelastic_table_material()}, {2, acoustic_table_material()}});
    p.poro_tags = {1};
    p.acoustic_tags = {2};
    p.time = {1e-4, 5e-3, 1};
    const auto s = assemble_poroacoustic(p);

    const double skew = max_abs(SparseMatrix(s.Ca + SparseMatrix(s.Cp.transpose())));
    o.detail << "interface_faces=" << s.interface.size() << " |Ca+Cp^T|max=" << fmt(skew);
    o.check(skew == 0.0 && max_abs(s.Cp) > 0.0, "skew coupling blocks");

    // Single-physics operators assembled on their own, then compared block by block.
    const auto& sp = s.space_p;
    const auto& sa = s.space_a;
    const auto pm = s.poro.mesh;
    const auto am = s.acoustic.mesh;
    const auto& mat = p.materials;
    const auto rho_a = mat.per_element(*am, &Material::rho_a);
    const SparseMatrix Ma =
        assemble_volume_qf(sa, VolumeForm::mass, mat.per_element(*am, [](const Material& x) { return x.rho_a / (x.c * x.c); }));
    const FaceCoefficients ac{rho_a, {}};
    const auto Fa = assemble_faces(sa, FacePhysics::scalar, ac, p.penalty, p.acoustic_dirichlet);
    const SparseMatrix Aa = combine_dg_operator(assemble_volume_qf(sa, VolumeForm::stiffness, rho_a), Fa.IA, Fa.SA);
    const FaceCoefficients ec{mat.per_element(*pm, &Material::shear), mat.per_element(*pm, &Material::lambda)};
    const auto Fe = assemble_faces(sp, FacePhysics::elastic, ec, p.penalty, p.poro_dirichlet);
    const SparseMatrix Ae =
        combine_dg_operator(assemble_volume_qf(sp, VolumeForm::elastic, ec.primary, ec.lambda), Fe.IA, Fe.SA);
    const FaceCoefficients pc{mat.per_element(*pm, &Material::biot_modulus), {}};
    const auto Fp = assemble_faces(sp, FacePhysics::poro_pressure, pc, p.penalty, p.poro_dirichlet);
    const SparseMatrix Ap = combine_dg_operator(assemble_volume_qf(sp, VolumeForm::divdiv, pc.primary), Fp.IA, Fp.SA);
    const SparseMatrix Mp = block_diagonal(
        assemble_volume_qf(sp, VolumeForm::mass, mat.per_element(*pm, [](const Material& x) { return x.rho_p(); })), 2);
    const SparseMatrix Mf = block_diagonal(assemble_volume_qf(sp, VolumeForm::mass, mat.per_element(*pm, &Material::rho_f)), 2);
    const SparseMatrix Mw = block_diagonal(
        assemble_volume_qf(sp, VolumeForm::mass, mat.per_element(*pm, [](const Material& x) { return x.rho_w(); })), 2);
    const SparseMatrix B = block_diagonal(
        assemble_volume_qf(sp, VolumeForm::mass,
                           mat.per_element(*pm, [](const Material& x) { return x.viscosity / x.permeability; })),
        2);
    const SparseMatrix D = diagonal_matrix(s.beta_dofs);
    const SparseMatrix Aee = Ae + SparseMatrix(D * Ap * D);
    const auto up = s.offset_up(), uf = s.offset_uf(), ph = s.offset_phi();
    const bool composed = blocks_equal(s.M, up, up, Mp) && blocks_equal(s.M, up, uf, Mf) &&
                          blocks_equal(s.M, uf, up, Mf) && blocks_equal(s.M, uf, uf, Mw) &&
                          blocks_equal(s.M, ph, ph, Ma) && blocks_equal(s.C, uf, uf, B) &&
                          blocks_equal(s.C, up, ph, s.Cp) && blocks_equal(s.C, ph, uf, s.Ca) &&
                          blocks_equal(s.A, up, up, Aee) && blocks_equal(s.A, uf, uf, Ap) &&
                          blocks_equal(s.A, uf, up, SparseMatrix(Ap * D)) && blocks_equal(s.A, ph, ph, Aa);
    o.check(composed, "monolithic matrices equal block composition");

    p.up0 = [](const Point& x, double) {
        const double b = std::exp(-8 * ((x.x() + 0.5) * (x.x() + 0.5) + x.y() * x.y()));
        return Eigen::Vector2d(1e-4 * b, -5e-5 * b);
    };
    p.vf0 = [](const Point& x, double) { return Eigen::Vector2d(0.0, 0.01 * std::cos(pi * x.y())); };
    p.phi0 = [](const Point& x, double) { return x.x() > 0 ? std::sin(pi * x.x()) : 0.0; };
    const auto sol = solve_poroelastoacoustic(p);
    const auto e = energy_trace(sol.trajectory, sol.system.M, sol.system.A);
    const double uptick = max_energy_uptick(e);
    o.detail << " energy " << fmt(e.front()) << "->" << fmt(e.back()) << " uptick=" << fmt(uptick);
    o.check(e.front() > 0.0 && uptick <= 1e-10, "energy non-increasing");

    const auto pt = poroelastic_table_material();
    o.detail << " rho_p=" << pt.rho_p() << " rho_w=" << fmt(pt.rho_w());
    o.check(std::abs(pt.rho_p() - 2047.8) <= 1e-9 && std::abs(pt.rho_w() - 4736.84) <= 5e-3, "table densities");

    const auto cfg = load_config(fixture("poroacoustic_scattering.json"));
    const auto res = run_solve(cfg, scratch("c8"));
    const bool finite = std::all_of(res.energy.begin(), res.energy.end(), [](double v) { return std::isfinite(v); });
    o.detail << " scattering Nel=" << res.num_elements << " energy " << fmt(res.energy.front()) << "->"
             << fmt(res.energy.back());
    o.check(res.num_elements == 500 && res.degree == 2, "500 elements, degree 2");
    o.check(finite && res.energy.front() == 0.0 && res.energy.back() > 0.0, "wave enters from the boundary");
}

// ---------------------------------------------------------------- 9

std::map<std::string, std::string> directory_contents(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        out[e.path().filename().string()] = read_file(e.path());
    return out;
}

void determinism(Outcome& o)
{
    const char* fixtures[] = {"poisson_verification.json", "heat_two_circles.json", "elastic_manufactured.json",
                              "elastic_layered.json", "poroacoustic_scattering.json"};
    std::size_t compared = 0;
    for (const char* name : fixtures) {
        const auto cfg = load_config(fixture(name));
        std::vector<std::map<std::string, std::string>> runs;
        for (unsigned threads : {1u, 1u, 8u}) {
            set_num_threads(threads);
            const auto dir = scratch("c9");
            run_solve(cfg, dir);
            runs.push_back(directory_contents(dir));
        }
        set_num_threads(1);
        const bool same = !runs[0].empty() && runs[0] == runs[1] && runs[0] == runs[2];
        compared += runs[0].size();
        o.check(same, std::string(name) + " byte-identical");
    }
    const auto conv = load_config(fixture("conv.json"));
    std::vector<std::string> tables;
    for (unsigned threads : {1u, 8u}) {
        set_num_threads(threads);
        std::ostringstream os;
        write_csv(os, run_h_convergence(conv));
        tables.push_back(os.str());
    }
    set_num_threads(1);
    o.check(tables[0] == tables[1], "convergence table byte-identical");
    std::vector<std::string> meshes;
    for (int i = 0; i < 2; ++i) {
        std::ostringstream os;
        write_mesh(generate_voronoi_mesh(Rectangle{}, 30, 50, 1), os);
        meshes.push_back(os.str());
    }
    o.check(meshes[0] == meshes[1], "mesh generation byte-identical");
    o.detail << "fixtures=" << std::size(fixtures) << " files=" << compared << " (threads 1, 1, 8)";
}

} // namespace

int main()
{
    struct Criterion
    {
        int id;
        const char* name;
        double budget; // seconds
        std::function<void(Outcome&)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Poisson verification", 10, poisson_verification},
        {2, "h-convergence", 120, h_convergence_study},
        {3, "p-convergence", 180, p_convergence_study},
        {4, "QF/ST equivalence and speed", 120, qf_st_equivalence},
        {5, "monomial-integral oracle", 30, monomial_oracle},
        {6, "heat equation", 120, heat},
        {7, "elastodynamics", 300, elastodynamics},
        {8, "poroelasto-acoustics", 300, poroacoustics},
        {9, "determinism", 600, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.check(secs < c.budget, "runtime < " + fmt(c.budget) + " s");
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << o.detail.str() << " ("
                  << fmt(secs) << " s)" << std::endl;
    }
    std::error_code ec;
    fs::remove_all(scratch_root(), ec);
    return failures == 0 ? 0 : 1;
}
