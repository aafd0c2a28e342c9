#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "../agglomerate.hpp"
#include "../analysis.hpp"
#include "../mesh_io.hpp"
#include "../physics/elastodynamics.hpp"
#include "../physics/heat.hpp"
#include "../physics/poisson.hpp"
#include "../physics/poroacoustic.hpp"
#include "../voronoi.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "vtk.hpp"

namespace polydg {

/// Union of the discs |x ∓ (offset, 0)| < radius, traced counter-clockwise.
inline std::vector<Point> two_circle_domain(double offset, double radius, int segments)
{
    if (!(radius > offset && offset > 0.0) || segments < 8)
        throw ValidationError("two-circle domain needs radius > offset > 0 and at least 8 segments");
    const double yi = std::sqrt(radius * radius - offset * offset);
    const double a = std::atan2(yi, -offset); // upper intersection seen from the right centre
    const double b = std::atan2(yi, offset);  // and from the left centre
    std::vector<Point> poly;
    for (int i = 0; i < segments; ++i) {
        const double th = -a + 2.0 * a * i / segments;
        poly.emplace_back(offset + radius * std::cos(th), radius * std::sin(th));
    }
    for (int i = 0; i < segments; ++i) {
        const double th = b + (2.0 * std::numbers::pi - 2.0 * b) * i / segments;
        poly.emplace_back(-offset + radius * std::cos(th), radius * std::sin(th));
    }
    return poly;
}

/// The two-circle domain cut along the chord joining the junction points: the right
/// and the left disc segment, both convex and sharing the chord's end vertices exactly.
inline std::vector<std::vector<Point>> two_circle_parts(double offset, double radius, int segments)
{
    const auto poly = two_circle_domain(offset, radius, segments);
    const auto n = static_cast<std::size_t>(segments);
    std::vector<Point> right(poly.begin(), poly.begin() + static_cast<std::ptrdiff_t>(n) + 1);
    std::vector<Point> left(poly.begin() + static_cast<std::ptrdiff_t>(n), poly.end());
    left.push_back(poly.front());
    return {std::move(right), std::move(left)};
}

/// Top half (y > 0) gets the top label, the rest the bottom label.
inline int upper_lower_label(const Point& mid, const Point&) { return mid.y() > 0.0 ? side::top : side::bottom; }

inline void apply_tag_rules(PolyMesh& mesh, const std::vector<TagRule>& rules)
{
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        const Point& c = mesh.geometry[k].centroid;
        for (const auto& r : rules)
            if (r.where(c, 0.0) > 0.0) {
                mesh.element_tag[k] = r.tag;
                break;
            }
    }
}

inline std::shared_ptr<const PolyMesh> build_mesh(const MeshConfig& m)
{
    PolyMesh mesh;
    if (m.type == "file")
        mesh = import_mesh(m.path.string());
    else if (m.type == "cartesian")
        mesh = cartesian_mesh(m.nx, m.ny, m.domain);
    else if (m.type == "voronoi")
        mesh = generate_voronoi_mesh(m.domain, m.elements, m.lloyd, m.seed);
    else if (m.type == "two_circles") {
        const auto parts = two_circle_parts(m.offset, m.radius, m.segments);
        mesh = generate_voronoi_mesh(parts, m.elements, m.lloyd, m.seed, upper_lower_label);
    } else
        throw ValidationError("unknown mesh type " + m.type);
    if (m.agglomerate > 0)
        mesh = agglomerate(mesh, static_cast<std::size_t>(m.agglomerate), m.seed);
    apply_tag_rules(mesh, m.regions);
    return std::make_shared<const PolyMesh>(std::move(mesh));
}

inline ScalarField to_scalar(const Expression& e)
{
    return [e](const Point& p, double t) { return e(p, t); };
}

inline VectorField to_vector(const ExpressionList& e)
{
    if (e.size() != 2)
        throw ValidationError("expected two components");
    return [e](const Point& p, double t) { return Eigen::Vector2d(e[0](p, t), e[1](p, t)); };
}

inline VectorField gradient_of(const Expression& e)
{
    const auto dx = e.derivative(Expression::Var::x), dy = e.derivative(Expression::Var::y);
    return [dx, dy](const Point& p, double t) { return Eigen::Vector2d(dx(p, t), dy(p, t)); };
}

inline TensorField gradient_of(const ExpressionList& e)
{
    if (e.size() != 2)
        throw ValidationError("expected two components");
    std::vector<Expression> d;
    for (const auto& c : e) {
        d.push_back(c.derivative(Expression::Var::x));
        d.push_back(c.derivative(Expression::Var::y));
    }
    return [d](const Point& p, double t) {
        Eigen::Matrix2d g;
        g << d[0](p, t), d[1](p, t), d[2](p, t), d[3](p, t);
        return g;
    };
}

/// Material table of a configuration, translated to the library's parameter names.
inline CoefficientField materials_from_config(const RunConfig& cfg)
{
    CoefficientField field;
    for (const auto& [tag, j] : cfg.materials) {
        auto get = [&](const char* key, double d) { return j.contains(key) ? j.at(key).get<double>() : d; };
        Material m;
        if (cfg.physics == "laplacian" || cfg.physics == "heat") {
            m.mu = get("mu", 1.0);
        } else if (cfg.physics == "elastodynamics") {
            if (j.contains("cs") || j.contains("cp")) {
                if (!j.contains("cs") || !j.contains("cp") || !j.contains("rho"))
                    throw ValidationError("/materials/" + std::to_string(tag) + ": wave speeds need rho, cs and cp");
                m = Material::from_wave_speeds(get("rho", 0), get("cs", 0), get("cp", 0));
            } else {
                m.rho = get("rho", 1.0);
                m.lambda = get("lambda", 0.0);
                m.shear = get("mu", 0.0);
            }
        } else {
            const bool acoustic = std::find(cfg.acoustic_tags.begin(), cfg.acoustic_tags.end(), tag) !=
                                  cfg.acoustic_tags.end();
            m = acoustic ? acoustic_table_material() : poroelastic_table_material();
            m.rho_a = get("rho_a", m.rho_a);
            m.c = get("c", m.c);
            m.porosity = get("phi", m.porosity);
            m.tortuosity = get("a", m.tortuosity);
            m.permeability = get("k", m.permeability);
            m.viscosity = get("eta", m.viscosity);
            m.biot_modulus = get("m", m.biot_modulus);
            m.biot_beta = get("beta", m.biot_beta);
            m.rho_f = get("rho_f", m.rho_f);
            m.rho_s = get("rho_s", m.rho_s);
            m.lambda = get("lambda", m.lambda);
            m.shear = get("mu", m.shear);
            m.rho = acoustic ? m.rho : m.rho_p();
        }
        field.set(tag, m);
    }
    if (cfg.physics == "poroacoustic") {
        for (int t : cfg.poro_tags)
            if (!field.materials().contains(t))
                field.set(t, poroelastic_table_material());
        for (int t : cfg.acoustic_tags)
            if (!field.materials().contains(t))
                field.set(t, acoustic_table_material());
    }
    return field;
}

/// Dirichlet labels of a boundary table; all rectangle sides when the table is empty.
inline std::set<int> dirichlet_labels(const std::map<int, BoundaryConfig>& table)
{
    if (table.empty())
        return all_rectangle_sides;
    std::set<int> s;
    for (const auto& [label, b] : table)
        if (b.kind == BoundaryConfig::Kind::dirichlet)
            s.insert(label);
    return s;
}

struct RunResult
{
    std::optional<ErrorReport> report;
    std::vector<std::filesystem::path> files;
    std::vector<double> energy;
    std::size_t num_elements = 0;
    int degree = 0;
};

namespace detail {

inline std::string numbered(const std::string& stem, std::size_t i, const char* ext)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "_%04zu", i);
    return stem + buf + ext;
}

/// Writes one snapshot in every requested format.
inline void emit_snapshot(const FieldSnapshot& s, const OutputConfig& out, const std::filesystem::path& dir,
                          const std::string& stem, std::size_t index, RunResult& res)
{
    if (out.formats.contains("csv")) {
        const auto p = dir / numbered(stem, index, ".csv");
        write_csv(s, p);
        res.files.push_back(p);
    }
    if (out.formats.contains("vtk")) {
        const auto p = dir / numbered(stem, index, ".vtk");
        write_vtk(s, p);
        res.files.push_back(p);
    }
}

inline void emit_report(const ErrorReport& r, const std::filesystem::path& dir, RunResult& res)
{
    const auto p = dir / "errors.csv";
    write_csv(r, p);
    res.files.push_back(p);
    res.report = r;
}

inline void emit_energy(const std::vector<Snapshot>& traj, const std::vector<double>& e,
                        const std::filesystem::path& dir, RunResult& res)
{
    std::ostringstream os;
    csv::row(os, {"t", "energy"});
    for (std::size_t i = 0; i < e.size(); ++i)
        csv::row(os, {csv::number(traj[i].t), csv::number(e[i])});
    std::filesystem::create_directories(dir);
    const auto p = dir / "energy.csv";
    std::ofstream f(p, std::ios::binary);
    if (!(f << os.str()))
        throw Error("cannot write " + p.string());
    res.files.push_back(p);
    res.energy = e;
}

inline TimeGrid time_grid(const RunConfig& cfg)
{
    if (!cfg.time)
        throw ValidationError("/time: missing time block");
    return {cfg.time->dt, cfg.time->T, cfg.output.stride};
}

inline PenaltySpec penalty(const RunConfig& cfg) { return {cfg.c_alpha}; }

inline PoissonProblem poisson_problem(const RunConfig& cfg, std::shared_ptr<const PolyMesh> mesh)
{
    PoissonProblem p;
    p.mesh = std::move(mesh);
    p.degree = cfg.degree;
    p.materials = materials_from_config(cfg);
    p.f = cfg.source.empty() ? ScalarField{} : to_scalar(cfg.source[0]);
    p.g = cfg.exact.empty() ? ScalarField{} : to_scalar(cfg.exact[0]);
    for (const auto& [label, b] : cfg.boundary)
        if (b.kind == BoundaryConfig::Kind::dirichlet && !b.value.empty())
            p.g_by_label[label] = to_scalar(b.value[0]);
    p.dirichlet = dirichlet_labels(cfg.boundary);
    p.penalty = penalty(cfg);
    p.integration = cfg.integration == "subtessellation" ? Integration::subtessellation : Integration::quadrature_free;
    return p;
}

inline RunResult run_laplacian(const RunConfig& cfg, std::shared_ptr<const PolyMesh> mesh,
                               const std::filesystem::path& dir)
{
    const auto p = poisson_problem(cfg, mesh);
    const auto sol = solve_poisson(p);
    RunResult res;
    res.num_elements = mesh->num_elements();
    res.degree = cfg.degree;
    if (!cfg.exact.empty())
        emit_report(compute_errors(sol.space, sol.U, to_scalar(cfg.exact[0]), gradient_of(cfg.exact[0]), sol.mu,
                                   p.penalty, p.dirichlet),
                    dir, res);
    emit_snapshot(sample_field(sol.space, sol.U, {"u"}), cfg.output, dir, "solution", 0, res);
    return res;
}

inline RunResult run_heat(const RunConfig& cfg, std::shared_ptr<const PolyMesh> mesh, const std::filesystem::path& dir)
{
    const auto base = poisson_problem(cfg, mesh);
    HeatProblem p;
    p.mesh = mesh;
    p.degree = cfg.degree;
    p.materials = base.materials;
    p.f = base.f;
    p.g = base.g;
    p.g_by_label = base.g_by_label;
    p.dirichlet = base.dirichlet;
    p.penalty = base.penalty;
    p.theta = cfg.time->theta;
    p.time = time_grid(cfg);
    if (!cfg.initial_u.empty())
        p.u0 = to_scalar(cfg.initial_u[0]);
    else if (!cfg.exact.empty())
        p.u0 = to_scalar(cfg.exact[0]);
    RunResult res;
    res.num_elements = mesh->num_elements();
    res.degree = cfg.degree;
    std::optional<FeSpace> space;
    space.emplace(mesh, cfg.degree);
    std::size_t index = 0;
    const auto sol = solve_heat(p, [&](const Snapshot& s) {
        emit_snapshot(sample_field(*space, s.U, {"u"}, s.t), cfg.output, dir, "u", index++, res);
    });
    if (!cfg.exact.empty()) {
        const auto& last = sol.trajectory.back();
        emit_report(compute_errors(sol.space, last.U, to_scalar(cfg.exact[0]), gradient_of(cfg.exact[0]), sol.mu,
                                   p.penalty, p.dirichlet, last.t),
                    dir, res);
    }
    return res;
}

inline RunResult run_elastodynamics(const RunConfig& cfg, std::shared_ptr<const PolyMesh> mesh,
                                    const std::filesystem::path& dir)
{
    ElastodynamicsProblem p;
    p.mesh = mesh;
    p.degree = cfg.degree;
    p.materials = materials_from_config(cfg);
    if (!cfg.source.empty())
        p.f = to_vector(cfg.source);
    if (!cfg.exact.empty())
        p.g = to_vector(cfg.exact);
    for (const auto& [label, b] : cfg.boundary)
        if (b.kind == BoundaryConfig::Kind::dirichlet && !b.value.empty())
            p.g_by_label[label] = to_vector(b.value);
    p.dirichlet = dirichlet_labels(cfg.boundary);
    p.penalty = penalty(cfg);
    if (!cfg.initial_u.empty())
        p.u0 = to_vector(cfg.initial_u);
    else if (!cfg.exact.empty())
        p.u0 = to_vector(cfg.exact);
    if (!cfg.initial_v.empty())
        p.v0 = to_vector(cfg.initial_v);
    else if (!cfg.exact.empty()) {
        ExpressionList v{cfg.exact[0].derivative(Expression::Var::t), cfg.exact[1].derivative(Expression::Var::t)};
        p.v0 = to_vector(v);
    }
    for (const auto& s : cfg.point_sources) {
        PointSource ps;
        ps.position = s.position;
        if (s.time_function) {
            const Expression e = *s.time_function;
            ps.time_function = [e](double t) { return e(0.0, 0.0, t); };
        }
        p.sources.push_back(std::move(ps));
    }
    p.newmark = {cfg.time->beta, cfg.time->gamma};
    p.time = time_grid(cfg);

    RunResult res;
    res.num_elements = mesh->num_elements();
    res.degree = cfg.degree;
    const FeSpace space(mesh, cfg.degree);
    std::size_t index = 0;
    const auto sol = solve_elastodynamics(p, [&](const Snapshot& s) {
        emit_snapshot(sample_field(space, s.U, {"u_x", "u_y"}, s.t), cfg.output, dir, "u", index++, res);
    });
    emit_energy(sol.trajectory, energy_trace(sol.trajectory, sol.M, sol.A), dir, res);
    if (!cfg.exact.empty()) {
        const auto& last = sol.trajectory.back();
        emit_report(compute_errors_elastic(sol.space, last.U, to_vector(cfg.exact), gradient_of(cfg.exact), sol.coef,
                                           p.penalty, p.dirichlet, last.t),
                    dir, res);
    }
    return res;
}

inline RunResult run_poroacoustic(const RunConfig& cfg, std::shared_ptr<const PolyMesh> mesh,
                                  const std::filesystem::path& dir)
{
    PoroAcousticProblem p;
    p.mesh = mesh;
    p.degree = cfg.degree;
    p.materials = materials_from_config(cfg);
    p.poro_tags = {cfg.poro_tags.begin(), cfg.poro_tags.end()};
    p.acoustic_tags = {cfg.acoustic_tags.begin(), cfg.acoustic_tags.end()};
    p.penalty = penalty(cfg);
    for (const auto& [label, b] : cfg.poro_boundary)
        if (b.kind == BoundaryConfig::Kind::dirichlet)
            p.poro_dirichlet.insert(label);
    std::optional<PlaneWaveDirichlet> wave;
    std::map<int, ScalarField> by_label;
    for (const auto& [label, b] : cfg.boundary) {
        if (b.kind != BoundaryConfig::Kind::dirichlet)
            continue;
        p.acoustic_dirichlet.insert(label);
        if (b.plane_wave) {
            if (wave)
                throw ValidationError("/boundary: only one plane-wave label is supported");
            wave = plane_wave_dirichlet(*mesh, label, b.peak_frequency);
        } else if (!b.value.empty()) {
            by_label[label] = to_scalar(b.value[0]);
        }
    }
    if (wave || !by_label.empty()) {
        // Labels are not visible to a ScalarField, so resolve them by nearest boundary face.
        p.ga = [mesh, wave, by_label](const Point& x, double t) {
            int label = 0;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& f : mesh->faces) {
                if (!f.is_boundary())
                    continue;
                const Point mid = 0.5 * (mesh->vertices[static_cast<std::size_t>(f.v0)] +
                                         mesh->vertices[static_cast<std::size_t>(f.v1)]);
                const double d = (mid - x).squaredNorm();
                if (d < best) {
                    best = d;
                    label = f.label;
                }
            }
            if (wave && label == wave->label)
                return (*wave)(t);
            auto it = by_label.find(label);
            return it == by_label.end() ? 0.0 : it->second(x, t);
        };
    }
    if (!cfg.source.empty())
        p.fa = to_scalar(cfg.source[0]);
    p.newmark = {cfg.time->beta, cfg.time->gamma};
    p.time = time_grid(cfg);

    RunResult res;
    res.num_elements = mesh->num_elements();
    res.degree = cfg.degree;
    std::size_t index = 0;
    const auto sol = solve_poroelastoacoustic(p);
    const auto& S = sol.system;
    for (const auto& s : sol.trajectory) {
        if (S.space_p.num_elements() > 0)
            emit_snapshot(sample_field(S.space_p, s.U, {"u_p_x", "u_p_y", "u_f_x", "u_f_y"}, s.t,
                                       static_cast<int>(S.offset_up())),
                          cfg.output, dir, "poro", index, res);
        if (S.space_a.num_elements() > 0)
            emit_snapshot(sample_field(S.space_a, s.U, {"phi"}, s.t, static_cast<int>(S.offset_phi())), cfg.output,
                          dir, "acoustic", index, res);
        ++index;
    }
    emit_energy(sol.trajectory, energy_trace(sol.trajectory, S.M, S.A), dir, res);
    return res;
}

} // namespace detail

/// Runs the configured physics and writes its outputs into `dir`.
inline RunResult run_solve(const RunConfig& cfg, const std::filesystem::path& dir)
{
    const auto mesh = build_mesh(cfg.mesh);
    std::filesystem::create_directories(dir);
    if (cfg.physics == "laplacian")
        return detail::run_laplacian(cfg, mesh, dir);
    if (cfg.physics == "heat")
        return detail::run_heat(cfg, mesh, dir);
    if (cfg.physics == "elastodynamics")
        return detail::run_elastodynamics(cfg, mesh, dir);
    return detail::run_poroacoustic(cfg, mesh, dir);
}

/// h-study on Voronoi meshes of the configured domain with the configured element counts.
inline ConvergenceTable run_h_convergence(const RunConfig& cfg)
{
    if (cfg.physics != "laplacian")
        throw ValidationError("/physics: convergence studies are available for laplacian runs");
    if (cfg.exact.empty())
        throw ValidationError("/exact: convergence studies need an exact solution");
    std::vector<std::shared_ptr<const PolyMesh>> meshes;
    for (int n : cfg.convergence.meshes) {
        MeshConfig m = cfg.mesh;
        m.type = "voronoi";
        m.elements = n;
        meshes.push_back(build_mesh(m));
    }
    const auto p = detail::poisson_problem(cfg, meshes.front());
    return h_convergence(p, {to_scalar(cfg.exact[0]), gradient_of(cfg.exact[0])}, meshes, cfg.convergence.degree);
}

inline ConvergenceTable run_p_convergence(const RunConfig& cfg)
{
    if (cfg.physics != "laplacian")
        throw ValidationError("/physics: convergence studies are available for laplacian runs");
    if (cfg.exact.empty())
        throw ValidationError("/exact: convergence studies need an exact solution");
    MeshConfig m = cfg.mesh;
    if (m.type == "voronoi")
        m.elements = cfg.convergence.elements;
    const auto mesh = build_mesh(m);
    const auto p = detail::poisson_problem(cfg, mesh);
    return p_convergence(p, {to_scalar(cfg.exact[0]), gradient_of(cfg.exact[0])}, mesh, cfg.convergence.degrees);
}

} // namespace polydg
