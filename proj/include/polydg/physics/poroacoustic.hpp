#pragma once

#include <cmath>
#include <numbers>
#include <set>
#include <tuple>
#include <vector>

#include "../assembly.hpp"
#include "elastodynamics.hpp"
#include "poisson.hpp"
#include "time_integration.hpp"

namespace polydg {

/// g_a(t) = 2πf_p √e (t − 1/f_p) exp(−2(πf_p)²(t − 1/f_p)²), unit peak amplitude.
inline double plane_wave_pulse(double t, double fp)
{
    const double pi = std::numbers::pi;
    const double s = t - 1.0 / fp;
    return 2.0 * pi * fp * std::sqrt(std::numbers::e) * s * std::exp(-2.0 * (pi * fp) * (pi * fp) * s * s);
}

/// Time-dependent Dirichlet datum injecting the pulse on one boundary label.
struct PlaneWaveDirichlet
{
    int label = side::bottom;
    double peak_frequency = 10.0;

    double operator()(double t) const { return plane_wave_pulse(t, peak_frequency); }
};

inline PlaneWaveDirichlet plane_wave_dirichlet(const PolyMesh& mesh, int label, double fp = 10.0)
{
    if (!(fp > 0.0))
        throw ValidationError("peak frequency must be positive");
    if (!has_dirichlet_face(mesh, {label}))
        throw ValidationError("plane wave: no boundary face with label " + std::to_string(label));
    return {label, fp};
}

/// Parameters of the poroelastic cylinder test (SI units): Biot medium plus the
/// surrounding fluid.
inline Material poroelastic_table_material()
{
    Material m;
    m.rho_f = 1000.0;
    m.rho_s = 2690.0;
    m.viscosity = 1.05e-3;
    m.shear = 1.86e9;
    m.porosity = 0.38;
    m.tortuosity = 1.8;
    m.permeability = 2.79e-11;
    m.lambda = 1.2e8;
    m.biot_modulus = 5.34e9;
    m.biot_beta = 0.95;
    m.rho = m.rho_p();
    return m;
}

inline Material acoustic_table_material()
{
    Material m;
    m.rho_a = 1000.0;
    m.c = 1500.0;
    return m;
}

inline void validate_poroelastic(const Material& m)
{
    auto fail = [](const std::string& what) { throw ValidationError("invalid Biot parameters: " + what); };
    if (!(m.porosity > 0.0 && m.porosity < 1.0))
        fail("porosity must lie in (0,1)");
    if (!(m.tortuosity > 1.0))
        fail("tortuosity a must exceed 1");
    if (!(m.biot_beta > m.porosity && m.biot_beta <= 1.0))
        fail("beta must lie in (phi, 1]");
    if (!(m.biot_modulus > 0.0))
        fail("m must be positive");
    if (!(m.rho_f > 0.0) || !(m.rho_s > 0.0))
        fail("fluid and solid densities must be positive");
    if (!(m.viscosity >= 0.0) || !(m.permeability > 0.0))
        fail("viscosity must be non-negative and permeability positive");
    if (!(m.shear > 0.0) || !(m.lambda + m.shear > 0.0))
        fail("Lame parameters must satisfy mu > 0, lambda + mu > 0");
}

inline void validate_acoustic(const Material& m)
{
    if (!(m.rho_a > 0.0) || !(m.c > 0.0))
        throw ValidationError("acoustic material needs rho_a > 0 and c > 0");
}

/// Coupled Biot–acoustic wave problem. Unknowns (u_p, u_f) on the poroelastic
/// elements and the acoustic potential φ on the acoustic elements.
struct PoroAcousticProblem
{
    std::shared_ptr<const PolyMesh> mesh;
    int degree = 1;
    CoefficientField materials;
    std::set<int> poro_tags;
    std::set<int> acoustic_tags;
    std::set<int> poro_dirichlet;
    std::set<int> acoustic_dirichlet;
    PenaltySpec penalty;

    VectorField fp, ff, gp, gf;
    VectorField up0, vp0, uf0, vf0;
    ScalarField fa, ga;
    ScalarField phi0, psi0;

    NewmarkParams newmark;
    TimeGrid time;
};

/// Single-physics blocks plus the monolithic M, C, A of
///   [M_ρp M_ρf 0; M_ρf M_ρw 0; 0 0 M_a] Ẍ + [0 0 C^p; 0 B C^p; C^a C^a 0] Ẋ
///   + [A^e + A^p_β² A^p_β 0; A^p_β A^p 0; 0 0 A^a] X = F,   X = (U_p, U_f, Φ).
struct PoroAcousticSystem
{
    PoroAcousticSystem(SubMesh p, SubMesh a, FeSpace sp, FeSpace sa)
        : poro(std::move(p)), acoustic(std::move(a)), space_p(std::move(sp)), space_a(std::move(sa))
    {}

    SubMesh poro;
    SubMesh acoustic;
    FeSpace space_p;
    FeSpace space_a;
    std::vector<int> interface;

    FaceCoefficients elastic_coef; ///< Lamé μ, λ on poro elements
    FaceCoefficients pressure_coef; ///< m on poro elements
    std::vector<double> rho_a;      ///< per acoustic element
    Vector beta_dofs;               ///< Biot β per poro DOF
    FaceCoefficients acoustic_coef; ///< ρ_a on acoustic elements

    SparseMatrix M_rho_p, M_rho_f, M_rho_w, M_a;
    SparseMatrix B;
    SparseMatrix Cp, Ca;
    SparseMatrix Ae, Ap, Ap_beta, Ap_beta2, Aa;

    SparseMatrix M, C, A;

    Eigen::Index offset_up() const { return 0; }
    Eigen::Index offset_uf() const { return 2 * space_p.ndof(); }
    Eigen::Index offset_phi() const { return 4 * space_p.ndof(); }
    Eigen::Index size() const { return 4 * space_p.ndof() + space_a.ndof(); }
};

namespace detail {
/// Per-DOF copy of an element-wise value over a component-major vector space.
inline Vector dof_values(const FeSpace& space, std::span<const double> per_element, int ncomp)
{
    Vector d(static_cast<Eigen::Index>(ncomp) * space.ndof());
    for (int c = 0; c < ncomp; ++c)
        for (std::size_t k = 0; k < space.num_elements(); ++k)
            d.segment(c * space.ndof() + space.offset(k), space.nbases(k)).setConstant(per_element[k]);
    return d;
}

inline SparseMatrix compose(Eigen::Index n, const std::vector<std::tuple<Eigen::Index, Eigen::Index, const SparseMatrix*>>& blocks)
{
    TripletBuilder out(n, n);
    for (const auto& [r, c, m] : blocks)
        add_sparse_block(out, r, c, *m);
    return out.seal();
}
} // namespace detail

inline PoroAcousticSystem assemble_poroacoustic(const PoroAcousticProblem& p)
{
    if (!p.mesh)
        throw ValidationError("no mesh");
    for (int t : p.poro_tags)
        if (p.acoustic_tags.count(t))
            throw ValidationError("tag " + std::to_string(t) + " is both poroelastic and acoustic");
    for (int tag : p.mesh->element_tag) {
        if (p.poro_tags.count(tag))
            validate_poroelastic(p.materials.at(tag));
        else if (p.acoustic_tags.count(tag))
            validate_acoustic(p.materials.at(tag));
        else
            throw ValidationError("element tag " + std::to_string(tag) + " is neither poroelastic nor acoustic");
    }
    auto in_p = [&](int t) { return p.poro_tags.count(t) > 0; };
    auto in_a = [&](int t) { return p.acoustic_tags.count(t) > 0; };

    SubMesh poro = extract_submesh(*p.mesh, in_p);
    SubMesh acoustic = extract_submesh(*p.mesh, in_a);
    FeSpace sp(poro.mesh, p.degree);
    FeSpace sa(acoustic.mesh, p.degree);
    PoroAcousticSystem s(std::move(poro), std::move(acoustic), std::move(sp), std::move(sa));
    s.interface = interface_faces(*p.mesh, in_p, in_a);

    const auto& pm = *s.poro.mesh;
    const auto& am = *s.acoustic.mesh;
    const auto& mat = p.materials;
    auto rho_p = mat.per_element(pm, [](const Material& m) { return m.rho_p(); });
    auto rho_f = mat.per_element(pm, &Material::rho_f);
    auto rho_w = mat.per_element(pm, [](const Material& m) { return m.rho_w(); });
    auto damping = mat.per_element(pm, [](const Material& m) { return m.viscosity / m.permeability; });
    auto beta = mat.per_element(pm, &Material::biot_beta);
    s.elastic_coef = {mat.per_element(pm, &Material::shear), mat.per_element(pm, &Material::lambda)};
    s.pressure_coef = {mat.per_element(pm, &Material::biot_modulus), {}};
    s.rho_a = mat.per_element(am, &Material::rho_a);
    s.acoustic_coef = {s.rho_a, {}};
    auto acoustic_mass = mat.per_element(am, [](const Material& m) { return m.rho_a / (m.c * m.c); });

    const auto& sp_ = s.space_p;
    const auto& sa_ = s.space_a;
    s.M_rho_p = block_diagonal(assemble_volume_qf(sp_, VolumeForm::mass, rho_p), 2);
    s.M_rho_f = block_diagonal(assemble_volume_qf(sp_, VolumeForm::mass, rho_f), 2);
    s.M_rho_w = block_diagonal(assemble_volume_qf(sp_, VolumeForm::mass, rho_w), 2);
    s.B = block_diagonal(assemble_volume_qf(sp_, VolumeForm::mass, damping), 2);
    s.M_a = assemble_volume_qf(sa_, VolumeForm::mass, acoustic_mass);

    {
        const auto V = assemble_volume_qf(sp_, VolumeForm::elastic, s.elastic_coef.primary, s.elastic_coef.lambda);
        const auto F = assemble_faces(sp_, FacePhysics::elastic, s.elastic_coef, p.penalty, p.poro_dirichlet);
        s.Ae = combine_dg_operator(V, F.IA, F.SA);
    }
    {
        const auto V = assemble_volume_qf(sp_, VolumeForm::divdiv, s.pressure_coef.primary);
        const auto F = assemble_faces(sp_, FacePhysics::poro_pressure, s.pressure_coef, p.penalty, p.poro_dirichlet);
        s.Ap = combine_dg_operator(V, F.IA, F.SA);
    }
    {
        const auto V = assemble_volume_qf(sa_, VolumeForm::stiffness, s.rho_a);
        const auto F = assemble_faces(sa_, FacePhysics::scalar, s.acoustic_coef, p.penalty, p.acoustic_dirichlet);
        s.Aa = combine_dg_operator(V, F.IA, F.SA);
    }
    // A^p(βu + w, βv + z): β is element-wise, so it acts as a diagonal DOF scaling.
    s.beta_dofs = detail::dof_values(sp_, beta, 2);
    const SparseMatrix D = diagonal_matrix(s.beta_dofs);
    s.Ap_beta = s.Ap * D;
    s.Ap_beta2 = D * s.Ap * D;
    const SparseMatrix Ap_beta_t = D * s.Ap;

    auto coupling = interface_coupling_matrices(*p.mesh, s.interface, s.poro, sp_, s.acoustic, sa_, s.rho_a);
    s.Cp = std::move(coupling.Cp);
    s.Ca = std::move(coupling.Ca);

    const Eigen::Index n = s.size(), up = s.offset_up(), uf = s.offset_uf(), ph = s.offset_phi();
    s.M = detail::compose(n, {{up, up, &s.M_rho_p}, {up, uf, &s.M_rho_f}, {uf, up, &s.M_rho_f},
                              {uf, uf, &s.M_rho_w}, {ph, ph, &s.M_a}});
    s.C = detail::compose(n, {{up, ph, &s.Cp}, {uf, uf, &s.B}, {uf, ph, &s.Cp}, {ph, up, &s.Ca}, {ph, uf, &s.Ca}});
    const SparseMatrix Aee = s.Ae + s.Ap_beta2;
    s.A = detail::compose(n, {{up, up, &Aee}, {up, uf, &Ap_beta_t}, {uf, up, &s.Ap_beta}, {uf, uf, &s.Ap},
                              {ph, ph, &s.Aa}});
    return s;
}

struct PoroAcousticSolution
{
    PoroAcousticSystem system;
    std::vector<Snapshot> trajectory;
};

/// Right-hand side of the coupled system at time t.
inline Vector poroacoustic_load(const PoroAcousticSystem& s, const PoroAcousticProblem& p, double t)
{
    Vector F = Vector::Zero(s.size());
    const auto& sp = s.space_p;
    const Eigen::Index np = 2 * sp.ndof();
    if (p.fp || p.gp)
        F.segment(s.offset_up(), np) += assemble_rhs(sp, FacePhysics::elastic, s.elastic_coef, p.penalty,
                                                     p.poro_dirichlet, vector_rhs_data(p.fp, p.gp), t);
    if (p.ff)
        F.segment(s.offset_uf(), np) += assemble_volume_load(sp, 2, vector_rhs_data(p.ff, {}).source, t);
    if (p.gp || p.gf) {
        // Weak data of A^p(βu_p + u_f, βv + z): the datum is βg_p + g_f, and β is
        // constant on each boundary face's owner, so it acts as a DOF scaling.
        auto pressure_load = [&](const VectorField& g) {
            return assemble_boundary_load(sp, FacePhysics::poro_pressure, s.pressure_coef, p.penalty,
                                          p.poro_dirichlet, vector_rhs_data({}, g).dirichlet, t);
        };
        Vector L = Vector::Zero(np);
        if (p.gp)
            L += s.beta_dofs.cwiseProduct(pressure_load(p.gp));
        if (p.gf)
            L += pressure_load(p.gf);
        F.segment(s.offset_uf(), np) += L;
        F.segment(s.offset_up(), np) += s.beta_dofs.cwiseProduct(L);
    }
    if (p.fa || p.ga) {
        const auto& sa = s.space_a;
        Vector Fa = Vector::Zero(sa.ndof());
        if (p.ga)
            Fa += assemble_boundary_load(sa, FacePhysics::scalar, s.acoustic_coef, p.penalty, p.acoustic_dirichlet,
                                         scalar_rhs_data({}, p.ga).dirichlet, t);
        if (p.fa) {
            // The acoustic equation is multiplied through by ρ_a.
            Vector Fs = assemble_volume_load(sa, 1, scalar_rhs_data(p.fa, {}).source, t);
            for (std::size_t k = 0; k < sa.num_elements(); ++k)
                Fs.segment(sa.offset(k), sa.nbases(k)) *= s.rho_a[k];
            Fa += Fs;
        }
        F.segment(s.offset_phi(), sa.ndof()) += Fa;
    }
    return F;
}

inline PoroAcousticSolution solve_poroelastoacoustic(const PoroAcousticProblem& p,
                                                     const SnapshotObserver& observer = {})
{
    PoroAcousticSolution out{assemble_poroacoustic(p), {}};
    const auto& s = out.system;
    Vector U0 = Vector::Zero(s.size()), V0 = Vector::Zero(s.size());
    const Eigen::Index np = 2 * s.space_p.ndof();
    if (p.up0) U0.segment(s.offset_up(), np) = l2_project(s.space_p, p.up0);
    if (p.uf0) U0.segment(s.offset_uf(), np) = l2_project(s.space_p, p.uf0);
    if (p.vp0) V0.segment(s.offset_up(), np) = l2_project(s.space_p, p.vp0);
    if (p.vf0) V0.segment(s.offset_uf(), np) = l2_project(s.space_p, p.vf0);
    if (p.phi0) U0.segment(s.offset_phi(), s.space_a.ndof()) = l2_project(s.space_a, p.phi0);
    if (p.psi0) V0.segment(s.offset_phi(), s.space_a.ndof()) = l2_project(s.space_a, p.psi0);

    SecondOrderSystem ode{s.M, s.C, s.A, [&](double t) { return poroacoustic_load(s, p, t); }, false};
    out.trajectory = newmark(ode, std::move(U0), std::move(V0), p.newmark, p.time, observer);
    return out;
}

} // namespace polydg
