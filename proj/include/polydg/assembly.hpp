#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "basis.hpp"
#include "error.hpp"
#include "mesh.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "sparse.hpp"

namespace polydg {

using ScalarField = std::function<double(const Point&, double)>;
using VectorField = std::function<Eigen::Vector2d(const Point&, double)>;

/// Per-element physical parameters, keyed by element tag. Fields a physics does not
/// use are ignored.
struct Material
{
    double mu = 1.0;  ///< diffusion coefficient
    double rho = 1.0; ///< mass density
    double lambda = 0.0;
    double shear = 0.0; ///< Lamé μ

    // Biot poroelasticity
    double porosity = 0.0;
    double tortuosity = 0.0;
    double permeability = 0.0;
    double viscosity = 0.0;
    double biot_modulus = 0.0; ///< m
    double biot_beta = 0.0;    ///< Biot-Willis β
    double rho_f = 0.0;
    double rho_s = 0.0;

    // acoustics
    double rho_a = 0.0;
    double c = 0.0;

    double rho_p() const { return porosity * rho_f + (1.0 - porosity) * rho_s; }
    double rho_w() const { return tortuosity / porosity * rho_f; }
    double p_wave_speed() const { return std::sqrt((lambda + 2.0 * shear) / rho); }
    double s_wave_speed() const { return std::sqrt(shear / rho); }

    /// Lamé parameters from density and wave speeds: μ = ρc_S², λ = ρ(c_P² − 2c_S²).
    static Material from_wave_speeds(double rho, double cs, double cp)
    {
        Material m;
        m.rho = rho;
        m.shear = rho * cs * cs;
        m.lambda = rho * (cp * cp - 2.0 * cs * cs);
        return m;
    }
};

class CoefficientField
{
public:
    CoefficientField() = default;
    CoefficientField(std::map<int, Material> by_tag) : by_tag_(std::move(by_tag)) {}

    void set(int tag, const Material& m) { by_tag_[tag] = m; }

    const Material& at(int tag) const
    {
        auto it = by_tag_.find(tag);
        if (it == by_tag_.end())
            throw ValidationError("no material for element tag " + std::to_string(tag));
        return it->second;
    }

    const std::map<int, Material>& materials() const { return by_tag_; }

    /// Element-wise values of one parameter.
    template <typename Getter>
    std::vector<double> per_element(const PolyMesh& mesh, Getter get) const
    {
        std::vector<double> v(mesh.num_elements());
        for (std::size_t k = 0; k < v.size(); ++k)
            v[k] = get(at(mesh.element_tag[k]));
        return v;
    }

    std::vector<double> per_element(const PolyMesh& mesh, double Material::*field) const
    {
        return per_element(mesh, [field](const Material& m) { return m.*field; });
    }

private:
    std::map<int, Material> by_tag_;
};

/// Uniform coefficient vector.
inline std::vector<double> constant_field(const PolyMesh& mesh, double value)
{
    return std::vector<double>(mesh.num_elements(), value);
}

struct PenaltySpec
{
    double c_alpha = 10.0;
};

enum class VolumeForm { mass, stiffness, divdiv, elastic };
enum class FacePhysics { scalar, elastic, poro_pressure };
enum class Integration { quadrature_free, subtessellation };

inline int components(VolumeForm f) { return (f == VolumeForm::divdiv || f == VolumeForm::elastic) ? 2 : 1; }
inline int components(FacePhysics p) { return p == FacePhysics::scalar ? 1 : 2; }

/// C_α · c · ℓ²/h for one element. Degree 0 is penalised like degree 1 so that the
/// penalty stays positive.
inline double penalty_value(double c_alpha, double coefficient, int degree, double h)
{
    if (!(h > 0.0))
        throw ValidationError("penalty: degenerate element with zero diameter");
    const double l = std::max(degree, 1);
    return c_alpha * coefficient * l * l / h;
}

/// Interior-penalty coefficient of a face: the max over both neighbours on internal
/// faces, the one-sided value on boundary faces.
inline double penalty_coefficient(const FeSpace& space, const Face& face, std::span<const double> coefficient,
                                  double c_alpha)
{
    const auto& mesh = space.mesh();
    auto side = [&](int k) {
        const auto e = static_cast<std::size_t>(k);
        return penalty_value(c_alpha, coefficient[e], space.degree(e), mesh.geometry[e].diameter);
    };
    double a = side(face.owner);
    if (!face.is_boundary())
        a = std::max(a, side(face.neighbor));
    if (!(a > 0.0) || !std::isfinite(a))
        throw ValidationError("face penalty is undefined or non-positive");
    return a;
}

/// Element Gram matrices of values and physical gradients:
/// vv(i,j) = ∫φ_iφ_j, xx = ∫∂xφ_i∂xφ_j, yy = ∫∂yφ_i∂yφ_j, xy = ∫∂xφ_i∂yφ_j.
struct ElementGram
{
    Eigen::MatrixXd vv, xx, yy, xy;
};

/// Quadrature-free Gram matrices: reference monomial expansions contracted with the
/// polygon's monomial integrals, then scaled by the bounding-box map.
inline ElementGram element_gram_qf(const FeSpace& space, std::size_t k, bool gradients)
{
    const int ell = space.degree(k);
    const int s = ell + 1;
    const auto& exp = monomial_expansion(ell);
    const auto& mesh = space.mesh();

    std::vector<Point> ref;
    ref.reserve(mesh.elements[k].size());
    for (int v : mesh.elements[k])
        ref.push_back(space.to_reference(k, mesh.vertices[static_cast<std::size_t>(v)]));
    const auto I = monomial_polygon_integrals(ref, 2 * ell, 2 * ell, false);

    Eigen::MatrixXd K(s * s, s * s);
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b)
            for (int c = 0; c < s; ++c)
                for (int d = 0; d < s; ++d)
                    K(a * s + b, c * s + d) = I(a + c, b + d);

    const auto& bb = space.bbox(k);
    const double sk = space.scale(k);
    const double factor = sk * sk * bb.width() * bb.height() / 4.0;
    const Point jac = space.jacobian(k);
    ElementGram g;
    g.vv = factor * (exp.values * K * exp.values.transpose());
    if (gradients) {
        const Eigen::MatrixXd Kx = K * exp.dxi.transpose();
        const Eigen::MatrixXd Ky = K * exp.deta.transpose();
        g.xx = (factor * jac.x() * jac.x()) * (exp.dxi * Kx);
        g.yy = (factor * jac.y() * jac.y()) * (exp.deta * Ky);
        g.xy = (factor * jac.x() * jac.y()) * (exp.dxi * Ky);
    }
    return g;
}

/// Sub-tessellation Gram matrices (triangle fan or ear clipping plus the (ℓ+1)²-point
/// triangle rule).
inline ElementGram element_gram_st(const FeSpace& space, std::size_t k, bool gradients)
{
    const auto rule = polygon_rule(space.mesh().polygon(k), space.degree(k));
    const auto t = eval_basis(space, k, rule.nodes);
    const Eigen::Map<const Eigen::VectorXd> w(rule.weights.data(), static_cast<Eigen::Index>(rule.weights.size()));
    ElementGram g;
    g.vv = t.values.transpose() * w.asDiagonal() * t.values;
    if (gradients) {
        g.xx = t.dx.transpose() * w.asDiagonal() * t.dx;
        g.yy = t.dy.transpose() * w.asDiagonal() * t.dy;
        g.xy = t.dx.transpose() * w.asDiagonal() * t.dy;
    }
    return g;
}

/// Local matrix of a volume form; vector forms are laid out component-major,
/// [(x-test, x-trial), (x, y); (y, x), (y, y)] blocks of size nbases.
inline Eigen::MatrixXd local_volume_matrix(const ElementGram& g, VolumeForm form, double c1, double c2)
{
    switch (form) {
    case VolumeForm::mass:
        return c1 * g.vv;
    case VolumeForm::stiffness:
        return c1 * (g.xx + g.yy);
    case VolumeForm::divdiv: {
        const auto n = g.vv.rows();
        Eigen::MatrixXd m(2 * n, 2 * n);
        m.topLeftCorner(n, n) = c1 * g.xx;
        m.topRightCorner(n, n) = c1 * g.xy;
        m.bottomLeftCorner(n, n) = c1 * g.xy.transpose();
        m.bottomRightCorner(n, n) = c1 * g.yy;
        return m;
    }
    case VolumeForm::elastic: {
        // c1 = Lamé μ, c2 = λ; (σ(u), ε(v)) with σ = 2με + λ tr(ε) I.
        const double mu = c1, lambda = c2;
        const auto n = g.vv.rows();
        const Eigen::MatrixXd yx = g.xy.transpose();
        Eigen::MatrixXd m(2 * n, 2 * n);
        m.topLeftCorner(n, n) = (2.0 * mu + lambda) * g.xx + mu * g.yy;
        m.topRightCorner(n, n) = lambda * g.xy + mu * yx;
        m.bottomLeftCorner(n, n) = lambda * yx + mu * g.xy;
        m.bottomRightCorner(n, n) = (2.0 * mu + lambda) * g.yy + mu * g.xx;
        return m;
    }
    }
    throw ValidationError("unknown volume form");
}

namespace detail {

/// Deposits a component-major local matrix at an element's DOF range.
inline void deposit_local(TripletBuilder& out, const FeSpace& space, std::size_t k, int ncomp,
                          const Eigen::MatrixXd& local)
{
    const int nb = space.nbases(k);
    const int off = space.offset(k);
    const int ndof = space.ndof();
    for (int d = 0; d < ncomp; ++d)
        for (int c = 0; c < ncomp; ++c)
            out.add_block(d * ndof + off, c * ndof + off, local.block(d * nb, c * nb, nb, nb));
}

inline void check_coefficient(std::span<const double> c, const FeSpace& space, const char* what)
{
    if (c.size() != space.num_elements())
        throw ValidationError(std::string(what) + ": coefficient size does not match element count");
}

} // namespace detail

/// Global volume matrix Σ_κ of a form; coefficients are element-wise constants
/// (c1: μ for mass/stiffness/divdiv and Lamé μ for elastic; c2: λ for elastic).
inline SparseMatrix assemble_volume(const FeSpace& space, VolumeForm form, std::span<const double> c1,
                                    std::span<const double> c2 = {},
                                    Integration method = Integration::quadrature_free)
{
    detail::check_coefficient(c1, space, "assemble_volume");
    if (form == VolumeForm::elastic)
        detail::check_coefficient(c2, space, "assemble_volume");
    const std::size_t nel = space.num_elements();
    const int ncomp = components(form);
    const bool grads = form != VolumeForm::mass;

    std::vector<Eigen::MatrixXd> local(nel);
    parallel_for(nel, [&](std::size_t k) {
        const auto g = method == Integration::quadrature_free ? element_gram_qf(space, k, grads)
                                                              : element_gram_st(space, k, grads);
        local[k] = local_volume_matrix(g, form, c1[k], form == VolumeForm::elastic ? c2[k] : 0.0);
    });

    const Eigen::Index n = static_cast<Eigen::Index>(ncomp) * space.ndof();
    TripletBuilder out(n, n);
    std::size_t nnz = 0;
    for (const auto& m : local)
        nnz += static_cast<std::size_t>(m.size());
    out.reserve(nnz);
    for (std::size_t k = 0; k < nel; ++k)
        detail::deposit_local(out, space, k, ncomp, local[k]);
    return out.seal();
}

inline SparseMatrix assemble_volume_qf(const FeSpace& space, VolumeForm form, std::span<const double> c1,
                                       std::span<const double> c2 = {})
{
    return assemble_volume(space, form, c1, c2, Integration::quadrature_free);
}

inline SparseMatrix assemble_volume_st(const FeSpace& space, VolumeForm form, std::span<const double> c1,
                                       std::span<const double> c2 = {})
{
    return assemble_volume(space, form, c1, c2, Integration::subtessellation);
}

/// Block-diagonal copy of a scalar matrix for each of `ncomp` components.
inline SparseMatrix block_diagonal(const SparseMatrix& m, int ncomp)
{
    TripletBuilder out(ncomp * m.rows(), ncomp * m.cols());
    for (int c = 0; c < ncomp; ++c)
        add_sparse_block(out, c * m.rows(), c * m.cols(), m);
    return out.seal();
}

/// Element-wise constant coefficients for the face terms of one physics.
struct FaceCoefficients
{
    std::vector<double> primary; ///< μ (scalar), Lamé μ (elastic), m (poro-pressure)
    std::vector<double> lambda;  ///< Lamé λ (elastic only)
};

struct FaceOperators
{
    SparseMatrix IA; ///< consistency terms (⟨flux(u)⟩, [v])
    SparseMatrix SA; ///< penalty terms (α_e [u], [v])
};

namespace detail {

/// Gauss points and weights (including |e|/2) on a face.
struct FaceQuadrature
{
    std::vector<Point> points;
    Eigen::VectorXd weights;
};

inline FaceQuadrature face_quadrature(const PolyMesh& mesh, const Face& f, int npoints)
{
    const auto& gl = gauss_legendre_1d(npoints);
    const Point a = mesh.vertices[static_cast<std::size_t>(f.v0)];
    const Point b = mesh.vertices[static_cast<std::size_t>(f.v1)];
    FaceQuadrature q;
    q.weights.resize(npoints);
    for (int p = 0; p < npoints; ++p) {
        const double t = 0.5 * (1.0 + gl.nodes[static_cast<std::size_t>(p)]);
        q.points.push_back(a + t * (b - a));
        q.weights(p) = 0.5 * f.length * gl.weights[static_cast<std::size_t>(p)];
    }
    return q;
}

inline int face_points(const FeSpace& space, const Face& f)
{
    int ell = space.degree(static_cast<std::size_t>(f.owner));
    if (!f.is_boundary())
        ell = std::max(ell, space.degree(static_cast<std::size_t>(f.neighbor)));
    return ell + 2;
}

inline double penalty_coefficient_value(const Material& m, FacePhysics p);

/// Traces and fluxes of one side's basis on the face points, as (points·J) × (nb·ncomp)
/// matrices, where J is the number of jump components (1 scalar, 2 elastic, 1 poro).
struct SideTables
{
    Eigen::MatrixXd trace;
    Eigen::MatrixXd flux;
};

inline int jump_components(FacePhysics p) { return p == FacePhysics::elastic ? 2 : 1; }

inline SideTables side_tables(const FeSpace& space, std::size_t k, const FaceQuadrature& q, const Point& n,
                              FacePhysics physics, double c1, double c2)
{
    const auto t = eval_basis(space, k, q.points);
    const auto np = static_cast<Eigen::Index>(q.points.size());
    const Eigen::Index nb = t.values.cols();
    SideTables s;
    switch (physics) {
    case FacePhysics::scalar:
        s.trace = t.values;
        s.flux = c1 * (n.x() * t.dx + n.y() * t.dy);
        break;
    case FacePhysics::elastic: {
        // Row (p, J), column (i, c): trace φ_i δ_Jc; traction σ(φ_i e_c) n in direction J.
        const double mu = c1, lambda = c2;
        s.trace = Eigen::MatrixXd::Zero(2 * np, 2 * nb);
        s.flux = Eigen::MatrixXd::Zero(2 * np, 2 * nb);
        const Eigen::MatrixXd dn = n.x() * t.dx + n.y() * t.dy;
        for (Eigen::Index p = 0; p < np; ++p)
            for (Eigen::Index i = 0; i < nb; ++i) {
                const double grad[2] = {t.dx(p, i), t.dy(p, i)};
                const double nn[2] = {n.x(), n.y()};
                for (int J = 0; J < 2; ++J)
                    for (int c = 0; c < 2; ++c) {
                        const Eigen::Index row = 2 * p + J, col = c * nb + i;
                        if (J == c)
                            s.trace(row, col) = t.values(p, i);
                        s.flux(row, col) = lambda * grad[c] * nn[J] +
                                           mu * ((J == c ? dn(p, i) : 0.0) + grad[J] * nn[c]);
                    }
            }
        break;
    }
    case FacePhysics::poro_pressure: {
        // Normal-jump trace φ_i n_c and pressure-like flux m ∂_c φ_i.
        s.trace.resize(np, 2 * nb);
        s.flux.resize(np, 2 * nb);
        s.trace.leftCols(nb) = n.x() * t.values;
        s.trace.rightCols(nb) = n.y() * t.values;
        s.flux.leftCols(nb) = c1 * t.dx;
        s.flux.rightCols(nb) = c1 * t.dy;
        break;
    }
    }
    return s;
}

inline Eigen::VectorXd expand_weights(const Eigen::VectorXd& w, int J)
{
    Eigen::VectorXd out(w.size() * J);
    for (Eigen::Index p = 0; p < w.size(); ++p)
        for (int j = 0; j < J; ++j)
            out(p * J + j) = w(p);
    return out;
}

inline double face_penalty(const FeSpace& space, const Face& f, FacePhysics physics, const FaceCoefficients& c,
                           double c_alpha)
{
    if (physics == FacePhysics::elastic) {
        std::vector<double> pw(space.num_elements(), 0.0);
        // Only the adjacent entries are read.
        pw[static_cast<std::size_t>(f.owner)] =
            c.lambda[static_cast<std::size_t>(f.owner)] + 2.0 * c.primary[static_cast<std::size_t>(f.owner)];
        if (!f.is_boundary())
            pw[static_cast<std::size_t>(f.neighbor)] = c.lambda[static_cast<std::size_t>(f.neighbor)] +
                                                       2.0 * c.primary[static_cast<std::size_t>(f.neighbor)];
        return penalty_coefficient(space, f, pw, c_alpha);
    }
    return penalty_coefficient(space, f, c.primary, c_alpha);
}

inline void validate_face_coefficients(const FeSpace& space, FacePhysics physics, const FaceCoefficients& c)
{
    check_coefficient(c.primary, space, "assemble_faces");
    if (physics == FacePhysics::elastic)
        check_coefficient(c.lambda, space, "assemble_faces");
}

inline bool face_active(const Face& f, const std::set<int>& dirichlet)
{
    return !f.is_boundary() || dirichlet.count(f.label) > 0;
}

} // namespace detail

/// Interior-penalty face matrices. For every internal face and every Dirichlet
/// boundary face (weak imposition), with [v] = v⁺ − v⁻ along n⁺ and ⟨·⟩ the average:
///   IA(i, j) = (⟨flux(φ_j)⟩, [φ_i])_e,   SA(i, j) = α_e ([φ_j], [φ_i])_e.
/// Boundary faces use the one-sided flux and trace. Neumann and interface faces
/// contribute nothing.
inline FaceOperators assemble_faces(const FeSpace& space, FacePhysics physics, const FaceCoefficients& coef,
                                    const PenaltySpec& penalty, const std::set<int>& dirichlet_labels)
{
    detail::validate_face_coefficients(space, physics, coef);
    const auto& mesh = space.mesh();
    const int ncomp = components(physics);
    const int J = detail::jump_components(physics);
    const std::size_t nf = mesh.faces.size();

    struct Contribution
    {
        // Blocks indexed [test side][trial side]; side 0 = owner, 1 = neighbour.
        Eigen::MatrixXd ia[2][2];
        Eigen::MatrixXd sa[2][2];
        bool active = false;
    };
    std::vector<Contribution> contrib(nf);

    parallel_for(nf, [&](std::size_t fi) {
        const Face& f = mesh.faces[fi];
        if (!detail::face_active(f, dirichlet_labels))
            return;
        const double alpha = detail::face_penalty(space, f, physics, coef, penalty.c_alpha);
        const auto q = detail::face_quadrature(mesh, f, detail::face_points(space, f));
        const Eigen::VectorXd w = detail::expand_weights(q.weights, J);
        const int nsides = f.is_boundary() ? 1 : 2;
        const double avg = f.is_boundary() ? 1.0 : 0.5;
        detail::SideTables side[2];
        const int elem[2] = {f.owner, f.neighbor};
        for (int s = 0; s < nsides; ++s) {
            const auto k = static_cast<std::size_t>(elem[s]);
            const double c2 = physics == FacePhysics::elastic ? coef.lambda[k] : 0.0;
            side[s] = detail::side_tables(space, k, q, f.normal, physics, coef.primary[k], c2);
        }
        auto& out = contrib[fi];
        out.active = true;
        for (int ts = 0; ts < nsides; ++ts) {
            const double sign_test = ts == 0 ? 1.0 : -1.0;
            const Eigen::MatrixXd tw = side[ts].trace.transpose() * w.asDiagonal();
            for (int us = 0; us < nsides; ++us) {
                const double sign_trial = us == 0 ? 1.0 : -1.0;
                out.ia[ts][us] = (avg * sign_test) * (tw * side[us].flux);
                out.sa[ts][us] = (alpha * sign_test * sign_trial) * (tw * side[us].trace);
            }
        }
    });

    const Eigen::Index n = static_cast<Eigen::Index>(ncomp) * space.ndof();
    TripletBuilder ia(n, n), sa(n, n);
    const int ndof = space.ndof();
    for (std::size_t fi = 0; fi < nf; ++fi) {
        const auto& c = contrib[fi];
        if (!c.active)
            continue;
        const Face& f = mesh.faces[fi];
        const int elem[2] = {f.owner, f.neighbor};
        const int nsides = f.is_boundary() ? 1 : 2;
        for (int ts = 0; ts < nsides; ++ts)
            for (int us = 0; us < nsides; ++us) {
                const auto kt = static_cast<std::size_t>(elem[ts]);
                const auto ku = static_cast<std::size_t>(elem[us]);
                const int nbt = space.nbases(kt), nbu = space.nbases(ku);
                for (int d = 0; d < ncomp; ++d)
                    for (int cc = 0; cc < ncomp; ++cc) {
                        const Eigen::Index r0 = d * ndof + space.offset(kt);
                        const Eigen::Index c0 = cc * ndof + space.offset(ku);
                        ia.add_block(r0, c0, c.ia[ts][us].block(d * nbt, cc * nbu, nbt, nbu));
                        sa.add_block(r0, c0, c.sa[ts][us].block(d * nbt, cc * nbu, nbt, nbu));
                    }
            }
    }
    return {ia.seal(), sa.seal()};
}

/// A_dG = V − IA − IAᵀ + SA. With `symmetrize`, round-off asymmetry is removed by
/// averaging with the transpose.
inline SparseMatrix combine_dg_operator(const SparseMatrix& V, const SparseMatrix& IA, const SparseMatrix& SA,
                                        bool symmetrize = true)
{
    if (V.rows() != IA.rows() || V.cols() != IA.cols() || V.rows() != SA.rows() || V.cols() != SA.cols() ||
        V.rows() != V.cols())
        throw ValidationError("combine_dg_operator: dimension mismatch");
    SparseMatrix A = V - IA - SparseMatrix(IA.transpose()) + SA;
    if (symmetrize)
        A = 0.5 * (A + SparseMatrix(A.transpose()));
    A.prune(0.0);
    A.makeCompressed();
    return A;
}

/// Dirichlet datum: writes `ncomp` values at (x, t) on a face with the given label.
using BoundaryDatum = std::function<void(const Point&, double, int, double*)>;

/// Right-hand side data for assemble_rhs. Either member may be empty (zero data).
struct RhsData
{
    std::function<void(const Point&, double, double*)> source;
    BoundaryDatum dirichlet;
};

/// `by_label` entries override `g` on faces with that label.
inline RhsData scalar_rhs_data(ScalarField f, ScalarField g, std::map<int, ScalarField> by_label = {})
{
    RhsData d;
    if (f)
        d.source = [f](const Point& x, double t, double* out) { out[0] = f(x, t); };
    if (g || !by_label.empty())
        d.dirichlet = [g, by_label](const Point& x, double t, int label, double* out) {
            auto it = by_label.find(label);
            const ScalarField& h = it != by_label.end() ? it->second : g;
            out[0] = h ? h(x, t) : 0.0;
        };
    return d;
}

inline RhsData vector_rhs_data(VectorField f, VectorField g, std::map<int, VectorField> by_label = {})
{
    RhsData d;
    if (f)
        d.source = [f](const Point& x, double t, double* out) {
            const auto v = f(x, t);
            out[0] = v.x();
            out[1] = v.y();
        };
    if (g || !by_label.empty())
        d.dirichlet = [g, by_label](const Point& x, double t, int label, double* out) {
            auto it = by_label.find(label);
            const VectorField& h = it != by_label.end() ? it->second : g;
            const Eigen::Vector2d v = h ? h(x, t) : Eigen::Vector2d::Zero();
            out[0] = v.x();
            out[1] = v.y();
        };
    return d;
}

/// Volume load Σ_κ (f, v)_κ by sub-tessellation quadrature with (ℓ+1)² points per
/// sub-triangle.
inline Vector assemble_volume_load(const FeSpace& space, int ncomp,
                                   const std::function<void(const Point&, double, double*)>& f, double t)
{
    const int ndof = space.ndof();
    Vector F = Vector::Zero(static_cast<Eigen::Index>(ncomp) * ndof);
    if (!f)
        return F;
    std::vector<Eigen::MatrixXd> local(space.num_elements());
    parallel_for(space.num_elements(), [&](std::size_t k) {
        const auto rule = polygon_rule(space.mesh().polygon(k), space.degree(k));
        const auto tab = eval_basis(space, k, rule.nodes);
        Eigen::MatrixXd vals(static_cast<Eigen::Index>(rule.nodes.size()), ncomp);
        double buf[2];
        for (std::size_t p = 0; p < rule.nodes.size(); ++p) {
            f(rule.nodes[p], t, buf);
            for (int c = 0; c < ncomp; ++c)
                vals(static_cast<Eigen::Index>(p), c) = rule.weights[p] * buf[c];
        }
        local[k] = tab.values.transpose() * vals;
    });
    for (std::size_t k = 0; k < space.num_elements(); ++k)
        for (int c = 0; c < ncomp; ++c)
            F.segment(c * ndof + space.offset(k), space.nbases(k)) += local[k].col(c);
    return F;
}

/// Weak Dirichlet data on boundary faces: −(g, flux(v))_e + (α_e g, trace(v))_e.
inline Vector assemble_boundary_load(const FeSpace& space, FacePhysics physics, const FaceCoefficients& coef,
                                     const PenaltySpec& penalty, const std::set<int>& dirichlet_labels,
                                     const BoundaryDatum& g, double t)
{
    detail::validate_face_coefficients(space, physics, coef);
    const int ncomp = components(physics);
    const int J = detail::jump_components(physics);
    const int ndof = space.ndof();
    Vector F = Vector::Zero(static_cast<Eigen::Index>(ncomp) * ndof);
    if (!g)
        return F;
    const auto& mesh = space.mesh();
    std::vector<Eigen::VectorXd> local(mesh.faces.size());
    parallel_for(mesh.faces.size(), [&](std::size_t fi) {
        const Face& f = mesh.faces[fi];
        if (!f.is_boundary() || dirichlet_labels.count(f.label) == 0)
            return;
        const auto k = static_cast<std::size_t>(f.owner);
        const double alpha = detail::face_penalty(space, f, physics, coef, penalty.c_alpha);
        const auto q = detail::face_quadrature(mesh, f, detail::face_points(space, f));
        const double c2 = physics == FacePhysics::elastic ? coef.lambda[k] : 0.0;
        const auto side = detail::side_tables(space, k, q, f.normal, physics, coef.primary[k], c2);
        Eigen::VectorXd gt(static_cast<Eigen::Index>(q.points.size()) * J);
        double buf[2];
        for (std::size_t p = 0; p < q.points.size(); ++p) {
            g(q.points[p], t, f.label, buf);
            const auto P = static_cast<Eigen::Index>(p);
            switch (physics) {
            case FacePhysics::scalar:
                gt(P) = q.weights(P) * buf[0];
                break;
            case FacePhysics::elastic:
                gt(2 * P) = q.weights(P) * buf[0];
                gt(2 * P + 1) = q.weights(P) * buf[1];
                break;
            case FacePhysics::poro_pressure:
                gt(P) = q.weights(P) * (buf[0] * f.normal.x() + buf[1] * f.normal.y());
                break;
            }
        }
        local[fi] = alpha * (side.trace.transpose() * gt) - side.flux.transpose() * gt;
    });
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        if (local[fi].size() == 0)
            continue;
        const auto k = static_cast<std::size_t>(mesh.faces[fi].owner);
        const int nb = space.nbases(k);
        for (int c = 0; c < ncomp; ++c)
            F.segment(c * ndof + space.offset(k), nb) += local[fi].segment(c * nb, nb);
    }
    return F;
}

/// F(v) = Σ_κ (f, v)_κ − Σ_{e∈F_B} ((g, flux(v))_e − (α_e g, v)_e).
inline Vector assemble_rhs(const FeSpace& space, FacePhysics physics, const FaceCoefficients& coef,
                           const PenaltySpec& penalty, const std::set<int>& dirichlet_labels, const RhsData& data,
                           double t)
{
    return assemble_volume_load(space, components(physics), data.source, t) +
           assemble_boundary_load(space, physics, coef, penalty, dirichlet_labels, data.dirichlet, t);
}

/// Scalar Poisson-type right-hand side.
inline Vector assemble_rhs(const FeSpace& space, const ScalarField& f, const ScalarField& g,
                           std::span<const double> mu, const PenaltySpec& penalty,
                           const std::set<int>& dirichlet_labels, double t = 0.0,
                           const std::map<int, ScalarField>& g_by_label = {})
{
    FaceCoefficients c{{mu.begin(), mu.end()}, {}};
    return assemble_rhs(space, FacePhysics::scalar, c, penalty, dirichlet_labels,
                        scalar_rhs_data(f, g, g_by_label), t);
}

/// Element mass matrices (quadrature-free, exact).
inline std::vector<Eigen::MatrixXd> element_mass_matrices(const FeSpace& space)
{
    std::vector<Eigen::MatrixXd> m(space.num_elements());
    parallel_for(space.num_elements(), [&](std::size_t k) { m[k] = element_gram_qf(space, k, false).vv; });
    return m;
}

/// L² projection of `ncomp` component data: per-element local mass solves.
inline Vector l2_project(const FeSpace& space, int ncomp, const std::function<void(const Point&, double, double*)>& u,
                         double t = 0.0)
{
    const Vector b = assemble_volume_load(space, ncomp, u, t);
    const int ndof = space.ndof();
    Vector x(b.size());
    std::vector<Eigen::VectorXd> local(space.num_elements() * static_cast<std::size_t>(ncomp));
    parallel_for(space.num_elements(), [&](std::size_t k) {
        const Eigen::LLT<Eigen::MatrixXd> llt(element_gram_qf(space, k, false).vv);
        for (int c = 0; c < ncomp; ++c)
            local[k * static_cast<std::size_t>(ncomp) + static_cast<std::size_t>(c)] =
                llt.solve(b.segment(c * ndof + space.offset(k), space.nbases(k)));
    });
    for (std::size_t k = 0; k < space.num_elements(); ++k)
        for (int c = 0; c < ncomp; ++c)
            x.segment(c * ndof + space.offset(k), space.nbases(k)) =
                local[k * static_cast<std::size_t>(ncomp) + static_cast<std::size_t>(c)];
    return x;
}

inline Vector l2_project(const FeSpace& space, const ScalarField& u, double t = 0.0)
{
    return l2_project(space, 1, [&u](const Point& x, double tt, double* out) { out[0] = u(x, tt); }, t);
}

inline Vector l2_project(const FeSpace& space, const VectorField& u, double t = 0.0)
{
    return l2_project(
        space, 2,
        [&u](const Point& x, double tt, double* out) {
            const auto v = u(x, tt);
            out[0] = v.x();
            out[1] = v.y();
        },
        t);
}

/// Interface coupling blocks between a poroelastic (vector) space and an acoustic
/// (scalar) space defined on sub-meshes of one parent mesh:
///   C^p((i,d), j) = Σ_{e∈Γ_I} (ρ_a φ^a_j, φ^p_i n_{p,d})_e,   C^a = −(C^p)ᵀ,
/// with n_p the unit normal pointing out of the poroelastic element.
struct CouplingMatrices
{
    SparseMatrix Cp; ///< rows: 2·ndof_p (component-major), cols: ndof_a
    SparseMatrix Ca; ///< rows: ndof_a, cols: 2·ndof_p
};

inline CouplingMatrices interface_coupling_matrices(const PolyMesh& parent, std::span<const int> interface_faces,
                                                    const SubMesh& poro, const FeSpace& poro_space,
                                                    const SubMesh& acoustic, const FeSpace& acoustic_space,
                                                    std::span<const double> rho_a)
{
    detail::check_coefficient(rho_a, acoustic_space, "interface_coupling_matrices");
    const int ndof_p = poro_space.ndof();
    const int ndof_a = acoustic_space.ndof();
    TripletBuilder cp(2 * ndof_p, ndof_a);
    for (int fi : interface_faces) {
        const Face& f = parent.faces[static_cast<std::size_t>(fi)];
        if (f.is_boundary())
            throw ValidationError("interface face " + std::to_string(fi) + " is a boundary face");
        const auto own = static_cast<std::size_t>(f.owner), nb = static_cast<std::size_t>(f.neighbor);
        int kp = poro.sub_element[own], ka = acoustic.sub_element[nb];
        Point np = f.normal;
        if (kp < 0 || ka < 0) {
            kp = poro.sub_element[nb];
            ka = acoustic.sub_element[own];
            np = -f.normal;
        }
        if (kp < 0 || ka < 0)
            throw ValidationError("interface face " + std::to_string(fi) +
                                  " is not shared between a poroelastic and an acoustic element");
        const auto kps = static_cast<std::size_t>(kp), kas = static_cast<std::size_t>(ka);
        const int npts = std::max(poro_space.degree(kps), acoustic_space.degree(kas)) + 2;
        const auto q = detail::face_quadrature(parent, f, npts);
        const auto tp = eval_basis(poro_space, kps, q.points);
        const auto ta = eval_basis(acoustic_space, kas, q.points);
        const Eigen::MatrixXd base = tp.values.transpose() * (rho_a[kas] * q.weights).asDiagonal() * ta.values;
        cp.add_block(poro_space.offset(kps), acoustic_space.offset(kas), np.x() * base);
        cp.add_block(ndof_p + poro_space.offset(kps), acoustic_space.offset(kas), np.y() * base);
    }
    CouplingMatrices c;
    c.Cp = cp.seal();
    c.Ca = SparseMatrix(-SparseMatrix(c.Cp.transpose()));
    return c;
}

/// Parent faces separating elements accepted by `in_a` from elements accepted by `in_b`.
inline std::vector<int> interface_faces(const PolyMesh& mesh, const std::function<bool(int)>& in_a,
                                        const std::function<bool(int)>& in_b)
{
    std::vector<int> out;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        if (face.is_boundary())
            continue;
        const int ta = mesh.element_tag[static_cast<std::size_t>(face.owner)];
        const int tb = mesh.element_tag[static_cast<std::size_t>(face.neighbor)];
        if ((in_a(ta) && in_b(tb)) || (in_b(ta) && in_a(tb)))
            out.push_back(static_cast<int>(f));
    }
    return out;
}

} // namespace polydg
