#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "mesh.hpp"

namespace polydg {

inline constexpr int max_degree = 10;

/// dim P^ℓ in two variables.
constexpr int basis_dimension(int ell) { return (ell + 1) * (ell + 2) / 2; }

/// Orthonormal Legendre values L̂_0..L̂_ℓ and derivatives at one point of [-1,1].
struct Legendre1D
{
    Eigen::VectorXd values;
    Eigen::VectorXd derivatives;
};

namespace detail {

/// Fills v[k] = L̂_k(x), d[k] = L̂_k'(x) for k = 0..ell (raw buffers, hot path).
inline void legendre_orthonormal(int ell, double x, double* v, double* d)
{
    double p0 = 1.0, p1 = x;
    double d0 = 0.0, d1 = 1.0;
    v[0] = 1.0;
    d[0] = 0.0;
    if (ell >= 1) {
        v[1] = x;
        d[1] = 1.0;
    }
    for (int k = 1; k < ell; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        const double d2 = d0 + (2.0 * k + 1.0) * p1;
        v[k + 1] = p2;
        d[k + 1] = d2;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    for (int k = 0; k <= ell; ++k) {
        const double s = std::sqrt((2.0 * k + 1.0) / 2.0);
        v[k] *= s;
        d[k] *= s;
    }
}

} // namespace detail

inline Legendre1D eval_legendre_1d(int ell, double x)
{
    if (ell < 0)
        throw ValidationError("eval_legendre_1d: negative degree");
    if (x < -1.0 - 1e-12 || x > 1.0 + 1e-12)
        throw ValidationError("eval_legendre_1d: point outside [-1,1]");
    Legendre1D r{Eigen::VectorXd(ell + 1), Eigen::VectorXd(ell + 1)};
    detail::legendre_orthonormal(ell, x, r.values.data(), r.derivatives.data());
    return r;
}

/// Modal index pairs (j, k), j + k <= ℓ, ordered by total degree then j ascending.
inline std::vector<std::pair<int, int>> basis_index_map(int ell)
{
    std::vector<std::pair<int, int>> m;
    m.reserve(static_cast<std::size_t>(basis_dimension(ell)));
    for (int d = 0; d <= ell; ++d)
        for (int j = 0; j <= d; ++j)
            m.emplace_back(j, d - j);
    return m;
}

/// Monomial coefficients of the orthonormal Legendre polynomials: row k holds
/// L̂_k(x) = Σ_p A(k,p) x^p.
inline Eigen::MatrixXd legendre_monomial_coefficients(int ell)
{
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(ell + 1, ell + 1);
    P(0, 0) = 1.0;
    if (ell >= 1)
        P(1, 1) = 1.0;
    for (int k = 1; k < ell; ++k)
        for (int p = 0; p <= k + 1; ++p) {
            const double shifted = p >= 1 ? P(k, p - 1) : 0.0;
            P(k + 1, p) = ((2.0 * k + 1.0) * shifted - k * P(k - 1, p)) / (k + 1.0);
        }
    for (int k = 0; k <= ell; ++k)
        P.row(k) *= std::sqrt((2.0 * k + 1.0) / 2.0);
    return P;
}

/// Reference-coordinate monomial expansions of one degree's basis (without s_κ).
/// Row i, column a·(ℓ+1)+b holds the coefficient of ξ^a η^b in φ_i (or in ∂_ξ φ_i,
/// ∂_η φ_i for the derivative tables).
struct MonomialExpansion
{
    int degree = 0;
    Eigen::MatrixXd values;
    Eigen::MatrixXd dxi;
    Eigen::MatrixXd deta;

    int stride() const { return degree + 1; }
    double coefficient(int i, int a, int b) const { return values(i, a * stride() + b); }
};

namespace detail {
inline MonomialExpansion compute_monomial_expansion(int ell)
{
    const auto A = legendre_monomial_coefficients(ell);
    const auto idx = basis_index_map(ell);
    const int nb = basis_dimension(ell), s = ell + 1;
    MonomialExpansion m;
    m.degree = ell;
    m.values = Eigen::MatrixXd::Zero(nb, s * s);
    m.dxi = Eigen::MatrixXd::Zero(nb, s * s);
    m.deta = Eigen::MatrixXd::Zero(nb, s * s);
    for (int i = 0; i < nb; ++i) {
        const auto [j, k] = idx[static_cast<std::size_t>(i)];
        for (int a = 0; a <= j; ++a)
            for (int b = 0; b <= k; ++b) {
                const double c = A(j, a) * A(k, b);
                m.values(i, a * s + b) = c;
                if (a >= 1)
                    m.dxi(i, (a - 1) * s + b) = a * c;
                if (b >= 1)
                    m.deta(i, a * s + b - 1) = b * c;
            }
    }
    return m;
}
} // namespace detail

/// Cached reference expansion for degree ℓ (computed once per degree).
inline const MonomialExpansion& monomial_expansion(int ell)
{
    static const std::vector<MonomialExpansion> table = [] {
        std::vector<MonomialExpansion> t;
        for (int l = 0; l <= max_degree; ++l)
            t.push_back(detail::compute_monomial_expansion(l));
        return t;
    }();
    if (ell < 0 || ell > max_degree)
        throw ValidationError("polynomial degree must be in [0, 10]");
    return table[static_cast<std::size_t>(ell)];
}

/// Values and physical gradients of an element's basis at a set of points.
struct BasisTable
{
    Eigen::MatrixXd values; ///< points × nbases
    Eigen::MatrixXd dx;     ///< ∂φ/∂x, points × nbases
    Eigen::MatrixXd dy;     ///< ∂φ/∂y
};

/// Discontinuous modal space on a mesh: per-element degree, DOF layout and the
/// bounding-box map x ↦ ξ = (2x − (x1+x2))/(x2−x1).
class FeSpace
{
public:
    FeSpace(std::shared_ptr<const PolyMesh> mesh, int degree)
        : FeSpace(mesh, std::vector<int>(mesh ? mesh->num_elements() : 0, degree))
    {}

    FeSpace(std::shared_ptr<const PolyMesh> mesh, std::vector<int> degrees)
        : mesh_(std::move(mesh)), degree_(std::move(degrees))
    {
        if (!mesh_)
            throw ValidationError("FeSpace: null mesh");
        if (degree_.size() != mesh_->num_elements())
            throw ValidationError("FeSpace: degree count does not match element count");
        offset_.resize(degree_.size() + 1, 0);
        for (std::size_t k = 0; k < degree_.size(); ++k) {
            if (degree_[k] < 0 || degree_[k] > max_degree)
                throw ValidationError("polynomial degree must be in [0, 10]");
            offset_[k + 1] = offset_[k] + basis_dimension(degree_[k]);
        }
    }

    const PolyMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const PolyMesh> mesh_ptr() const { return mesh_; }
    std::size_t num_elements() const { return degree_.size(); }
    int degree(std::size_t k) const { return degree_[k]; }
    int max_degree_used() const
    {
        int m = 0;
        for (int d : degree_)
            m = std::max(m, d);
        return m;
    }
    int nbases(std::size_t k) const { return basis_dimension(degree_[k]); }
    int offset(std::size_t k) const { return offset_[k]; }
    int ndof() const { return offset_.back(); }

    const BoundingBox& bbox(std::size_t k) const { return mesh_->geometry[k].bbox; }

    Point to_reference(std::size_t k, const Point& p) const
    {
        const auto& b = bbox(k);
        return {(2.0 * p.x() - (b.xmin + b.xmax)) / b.width(),
                (2.0 * p.y() - (b.ymin + b.ymax)) / b.height()};
    }

    /// s_κ = 2/√(|x2−x1||y2−y1|): makes the basis orthonormal on the bounding box.
    double scale(std::size_t k) const
    {
        const auto& b = bbox(k);
        return 2.0 / std::sqrt(b.width() * b.height());
    }

    /// (dξ/dx, dη/dy)
    Point jacobian(std::size_t k) const
    {
        const auto& b = bbox(k);
        return {2.0 / b.width(), 2.0 / b.height()};
    }

private:
    std::shared_ptr<const PolyMesh> mesh_;
    std::vector<int> degree_;
    std::vector<int> offset_;
};

/// φ_i(x,y) = s_κ L̂_j(ξ(x)) L̂_k(η(y)) and its physical gradient at each point.
inline BasisTable eval_basis(const FeSpace& space, std::size_t k, std::span<const Point> points)
{
    const int ell = space.degree(k);
    const int nb = space.nbases(k);
    const auto n = static_cast<Eigen::Index>(points.size());
    BasisTable t{Eigen::MatrixXd(n, nb), Eigen::MatrixXd(n, nb), Eigen::MatrixXd(n, nb)};
    const double s = space.scale(k);
    const Point jac = space.jacobian(k);
    const auto idx = basis_index_map(ell);
    double vx[max_degree + 1], dvx[max_degree + 1], vy[max_degree + 1], dvy[max_degree + 1];
    for (Eigen::Index p = 0; p < n; ++p) {
        const Point r = space.to_reference(k, points[static_cast<std::size_t>(p)]);
        detail::legendre_orthonormal(ell, r.x(), vx, dvx);
        detail::legendre_orthonormal(ell, r.y(), vy, dvy);
        for (int i = 0; i < nb; ++i) {
            const auto [a, b] = idx[static_cast<std::size_t>(i)];
            t.values(p, i) = s * vx[a] * vy[b];
            t.dx(p, i) = s * jac.x() * dvx[a] * vy[b];
            t.dy(p, i) = s * jac.y() * vx[a] * dvy[b];
        }
    }
    return t;
}

/// Evaluates u_h = Σ U_i φ_i on element k at the given points.
inline Eigen::VectorXd eval_field(const FeSpace& space, std::size_t k, std::span<const Point> points,
                                  const Eigen::Ref<const Eigen::VectorXd>& coeffs)
{
    const auto t = eval_basis(space, k, points);
    return t.values * coeffs.segment(space.offset(k), space.nbases(k));
}

} // namespace polydg
