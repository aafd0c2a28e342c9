#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "geometry.hpp"

namespace polydg {

struct QuadratureRule1D
{
    std::vector<double> nodes;
    std::vector<double> weights;
    int degree = 0; ///< polynomial exactness
};

struct QuadratureRule2D
{
    std::vector<Point> nodes;
    std::vector<double> weights;
    int degree = 0;
};

using Triangle = std::array<Point, 3>;

inline constexpr int max_gauss_points = 64;

namespace detail {

/// Legendre P_n and its derivative at x by the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x)
{
    double p0 = 1.0, p1 = x;
    if (n == 0)
        return {1.0, 0.0};
    for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

inline QuadratureRule1D compute_gauss_legendre(int n)
{
    QuadratureRule1D r;
    r.nodes.resize(static_cast<std::size_t>(n));
    r.weights.resize(static_cast<std::size_t>(n));
    r.degree = 2 * n - 1;
    if (n == 1) {
        r.nodes[0] = 0.0;
        r.weights[0] = 2.0;
        return r;
    }
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-like initial guess for the i-th largest root.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            auto [p, d] = legendre_with_derivative(n, x);
            dp = d;
            const double dx = p / d;
            x -= dx;
            if (std::abs(dx) <= 1e-15)
                break;
        }
        dp = legendre_with_derivative(n, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        r.nodes[lo] = -x;
        r.nodes[hi] = x;
        r.weights[lo] = w;
        r.weights[hi] = w;
    }
    if (n % 2 == 1)
        r.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return r;
}

/// Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1,1] (Golub-Welsch).
inline QuadratureRule1D compute_gauss_jacobi(int n, double alpha, double beta)
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + alpha + beta;
        J(k, k) = (k == 0) ? (beta - alpha) / (alpha + beta + 2.0)
                           : (beta * beta - alpha * alpha) / (s * (s + 2.0));
        if (k + 1 < n) {
            const double kk = k + 1.0;
            const double t = 2.0 * kk + alpha + beta;
            const double off = std::sqrt(4.0 * kk * (kk + alpha) * (kk + beta) * (kk + alpha + beta) /
                                         (t * t * (t + 1.0) * (t - 1.0)));
            J(k, k + 1) = off;
            J(k + 1, k) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double mu0 = std::pow(2.0, alpha + beta + 1.0) * std::tgamma(alpha + 1.0) *
                       std::tgamma(beta + 1.0) / std::tgamma(alpha + beta + 2.0);
    QuadratureRule1D r;
    r.degree = 2 * n - 1;
    for (int i = 0; i < n; ++i) {
        r.nodes.push_back(es.eigenvalues()(i));
        const double v0 = es.eigenvectors()(0, i);
        r.weights.push_back(mu0 * v0 * v0);
    }
    return r;
}

inline QuadratureRule2D compute_triangle_rule(int ell)
{
    const int n = ell + 1;
    const auto gl = compute_gauss_legendre(n);
    const auto gj = compute_gauss_jacobi(n, 1.0, 0.0);
    QuadratureRule2D r;
    r.degree = 2 * ell + 1;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double a = gl.nodes[static_cast<std::size_t>(i)];
            const double b = gj.nodes[static_cast<std::size_t>(j)];
            // Collapsed map of [-1,1]^2 onto the triangle (0,0),(1,0),(0,1).
            r.nodes.emplace_back(0.25 * (1.0 + a) * (1.0 - b), 0.5 * (1.0 + b));
            r.weights.push_back(gl.weights[static_cast<std::size_t>(i)] *
                                gj.weights[static_cast<std::size_t>(j)] / 8.0);
        }
    return r;
}

} // namespace detail

/// n-point Gauss-Legendre rule on [-1,1], exact to degree 2n-1. Cached.
inline const QuadratureRule1D& gauss_legendre_1d(int n)
{
    static const std::vector<QuadratureRule1D> table = [] {
        std::vector<QuadratureRule1D> t(max_gauss_points + 1);
        for (int k = 1; k <= max_gauss_points; ++k)
            t[static_cast<std::size_t>(k)] = detail::compute_gauss_legendre(k);
        return t;
    }();
    if (n < 1 || n > max_gauss_points)
        throw ValidationError("gauss_legendre_1d: point count must be in [1, 64]");
    return table[static_cast<std::size_t>(n)];
}

inline constexpr int max_triangle_rule_degree = 31;

/// (ℓ+1)² point collapsed Gauss rule on the reference triangle (0,0),(1,0),(0,1),
/// exact for total degree 2ℓ+1. Cached.
inline const QuadratureRule2D& triangle_rule(int ell)
{
    static const std::vector<QuadratureRule2D> table = [] {
        std::vector<QuadratureRule2D> t;
        for (int k = 0; k <= max_triangle_rule_degree; ++k)
            t.push_back(detail::compute_triangle_rule(k));
        return t;
    }();
    if (ell < 0 || ell > max_triangle_rule_degree)
        throw ValidationError("triangle_rule: degree out of range");
    return table[static_cast<std::size_t>(ell)];
}

namespace detail {

inline std::vector<Triangle> ear_clip(std::span<const Point> poly)
{
    std::vector<int> idx(poly.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = static_cast<int>(i);
    std::vector<Triangle> tris;
    auto P = [&](int i) -> const Point& { return poly[static_cast<std::size_t>(i)]; };

    while (idx.size() > 3) {
        const std::size_t m = idx.size();
        bool clipped = false;
        for (std::size_t i = 0; i < m; ++i) {
            const int ia = idx[(i + m - 1) % m], ib = idx[i], ic = idx[(i + 1) % m];
            const Point &a = P(ia), &b = P(ib), &c = P(ic);
            if (cross(b - a, c - b) <= 0.0)
                continue;
            bool empty = true;
            for (int j : idx) {
                if (j == ia || j == ib || j == ic)
                    continue;
                const Point& p = P(j);
                if (cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 && cross(a - c, p - c) >= 0.0) {
                    empty = false;
                    break;
                }
            }
            if (!empty)
                continue;
            tris.push_back({a, b, c});
            idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
            clipped = true;
            break;
        }
        if (!clipped) {
            // Only degenerate (collinear) vertices remain convex-free: drop one.
            bool dropped = false;
            for (std::size_t i = 0; i < m; ++i) {
                const Point &a = P(idx[(i + m - 1) % m]), &b = P(idx[i]), &c = P(idx[(i + 1) % m]);
                if (cross(b - a, c - b) == 0.0) {
                    idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
                    dropped = true;
                    break;
                }
            }
            if (!dropped)
                throw NumericalError("subtessellate: ear clipping failed");
        }
    }
    if (cross(P(idx[1]) - P(idx[0]), P(idx[2]) - P(idx[0])) > 0.0)
        tris.push_back({P(idx[0]), P(idx[1]), P(idx[2])});
    return tris;
}

} // namespace detail

/// Splits a simple counter-clockwise polygon into positively oriented triangles:
/// a centroid fan when the polygon is star-shaped about its centroid, ear clipping
/// otherwise.
inline std::vector<Triangle> subtessellate(std::span<const Point> poly)
{
    if (!is_simple_polygon(poly))
        throw ValidationError("subtessellate: polygon is not simple");
    if (!(signed_area(poly) > 0.0))
        throw ValidationError("subtessellate: polygon is not counter-clockwise");
    const Point c = polygon_centroid(poly);
    const std::size_t n = poly.size();
    std::vector<Triangle> fan;
    fan.reserve(n);
    bool star = true;
    for (std::size_t i = 0; i < n && star; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        if (!(cross(a - c, b - c) > 0.0))
            star = false;
        fan.push_back({c, a, b});
    }
    if (star)
        return fan;
    return detail::ear_clip(poly);
}

inline double triangle_area(const Triangle& t) { return 0.5 * cross(t[1] - t[0], t[2] - t[0]); }

/// Quadrature nodes and weights on a polygon from its sub-tessellation and the
/// degree-ℓ triangle rule.
inline QuadratureRule2D polygon_rule(std::span<const Point> poly, int ell)
{
    const auto& ref = triangle_rule(ell);
    QuadratureRule2D r;
    r.degree = ref.degree;
    for (const auto& t : subtessellate(poly)) {
        const Point e1 = t[1] - t[0], e2 = t[2] - t[0];
        const double jac = cross(e1, e2);
        for (std::size_t q = 0; q < ref.nodes.size(); ++q) {
            r.nodes.push_back(t[0] + ref.nodes[q].x() * e1 + ref.nodes[q].y() * e2);
            r.weights.push_back(ref.weights[q] * jac);
        }
    }
    return r;
}

/// Table I(k, q) = ∫_P ξ^k η^q over a polygon given in reference coordinates.
using MonomialIntegralTable = Eigen::MatrixXd;

/// Quadrature-free monomial integrals over a simple polygon. By Euler's theorem for
/// homogeneous functions and the divergence theorem, with the origin as centre,
///   ∫_P ξ^k η^q = (2+k+q)^{-1} Σ_e (x_e·n_e) ∫_e ξ^k η^q ds,
/// and each edge integral is evaluated exactly by a Gauss rule on the edge.
inline MonomialIntegralTable monomial_polygon_integrals(std::span<const Point> poly, int kmax, int qmax,
                                                        bool validate = true)
{
    if (validate && !is_simple_polygon(poly))
        throw ValidationError("monomial_polygon_integrals: polygon is not simple");
    const int npts = (kmax + qmax + 2 + 1) / 2;
    const auto& gl = gauss_legendre_1d(std::max(1, npts));
    const auto np = static_cast<Eigen::Index>(gl.nodes.size());
    Eigen::MatrixXd xp(kmax + 1, np), yp(qmax + 1, np);
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(kmax + 1, qmax + 1);
    const std::size_t n = poly.size();
    for (std::size_t e = 0; e < n; ++e) {
        const Point& a = poly[e];
        const Point& b = poly[(e + 1) % n];
        // (x_e·n_e)|e| = a × b; the 1/2 is the edge-parameter Jacobian over |e|.
        const double factor = 0.5 * cross(a, b);
        if (factor == 0.0)
            continue;
        for (Eigen::Index p = 0; p < np; ++p) {
            const double s = 0.5 * (1.0 + gl.nodes[static_cast<std::size_t>(p)]);
            const double x = a.x() + s * (b.x() - a.x());
            const double y = a.y() + s * (b.y() - a.y());
            const double w = factor * gl.weights[static_cast<std::size_t>(p)];
            xp(0, p) = w;
            for (int k = 1; k <= kmax; ++k)
                xp(k, p) = xp(k - 1, p) * x;
            yp(0, p) = 1.0;
            for (int q = 1; q <= qmax; ++q)
                yp(q, p) = yp(q - 1, p) * y;
        }
        table.noalias() += xp * yp.transpose();
    }
    for (int k = 0; k <= kmax; ++k)
        for (int q = 0; q <= qmax; ++q)
            table(k, q) /= (2.0 + k + q);
    return table;
}

} // namespace polydg
