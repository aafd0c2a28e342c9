#include <gtest/gtest.h>

#include <set>

#include "support.hpp"

using namespace polydg;
using namespace polydg::testing;

namespace {

/// Single-element space on a polygon.
FeSpace polygon_space(std::vector<Point> poly, int ell)
{
    std::vector<int> loop(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i)
        loop[i] = static_cast<int>(i);
    return FeSpace(shared(make_mesh(std::move(poly), {loop}, {})), ell);
}

/// Local mass matrix by sub-tessellation quadrature exact for degree 2ℓ+1.
Eigen::MatrixXd local_mass(const FeSpace& space, std::size_t k)
{
    const auto rule = polygon_rule(space.mesh().polygon(k), space.degree(k));
    const auto t = eval_basis(space, k, rule.nodes);
    Eigen::VectorXd w(static_cast<Eigen::Index>(rule.weights.size()));
    for (std::size_t i = 0; i < rule.weights.size(); ++i)
        w(static_cast<Eigen::Index>(i)) = rule.weights[i];
    return t.values.transpose() * w.asDiagonal() * t.values;
}

std::vector<Point> random_points(std::mt19937_64& rng, const BoundingBox& b, int n)
{
    std::uniform_real_distribution<double> ux(b.xmin, b.xmax), uy(b.ymin, b.ymax);
    std::vector<Point> p;
    for (int i = 0; i < n; ++i)
        p.emplace_back(ux(rng), uy(rng));
    return p;
}

} // namespace

TEST(BasisDimension, Values)
{
    EXPECT_EQ(basis_dimension(0), 1);
    EXPECT_EQ(basis_dimension(3), 10);
    EXPECT_EQ(basis_dimension(5), 21);
}

TEST(Legendre1D, ClosedForms)
{
    const auto a = eval_legendre_1d(3, 0.37);
    EXPECT_NEAR(a.values(0), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(a.derivatives(0), 0.0, 1e-15);
    const auto b = eval_legendre_1d(1, 0.5);
    EXPECT_NEAR(b.values(1), 0.5 * std::sqrt(1.5), 1e-15);
    EXPECT_NEAR(b.values(1), 0.612372, 1e-6);
    EXPECT_NEAR(b.derivatives(1), std::sqrt(1.5), 1e-15);
    EXPECT_THROW(eval_legendre_1d(2, 1.1), ValidationError);
    EXPECT_NO_THROW(eval_legendre_1d(2, 1.0 + 1e-13));
}

TEST(Legendre1D, SecondDegreeNormViaGauss)
{
    const auto& g = gauss_legendre_1d(5);
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const double v = eval_legendre_1d(2, g.nodes[i]).values(2);
        s += g.weights[i] * v * v;
    }
    EXPECT_NEAR(s, 1.0, 1e-14);
}

TEST(Legendre1D, OrthonormalUpToTen)
{
    const auto& g = gauss_legendre_1d(12);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(11, 11);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const auto v = eval_legendre_1d(10, g.nodes[i]).values;
        G += g.weights[i] * v * v.transpose();
    }
    EXPECT_LE((G - Eigen::MatrixXd::Identity(11, 11)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Legendre1D, DerivativesMatchFiniteDifferences)
{
    const double h = 1e-6;
    for (double x : {-0.9, -0.3, 0.1, 0.77}) {
        const auto c = eval_legendre_1d(7, x);
        const auto p = eval_legendre_1d(7, x + h), m = eval_legendre_1d(7, x - h);
        for (int k = 0; k <= 7; ++k)
            EXPECT_NEAR(c.derivatives(k), (p.values(k) - m.values(k)) / (2 * h), 1e-6);
    }
}

TEST(IndexMap, CanonicalOrder)
{
    EXPECT_EQ(basis_index_map(1), (std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}}));
    const auto two = basis_index_map(2);
    EXPECT_EQ(two.size(), 6u);
    for (const auto& [j, k] : two)
        EXPECT_LE(j + k, 2);
    const auto seven = basis_index_map(7);
    EXPECT_EQ(seven.size(), static_cast<std::size_t>(basis_dimension(7)));
    std::set<std::pair<int, int>> distinct(seven.begin(), seven.end());
    EXPECT_EQ(distinct.size(), seven.size());
    int prev = 0;
    for (const auto& [j, k] : seven) {
        EXPECT_GE(j, 0);
        EXPECT_GE(k, 0);
        EXPECT_LE(j + k, 7);
        EXPECT_GE(j + k, prev);
        prev = j + k;
    }
}

TEST(EvalBasis, RectangleMassIsIdentity)
{
    const auto space = polygon_space({{1, 2}, {4, 2}, {4, 2.5}, {1, 2.5}}, 5);
    const auto M = local_mass(space, 0);
    EXPECT_LE((M - Eigen::MatrixXd::Identity(21, 21)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EvalBasis, ConstantMode)
{
    const auto space = polygon_space({{0, 0}, {2, 0}, {2, 0.5}, {0, 0.5}}, 2);
    std::vector<Point> pts{{0.3, 0.1}, {1.9, 0.4}};
    const auto t = eval_basis(space, 0, pts);
    for (Eigen::Index p = 0; p < 2; ++p) {
        EXPECT_NEAR(t.values(p, 0), space.scale(0) / 2.0, 1e-15);
        EXPECT_EQ(t.dx(p, 0), 0.0);
        EXPECT_EQ(t.dy(p, 0), 0.0);
    }
}

TEST(EvalBasis, PentagonMatchesMonomialExpansion)
{
    std::mt19937_64 rng(3);
    const auto pent = regular_polygon(5, 0.8, {0.3, -0.2}, 0.4);
    const auto space = polygon_space(pent, 3);
    const auto pts = random_points(rng, space.bbox(0), 20);
    const auto t = eval_basis(space, 0, pts);
    const auto& m = monomial_expansion(3);
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const Point r = space.to_reference(0, pts[p]);
        for (int i = 0; i < space.nbases(0); ++i) {
            double v = 0.0;
            for (int a = 0; a <= 3; ++a)
                for (int b = 0; a + b <= 3; ++b)
                    v += m.coefficient(i, a, b) * std::pow(r.x(), a) * std::pow(r.y(), b);
            EXPECT_NEAR(t.values(static_cast<Eigen::Index>(p), i), space.scale(0) * v, 1e-12);
        }
    }
}

TEST(EvalBasis, GradientsMatchFiniteDifferences)
{
    std::mt19937_64 rng(8);
    const auto space = polygon_space(regular_polygon(7, 0.4, {2, 1}), 4);
    const double h = 1e-6;
    for (const auto& x : random_points(rng, space.bbox(0), 10)) {
        std::vector<Point> c{x}, px{x + Point(h, 0)}, mx{x - Point(h, 0)}, py{x + Point(0, h)}, my{x - Point(0, h)};
        const auto t = eval_basis(space, 0, c);
        const auto tpx = eval_basis(space, 0, px), tmx = eval_basis(space, 0, mx);
        const auto tpy = eval_basis(space, 0, py), tmy = eval_basis(space, 0, my);
        for (int i = 0; i < space.nbases(0); ++i) {
            EXPECT_NEAR(t.dx(0, i), (tpx.values(0, i) - tmx.values(0, i)) / (2 * h), 1e-6);
            EXPECT_NEAR(t.dy(0, i), (tpy.values(0, i) - tmy.values(0, i)) / (2 * h), 1e-6);
        }
    }
}

TEST(EvalBasis, ChainRuleScaling)
{
    // Stretching the element by 3 in x scales x-derivatives by 1/3 (after the s_κ change).
    const auto a = polygon_space({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 3);
    const auto b = polygon_space({{0, 0}, {3, 0}, {3, 1}, {0, 1}}, 3);
    std::vector<Point> pa{{0.3, 0.6}}, pb{{0.9, 0.6}};
    const auto ta = eval_basis(a, 0, pa), tb = eval_basis(b, 0, pb);
    const double ratio = b.scale(0) / a.scale(0);
    for (int i = 0; i < 10; ++i) {
        EXPECT_NEAR(tb.values(0, i), ratio * ta.values(0, i), 1e-14);
        EXPECT_NEAR(tb.dx(0, i), ratio * ta.dx(0, i) / 3.0, 1e-13);
        EXPECT_NEAR(tb.dy(0, i), ratio * ta.dy(0, i), 1e-13);
    }
}

TEST(EvalBasis, Hierarchical)
{
    const auto pent = regular_polygon(5, 1.0);
    const auto lo = polygon_space(pent, 3), hi = polygon_space(pent, 4);
    std::vector<Point> pts{{0.1, 0.2}, {-0.5, 0.3}, {0.7, -0.6}};
    const auto a = eval_basis(lo, 0, pts), b = eval_basis(hi, 0, pts);
    EXPECT_EQ(a.values, b.values.leftCols(10));
    EXPECT_EQ(a.dx, b.dx.leftCols(10));
}

TEST(MonomialExpansion, DegreeZero)
{
    const auto& m = monomial_expansion(0);
    EXPECT_DOUBLE_EQ(m.coefficient(0, 0, 0), 0.5);
}

TEST(MonomialExpansion, SparsityAboveTotalDegree)
{
    const auto& m = monomial_expansion(4);
    const auto idx = basis_index_map(4);
    for (int i = 0; i < basis_dimension(4); ++i)
        for (int a = 0; a <= 4; ++a)
            for (int b = 0; b <= 4; ++b) {
                const auto [j, k] = idx[static_cast<std::size_t>(i)];
                if (a + b > 4 || a > j || b > k) {
                    EXPECT_EQ(m.coefficient(i, a, b), 0.0);
                }
            }
}

TEST(MonomialExpansion, ReconstructsTensorLegendre)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto& m = monomial_expansion(5);
    const auto idx = basis_index_map(5);
    for (int p = 0; p < 50; ++p) {
        const double x = u(rng), y = u(rng);
        const auto lx = eval_legendre_1d(5, x), ly = eval_legendre_1d(5, y);
        for (int i = 0; i < basis_dimension(5); ++i) {
            double v = 0.0, dv = 0.0;
            for (int a = 0; a <= 5; ++a)
                for (int b = 0; b <= 5; ++b) {
                    v += m.coefficient(i, a, b) * std::pow(x, a) * std::pow(y, b);
                    dv += m.dxi(i, a * m.stride() + b) * std::pow(x, a) * std::pow(y, b);
                }
            const auto [j, k] = idx[static_cast<std::size_t>(i)];
            EXPECT_NEAR(v, lx.values(j) * ly.values(k), 1e-12);
            EXPECT_NEAR(dv, lx.derivatives(j) * ly.values(k), 1e-11);
        }
    }
    EXPECT_THROW(monomial_expansion(11), ValidationError);
}

TEST(FeSpace, LayoutAndMap)
{
    const auto mesh = shared(cartesian_mesh(3, 2, Rectangle{0, 3, 0, 1}));
    const FeSpace space(mesh, std::vector<int>{0, 1, 2, 3, 2, 1});
    int expect = 0;
    for (std::size_t k = 0; k < space.num_elements(); ++k) {
        EXPECT_EQ(space.offset(k), expect);
        EXPECT_EQ(space.nbases(k), basis_dimension(space.degree(k)));
        expect += space.nbases(k);
    }
    EXPECT_EQ(space.ndof(), expect);
    EXPECT_EQ(space.max_degree_used(), 3);
    const auto& b = space.bbox(4);
    const Point lo = space.to_reference(4, {b.xmin, b.ymin}), hi = space.to_reference(4, {b.xmax, b.ymax});
    EXPECT_NEAR(lo.x(), -1.0, 1e-15);
    EXPECT_NEAR(lo.y(), -1.0, 1e-15);
    EXPECT_NEAR(hi.x(), 1.0, 1e-15);
    EXPECT_NEAR(hi.y(), 1.0, 1e-15);
    EXPECT_THROW(FeSpace(mesh, 11), ValidationError);
    EXPECT_THROW(FeSpace(mesh, std::vector<int>{1, 2}), ValidationError);
}
