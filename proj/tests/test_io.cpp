#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "support.hpp"

using namespace polydg;
using namespace polydg::testing;

namespace {

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        if (!l.empty() && l.back() == '\r')
            l.pop_back();
        out.push_back(l);
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep = ',')
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string validation_message(const std::string& text)
{
    try {
        parse_config_text(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

const char* minimal_poisson = R"({
  "physics": "laplacian",
  "mesh": {"type": "cartesian", "nx": 2, "ny": 2},
  "materials": {"1": {"mu": 1}},
  "source": "1"
})";

/// Minimal legacy VTK reader: point count, cell types and per-array ranges.
struct VtkSummary
{
    std::size_t points = 0, cells = 0;
    std::vector<int> types;
    std::map<std::string, std::pair<double, double>> ranges;
    std::map<std::string, std::size_t> counts;
};

VtkSummary read_vtk(const std::string& text)
{
    VtkSummary s;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        if (tok == "POINTS") {
            std::string type;
            in >> s.points >> type;
            double v;
            for (std::size_t i = 0; i < 3 * s.points; ++i)
                in >> v;
        } else if (tok == "CELLS") {
            std::size_t total;
            in >> s.cells >> total;
            long long v;
            for (std::size_t i = 0; i < total; ++i)
                in >> v;
        } else if (tok == "CELL_TYPES") {
            std::size_t n;
            in >> n;
            s.types.resize(n);
            for (auto& t : s.types)
                in >> t;
        } else if (tok == "SCALARS") {
            std::string name, type, lt, def;
            int ncomp;
            in >> name >> type >> ncomp >> lt >> def;
            double lo = INFINITY, hi = -INFINITY;
            for (std::size_t i = 0; i < s.points; ++i) {
                double v;
                in >> v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            s.ranges[name] = {lo, hi};
            s.counts[name] = s.points;
        }
    }
    return s;
}

FieldSnapshot constant_square_snapshot(double value)
{
    auto mesh = shared(make_mesh(unit_square(), {{0, 1, 2, 3}}, {1}));
    const FeSpace space(mesh, 0);
    const Vector U = l2_project(space, ScalarField([value](const Point&, double) { return value; }));
    return sample_field(space, U, {"u"});
}

} // namespace

// ---------------------------------------------------------------- config

TEST(Config, MinimalPoissonTakesDefaults)
{
    const auto cfg = parse_config_text(minimal_poisson);
    EXPECT_EQ(cfg.physics, "laplacian");
    EXPECT_EQ(cfg.degree, 1);
    EXPECT_DOUBLE_EQ(cfg.c_alpha, 10.0);
    EXPECT_EQ(cfg.integration, "quadrature_free");
    EXPECT_EQ(cfg.mesh.type, "cartesian");
    ASSERT_EQ(cfg.source.size(), 1u);
    EXPECT_DOUBLE_EQ(cfg.source[0](0.3, 0.4, 0.0), 1.0);
    EXPECT_FALSE(cfg.time.has_value());
    EXPECT_TRUE(cfg.output.formats.contains("csv"));
}

TEST(Config, ThetaOutOfRange)
{
    const std::string text = R"({"physics": "heat", "materials": {"1": {"mu": 1}},
                                 "time": {"dt": 0.1, "T": 1, "theta": 2}})";
    EXPECT_THROW(parse_config_text(text), ValidationError);
    const auto msg = validation_message(text);
    EXPECT_NE(msg.find("theta out of [0,1]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("/time/theta"), std::string::npos) << msg;
}

TEST(Config, UnknownKeysRejectedWithPointer)
{
    EXPECT_NE(validation_message(R"({"physic": "laplacian"})").find("/physic: unknown key"), std::string::npos);
    const auto msg = validation_message(R"({"mesh": {"type": "voronoi", "element": 10}})");
    EXPECT_NE(msg.find("/mesh/element"), std::string::npos) << msg;
}

TEST(Config, SchemaErrorsCarryPaths)
{
    auto has = [](const std::string& text, const std::string& needle) {
        const auto msg = validation_message(text);
        return msg.find(needle) != std::string::npos;
    };
    EXPECT_TRUE(has(R"({"degree": "two"})", "/degree"));
    EXPECT_TRUE(has(R"({"degree": 11})", "/degree"));
    EXPECT_TRUE(has(R"({"C_alpha": -1})", "/C_alpha"));
    EXPECT_TRUE(has(R"({"mesh": {"domain": [0, 1, 0]}})", "/mesh/domain"));
    EXPECT_TRUE(has(R"({"physics": "maxwell"})", "/physics"));
    EXPECT_TRUE(has(R"({"physics": "heat", "materials": {"1": {"mu": 1}}})", "time block"));
    EXPECT_TRUE(has(R"({"physics": "elastodynamics", "source": "1", "time": {"dt": 1, "T": 1}})", "/source"));
}

TEST(Config, ExpressionErrorsCarryColumn)
{
    const auto msg = validation_message(R"({"source": "sin(x) + * 2"})");
    EXPECT_NE(msg.find("/source"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 10"), std::string::npos) << msg;
}

TEST(Config, MalformedJsonReportsLine)
{
    try {
        parse_config_text("{\n  \"degree\": 2,\n  oops\n}");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_GT(e.column(), 0u);
    }
}

TEST(Config, ShippedConfigsLoad)
{
    for (const auto& entry : std::filesystem::directory_iterator(source_dir() / "configs")) {
        if (entry.path().extension() != ".json")
            continue;
        EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    }
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/config.json"), ValidationError); }

// ---------------------------------------------------------------- expressions

TEST(Expression, Evaluates)
{
    const auto e = Expression::parse("2*x^2 - y/4 + sin(pi*t)");
    EXPECT_NEAR(e(1.5, 2.0, 0.5), 2 * 2.25 - 0.5 + 1.0, 1e-14);
    EXPECT_NEAR(Expression::parse("-2^2")(0, 0, 0), -4.0, 0);
    EXPECT_NEAR(Expression::parse("2^3^2")(0, 0, 0), 512.0, 0);
    EXPECT_NEAR(Expression::parse("exp(log(3)) + sqrt(16)")(0, 0, 0), 7.0, 1e-14);
    EXPECT_EQ(Expression::parse("step(x - 0.5)")(0.6, 0, 0), 1.0);
    EXPECT_EQ(Expression::parse("step(x - 0.5)")(0.5, 0, 0), 0.0);
}

TEST(Expression, Derivatives)
{
    const auto e = Expression::parse("sin(2*pi*x)*cos(2*pi*y) + x*y^3 + t^2");
    const auto dx = e.derivative(Expression::Var::x);
    const auto dy = e.derivative(Expression::Var::y);
    const auto dt = e.derivative(Expression::Var::t);
    const double pi = std::numbers::pi;
    for (double x : {0.1, 0.37, 0.8})
        for (double y : {0.2, 0.55}) {
            EXPECT_NEAR(dx(x, y, 0.3), 2 * pi * std::cos(2 * pi * x) * std::cos(2 * pi * y) + y * y * y, 1e-12);
            EXPECT_NEAR(dy(x, y, 0.3), -2 * pi * std::sin(2 * pi * x) * std::sin(2 * pi * y) + 3 * x * y * y, 1e-12);
            EXPECT_NEAR(dt(x, y, 0.3), 0.6, 1e-14);
        }
    // Quotient and chain rules against central differences.
    const auto q = Expression::parse("exp(x*y)/(1 + x^2) + sqrt(1 + y^2)");
    const auto qx = q.derivative(Expression::Var::x);
    const double h = 1e-6;
    EXPECT_NEAR(qx(0.4, 0.7, 0), (q(0.4 + h, 0.7, 0) - q(0.4 - h, 0.7, 0)) / (2 * h), 1e-8);
}

TEST(Expression, ParseErrorsHaveColumns)
{
    auto column_of = [](const char* s) -> std::size_t {
        try {
            Expression::parse(s);
        } catch (const ParseError& e) {
            return e.column();
        }
        return 0;
    };
    EXPECT_EQ(column_of("1 +"), 4u);
    EXPECT_EQ(column_of("foo(x)"), 1u);
    EXPECT_EQ(column_of("(x + 1"), 7u);
    EXPECT_GT(column_of("x y"), 0u);
}

TEST(Expression, ConstantFolding)
{
    EXPECT_TRUE(Expression::constant(3.0).is_constant());
    EXPECT_TRUE(Expression::parse("x^2").derivative(Expression::Var::t).is_constant());
}

// ---------------------------------------------------------------- VTK

TEST(Vtk, ConstantSquare)
{
    const auto s = constant_square_snapshot(7.0);
    std::ostringstream os;
    write_vtk(os, s);
    const std::string text = os.str();
    EXPECT_EQ(text.rfind("# vtk DataFile Version 3.0\n", 0), 0u);
    const auto v = read_vtk(text);
    EXPECT_EQ(v.points, s.size());
    EXPECT_EQ(v.cells, s.size() / 3);
    EXPECT_GE(v.cells, 2u);
    for (int t : v.types)
        EXPECT_EQ(t, 5);
    ASSERT_TRUE(v.ranges.contains("u"));
    EXPECT_NEAR(v.ranges.at("u").first, 7.0, 1e-13);
    EXPECT_NEAR(v.ranges.at("u").second, 7.0, 1e-13);
}

TEST(Vtk, RoundTripRecoversCountsAndRanges)
{
    auto mesh = shared(cartesian_mesh(3, 3));
    const FeSpace space(mesh, 2);
    const Vector U = l2_project(space, ScalarField([](const Point& x, double) { return x.x() + 2 * x.y(); }));
    const auto s = sample_field(space, U, {"u"});
    TempDir dir;
    write_vtk(s, dir / "f.vtk");
    const auto v = read_vtk(read_file(dir / "f.vtk"));
    EXPECT_EQ(v.points, s.size());
    EXPECT_NEAR(v.ranges.at("u").first, 0.0, 1e-12);
    EXPECT_NEAR(v.ranges.at("u").second, 3.0, 1e-12);
}

TEST(Vtk, EmptySnapshotIsAnErrorAndWritesNothing)
{
    TempDir dir;
    FieldSnapshot s;
    EXPECT_THROW(write_vtk(s, dir / "empty.vtk"), ValidationError);
    EXPECT_FALSE(std::filesystem::exists(dir / "empty.vtk"));
    EXPECT_THROW(write_csv(s, dir / "empty.csv"), ValidationError);
    EXPECT_FALSE(std::filesystem::exists(dir / "empty.csv"));
}

// ---------------------------------------------------------------- CSV

TEST(Csv, ErrorReportHasOneRowOfFiveColumns)
{
    ErrorReport r;
    r.Nel = 30;
    r.h = 0.25;
    r.p = 3;
    r.L2 = 1.0 / 3.0;
    r.dG = 2.5e-3;
    std::ostringstream os;
    write_csv(os, r);
    const auto l = lines_of(os.str());
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[0], "Nel,h,p,L2,dG");
    const auto cells = split(l[1]);
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(cells[0], "30");
    EXPECT_EQ(cells[3], "0.33333333333333331");
    EXPECT_EQ(std::stod(cells[3]), r.L2);
    EXPECT_NE(os.str().find("\r\n"), std::string::npos);
}

TEST(Csv, ConvergenceTableFirstEocEmpty)
{
    std::vector<ErrorReport> rows;
    for (int i = 0; i < 4; ++i) {
        ErrorReport r;
        r.Nel = 25 << (2 * i);
        r.h = 0.2 / (1 << i);
        r.p = 1;
        r.L2 = 1e-2 / (1 << (2 * i));
        r.dG = 1e-1 / (1 << i);
        rows.push_back(r);
    }
    std::ostringstream os;
    write_csv(os, h_table(rows));
    const auto l = lines_of(os.str());
    ASSERT_EQ(l.size(), 5u);
    EXPECT_EQ(l[0], "Nel,h,p,L2,dG,EOC_L2,EOC_dG");
    const auto first = split(l[1]);
    ASSERT_EQ(first.size(), 7u);
    EXPECT_EQ(first[5], "");
    EXPECT_EQ(first[6], "");
    for (std::size_t i = 2; i < l.size(); ++i) {
        const auto c = split(l[i]);
        EXPECT_NEAR(std::stod(c[5]), 2.0, 1e-12);
        EXPECT_NEAR(std::stod(c[6]), 1.0, 1e-12);
    }
}

TEST(Csv, SnapshotRowsMatchSamples)
{
    const auto s = constant_square_snapshot(7.0);
    std::ostringstream os;
    write_csv(os, s);
    const auto l = lines_of(os.str());
    ASSERT_EQ(l.size(), s.size() + 1);
    EXPECT_EQ(l[0], "x,y,u");
    for (std::size_t i = 1; i < l.size(); ++i)
        EXPECT_NEAR(std::stod(split(l[i])[2]), 7.0, 1e-13);
}

TEST(Csv, SeventeenDigitsRoundTrip)
{
    for (double v : {0.1, std::numbers::pi, 1e-300, -2.5e17, 123456789.123456789}) {
        EXPECT_EQ(std::stod(csv::number(v)), v);
    }
    EXPECT_EQ(csv::field("a,b"), "\"a,b\"");
    EXPECT_EQ(csv::field("q\"x"), "\"q\"\"x\"");
}

// ---------------------------------------------------------------- snapshot

TEST(Snapshot, RejectsMismatchedVector)
{
    auto mesh = shared(cartesian_mesh(2, 2));
    const FeSpace space(mesh, 1);
    EXPECT_THROW(sample_field(space, Vector::Zero(3), {"u"}), ValidationError);
    EXPECT_THROW(sample_field(space, Vector::Zero(space.ndof()), {}), ValidationError);
}

// ---------------------------------------------------------------- end-to-end

TEST(Run, PoissonVerificationFixture)
{
    auto cfg = load_config(source_dir() / "configs" / "poisson_verification.json");
    TempDir dir;
    const auto res = run_solve(cfg, dir.path());
    EXPECT_EQ(res.num_elements, 30u);
    EXPECT_EQ(res.degree, 3);
    ASSERT_TRUE(res.report.has_value());
    EXPECT_GT(res.report->L2, 0.0);
    EXPECT_LT(res.report->L2, 1e-2);
    EXPECT_LT(res.report->dG, 0.5);
    EXPECT_TRUE(std::filesystem::exists(dir / "errors.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "solution_0000.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "solution_0000.vtk"));
    const auto l = lines_of(read_file(dir / "errors.csv"));
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(split(l[1])[0], "30");
}

TEST(Run, RerunIsByteIdentical)
{
    auto cfg = load_config(source_dir() / "configs" / "poisson_verification.json");
    TempDir a, b;
    run_solve(cfg, a.path());
    run_solve(cfg, b.path());
    for (const char* f : {"errors.csv", "solution_0000.csv", "solution_0000.vtk"})
        EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
}

TEST(Run, ConvergenceNeedsExactSolution)
{
    auto cfg = parse_config_text(minimal_poisson);
    EXPECT_THROW(run_h_convergence(cfg), ValidationError);
}
