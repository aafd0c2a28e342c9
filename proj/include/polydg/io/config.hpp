#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "../error.hpp"
#include "../mesh.hpp"
#include "expression.hpp"

namespace polydg {

using Json = nlohmann::json;

/// Element retagging rule: elements whose centroid satisfies where(x, y) > 0 get `tag`.
struct TagRule
{
    int tag = 1;
    Expression where;
};

struct MeshConfig
{
    std::string type = "voronoi"; ///< file | voronoi | cartesian | two_circles
    std::filesystem::path path;
    Rectangle domain;
    int elements = 30;
    int nx = 4, ny = 4;
    int lloyd = 50;
    std::uint64_t seed = 1;
    int agglomerate = 0; ///< target element count, 0 = off
    double radius = 0.6;
    double offset = 0.5;
    int segments = 48;
    std::vector<TagRule> regions;
};

/// One scalar or a vector of component expressions.
using ExpressionList = std::vector<Expression>;

struct BoundaryConfig
{
    enum class Kind { dirichlet, neumann } kind = Kind::dirichlet;
    ExpressionList value;       ///< empty for homogeneous data or for the plane wave
    bool plane_wave = false;
    double peak_frequency = 10.0;
};

struct TimeConfig
{
    double dt = 0.0;
    double T = 0.0;
    double theta = 0.5;
    double beta = 0.25;
    double gamma = 0.5;
};

struct OutputConfig
{
    std::filesystem::path directory;
    int stride = 1;
    std::set<std::string> formats{"csv"};
};

struct PointSourceConfig
{
    Point position = Point::Zero();
    std::optional<Expression> time_function; ///< in t; Ricker wavelet when absent
};

struct ConvergenceConfig
{
    std::vector<int> meshes{25, 100, 400, 1600}; ///< element counts for h studies
    int degree = 1;
    std::vector<int> degrees{1, 2, 3, 4, 5};
    int elements = 100; ///< mesh size for p studies
};

struct BenchmarkConfig
{
    int repetitions = 5;
    std::vector<int> degrees{1, 2, 3, 4, 5};
    std::string mesh = "hexagon"; ///< hexagon | config
    int elements = 100;
};

struct RunConfig
{
    std::string physics = "laplacian";
    int degree = 1;
    double c_alpha = 10.0;
    std::string integration = "quadrature_free";
    MeshConfig mesh;
    std::map<int, Json> materials;
    std::map<int, BoundaryConfig> boundary;
    std::map<int, BoundaryConfig> poro_boundary;
    ExpressionList source;
    ExpressionList exact;
    ExpressionList initial_u;
    ExpressionList initial_v;
    std::vector<PointSourceConfig> point_sources;
    std::vector<int> poro_tags{2};
    std::vector<int> acoustic_tags{1};
    std::optional<TimeConfig> time;
    OutputConfig output;
    ConvergenceConfig convergence;
    BenchmarkConfig benchmark;
    std::filesystem::path base_dir; ///< directory of the config file
};

namespace detail {

/// Cursor into the document that remembers its JSON pointer for error messages.
class JsonCursor
{
public:
    JsonCursor(const Json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {}

    const Json& json() const { return j_; }
    const std::string& pointer() const { return ptr_; }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ValidationError((ptr_.empty() ? std::string("/") : ptr_) + ": " + msg);
    }

    void expect_object(std::initializer_list<std::string_view> allowed) const
    {
        if (!j_.is_object())
            fail("expected an object");
        for (const auto& [k, v] : j_.items()) {
            bool ok = false;
            for (auto a : allowed)
                ok = ok || a == k;
            if (!ok)
                child(k).fail("unknown key");
        }
    }

    bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

    JsonCursor child(const std::string& key) const
    {
        std::string esc;
        for (char c : key)
            esc += c == '~' ? std::string("~0") : c == '/' ? std::string("~1") : std::string(1, c);
        return {j_.at(key), ptr_ + "/" + esc};
    }

    JsonCursor at(std::size_t i) const { return {j_.at(i), ptr_ + "/" + std::to_string(i)}; }

    double number() const
    {
        if (!j_.is_number())
            fail("expected a number");
        return j_.get<double>();
    }

    long long integer() const
    {
        if (!j_.is_number_integer())
            fail("expected an integer");
        return j_.get<long long>();
    }

    std::string string() const
    {
        if (!j_.is_string())
            fail("expected a string");
        return j_.get<std::string>();
    }

    Expression expression() const
    {
        if (j_.is_number())
            return Expression::constant(j_.get<double>());
        try {
            return Expression::parse(string());
        } catch (const ParseError& e) {
            fail(std::string("expression ") + e.what());
        }
    }

    ExpressionList expressions() const
    {
        ExpressionList out;
        if (j_.is_array()) {
            if (j_.empty())
                fail("expected at least one expression");
            for (std::size_t i = 0; i < j_.size(); ++i)
                out.push_back(at(i).expression());
        } else {
            out.push_back(expression());
        }
        return out;
    }

    std::vector<int> integers() const
    {
        if (!j_.is_array())
            fail("expected an array of integers");
        std::vector<int> v;
        for (std::size_t i = 0; i < j_.size(); ++i)
            v.push_back(static_cast<int>(at(i).integer()));
        return v;
    }

    double number_or(const std::string& key, double d) const { return has(key) ? child(key).number() : d; }
    int int_or(const std::string& key, int d) const { return has(key) ? static_cast<int>(child(key).integer()) : d; }

private:
    const Json& j_;
    std::string ptr_;
};

inline int parse_tag(const JsonCursor& c, const std::string& key)
{
    std::size_t used = 0;
    int tag = 0;
    try {
        tag = std::stoi(key, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != key.size() || key.empty())
        c.child(key).fail("tag keys must be integers");
    return tag;
}

inline MeshConfig parse_mesh(const JsonCursor& c, const std::filesystem::path& base)
{
    c.expect_object({"type", "path", "domain", "elements", "nx", "ny", "lloyd", "seed", "agglomerate", "radius",
                     "offset", "segments", "regions"});
    MeshConfig m;
    if (c.has("type"))
        m.type = c.child("type").string();
    if (m.type != "file" && m.type != "voronoi" && m.type != "cartesian" && m.type != "two_circles")
        c.child("type").fail("mesh type must be file, voronoi, cartesian or two_circles");
    if (m.type == "file") {
        if (!c.has("path"))
            c.fail("file mesh needs a path");
        m.path = c.child("path").string();
        if (m.path.is_relative())
            m.path = base / m.path;
    }
    if (c.has("domain")) {
        const auto d = c.child("domain");
        if (!d.json().is_array() || d.json().size() != 4)
            d.fail("domain must be [x0, x1, y0, y1]");
        m.domain = {d.at(0).number(), d.at(1).number(), d.at(2).number(), d.at(3).number()};
        try {
            m.domain.validate();
        } catch (const ValidationError& e) {
            d.fail(e.what());
        }
    }
    m.elements = c.int_or("elements", m.elements);
    m.nx = c.int_or("nx", m.nx);
    m.ny = c.int_or("ny", m.ny);
    m.lloyd = c.int_or("lloyd", m.lloyd);
    if (c.has("seed")) {
        const auto s = c.child("seed").integer();
        if (s < 0)
            c.child("seed").fail("seed must be non-negative");
        m.seed = static_cast<std::uint64_t>(s);
    }
    m.agglomerate = c.int_or("agglomerate", 0);
    m.radius = c.number_or("radius", m.radius);
    m.offset = c.number_or("offset", m.offset);
    m.segments = c.int_or("segments", m.segments);
    if (m.elements < 1)
        c.child("elements").fail("must be positive");
    if (m.nx < 1 || m.ny < 1)
        c.fail("nx and ny must be positive");
    if (m.lloyd < 0)
        c.child("lloyd").fail("must be non-negative");
    if (m.agglomerate < 0)
        c.child("agglomerate").fail("must be non-negative");
    if (m.type == "two_circles" && !(m.radius > m.offset && m.offset > 0.0))
        c.fail("two_circles needs radius > offset > 0");
    if (m.segments < 8)
        c.child("segments").fail("must be at least 8");
    if (c.has("regions")) {
        const auto r = c.child("regions");
        if (!r.json().is_array())
            r.fail("expected an array");
        for (std::size_t i = 0; i < r.json().size(); ++i) {
            const auto e = r.at(i);
            e.expect_object({"tag", "where"});
            if (!e.has("tag") || !e.has("where"))
                e.fail("region needs tag and where");
            m.regions.push_back({static_cast<int>(e.child("tag").integer()), e.child("where").expression()});
        }
    }
    return m;
}

inline std::map<int, BoundaryConfig> parse_boundary(const JsonCursor& c)
{
    if (!c.json().is_object())
        c.fail("expected an object keyed by boundary label");
    std::map<int, BoundaryConfig> out;
    for (const auto& [key, v] : c.json().items()) {
        const int label = parse_tag(c, key);
        const auto e = c.child(key);
        e.expect_object({"kind", "value", "peak_frequency"});
        BoundaryConfig b;
        const std::string kind = e.has("kind") ? e.child("kind").string() : "dirichlet";
        if (kind == "neumann")
            b.kind = BoundaryConfig::Kind::neumann;
        else if (kind != "dirichlet")
            e.child("kind").fail("kind must be dirichlet or neumann");
        if (e.has("value")) {
            const auto val = e.child("value");
            if (val.json().is_string() && val.json().get<std::string>() == "plane_wave")
                b.plane_wave = true;
            else
                b.value = val.expressions();
        }
        b.peak_frequency = e.number_or("peak_frequency", b.peak_frequency);
        if (!(b.peak_frequency > 0.0))
            e.child("peak_frequency").fail("must be positive");
        out[label] = std::move(b);
    }
    return out;
}

inline TimeConfig parse_time(const JsonCursor& c)
{
    c.expect_object({"dt", "T", "theta", "beta", "gamma"});
    TimeConfig t;
    if (!c.has("dt") || !c.has("T"))
        c.fail("time block needs dt and T");
    t.dt = c.child("dt").number();
    t.T = c.child("T").number();
    t.theta = c.number_or("theta", t.theta);
    t.beta = c.number_or("beta", t.beta);
    t.gamma = c.number_or("gamma", t.gamma);
    if (!(t.dt > 0.0))
        c.child("dt").fail("dt must be positive");
    if (!(t.T >= 0.0))
        c.child("T").fail("T must be non-negative");
    if (!(t.theta >= 0.0 && t.theta <= 1.0))
        c.child("theta").fail("theta out of [0,1]");
    if (!(t.beta > 0.0 && t.beta <= 0.5))
        c.child("beta").fail("beta out of (0,1/2]");
    if (!(t.gamma >= 0.0 && t.gamma <= 1.0))
        c.child("gamma").fail("gamma out of [0,1]");
    return t;
}

inline OutputConfig parse_output(const JsonCursor& c)
{
    c.expect_object({"directory", "stride", "formats"});
    OutputConfig o;
    if (c.has("directory"))
        o.directory = c.child("directory").string();
    o.stride = c.int_or("stride", 1);
    if (o.stride < 1)
        c.child("stride").fail("stride must be positive");
    if (c.has("formats")) {
        const auto f = c.child("formats");
        if (!f.json().is_array())
            f.fail("expected an array");
        o.formats.clear();
        for (std::size_t i = 0; i < f.json().size(); ++i) {
            auto s = f.at(i).string();
            if (s != "csv" && s != "vtk")
                f.at(i).fail("format must be csv or vtk");
            o.formats.insert(std::move(s));
        }
    }
    return o;
}

inline void check_materials(const JsonCursor& c, const std::string& physics)
{
    static const std::map<std::string, std::vector<std::string>> keys{
        {"laplacian", {"mu"}},
        {"heat", {"mu"}},
        {"elastodynamics", {"rho", "lambda", "mu", "cs", "cp"}},
        {"poroacoustic",
         {"rho", "lambda", "mu", "cs", "cp", "phi", "a", "k", "eta", "m", "beta", "rho_f", "rho_s", "rho_a", "c"}},
    };
    const auto& allowed = keys.at(physics);
    for (const auto& [key, v] : c.json().items()) {
        parse_tag(c, key);
        const auto e = c.child(key);
        if (!e.json().is_object())
            e.fail("expected an object");
        for (const auto& [name, val] : e.json().items()) {
            if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
                e.child(name).fail("unknown key");
            e.child(name).number();
        }
    }
}

} // namespace detail

/// Parses and validates a configuration document. Every expression is compiled here.
inline RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {})
{
    const detail::JsonCursor c(doc, "");
    c.expect_object({"physics", "degree", "C_alpha", "integration", "mesh", "materials", "boundary", "poro_boundary",
                     "source", "exact", "initial", "point_sources", "poro_tags", "acoustic_tags", "time", "output",
                     "convergence", "benchmark"});
    RunConfig r;
    r.base_dir = base_dir;
    if (c.has("physics"))
        r.physics = c.child("physics").string();
    if (r.physics != "laplacian" && r.physics != "heat" && r.physics != "elastodynamics" && r.physics != "poroacoustic")
        c.child("physics").fail("physics must be laplacian, heat, elastodynamics or poroacoustic");
    r.degree = c.int_or("degree", 1);
    if (r.degree < 0 || r.degree > 10)
        c.child("degree").fail("degree must be in [0, 10]");
    r.c_alpha = c.number_or("C_alpha", 10.0);
    if (!(r.c_alpha > 0.0))
        c.child("C_alpha").fail("C_alpha must be positive");
    if (c.has("integration")) {
        r.integration = c.child("integration").string();
        if (r.integration != "quadrature_free" && r.integration != "subtessellation")
            c.child("integration").fail("integration must be quadrature_free or subtessellation");
    }
    if (c.has("mesh"))
        r.mesh = detail::parse_mesh(c.child("mesh"), base_dir);
    if (c.has("materials")) {
        const auto m = c.child("materials");
        if (!m.json().is_object())
            m.fail("expected an object keyed by element tag");
        detail::check_materials(m, r.physics);
        for (const auto& [key, v] : m.json().items())
            r.materials[detail::parse_tag(m, key)] = v;
    }
    if (c.has("boundary"))
        r.boundary = detail::parse_boundary(c.child("boundary"));
    if (c.has("poro_boundary"))
        r.poro_boundary = detail::parse_boundary(c.child("poro_boundary"));
    if (c.has("source"))
        r.source = c.child("source").expressions();
    if (c.has("exact"))
        r.exact = c.child("exact").expressions();
    if (c.has("initial")) {
        const auto i = c.child("initial");
        i.expect_object({"u", "v"});
        if (i.has("u"))
            r.initial_u = i.child("u").expressions();
        if (i.has("v"))
            r.initial_v = i.child("v").expressions();
    }
    if (c.has("point_sources")) {
        const auto ps = c.child("point_sources");
        if (!ps.json().is_array())
            ps.fail("expected an array");
        for (std::size_t i = 0; i < ps.json().size(); ++i) {
            const auto e = ps.at(i);
            e.expect_object({"position", "time_function"});
            if (!e.has("position"))
                e.fail("point source needs a position");
            const auto p = e.child("position");
            if (!p.json().is_array() || p.json().size() != 2)
                p.fail("position must be [x, y]");
            PointSourceConfig s;
            s.position = {p.at(0).number(), p.at(1).number()};
            if (e.has("time_function"))
                s.time_function = e.child("time_function").expression();
            r.point_sources.push_back(std::move(s));
        }
    }
    if (c.has("poro_tags"))
        r.poro_tags = c.child("poro_tags").integers();
    if (c.has("acoustic_tags"))
        r.acoustic_tags = c.child("acoustic_tags").integers();
    if (c.has("time"))
        r.time = detail::parse_time(c.child("time"));
    if (c.has("output"))
        r.output = detail::parse_output(c.child("output"));
    if (c.has("convergence")) {
        const auto cv = c.child("convergence");
        cv.expect_object({"meshes", "degree", "degrees", "elements"});
        if (cv.has("meshes"))
            r.convergence.meshes = cv.child("meshes").integers();
        r.convergence.degree = cv.int_or("degree", r.degree);
        if (cv.has("degrees"))
            r.convergence.degrees = cv.child("degrees").integers();
        r.convergence.elements = cv.int_or("elements", r.mesh.elements);
    } else {
        r.convergence.degree = r.degree;
        r.convergence.elements = r.mesh.elements;
    }
    if (c.has("benchmark")) {
        const auto b = c.child("benchmark");
        b.expect_object({"repetitions", "degrees", "mesh", "elements"});
        r.benchmark.repetitions = b.int_or("repetitions", 5);
        if (r.benchmark.repetitions < 3)
            b.child("repetitions").fail("at least 3 repetitions are required");
        if (b.has("degrees"))
            r.benchmark.degrees = b.child("degrees").integers();
        if (b.has("mesh")) {
            r.benchmark.mesh = b.child("mesh").string();
            if (r.benchmark.mesh != "hexagon" && r.benchmark.mesh != "config")
                b.child("mesh").fail("mesh must be hexagon or config");
        }
        r.benchmark.elements = b.int_or("elements", 100);
    }

    const std::size_t ncomp = (r.physics == "elastodynamics") ? 2 : 1;
    auto check_len = [&](const ExpressionList& e, const char* key) {
        if (!e.empty() && e.size() != ncomp)
            c.child(key).fail("expected " + std::to_string(ncomp) + " component(s)");
    };
    check_len(r.source, "source");
    check_len(r.exact, "exact");
    if (c.has("initial")) {
        const auto i = c.child("initial");
        if (!r.initial_u.empty() && r.initial_u.size() != ncomp)
            i.child("u").fail("expected " + std::to_string(ncomp) + " component(s)");
        if (!r.initial_v.empty() && r.initial_v.size() != ncomp)
            i.child("v").fail("expected " + std::to_string(ncomp) + " component(s)");
    }
    for (const auto& [label, b] : r.boundary) {
        const auto e = c.child("boundary").child(std::to_string(label));
        if (!b.value.empty() && b.value.size() != ncomp)
            e.child("value").fail("expected " + std::to_string(ncomp) + " component(s)");
        if (b.plane_wave && r.physics != "poroacoustic")
            e.child("value").fail("plane_wave data is only available for poroacoustic runs");
    }
    const bool dynamic = r.physics != "laplacian";
    if (dynamic && !r.time)
        c.fail("physics '" + r.physics + "' needs a time block");
    if (r.physics != "elastodynamics" && !r.point_sources.empty())
        c.child("point_sources").fail("point sources are only available for elastodynamics");
    return r;
}

inline RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {})
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        // nlohmann reports a byte offset; convert to line/column.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("malformed JSON", line, col);
    }
    return parse_config(doc, base_dir);
}

inline RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.parent_path());
}

} // namespace polydg
