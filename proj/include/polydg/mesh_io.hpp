#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "mesh.hpp"

namespace polydg {

namespace detail {

/// Line-oriented tokenizer that skips blank lines and `#` comments.
class MeshTextReader
{
public:
    explicit MeshTextReader(std::istream& in) : in_(in) {}

    /// Next non-empty line split into tokens; false at end of input.
    bool next(std::vector<std::string_view>& tokens)
    {
        while (std::getline(in_, line_)) {
            ++lineno_;
            if (auto hash = line_.find('#'); hash != std::string::npos)
                line_.erase(hash);
            tokens.clear();
            std::string_view s = line_;
            std::size_t i = 0;
            while (i < s.size()) {
                while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
                    ++i;
                std::size_t j = i;
                while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])))
                    ++j;
                if (j > i)
                    tokens.push_back(s.substr(i, j - i));
                i = j;
            }
            if (!tokens.empty())
                return true;
        }
        return false;
    }

    std::vector<std::string_view> expect(std::size_t count, const char* what)
    {
        std::vector<std::string_view> t;
        if (!next(t))
            throw ParseError(std::string("unexpected end of file, expected ") + what, lineno_ + 1);
        if (t.size() != count)
            fail(std::string("expected ") + what);
        return t;
    }

    template <typename T>
    T number(std::string_view tok) const
    {
        T value{};
        const auto* end = tok.data() + tok.size();
        auto [ptr, ec] = std::from_chars(tok.data(), end, value);
        if (ec != std::errc() || ptr != end)
            fail("invalid number '" + std::string(tok) + "'");
        return value;
    }

    void header(std::string_view keyword, std::size_t& count)
    {
        auto t = expect(2, (std::string(keyword) + " <count>").c_str());
        if (t[0] != keyword)
            fail("expected '" + std::string(keyword) + "', found '" + std::string(t[0]) + "'");
        const long long c = number<long long>(t[1]);
        if (c < 0)
            fail("negative count");
        count = static_cast<std::size_t>(c);
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, lineno_); }
    std::size_t line() const { return lineno_; }

private:
    std::istream& in_;
    std::string line_;
    std::size_t lineno_ = 0;
};

} // namespace detail

/// Reads the `polymesh 1` text format from a stream.
inline PolyMesh read_mesh(std::istream& in)
{
    detail::MeshTextReader r(in);
    {
        auto t = r.expect(2, "header 'polymesh 1'");
        if (t[0] != "polymesh" || t[1] != "1")
            r.fail("expected header 'polymesh 1'");
    }
    std::size_t nv = 0, ne = 0, nb = 0;
    r.header("vertices", nv);
    std::vector<Point> verts(nv);
    for (auto& p : verts) {
        auto t = r.expect(2, "vertex 'x y'");
        p = Point(r.number<double>(t[0]), r.number<double>(t[1]));
    }
    r.header("elements", ne);
    std::vector<std::vector<int>> elems(ne);
    std::vector<int> tags(ne);
    for (std::size_t k = 0; k < ne; ++k) {
        std::vector<std::string_view> t;
        if (!r.next(t))
            throw ParseError("unexpected end of file in element list", r.line() + 1);
        if (t.size() < 2)
            r.fail("expected element 'tag k v1 ... vk'");
        tags[k] = r.number<int>(t[0]);
        const int count = r.number<int>(t[1]);
        if (count < 3 || t.size() != static_cast<std::size_t>(count) + 2)
            r.fail("element vertex count does not match its index list");
        for (int i = 0; i < count; ++i)
            elems[k].push_back(r.number<int>(t[static_cast<std::size_t>(i) + 2]));
    }
    r.header("boundary", nb);
    std::vector<BoundaryEdge> bnd(nb);
    for (auto& b : bnd) {
        auto t = r.expect(3, "boundary 'v_a v_b label'");
        b = {r.number<int>(t[0]), r.number<int>(t[1]), r.number<int>(t[2])};
    }
    std::vector<std::string_view> extra;
    if (r.next(extra))
        r.fail("trailing content after boundary section");
    return make_mesh(std::move(verts), std::move(elems), std::move(tags), bnd);
}

inline PolyMesh import_mesh(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open mesh file '" + path + "'");
    try {
        return read_mesh(in);
    } catch (const ParseError& e) {
        throw e.in_source(path);
    }
}

/// Writes the text format with round-trip (17 significant digit) coordinates.
inline void write_mesh(const PolyMesh& mesh, std::ostream& out)
{
    char buf[64];
    out << "polymesh 1\n";
    out << "vertices " << mesh.vertices.size() << '\n';
    for (const auto& p : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x(), p.y());
        out << buf;
    }
    out << "elements " << mesh.num_elements() << '\n';
    for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
        out << mesh.element_tag[k] << ' ' << mesh.elements[k].size();
        for (int v : mesh.elements[k])
            out << ' ' << v;
        out << '\n';
    }
    const auto bnd = mesh.boundary_edges();
    out << "boundary " << bnd.size() << '\n';
    for (const auto& b : bnd)
        out << b.va << ' ' << b.vb << ' ' << b.label << '\n';
}

inline void export_mesh(const PolyMesh& mesh, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write mesh file '" + path + "'");
    write_mesh(mesh, out);
    if (!out)
        throw Error("I/O error writing '" + path + "'");
}

} // namespace polydg
