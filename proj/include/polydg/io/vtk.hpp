#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "csv.hpp"
#include "snapshot.hpp"

namespace polydg {

/// Legacy ASCII unstructured grid: every consecutive sample triple is a triangle (type 5).
inline void write_vtk(std::ostream& os, const FieldSnapshot& s)
{
    if (s.empty())
        throw ValidationError("snapshot is empty");
    if (s.size() % 3 != 0)
        throw ValidationError("snapshot samples do not form triangles");
    for (const auto& comp : s.values)
        if (comp.size() != s.size())
            throw ValidationError("snapshot component length mismatch");
    const std::size_t n = s.size(), ntri = n / 3;
    os << "# vtk DataFile Version 3.0\n";
    os << "polydg t=" << csv::number(s.time) << "\n";
    os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << n << " double\n";
    for (const auto& p : s.points)
        os << csv::number(p.x()) << ' ' << csv::number(p.y()) << " 0\n";
    os << "CELLS " << ntri << ' ' << 4 * ntri << '\n';
    for (std::size_t t = 0; t < ntri; ++t)
        os << "3 " << 3 * t << ' ' << 3 * t + 1 << ' ' << 3 * t + 2 << '\n';
    os << "CELL_TYPES " << ntri << '\n';
    for (std::size_t t = 0; t < ntri; ++t)
        os << "5\n";
    os << "POINT_DATA " << n << '\n';
    for (std::size_t c = 0; c < s.names.size(); ++c) {
        os << "SCALARS " << s.names[c] << " double 1\nLOOKUP_TABLE default\n";
        for (double v : s.values[c])
            os << csv::number(v) << '\n';
    }
}

inline void write_vtk(const FieldSnapshot& s, const std::filesystem::path& path)
{
    std::ostringstream buf;
    write_vtk(buf, s);
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << buf.str()) || !out.flush())
        throw Error("cannot write " + path.string());
}

} // namespace polydg
