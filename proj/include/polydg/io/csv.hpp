#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "../analysis.hpp"
#include "snapshot.hpp"

namespace polydg {

namespace csv {

/// Shortest round-trip is not required; 17 significant digits always are.
inline std::string number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string field(std::string_view s)
{
    if (s.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(s);
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + '"';
}

/// RFC 4180 record terminator.
inline void row(std::ostream& os, const std::vector<std::string>& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            os << ',';
        os << field(cells[i]);
    }
    os << "\r\n";
}

inline std::vector<std::string> report_cells(const ErrorReport& r)
{
    return {std::to_string(r.Nel), number(r.h), std::to_string(r.p), number(r.L2), number(r.dG)};
}

} // namespace csv

inline void write_csv(std::ostream& os, const ErrorReport& r)
{
    csv::row(os, {"Nel", "h", "p", "L2", "dG"});
    csv::row(os, csv::report_cells(r));
}

inline void write_csv(std::ostream& os, const ConvergenceTable& t)
{
    csv::row(os, {"Nel", "h", "p", "L2", "dG", "EOC_L2", "EOC_dG"});
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        auto cells = csv::report_cells(t.rows[i]);
        cells.push_back(t.eoc_L2[i] ? csv::number(*t.eoc_L2[i]) : "");
        cells.push_back(t.eoc_dG[i] ? csv::number(*t.eoc_dG[i]) : "");
        csv::row(os, cells);
    }
}

inline void write_csv(std::ostream& os, const FieldSnapshot& s)
{
    if (s.empty())
        throw ValidationError("snapshot is empty");
    std::vector<std::string> head{"x", "y"};
    head.insert(head.end(), s.names.begin(), s.names.end());
    csv::row(os, head);
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::vector<std::string> cells{csv::number(s.points[i].x()), csv::number(s.points[i].y())};
        for (const auto& comp : s.values)
            cells.push_back(csv::number(comp[i]));
        csv::row(os, cells);
    }
}

/// Renders to memory first so a failed write never leaves a half-written file.
template <typename T>
void write_csv(const T& data, const std::filesystem::path& path)
{
    std::ostringstream buf;
    write_csv(buf, data);
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << buf.str()) || !out.flush())
        throw Error("cannot write " + path.string());
}

} // namespace polydg
