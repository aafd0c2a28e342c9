#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "polydg/polydg.hpp"

namespace polydg::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("polydg_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::filesystem::path source_dir() { return POLYDG_SOURCE_DIR; }

inline std::vector<Point> unit_square() { return {{0, 0}, {1, 0}, {1, 1}, {0, 1}}; }

inline std::vector<Point> regular_polygon(int n, double r = 1.0, Point c = Point::Zero(), double phase = 0.0)
{
    std::vector<Point> p;
    for (int i = 0; i < n; ++i) {
        const double th = phase + 2.0 * std::numbers::pi * i / n;
        p.push_back(c + r * Point(std::cos(th), std::sin(th)));
    }
    return p;
}

/// Random convex polygon: sorted angles on a jittered circle.
inline std::vector<Point> random_convex_polygon(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> nv(3, 9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = nv(rng);
    std::vector<double> th(static_cast<std::size_t>(n));
    for (auto& t : th)
        t = 2.0 * std::numbers::pi * u(rng);
    std::sort(th.begin(), th.end());
    const Point c(u(rng) * 2 - 1, u(rng) * 2 - 1);
    const double r = 0.2 + u(rng);
    std::vector<Point> p;
    for (double t : th)
        p.push_back(c + r * Point(std::cos(t), std::sin(t)));
    return p;
}

/// Random star-shaped (generally non-convex) polygon about a centre.
inline std::vector<Point> random_star_polygon(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> nv(5, 10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = nv(rng);
    const Point c(u(rng) - 0.5, u(rng) - 0.5);
    std::vector<Point> p;
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * std::numbers::pi * (i + 0.3 * u(rng)) / n;
        const double r = 0.3 + 0.7 * u(rng);
        p.push_back(c + r * Point(std::cos(th), std::sin(th)));
    }
    return p;
}

inline std::shared_ptr<const PolyMesh> shared(PolyMesh m) { return std::make_shared<const PolyMesh>(std::move(m)); }

} // namespace polydg::testing
