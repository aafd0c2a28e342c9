// Command-line front end: mesh utilities, configured solves, convergence studies and
// the assembly benchmark.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "polydg/polydg.hpp"

namespace fs = std::filesystem;
using namespace polydg;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_numerical = 2;

struct Globals
{
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string output_dir;
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string one_line(std::string s)
{
    for (char& c : s)
        if (c == '\n' || c == '\r')
            c = ' ';
    return s;
}

/// Flag, then config, then $POLYDG_OUTPUT_DIR, then ./polydg_output.
fs::path output_dir(const Globals& g, const RunConfig* cfg)
{
    if (!g.output_dir.empty())
        return g.output_dir;
    if (cfg && !cfg->output.directory.empty())
        return cfg->output.directory;
    if (const char* env = std::getenv("POLYDG_OUTPUT_DIR"); env && *env)
        return env;
    return "polydg_output";
}

RunConfig load(const std::string& path, const Globals& g)
{
    auto cfg = load_config(path);
    if (g.seed)
        cfg.mesh.seed = *g.seed;
    return cfg;
}

void print_report(const ErrorReport& r)
{
    std::cout << "Nel=" << r.Nel << " h=" << fmt(r.h) << " p=" << r.p << " L2=" << fmt(r.L2) << " dG=" << fmt(r.dG)
              << "\n";
}

Rectangle parse_domain(const std::string& s)
{
    std::stringstream ss(s);
    std::string item;
    std::vector<double> v;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("--domain: '" + item + "' is not a number");
        }
    }
    if (v.size() != 4)
        throw ValidationError("--domain expects x0,x1,y0,y1");
    Rectangle r{v[0], v[1], v[2], v[3]};
    r.validate();
    return r;
}

void print_mesh_info(const PolyMesh& m)
{
    std::cout << "Nel=" << m.num_elements() << " h=" << fmt(m.max_diameter()) << " area=" << fmt(m.total_area())
              << " internal_faces=" << m.num_internal_faces() << " boundary_faces=" << m.num_boundary_faces()
              << " mean_vertices=" << fmt(m.mean_vertices_per_element())
              << " max_neighbor_ratio=" << fmt(m.max_neighbor_diameter_ratio()) << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"polydg: polytopal discontinuous Galerkin solver kit"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed_value = 1;
    auto* seed_opt = app.add_option("--seed", seed_value, "Random seed for mesh generation");
    app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)");
    app.add_option("--output-dir", g.output_dir, "Output directory (default: $POLYDG_OUTPUT_DIR)");

    // mesh
    auto* mesh = app.add_subcommand("mesh", "Mesh generation and inspection");
    mesh->require_subcommand(1);
    auto* gen = mesh->add_subcommand("gen", "Lloyd-relaxed Voronoi mesh of a rectangle");
    int gen_n = 30, gen_lloyd = 50;
    std::string gen_domain = "0,1,0,1", gen_out;
    gen->add_option("--n", gen_n, "Number of elements")->required();
    gen->add_option("--domain", gen_domain, "x0,x1,y0,y1");
    gen->add_option("--lloyd", gen_lloyd, "Lloyd iterations");
    gen->add_option("--out", gen_out, "Output file (default: <output-dir>/mesh.txt)");
    auto* info = mesh->add_subcommand("info", "Mesh statistics");
    std::string info_path;
    info->add_option("file", info_path)->required();
    auto* agg = mesh->add_subcommand("agglomerate", "Merge elements into a coarser polygonal mesh");
    std::string agg_in, agg_out;
    std::size_t agg_target = 0;
    agg->add_option("file", agg_in)->required();
    agg->add_option("--target", agg_target, "Number of agglomerates")->required();
    agg->add_option("--out", agg_out, "Output file (default: <output-dir>/agglomerated.txt)");

    // solve
    auto* solve = app.add_subcommand("solve", "Run a configured simulation");
    std::string solve_physics, solve_config;
    solve->add_option("physics", solve_physics, "laplacian | heat | elastodynamics | poroacoustic")->required();
    solve->add_option("--config", solve_config)->required();

    // convergence
    auto* conv = app.add_subcommand("convergence", "h- or p-convergence study");
    std::string conv_kind, conv_config;
    conv->add_option("kind", conv_kind, "h | p")->required()->check(CLI::IsMember({"h", "p"}));
    conv->add_option("--config", conv_config)->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Benchmarks");
    bench->require_subcommand(1);
    auto* bench_asm = bench->add_subcommand("assembly", "Quadrature-free versus sub-tessellated assembly");
    std::string bench_config;
    bench_asm->add_option("--config", bench_config)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "polydg: error[usage]: " << one_line(e.what()) << "\n" << app.help();
        return exit_validation;
    }
    if (*seed_opt)
        g.seed = seed_value;

    try {
        set_num_threads(g.threads);
        if (*gen) {
            const auto r = parse_domain(gen_domain);
            const auto m = generate_voronoi_mesh(r, gen_n, gen_lloyd, g.seed.value_or(1));
            const fs::path out = gen_out.empty() ? output_dir(g, nullptr) / "mesh.txt" : fs::path(gen_out);
            if (out.has_parent_path())
                fs::create_directories(out.parent_path());
            export_mesh(m, out.string());
            print_mesh_info(m);
            std::cout << "wrote " << out.string() << "\n";
        } else if (*info) {
            print_mesh_info(import_mesh(info_path));
        } else if (*agg) {
            const auto a = agglomerate_with_report(import_mesh(agg_in), agg_target, g.seed.value_or(1));
            for (const auto& w : a.warnings)
                std::cerr << "polydg: warning: " << one_line(w) << "\n";
            const fs::path out = agg_out.empty() ? output_dir(g, nullptr) / "agglomerated.txt" : fs::path(agg_out);
            if (out.has_parent_path())
                fs::create_directories(out.parent_path());
            export_mesh(a.mesh, out.string());
            print_mesh_info(a.mesh);
            std::cout << "wrote " << out.string() << "\n";
        } else if (*solve) {
            const auto cfg = load(solve_config, g);
            if (cfg.physics != solve_physics)
                throw ValidationError("/physics: config describes '" + cfg.physics + "' but '" + solve_physics +
                                      "' was requested");
            const auto dir = output_dir(g, &cfg);
            const auto res = run_solve(cfg, dir);
            if (res.report)
                print_report(*res.report);
            else
                std::cout << "Nel=" << res.num_elements << " p=" << res.degree << "\n";
            if (!res.energy.empty())
                std::cout << "energy_initial=" << fmt(res.energy.front()) << " energy_final=" << fmt(res.energy.back())
                          << "\n";
            std::cout << "wrote " << res.files.size() << " file(s) to " << dir.string() << "\n";
        } else if (*conv) {
            const auto cfg = load(conv_config, g);
            const auto table = conv_kind == "h" ? run_h_convergence(cfg) : run_p_convergence(cfg);
            const auto dir = output_dir(g, &cfg);
            const auto path = dir / ("convergence_" + conv_kind + ".csv");
            write_csv(table, path);
            write_csv(std::cout, table);
            if (conv_kind == "h") {
                std::cout << "EOC_L2=" << fmt(table.eoc_L2.back().value_or(NAN))
                          << " EOC_dG=" << fmt(table.eoc_dG.back().value_or(NAN)) << "\n";
            } else {
                const auto a = log_error_slope(table, false), b = log_error_slope(table, true);
                std::cout << "slope_L2=" << fmt(a.slope) << " r_L2=" << fmt(a.r) << " slope_dG=" << fmt(b.slope)
                          << " r_dG=" << fmt(b.r) << "\n";
            }
            std::cout << "wrote " << path.string() << "\n";
        } else if (*bench_asm) {
            const auto cfg = load(bench_config, g);
            std::shared_ptr<const PolyMesh> m;
            if (cfg.benchmark.mesh == "config") {
                m = build_mesh(cfg.mesh);
            } else {
                MeshConfig mc = cfg.mesh;
                mc.type = "voronoi";
                mc.elements = cfg.benchmark.elements;
                mc.lloyd = std::max(mc.lloyd, 100);
                m = build_mesh(mc);
            }
            std::vector<BenchmarkRecord> recs;
            for (int ell : cfg.benchmark.degrees) {
                recs.push_back(benchmark_assembly(m, ell, cfg.benchmark.repetitions));
                const auto& r = recs.back();
                std::cout << "p=" << r.degree << " Nel=" << r.Nel << " QF=" << fmt(r.qf) << " ST=" << fmt(r.st)
                          << " RHS=" << fmt(r.rhs) << " solve=" << fmt(r.solve) << " outputs=" << fmt(r.output)
                          << " agreement=" << fmt(r.agreement) << "\n";
            }
            const auto dir = output_dir(g, &cfg);
            fs::create_directories(dir);
            std::ofstream f(dir / "benchmark.json");
            write_json(f, recs);
            if (!f)
                throw Error("cannot write " + (dir / "benchmark.json").string());
        }
    } catch (const NumericalError& e) {
        std::cerr << "polydg: error[numerical]: " << one_line(e.what()) << "\n";
        return exit_numerical;
    } catch (const ValidationError& e) {
        std::cerr << "polydg: error[validation]: " << one_line(e.what()) << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "polydg: error[io]: " << one_line(e.what()) << "\n";
        return exit_validation;
    }
    return exit_ok;
}
