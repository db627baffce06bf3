// affine4: classify surfaces in R^4, verify the parallel families, normalize pencils and
// export meshes. Reports go to stdout (or --out), diagnostics to stderr.

#include <affine4/report.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace affine4;

struct GridFlags {
    std::string scene;
    std::string grid;
    std::optional<double> tol_rank, tol_residual;
    std::optional<int> jet_order;
    std::string out;
};

void add_grid_flags(CLI::App* cmd, GridFlags& f) {
    cmd->add_option("scene", f.scene, "scene file (JSON)")->required();
    cmd->add_option("--grid", f.grid, "grid counts, NxM");
    cmd->add_option("--tol-rank", f.tol_rank, "rank tolerance");
    cmd->add_option("--tol-residual", f.tol_residual, "residual tolerance");
    cmd->add_option("--jet-order", f.jet_order, "jet order");
    cmd->add_option("--out", f.out, "write the report here instead of stdout");
}

SceneOverrides overrides(const GridFlags& f) {
    SceneOverrides o;
    if (!f.grid.empty()) {
        const auto x = f.grid.find_first_of("xX");
        int nu = 0, nv = 0;
        std::size_t a = 0, b = 0;
        try {
            if (x == std::string::npos) throw std::invalid_argument("");
            nu = std::stoi(f.grid.substr(0, x), &a);
            nv = std::stoi(f.grid.substr(x + 1), &b);
        } catch (const std::exception&) {
            a = 0;
        }
        if (a == 0 || a != x || b == 0 || x + 1 + b != f.grid.size())
            throw InputError("--grid: expected NxM, got '" + f.grid + "'");
        o.counts = std::array<int, 2>{nu, nv};
    }
    o.tol_rank = f.tol_rank;
    o.tol_residual = f.tol_residual;
    o.jet_order = f.jet_order;
    return o;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw InputError(path + ": cannot write output");
}

int finish(const CommandResult& r, const std::string& out) {
    for (const auto& line : r.log) std::cerr << "affine4: " << line << "\n";
    write_output(out, r.output);
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Affine surfaces in R^4: classification, family verification, pencils, meshes", "affine4"};
    app.set_version_flag("--version", std::string(tool_version));
    app.require_subcommand(1);

    GridFlags classify_f;
    auto* classify = app.add_subcommand("classify", "surface type at every grid point");
    add_grid_flags(classify, classify_f);

    GridFlags verify_f;
    auto* verify = app.add_subcommand("verify-family", "check structure equations, normal form and parallelism");
    add_grid_flags(verify, verify_f);

    std::string h3s, h4s;
    double pencil_tol = default_tol_rank;
    bool pencil_json = false;
    auto* pencil = app.add_subcommand("normalize-pencil", "normal form of a pair of symmetric 2x2 matrices");
    pencil->add_option("--h3", h3s, "s11,s12,s22")->required();
    pencil->add_option("--h4", h4s, "s11,s12,s22")->required();
    pencil->add_option("--tol-rank", pencil_tol, "classification tolerance");
    pencil->add_flag("--json", pencil_json, "print JSON instead of text");

    GridFlags mesh_f;
    std::string project;
    std::optional<int> drop;
    auto* mesh = app.add_subcommand("export-mesh", "triangulated grid as Wavefront OBJ");
    mesh->add_option("scene", mesh_f.scene, "scene file (JSON)")->required();
    mesh->add_option("--grid", mesh_f.grid, "grid counts, NxM");
    auto* proj_opt = mesh->add_option("--project", project, "i,j,k (1-based) or 12 entries of a 3x4 matrix");
    auto* drop_opt = mesh->add_option("--drop", drop, "coordinate to drop (1-4)");
    proj_opt->excludes(drop_opt);
    mesh->add_option("--out", mesh_f.out, "OBJ file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_input;
    }

    try {
        if (*classify) return finish(run_classify(load_scene(classify_f.scene, overrides(classify_f))), classify_f.out);
        if (*verify) return finish(run_verify(load_scene(verify_f.scene, overrides(verify_f))), verify_f.out);
        if (*pencil) {
            const Pencil in{parse_sym2(h3s, "--h3"), parse_sym2(h4s, "--h4")};
            if (!(pencil_tol > 0.0)) throw InputError("--tol-rank: must be > 0");
            const NormalizationResult n = normalize_pencil(in, pencil_tol);
            std::cout << (pencil_json ? emit_json(normalization_json(in, n)) : normalization_text(in, n));
            return exit_ok;
        }
        if (*mesh) {
            const Scene s = load_scene(mesh_f.scene, overrides(mesh_f));
            Projection p;
            if (drop) p = projection_drop(*drop);
            else if (!project.empty()) p = parse_projection(project);
            else throw InputError("export-mesh: give --project or --drop");
            write_output(mesh_f.out, export_obj(s, p));
            return exit_ok;
        }
    } catch (const InputError& e) {
        std::cerr << "affine4: error: " << e.what() << "\n";
        return exit_input;
    } catch (const Error& e) {
        std::cerr << "affine4: " << e.kind() << ": " << e.what() << "\n";
        return exit_degenerate;
    }
    return exit_input;
}
