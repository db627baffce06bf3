#include <affine4/report.hpp>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <sstream>

using namespace affine4;
using nlohmann::json;

namespace {

const std::string cubic = R"({"kind": "family", "family": "I1", "gamma": ["1", "u", "u^2/2", "u^3/6"],
  "grid": {"u": [0, 1], "v": [0, 1], "counts": [5, 4]}})";

std::string scene_path(const char* name) { return std::string(AFFINE4_SCENES_DIR) + "/" + name; }

/// Message of the InputError raised while parsing, or "" when parsing succeeds.
std::string input_error(const std::string& text, const SceneOverrides& ov = {}) {
    try {
        parse_scene(text, ov);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST(SceneParse, FamilyCubic) {
    const Scene s = parse_scene(cubic);
    ASSERT_TRUE(s.is_family());
    EXPECT_TRUE(std::holds_alternative<FamilyI1>(std::get<FamilyKind>(s.surface)));
    EXPECT_EQ(s.grid.nu, 5);
    EXPECT_EQ(s.grid.nv, 4);
    EXPECT_EQ(s.tol.rank, 1e-9);
    EXPECT_EQ(s.jet_order, default_jet_order);
}

TEST(SceneParse, AllBundledScenesLoad) {
    for (const char* name : {"general_paraboloid.json", "general_plane_no_xi.json", "i1_cubic.json",
                             "i1_cubic_general.json", "i1_cubic_offset.json", "i1_cubic_perturbed.json", "i2_cubic.json",
                             "i2_exp_minus.json", "i2_exp_plus.json", "ii_circle.json"})
        EXPECT_NO_THROW(load_scene(scene_path(name))) << name;
    EXPECT_THROW(load_scene(scene_path("invalid_counts.json")), InputError);
}

TEST(SceneParse, ErrorsNameTheOffendingField) {
    EXPECT_TRUE(contains(input_error(R"({"kind": "family", "family": "I1", "gamma": ["1","u","u^2","u^3"],
        "grid": {"counts": [1, 5]}})"), "scene.grid.counts"));
    EXPECT_TRUE(contains(input_error(R"({"kind": "family", "family": "I1", "gamma": ["1","u","u^2","u^3"],
        "grid": {"u": [1, 0]}})"), "scene.grid.u"));
    EXPECT_TRUE(contains(input_error(R"({"kind": "family", "family": "I1", "gamma": ["1","u","u^2","u^3"],
        "tolerances": {"rank": 0}})"), "scene.tolerances.rank"));
    EXPECT_TRUE(contains(input_error(R"({"kind": "family", "family": "I1", "gamma": ["1","u","u^2","u^3"],
        "colour": 1})"), "scene.colour: unknown key"));
    EXPECT_TRUE(contains(input_error(R"({"kind": "family", "family": "I1", "gamma": ["1","u + * u","u^2","u^3"]})"),
                         "scene.gamma[1]"));
    EXPECT_TRUE(contains(input_error(R"({"kind": "family", "family": "I1", "gamma": ["1","v","u^2","u^3"]})"),
                         "scene.gamma"));
    EXPECT_TRUE(contains(input_error(R"({"kind": "family", "family": "I2", "gamma": ["1","u","u^2","u^3"],
        "epsilon": 0})"), "scene.epsilon"));
    EXPECT_TRUE(contains(input_error(R"({"kind": "family", "family": "III"})"), "scene.family"));
    EXPECT_TRUE(contains(input_error(R"({"kind": "surface"})"), "scene.kind"));
    EXPECT_TRUE(contains(input_error(R"({"family": "I1"})"), "scene.kind: missing"));
    EXPECT_TRUE(contains(input_error(R"({"kind": "general", "x": ["u","v","0","0"], "xi1": ["0","0","1","0"]})"),
                         "together"));
    EXPECT_TRUE(contains(input_error("[1, 2"), "invalid JSON"));
    EXPECT_TRUE(contains(input_error(R"({"kind": "family", "family": "I1", "gamma": ["1","u","u^2","u^3"],
        "jet_order": 99})"), "scene.jet_order"));
}

TEST(SceneParse, FileErrorsCarryThePath) {
    try {
        load_scene(scene_path("invalid_counts.json"));
        FAIL();
    } catch (const InputError& e) {
        EXPECT_TRUE(contains(e.what(), "invalid_counts.json: scene.grid.counts"));
    }
    EXPECT_THROW(load_scene(scene_path("missing.json")), InputError);
}

TEST(SceneParse, OverridesApplyAndValidate) {
    SceneOverrides ov;
    ov.counts = std::array<int, 2>{3, 7};
    ov.tol_residual = 1e-6;
    ov.jet_order = 8;
    const Scene s = parse_scene(cubic, ov);
    EXPECT_EQ(s.grid.nu, 3);
    EXPECT_EQ(s.grid.nv, 7);
    EXPECT_EQ(s.tol.residual, 1e-6);
    EXPECT_EQ(s.jet_order, 8);

    SceneOverrides bad;
    bad.counts = std::array<int, 2>{1, 4};
    EXPECT_TRUE(contains(input_error(cubic, bad), "--grid"));
    SceneOverrides neg;
    neg.tol_rank = -1.0;
    EXPECT_TRUE(contains(input_error(cubic, neg), "--tol"));
}

TEST(SceneRun, VerifyReportIsDeterministic) {
    const Scene s = parse_scene(cubic);
    const CommandResult a = run_verify(s), b = run_verify(s);
    EXPECT_EQ(a.exit_code, exit_ok);
    EXPECT_EQ(a.output, b.output);
    const json j = json::parse(a.output);
    EXPECT_EQ(j["tool"], "affine4");
    EXPECT_EQ(j["command"], "verify-family");
    EXPECT_EQ(j["summary"]["status"], "pass");
    EXPECT_EQ(j["summary"]["points"], 20);
    EXPECT_EQ(j["points"].size(), 20u);
}

TEST(SceneRun, DigestTracksInputsAndSettings) {
    const Scene s = parse_scene(cubic);
    SceneOverrides ov;
    ov.tol_residual = 1e-7;
    const Scene t = parse_scene(cubic, ov);
    const auto digest = [](const CommandResult& r) { return json::parse(r.output)["input_digest"].get<std::string>(); };
    EXPECT_EQ(digest(run_verify(s)), digest(run_verify(s)));
    EXPECT_NE(digest(run_verify(s)), digest(run_verify(t)));
    EXPECT_NE(digest(run_verify(s)), digest(run_classify(s)));
    EXPECT_EQ(digest(run_verify(s)).rfind("fnv1a64:", 0), 0u);
}

TEST(SceneRun, SummaryMaximaAreRecordMaxima) {
    const json j = json::parse(run_verify(parse_scene(cubic)).output);
    for (const auto& [name, m] : j["summary"]["maxima"].items()) {
        double want = 0.0;
        for (const auto& p : j["points"]) want = std::max(want, p["checks"][name].get<double>());
        EXPECT_EQ(m.get<double>(), want) << name;
    }
}

TEST(SceneRun, RecordsSortedByPoint) {
    const json j = json::parse(run_classify(parse_scene(cubic)).output);
    const auto& pts = j["points"];
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const auto a = std::pair{pts[k - 1]["u"].get<double>(), pts[k - 1]["v"].get<double>()};
        const auto b = std::pair{pts[k]["u"].get<double>(), pts[k]["v"].get<double>()};
        EXPECT_LT(a, b);
    }
}

TEST(SceneRun, ClassifyParaboloid) {
    const CommandResult r = run_classify(load_scene(scene_path("general_paraboloid.json")));
    EXPECT_EQ(r.exit_code, exit_ok);
    const json j = json::parse(r.output);
    EXPECT_EQ(j["summary"]["dominant_type"], "III");
    EXPECT_LT(j["summary"]["maxima"]["reconstruction"].get<double>(), 1e-10);
}

TEST(SceneRun, PerturbedBundleFails) {
    const CommandResult r = run_verify(load_scene(scene_path("i1_cubic_perturbed.json")));
    EXPECT_EQ(r.exit_code, exit_failed);
    EXPECT_GT(json::parse(r.output)["summary"]["maxima"]["cubic_form"].get<double>(), 1e-3);
    ASSERT_FALSE(r.log.empty());
}

TEST(SceneRun, DegenerateFamilyExitsThree) {
    const CommandResult r = run_verify(load_scene(scene_path("i2_cubic.json")));
    EXPECT_EQ(r.exit_code, exit_degenerate);
    EXPECT_TRUE(json::parse(r.output)["summary"]["clip_reasons"].contains("DegenerateCoefficient"));
}

TEST(SceneRun, GeneralSceneWithoutBundleCannotBeVerified) {
    EXPECT_THROW(run_verify(load_scene(scene_path("general_plane_no_xi.json"))), InputError);
}

TEST(Json, RealFormatting) {
    EXPECT_EQ(format_real(-0.0), "0.0");
    EXPECT_EQ(format_real(0.1), "0.10000000000000001");
    EXPECT_EQ(format_real(2.0), "2.0");
    EXPECT_EQ(emit_json(ordered_json{{"x", std::numeric_limits<double>::infinity()}}), emit_json(ordered_json{{"x", nullptr}}));
}

TEST(Json, FnvReferenceValues) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
    EXPECT_EQ(hex64(0xaf63dc4c8601ec8cull), "af63dc4c8601ec8c");
}

TEST(PencilCommand, TypeIIText) {
    const Pencil p{parse_sym2("0,1,0", "--h3"), parse_sym2("1,0,0", "--h4")};
    const std::string t = normalization_text(p, normalize_pencil(p));
    EXPECT_TRUE(contains(t, "ptype: II\n"));
    EXPECT_TRUE(contains(t, "normal_pair: h3 = [0.0, 1.0, 0.0], h4 = [1.0, 0.0, 0.0]"));
}

TEST(PencilCommand, Json) {
    const Pencil p{parse_sym2("1,0,-1", "--h3"), parse_sym2("0,1,0", "--h4")};
    const json j = json::parse(emit_json(normalization_json(p, normalize_pencil(p))));
    EXPECT_EQ(j["ptype"], "I");
    EXPECT_LT(j["residual"].get<double>(), 1e-12);
}

TEST(PencilCommand, MalformedNumbers) {
    EXPECT_THROW(parse_sym2("1,x,0", "--h3"), InputError);
    EXPECT_THROW(parse_sym2("1,,0", "--h3"), InputError);
    EXPECT_THROW(parse_sym2("1,0", "--h3"), InputError);
    EXPECT_THROW(parse_sym2("1,0,nan", "--h3"), InputError);
    EXPECT_THROW(parse_sym2("1,0,2 3", "--h3"), InputError);
}

TEST(Projection, Forms) {
    const Projection d = projection_drop(2);
    const auto r = d.apply({{1, 2, 3, 4}});
    EXPECT_EQ(r, (std::array<double, 3>{1, 3, 4}));
    EXPECT_EQ(parse_projection("4,1,2").apply({{1, 2, 3, 4}}), (std::array<double, 3>{4, 1, 2}));
    EXPECT_NO_THROW(parse_projection("1,0,0,0, 0,1,0,0, 0,0,1,1"));
    EXPECT_THROW(parse_projection("0,0,0,0,0,0,0,0,0,0,0,0"), InputError);
    EXPECT_THROW(parse_projection("1,0,0,0,2,0,0,0,0,0,1,0"), InputError);  // two proportional rows
    EXPECT_THROW(parse_projection("1,2,5"), InputError);
    EXPECT_THROW(parse_projection("1,2"), InputError);
    EXPECT_THROW(projection_drop(0), InputError);
}

TEST(Mesh, Combinatorics) {
    SceneOverrides ov;
    ov.counts = std::array<int, 2>{4, 3};
    const Scene s = parse_scene(cubic, ov);
    const std::string obj = export_obj(s, projection_drop(4));
    std::istringstream in(obj);
    std::string line;
    int v = 0;
    std::vector<std::array<int, 3>> faces;
    while (std::getline(in, line)) {
        if (line.rfind("v ", 0) == 0) ++v;
        if (line.rfind("f ", 0) == 0) {
            std::istringstream ls(line.substr(2));
            std::array<int, 3> f{};
            ls >> f[0] >> f[1] >> f[2];
            faces.push_back(f);
        }
    }
    EXPECT_EQ(v, 12);
    ASSERT_EQ(faces.size(), 12u);
    EXPECT_EQ(faces[0], (std::array<int, 3>{1, 2, 6}));
    EXPECT_EQ(faces[1], (std::array<int, 3>{1, 6, 5}));
    for (const auto& f : faces)
        for (int k : f) {
            EXPECT_GE(k, 1);
            EXPECT_LE(k, 12);
        }
}

TEST(Mesh, VerticesLieOnTheSurface) {
    SceneOverrides ov;
    ov.counts = std::array<int, 2>{2, 2};
    const Scene s = parse_scene(cubic, ov);
    // x(1, 1) = gamma'(1) + gamma(1) = (1, 2, 1.5, 2/3) with the fourth coordinate dropped
    const std::string obj = export_obj(s, projection_drop(4));
    EXPECT_TRUE(contains(obj, "v 1.0 2.0 1.5\n"));
}
