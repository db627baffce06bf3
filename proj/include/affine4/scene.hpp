#pragma once

// Scene files: JSON documents describing a surface (one of the parallel families or a
// general parametrization), a sampling grid and tolerances. Schema in README.md.

#include <affine4/errors.hpp>
#include <affine4/expr.hpp>
#include <affine4/families.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>

namespace affine4 {

struct Tolerances {
    double rank = default_tol_rank;
    double residual = 1e-8;
};

struct Scene {
    /// FamilyKind for family scenes, SurfaceDef for general ones.
    std::variant<FamilyKind, SurfaceDef> surface;
    std::optional<TransversalOffset> xi_offset;  // family scenes only
    GridSpec grid;
    Tolerances tol;
    int jet_order = default_jet_order;
    /// Canonical JSON of the parsed document, hashed into report digests.
    std::string canonical;

    bool is_family() const { return std::holds_alternative<FamilyKind>(surface); }
};

/// Command-line overrides applied after parsing; validated like scene fields.
struct SceneOverrides {
    std::optional<std::array<int, 2>> counts;
    std::optional<double> tol_rank, tol_residual;
    std::optional<int> jet_order;
};

inline constexpr int max_jet_order = 24;

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void fail_at(const std::string& path, const std::string& msg) {
    throw InputError(path + ": " + msg);
}

inline void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, _] : obj.items())
        if (!ok.count(k)) fail_at(path + "." + k, "unknown key");
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail_at(path + "." + key, "missing");
    return obj.at(key);
}

inline double real_at(const json& j, const std::string& path) {
    if (!j.is_number()) fail_at(path, "expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) fail_at(path, "must be finite");
    return x;
}

inline int int_at(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail_at(path, "expected an integer");
    return j.get<int>();
}

inline std::array<Ast, 4> components_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 4) fail_at(path, "expected an array of 4 expression strings");
    std::array<Ast, 4> out;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        if (!j[i].is_string()) fail_at(p, "expected an expression string");
        try {
            out[i] = parse(j[i].get<std::string>());
        } catch (const SyntaxError& e) {
            fail_at(p, e.what());
        }
    }
    return out;
}

inline CurveDef curve_at(const json& j, const std::string& path) {
    const auto comps = components_at(j, path);
    try {
        return make_curve(comps);
    } catch (const InputError& e) {
        fail_at(path, e.what());
    }
}

inline std::array<double, 2> pair_at(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail_at(path, "expected [lo, hi]");
    return {real_at(j[0], path + "[0]"), real_at(j[1], path + "[1]")};
}

inline void validate_grid(const GridSpec& g, const std::string& path) {
    if (g.nu < 2 || g.nv < 2) fail_at(path + ".counts", "counts must be >= 2");
    if (!(g.u1 > g.u0)) fail_at(path + ".u", "range must be nonempty (lo < hi)");
    if (!(g.v1 > g.v0)) fail_at(path + ".v", "range must be nonempty (lo < hi)");
}

inline void validate_tolerances(const Tolerances& t, const std::string& path) {
    if (!(t.rank > 0.0)) fail_at(path + ".rank", "must be > 0");
    if (!(t.residual > 0.0)) fail_at(path + ".residual", "must be > 0");
}

inline void validate_order(int order, const std::string& path) {
    if (order < 1 || order > max_jet_order)
        fail_at(path, "must be between 1 and " + std::to_string(max_jet_order));
}

}  // namespace detail

inline Scene parse_scene(const std::string& text, const SceneOverrides& ov = {}) {
    using detail::fail_at;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("scene: invalid JSON (") + e.what() + ")");
    }
    if (!doc.is_object()) fail_at("scene", "expected a JSON object");
    const std::string root = "scene";

    Scene s;
    const auto& kind_j = detail::require(doc, root, "kind");
    if (!kind_j.is_string()) fail_at(root + ".kind", "expected \"family\" or \"general\"");
    const std::string kind = kind_j.get<std::string>();

    if (kind == "family") {
        detail::allow_keys(doc, root,
                           {"kind", "family", "gamma", "epsilon", "alpha", "beta", "xi_offset", "grid", "tolerances",
                            "jet_order"});
        const auto& fam_j = detail::require(doc, root, "family");
        const std::string fam = fam_j.is_string() ? fam_j.get<std::string>() : "";
        auto forbid = [&](const char* key) {
            if (doc.contains(key)) fail_at(root + "." + key, "not used by family " + fam);
        };
        if (fam == "I1") {
            forbid("alpha"), forbid("beta"), forbid("epsilon");
            s.surface = FamilyKind{FamilyI1{detail::curve_at(detail::require(doc, root, "gamma"), root + ".gamma")}};
        } else if (fam == "I2") {
            forbid("alpha"), forbid("beta");
            const int eps = detail::int_at(detail::require(doc, root, "epsilon"), root + ".epsilon");
            if (eps != 1 && eps != -1) fail_at(root + ".epsilon", "must be 1 or -1");
            s.surface = FamilyKind{
                FamilyI2{detail::curve_at(detail::require(doc, root, "gamma"), root + ".gamma"), eps}};
        } else if (fam == "II") {
            forbid("gamma"), forbid("epsilon");
            s.surface = FamilyKind{FamilyII{detail::curve_at(detail::require(doc, root, "alpha"), root + ".alpha"),
                                            detail::curve_at(detail::require(doc, root, "beta"), root + ".beta")}};
        } else {
            fail_at(root + ".family", "expected \"I1\", \"I2\" or \"II\"");
        }
        if (doc.contains("xi_offset")) {
            const auto& off = doc["xi_offset"];
            const std::string p = root + ".xi_offset";
            if (!off.is_object()) fail_at(p, "expected an object with xi1 and xi2");
            detail::allow_keys(off, p, {"xi1", "xi2"});
            s.xi_offset = TransversalOffset{detail::components_at(detail::require(off, p, "xi1"), p + ".xi1"),
                                            detail::components_at(detail::require(off, p, "xi2"), p + ".xi2")};
        }
    } else if (kind == "general") {
        detail::allow_keys(doc, root, {"kind", "x", "xi1", "xi2", "grid", "tolerances", "jet_order"});
        auto x = detail::components_at(detail::require(doc, root, "x"), root + ".x");
        std::optional<std::array<Ast, 4>> xi1, xi2;
        if (doc.contains("xi1")) xi1 = detail::components_at(doc["xi1"], root + ".xi1");
        if (doc.contains("xi2")) xi2 = detail::components_at(doc["xi2"], root + ".xi2");
        if (xi1.has_value() != xi2.has_value()) fail_at(root, "xi1 and xi2 must be given together");
        s.surface = make_surface(std::move(x), std::move(xi1), std::move(xi2));
    } else {
        fail_at(root + ".kind", "expected \"family\" or \"general\"");
    }

    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        const std::string p = root + ".grid";
        if (!g.is_object()) fail_at(p, "expected an object");
        detail::allow_keys(g, p, {"u", "v", "counts"});
        if (g.contains("u")) {
            const auto r = detail::pair_at(g["u"], p + ".u");
            s.grid.u0 = r[0], s.grid.u1 = r[1];
        }
        if (g.contains("v")) {
            const auto r = detail::pair_at(g["v"], p + ".v");
            s.grid.v0 = r[0], s.grid.v1 = r[1];
        }
        if (g.contains("counts")) {
            const auto& c = g["counts"];
            if (!c.is_array() || c.size() != 2) fail_at(p + ".counts", "expected [nu, nv]");
            s.grid.nu = detail::int_at(c[0], p + ".counts[0]");
            s.grid.nv = detail::int_at(c[1], p + ".counts[1]");
        }
    }
    if (doc.contains("tolerances")) {
        const auto& t = doc["tolerances"];
        const std::string p = root + ".tolerances";
        if (!t.is_object()) fail_at(p, "expected an object");
        detail::allow_keys(t, p, {"rank", "residual"});
        if (t.contains("rank")) s.tol.rank = detail::real_at(t["rank"], p + ".rank");
        if (t.contains("residual")) s.tol.residual = detail::real_at(t["residual"], p + ".residual");
    }
    if (doc.contains("jet_order")) s.jet_order = detail::int_at(doc["jet_order"], root + ".jet_order");

    detail::validate_grid(s.grid, root + ".grid");
    detail::validate_tolerances(s.tol, root + ".tolerances");
    detail::validate_order(s.jet_order, root + ".jet_order");

    if (ov.counts) {
        s.grid.nu = (*ov.counts)[0];
        s.grid.nv = (*ov.counts)[1];
        detail::validate_grid(s.grid, "--grid");
    }
    if (ov.tol_rank) s.tol.rank = *ov.tol_rank;
    if (ov.tol_residual) s.tol.residual = *ov.tol_residual;
    detail::validate_tolerances(s.tol, "--tol");
    if (ov.jet_order) {
        s.jet_order = *ov.jet_order;
        detail::validate_order(s.jet_order, "--jet-order");
    }

    s.canonical = doc.dump();
    return s;
}

inline Scene load_scene(const std::string& path, const SceneOverrides& ov = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open scene file");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_scene(ss.str(), ov);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

inline VerifyOptions verify_options(const Scene& s) {
    VerifyOptions o;
    o.family.order = s.jet_order;
    o.family.tol_rank = s.tol.rank;
    o.tol_classify = s.tol.rank;
    return o;
}

/// Frame generator for the scene's surface.
inline FrameFn scene_frame_fn(const Scene& s) {
    if (const auto* fk = std::get_if<FamilyKind>(&s.surface))
        return family_frame_fn(*fk, verify_options(s).family, s.xi_offset);
    const SurfaceDef def = std::get<SurfaceDef>(s.surface);
    const int order = s.jet_order;
    return [def, order](double u, double v) { return surface_frame(def, u, v, order); };
}

/// Surface point only.
inline Vec4<> scene_position(const Scene& s, double u, double v) {
    if (const auto* fk = std::get_if<FamilyKind>(&s.surface)) return family_position(*fk, u, v);
    const Binding<double> b{u, v};
    const auto& x = std::get<SurfaceDef>(s.surface).x;
    return {{eval(x[0], b), eval(x[1], b), eval(x[2], b), eval(x[3], b)}};
}

}  // namespace affine4
