#pragma once

// Report assembly for the command-line tool: classification and verification runs over a
// scene grid, pencil normalization output and OBJ mesh export.

#include <affine4/errors.hpp>
#include <affine4/families.hpp>
#include <affine4/immersion.hpp>
#include <affine4/pencil.hpp>
#include <affine4/scene.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace affine4 {

inline constexpr const char* tool_name = "affine4";
inline constexpr const char* tool_version = "1.0.0";

enum ExitCode : int { exit_ok = 0, exit_failed = 1, exit_input = 2, exit_degenerate = 3 };

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Deterministic JSON text

inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
    std::string s(buf);
    // keep it a JSON real
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

namespace detail {

inline void emit(const ordered_json& j, std::string& out, int depth) {
    const std::string pad(2 * (depth + 1), ' ');
    const std::string close(2 * depth, ' ');
    switch (j.type()) {
        case ordered_json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad + ordered_json(k).dump() + ": ";
                emit(v, out, depth + 1);
            }
            out += "\n" + close + "}";
            return;
        }
        case ordered_json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // short arrays of scalars stay on one line
            const bool flat = j.size() <= 4 && std::all_of(j.begin(), j.end(), [](const ordered_json& e) {
                                  return !e.is_structured();
                              });
            out += flat ? "[" : "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += flat ? ", " : ",\n";
                if (!flat) out += pad;
                emit(j[i], out, depth + 1);
            }
            out += flat ? "]" : "\n" + close + "]";
            return;
        }
        case ordered_json::value_t::number_float: {
            const double x = j.get<double>();
            out += std::isfinite(x) ? format_real(x) : "null";
            return;
        }
        default:
            out += j.dump();
    }
}

}  // namespace detail

/// Stable key order (insertion), 17 significant digits, non-finite reals as null.
inline std::string emit_json(const ordered_json& j) {
    std::string out;
    detail::emit(j, out, 0);
    out += "\n";
    return out;
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t x) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
    return buf;
}

// ---------------------------------------------------------------------------
// Grid runs

struct CommandResult {
    int exit_code = exit_ok;
    std::string output;           // report text for stdout / --out
    std::vector<std::string> log;  // diagnostics for stderr
};

namespace detail {

inline ordered_json settings_json(const Scene& s) {
    ordered_json j;
    j["grid"] = {{"u", {s.grid.u0, s.grid.u1}}, {"v", {s.grid.v0, s.grid.v1}}, {"counts", {s.grid.nu, s.grid.nv}}};
    j["tol_rank"] = s.tol.rank;
    j["tol_residual"] = s.tol.residual;
    j["jet_order"] = s.jet_order;
    return j;
}

inline std::string digest(const Scene& s, const std::string& command) {
    return "fnv1a64:" + hex64(fnv1a64(command + "\n" + s.canonical + "\n" + emit_json(settings_json(s))));
}

inline ordered_json sym_json(const Sym2<>& m) { return ordered_json::array({m.s11, m.s12, m.s22}); }

inline ordered_json mat_json(const Mat2<>& m) {
    return ordered_json::array({ordered_json::array({m(0, 0), m(0, 1)}), ordered_json::array({m(1, 0), m(1, 1)})});
}

inline ordered_json point_json(const PointRecord& r) {
    ordered_json p;
    p["u"] = r.u;
    p["v"] = r.v;
    if (r.error_kind) {
        p["error"] = {{"kind", *r.error_kind}, {"message", r.error_message.value_or("")}};
        return p;
    }
    p["type"] = std::string(to_string(r.surface.type));
    p["phi"] = sym_json(r.surface.phi);
    p["phi_class"] = std::string(to_string(r.surface.phi_class));
    ordered_json c = ordered_json::object();
    for (const auto& [k, v] : r.checks) c[k] = v;
    p["checks"] = c;
    return p;
}

/// Header, summary and sorted per-point records shared by classify and verify.
inline ordered_json grid_report(const Scene& s, const std::string& command, std::vector<PointRecord> points,
                                const std::map<std::string, double>& maxima, std::size_t clipped,
                                const std::map<std::string, std::size_t>& clip_reasons, const std::string& status,
                                bool passed) {
    std::sort(points.begin(), points.end(),
              [](const PointRecord& a, const PointRecord& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });

    std::map<PencilType, std::size_t> counts;
    for (const auto& p : points)
        if (!p.error_kind) ++counts[p.surface.type];
    std::optional<PencilType> dominant;
    std::size_t best = 0;
    for (PencilType t : all_pencil_types)
        if (counts[t] > best) best = counts[t], dominant = t;

    ordered_json rep;
    rep["tool"] = tool_name;
    rep["version"] = tool_version;
    rep["command"] = command;
    rep["input_digest"] = digest(s, command);
    rep["settings"] = settings_json(s);

    ordered_json sum;
    sum["points"] = points.size();
    sum["evaluated"] = points.size() - clipped;
    sum["clipped"] = clipped;
    ordered_json reasons = ordered_json::object();
    for (const auto& [k, v] : clip_reasons) reasons[k] = v;
    sum["clip_reasons"] = reasons;
    sum["dominant_type"] = dominant ? ordered_json(std::string(to_string(*dominant))) : ordered_json(nullptr);
    ordered_json tc = ordered_json::object();
    for (PencilType t : all_pencil_types)
        if (counts[t]) tc[std::string(to_string(t))] = counts[t];
    sum["type_counts"] = tc;
    ordered_json exc = ordered_json::array();
    for (const auto& p : points)
        if (!p.error_kind && dominant && p.surface.type != *dominant)
            exc.push_back({{"u", p.u}, {"v", p.v}, {"type", std::string(to_string(p.surface.type))}});
    sum["exceptional_points"] = exc;
    ordered_json mx = ordered_json::object();
    for (const auto& [k, v] : maxima) mx[k] = v;
    sum["maxima"] = mx;
    sum["status"] = status;
    sum["passed"] = passed;
    rep["summary"] = sum;

    ordered_json pts = ordered_json::array();
    for (const auto& p : points) pts.push_back(point_json(p));
    rep["points"] = pts;
    return rep;
}

inline bool too_degenerate(std::size_t clipped, std::size_t total) { return clipped * 10 > total; }

inline void log_clips(CommandResult& r, std::size_t clipped, std::size_t total,
                      const std::map<std::string, std::size_t>& reasons) {
    if (!clipped) return;
    std::string msg = "clipped " + std::to_string(clipped) + " of " + std::to_string(total) + " grid points:";
    for (const auto& [k, v] : reasons) msg += " " + k + " x" + std::to_string(v);
    r.log.push_back(msg);
}

}  // namespace detail

/// Surface type at every grid point.
inline CommandResult run_classify(const Scene& s) {
    const FrameFn frame = scene_frame_fn(s);
    std::vector<PointRecord> points;
    std::map<std::string, double> maxima;
    std::map<std::string, std::size_t> reasons;
    std::size_t clipped = 0;
    for (int j = 0; j < s.grid.nv; ++j) {
        for (int i = 0; i < s.grid.nu; ++i) {
            PointRecord rec;
            rec.u = s.grid.u_at(i);
            rec.v = s.grid.v_at(j);
            try {
                const FramePoint fp = frame(rec.u, rec.v);
                const FundamentalData fd = decompose_frame(fp, s.tol.rank);
                rec.surface = surface_type_of(fd, s.tol.rank);
                rec.checks["reconstruction"] = reconstruction_residual(fp, fd);
            } catch (const Error& e) {
                rec.error_kind = e.kind();
                rec.error_message = e.what();
                rec.checks.clear();
                ++clipped;
                ++reasons[e.kind()];
            }
            for (const auto& [k, v] : rec.checks) maxima[k] = std::max(maxima[k], v);
            points.push_back(std::move(rec));
        }
    }
    CommandResult r;
    const bool degenerate = detail::too_degenerate(clipped, points.size());
    r.exit_code = degenerate ? exit_degenerate : exit_ok;
    detail::log_clips(r, clipped, points.size(), reasons);
    r.output = emit_json(detail::grid_report(s, "classify", std::move(points), maxima, clipped, reasons,
                                             degenerate ? "degenerate" : "ok", !degenerate));
    return r;
}

/// Structure equations, normal form, cubic form and parallelism relations at every grid point.
/// General scenes must bring their own transversal bundle: a degenerate surface has no
/// canonical one, so parallelism is undefined without it.
inline CommandResult run_verify(const Scene& s) {
    if (const auto* def = std::get_if<SurfaceDef>(&s.surface); def && !def->xi1)
        throw InputError("verify-family: general scenes need transversal fields xi1 and xi2");
    const VerifyOptions opt = verify_options(s);
    std::optional<ChristoffelFn> closed;
    if (const auto* fk = std::get_if<FamilyKind>(&s.surface)) {
        const FamilyKind kind = *fk;
        const FamilyOptions fo = opt.family;
        closed = [kind, fo](double u, double v) {
            return family_christoffels(kind, curve_coefficients(kind, u, fo), v);
        };
    }
    VerificationReport rep = verify_frames(s.grid, scene_frame_fn(s), closed, opt);

    CommandResult r;
    const bool degenerate = detail::too_degenerate(rep.clipped, rep.points.size());
    const bool passed = !degenerate && rep.passed(s.tol.residual);
    r.exit_code = degenerate ? exit_degenerate : passed ? exit_ok : exit_failed;
    detail::log_clips(r, rep.clipped, rep.points.size(), rep.clip_reasons);
    if (!degenerate && !passed) {
        for (const auto& [k, v] : rep.maxima)
            if (!(v < s.tol.residual))
                r.log.push_back("check " + k + " max " + format_real(v) + " >= tolerance " + format_real(s.tol.residual));
        if (rep.non_type_ii)
            r.log.push_back(std::to_string(rep.non_type_ii) + " evaluated points are not of type II");
    }
    ordered_json j = detail::grid_report(s, "verify-family", std::move(rep.points), rep.maxima, rep.clipped,
                                         rep.clip_reasons, degenerate ? "degenerate" : passed ? "pass" : "fail",
                                         passed);
    j["summary"]["non_type_ii"] = rep.non_type_ii;
    r.output = emit_json(j);
    return r;
}

// ---------------------------------------------------------------------------
// Pencil normalization

/// Parses "a,b,c" style lists of finite reals.
inline std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        const auto trailing = item.find_first_not_of(" \t", used);
        if (item.empty() || used == 0 || trailing != std::string::npos || !std::isfinite(x))
            throw InputError(what + ": malformed number '" + item + "'");
        out.push_back(x);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

inline Sym2<> parse_sym2(const std::string& text, const std::string& what) {
    const auto v = parse_real_list(text, what);
    if (v.size() != 3) throw InputError(what + ": expected three numbers s11,s12,s22");
    return {v[0], v[1], v[2]};
}

inline ordered_json normalization_json(const Pencil& in, const NormalizationResult& n) {
    ordered_json j;
    j["input"] = {{"h3", detail::sym_json(in.h3)}, {"h4", detail::sym_json(in.h4)}};
    j["ptype"] = std::string(to_string(n.ptype));
    j["P"] = detail::mat_json(n.P);
    j["Qinv"] = detail::mat_json(n.Qinv);
    j["normal_pair"] = {{"h3", detail::sym_json(n.normal_pair.h3)}, {"h4", detail::sym_json(n.normal_pair.h4)}};
    j["residual"] = normalization_residual(in, n);
    return j;
}

inline std::string normalization_text(const Pencil& in, const NormalizationResult& n) {
    auto sym = [](const Sym2<>& m) {
        return "[" + format_real(m.s11) + ", " + format_real(m.s12) + ", " + format_real(m.s22) + "]";
    };
    auto mat = [](const Mat2<>& m) {
        return "[[" + format_real(m(0, 0)) + ", " + format_real(m(0, 1)) + "], [" + format_real(m(1, 0)) + ", " +
               format_real(m(1, 1)) + "]]";
    };
    std::ostringstream o;
    o << "ptype: " << to_string(n.ptype) << "\n"
      << "P: " << mat(n.P) << "\n"
      << "Qinv: " << mat(n.Qinv) << "\n"
      << "normal_pair: h3 = " << sym(n.normal_pair.h3) << ", h4 = " << sym(n.normal_pair.h4) << "\n"
      << "residual: " << format_real(normalization_residual(in, n)) << "\n";
    return o.str();
}

// ---------------------------------------------------------------------------
// Mesh export

/// Linear map R^4 -> R^3, row-major.
struct Projection {
    std::array<std::array<double, 4>, 3> m{};

    std::array<double, 3> apply(const Vec4<>& x) const {
        std::array<double, 3> r{};
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 4; ++k) r[i] += m[i][k] * x[k];
        return r;
    }
};

/// Keeps the coordinates i, j, k (1-based).
inline Projection projection_select(int i, int j, int k) {
    for (int c : {i, j, k})
        if (c < 1 || c > 4) throw InputError("--project: coordinate indices must be in 1..4");
    Projection p;
    p.m[0][i - 1] = 1.0;
    p.m[1][j - 1] = 1.0;
    p.m[2][k - 1] = 1.0;
    return p;
}

/// Drops coordinate k (1-based).
inline Projection projection_drop(int k) {
    if (k < 1 || k > 4) throw InputError("--drop: coordinate index must be in 1..4");
    std::array<int, 3> keep{};
    int n = 0;
    for (int c = 1; c <= 4; ++c)
        if (c != k) keep[n++] = c;
    return projection_select(keep[0], keep[1], keep[2]);
}

/// Rank 3 is required: the largest 3x3 minor must be significant against the entries.
inline Projection projection_matrix(const std::vector<double>& entries) {
    if (entries.size() != 12) throw InputError("--project: expected 3 indices or 12 matrix entries");
    Projection p;
    double scale = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 4; ++k) {
            p.m[i][k] = entries[4 * i + k];
            scale = std::max(scale, std::abs(p.m[i][k]));
        }
    double best = 0.0;
    for (int drop = 0; drop < 4; ++drop) {
        std::array<int, 3> c{};
        int n = 0;
        for (int k = 0; k < 4; ++k)
            if (k != drop) c[n++] = k;
        const auto& a = p.m;
        const double d = a[0][c[0]] * (a[1][c[1]] * a[2][c[2]] - a[1][c[2]] * a[2][c[1]]) -
                         a[0][c[1]] * (a[1][c[0]] * a[2][c[2]] - a[1][c[2]] * a[2][c[0]]) +
                         a[0][c[2]] * (a[1][c[0]] * a[2][c[1]] - a[1][c[1]] * a[2][c[0]]);
        best = std::max(best, std::abs(d));
    }
    if (!(scale > 0.0) || !(best > 1e-12 * scale * scale * scale))
        throw InputError("--project: projection matrix is rank deficient");
    return p;
}

/// Projection from a --project argument: "i,j,k" or twelve reals.
inline Projection parse_projection(const std::string& text) {
    const auto v = parse_real_list(text, "--project");
    if (v.size() == 3) {
        for (double x : v)
            if (x != std::floor(x)) throw InputError("--project: three values must be coordinate indices");
        return projection_select(static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]));
    }
    return projection_matrix(v);
}

/// Vertex (i, j) has 1-based index j * nu + i + 1; each grid cell gives two
/// counter-clockwise triangles in the (u, v) plane.
inline std::string export_obj(const Scene& s, const Projection& proj) {
    std::ostringstream o;
    o << "# " << tool_name << " " << tool_version << " mesh, " << s.grid.nu << " x " << s.grid.nv << " grid\n";
    for (int j = 0; j < s.grid.nv; ++j)
        for (int i = 0; i < s.grid.nu; ++i) {
            const auto p = proj.apply(scene_position(s, s.grid.u_at(i), s.grid.v_at(j)));
            for (double c : p)
                if (!std::isfinite(c)) throw DomainError("surface is not finite at a grid vertex");
            o << "v " << format_real(p[0]) << " " << format_real(p[1]) << " " << format_real(p[2]) << "\n";
        }
    auto idx = [&](int i, int j) { return j * s.grid.nu + i + 1; };
    for (int j = 0; j + 1 < s.grid.nv; ++j)
        for (int i = 0; i + 1 < s.grid.nu; ++i) {
            o << "f " << idx(i, j) << " " << idx(i + 1, j) << " " << idx(i + 1, j + 1) << "\n";
            o << "f " << idx(i, j) << " " << idx(i + 1, j + 1) << " " << idx(i, j + 1) << "\n";
        }
    return o.str();
}

}  // namespace affine4
