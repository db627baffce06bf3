#pragma once

// The three families of 1-degenerate parallel surfaces in R^4 with their transversal
// bundles, and a grid verifier for all structure equations.
//
//   I.1  x = gamma' + v gamma
//   I.2  x = (eps gamma + gamma'') + v gamma',   eps = +-1
//   II   x = alpha + v beta,                     beta'' = -beta
//
// with G = det(gamma, gamma', gamma'', gamma'''), L = ln G and
// gamma'''' = L' gamma''' + a gamma'' + b gamma' + c gamma   (I), resp.
// D = det(alpha'', alpha', beta', beta), L = ln D and
// alpha''' = L' alpha'' + a alpha' + b beta' + c beta         (II).
// L' is always taken as the logarithmic derivative G'/G (resp. D'/D), and (ln c)' as c'/c,
// so negative G, D or c are fine.

#include <affine4/errors.hpp>
#include <affine4/expr.hpp>
#include <affine4/immersion.hpp>
#include <affine4/jet.hpp>
#include <affine4/linalg.hpp>
#include <affine4/pencil.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace affine4 {

struct FamilyI1 {
    CurveDef gamma;
};
struct FamilyI2 {
    CurveDef gamma;
    int epsilon = 1;
};
struct FamilyII {
    CurveDef alpha, beta;
};
using FamilyKind = std::variant<FamilyI1, FamilyI2, FamilyII>;

inline std::string family_name(const FamilyKind& k) {
    return std::visit(
        [](const auto& f) -> std::string {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, FamilyI1>) return "I1";
            else if constexpr (std::is_same_v<F, FamilyI2>) return "I2";
            else return "II";
        },
        k);
}

inline FamilyI2 make_family_i2(CurveDef gamma, int epsilon) {
    if (epsilon != 1 && epsilon != -1) throw InputError("epsilon must be +1 or -1");
    return FamilyI2{std::move(gamma), epsilon};
}

struct FamilyOptions {
    int order = default_jet_order;
    double tol_rank = default_tol_rank;
    /// Relative tolerance for beta'' = -beta in family II.
    double tol_beta = 1e-9;
};

/// Jets of the curve and its first `count - 1` derivatives at u.
inline std::vector<Vec4<Jet1>> curve_jets(const CurveDef& c, double u, int order, int count) {
    Binding<Jet1> b{Jet1::seed(0, u, order), std::nullopt};
    Vec4<Jet1> g{{eval(c.components[0], b), eval(c.components[1], b), eval(c.components[2], b),
                  eval(c.components[3], b)}};
    std::vector<Vec4<Jet1>> out{g};
    for (int k = 1; k < count; ++k) {
        if (out.back()[0].order() == 0)
            throw InsufficientOrder("jet order too small for the curve derivatives this family needs");
        out.push_back(derivative(out.back(), 0));
    }
    return out;
}

struct CurveCoefficients {
    /// G for the I families, D for family II.
    Jet1 det;
    /// L' = det'/det.
    Jet1 Lp;
    /// L'', a' (I families) and (ln c)' = c'/c (I.2 only); zero elsewhere.
    Jet1 Lpp, ap, dlog_c;
    Jet1 a, b, c;
    /// Coefficient of gamma''' (resp. alpha'') from the linear solve; equals L' by Liouville.
    double Lp_from_solve = 0.0;
    /// Relative residual of the fourth-derivative (resp. alpha''') decomposition.
    double residual = 0.0;
};

namespace detail {

inline double scalar_floor(double tol_rank, std::initializer_list<double> xs) {
    double m = 1.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return tol_rank * m;
}

inline void decompose_top(CurveCoefficients& cc, const std::array<Vec4<Jet1>, 4>& basis, const Vec4<Jet1>& top,
                          double tol_rank) {
    Vec4<Jet1> coef;
    try {
        coef = solve4(basis, top, tol_rank);
    } catch (const SingularFrame& e) {
        throw DegenerateCurve(e.what());
    }
    cc.Lp_from_solve = coef[0].value();
    cc.a = coef[1];
    cc.b = coef[2];
    cc.c = coef[3];
    const Vec4<> t = values(top);
    const Vec4<> back = values(combine(basis, coef));
    cc.residual = norm(t - back) / std::max(1.0, norm(t));
}

inline void check_det(const Jet1& det, const std::array<Vec4<Jet1>, 4>& cols, double tol_rank, const char* what) {
    double max_norm = 0.0;
    for (const auto& c : cols) max_norm = std::max(max_norm, norm(values(c)));
    if (!(std::abs(det.value()) > tol_rank * std::pow(max_norm, 4)))
        throw DegenerateCurve(std::string(what) + " vanishes (|det| = " + std::to_string(std::abs(det.value())) + ")");
}

}  // namespace detail

inline CurveCoefficients curve_coefficients(const FamilyKind& kind, double u, const FamilyOptions& opt = {}) {
    CurveCoefficients cc;
    if (const auto* ii = std::get_if<FamilyII>(&kind)) {
        const auto al = curve_jets(ii->alpha, u, opt.order, 4);
        const auto be = curve_jets(ii->beta, u, opt.order, 3);
        const Vec4<> b0 = values(be[0]), b2 = values(be[2]);
        if (norm(b2 + b0) > opt.tol_beta * std::max(1.0, norm(b0)))
            throw InvalidFamily("family II needs beta'' = -beta");
        const std::array<Vec4<Jet1>, 4> cols{al[2], al[1], be[1], be[0]};
        cc.det = det4(cols);
        detail::check_det(cc.det, cols, opt.tol_rank, "D = det(alpha'', alpha', beta', beta)");
        cc.Lp = cc.det.derivative() / cc.det;
        detail::decompose_top(cc, cols, al[3], opt.tol_rank);
        cc.Lpp = cc.ap = cc.dlog_c = Jet1(0.0, cc.a.order());
        return cc;
    }

    const CurveDef& gamma = std::holds_alternative<FamilyI1>(kind) ? std::get<FamilyI1>(kind).gamma
                                                                   : std::get<FamilyI2>(kind).gamma;
    const auto g = curve_jets(gamma, u, opt.order, 5);
    const std::array<Vec4<Jet1>, 4> cols{g[0], g[1], g[2], g[3]};
    cc.det = det4(cols);
    detail::check_det(cc.det, cols, opt.tol_rank, "G = det(gamma, gamma', gamma'', gamma''')");
    cc.Lp = cc.det.derivative() / cc.det;
    detail::decompose_top(cc, {g[3], g[2], g[1], g[0]}, g[4], opt.tol_rank);
    const bool need_extra = std::holds_alternative<FamilyI2>(kind);
    if (need_extra && cc.a.order() == 0)
        throw InsufficientOrder("family I.2 needs curve jets of order >= 5");
    cc.Lpp = cc.Lp.order() > 0 ? cc.Lp.derivative() : Jet1(0.0, 0);
    cc.ap = cc.a.order() > 0 ? cc.a.derivative() : Jet1(0.0, 0);
    cc.dlog_c = Jet1(0.0, cc.ap.order());
    if (need_extra) {
        if (std::abs(cc.c.value()) <= detail::scalar_floor(opt.tol_rank, {cc.Lp.value(), cc.a.value(), cc.b.value()}))
            throw DegenerateCoefficient("family I.2 needs c != 0 ((ln c)' undefined)");
        cc.dlog_c = cc.c.derivative() / cc.c;
    }
    return cc;
}

// ---------------------------------------------------------------------------
// Closed-form Christoffel symbols of the adapted frame

template <class T>
struct Christoffels {
    T g1_11, g2_11, g2_12;  // Gamma^1_11, Gamma^2_11, Gamma^2_12 = Gamma^2_21
};

template <class T>
struct CoefficientSet {
    T Lp, Lpp, a, b, c, ap, dlog_c;
};

inline CoefficientSet<double> coefficient_values(const CurveCoefficients& cc) {
    return {cc.Lp.value(), cc.Lpp.value(), cc.a.value(), cc.b.value(), cc.c.value(), cc.ap.value(),
            cc.dlog_c.value()};
}

inline CoefficientSet<Jet2> coefficient_jets(const CurveCoefficients& cc) {
    return {lift_to_uv(cc.Lp), lift_to_uv(cc.Lpp), lift_to_uv(cc.a),    lift_to_uv(cc.b),
            lift_to_uv(cc.c),  lift_to_uv(cc.ap),  lift_to_uv(cc.dlog_c)};
}

/// All other Christoffel symbols of the adapted frame vanish.
template <class T>
Christoffels<T> christoffels(const FamilyKind& kind, const CoefficientSet<T>& k, const T& v) {
    if (std::holds_alternative<FamilyI1>(kind)) {
        return {(k.Lp + v) / 3.0, (k.b - v * k.a + v * v * (k.Lp + v)) / 3.0, -(k.Lp + 4.0 * v) / 6.0};
    }
    if (const auto* i2 = std::get_if<FamilyI2>(&kind)) {
        const double eps = i2->epsilon;
        const T lam = k.dlog_c + k.Lp;  // (ln c + L)'
        const T g2_11 = (k.b + k.ap - eps * k.Lp - (k.a + eps) * k.dlog_c +
                         v * (-1.0 * k.Lpp + k.Lp * k.dlog_c - k.a - 2.0 * eps) + v * v * lam + v * v * v) /
                        3.0;
        return {(lam + v) / 3.0, g2_11, -(lam + 4.0 * v) / 6.0};
    }
    return {k.Lp / 3.0, (k.b - v * k.a - v) / 3.0, -1.0 * k.Lp / 6.0};
}

inline Christoffels<double> family_christoffels(const FamilyKind& kind, const CurveCoefficients& cc, double v) {
    return christoffels(kind, coefficient_values(cc), v);
}

// ---------------------------------------------------------------------------
// Frames

inline FramePoint family_frame(const FamilyKind& kind, double u, double v, const FamilyOptions& opt = {}) {
    const CurveCoefficients cc = curve_coefficients(kind, u, opt);
    const CoefficientSet<Jet2> k = coefficient_jets(cc);
    const Jet2 V = Jet2::seed(1, v, opt.order);
    const Christoffels<Jet2> g = christoffels(kind, k, V);

    if (const auto* ii = std::get_if<FamilyII>(&kind)) {
        const auto al = curve_jets(ii->alpha, u, opt.order, 3);
        const auto be = curve_jets(ii->beta, u, opt.order, 2);
        const Vec4<Jet2> a0 = lift_to_uv(al[0]), a1 = lift_to_uv(al[1]), a2 = lift_to_uv(al[2]);
        const Vec4<Jet2> b0 = lift_to_uv(be[0]), b1 = lift_to_uv(be[1]);
        Vec4<Jet2> x = a0 + V * b0;
        Vec4<Jet2> xi1 = b1 - g.g2_12 * b0;
        Vec4<Jet2> xi2 = a2 - g.g1_11 * a1 - (V * g.g1_11) * b1 - (V + g.g2_11) * b0;
        return make_frame(std::move(x), std::move(xi1), std::move(xi2), u, v);
    }

    const CurveDef& gamma = std::holds_alternative<FamilyI1>(kind) ? std::get<FamilyI1>(kind).gamma
                                                                   : std::get<FamilyI2>(kind).gamma;
    const auto gj = curve_jets(gamma, u, opt.order, 4);
    const Vec4<Jet2> g0 = lift_to_uv(gj[0]), g1 = lift_to_uv(gj[1]), g2 = lift_to_uv(gj[2]), g3 = lift_to_uv(gj[3]);

    if (std::holds_alternative<FamilyI1>(kind)) {
        Vec4<Jet2> x = g1 + V * g0;
        Vec4<Jet2> xi1 = g1 - g.g2_12 * g0;
        Vec4<Jet2> xi2 = g3 + (V - g.g1_11) * g2 - (V * g.g1_11) * g1 - g.g2_11 * g0;
        return make_frame(std::move(x), std::move(xi1), std::move(xi2), u, v);
    }

    const double eps = std::get<FamilyI2>(kind).epsilon;
    Vec4<Jet2> x = eps * g0 + g2 + V * g1;
    Vec4<Jet2> xi1 = g2 - g.g2_12 * g1;
    Vec4<Jet2> xi2 = (k.Lp + V - g.g1_11) * g3 + (k.a + eps - V * g.g1_11) * g2 +
                     (k.b - eps * g.g1_11 - g.g2_11) * g1 + k.c * g0;
    return make_frame(std::move(x), std::move(xi1), std::move(xi2), u, v);
}

/// Surface point x(u, v) alone; needs no curve coefficients, so it is defined even where
/// the frame is degenerate.
inline Vec4<> family_position(const FamilyKind& kind, double u, double v) {
    if (const auto* ii = std::get_if<FamilyII>(&kind)) {
        const Vec4<> a = values(curve_jets(ii->alpha, u, 1, 1)[0]);
        const Vec4<> b = values(curve_jets(ii->beta, u, 1, 1)[0]);
        return a + v * b;
    }
    const CurveDef& gamma = std::holds_alternative<FamilyI1>(kind) ? std::get<FamilyI1>(kind).gamma
                                                                   : std::get<FamilyI2>(kind).gamma;
    const auto g = curve_jets(gamma, u, 2, 3);
    const Vec4<> g0 = values(g[0]), g1 = values(g[1]), g2 = values(g[2]);
    if (std::holds_alternative<FamilyI1>(kind)) return g1 + v * g0;
    return static_cast<double>(std::get<FamilyI2>(kind).epsilon) * g0 + g2 + v * g1;
}

// ---------------------------------------------------------------------------
// Grid verification

struct GridSpec {
    double u0 = 0.0, u1 = 1.0, v0 = 0.0, v1 = 1.0;
    int nu = 21, nv = 21;

    double u_at(int i) const { return nu == 1 ? u0 : u0 + (u1 - u0) * i / (nu - 1); }
    double v_at(int j) const { return nv == 1 ? v0 : v0 + (v1 - v0) * j / (nv - 1); }
    std::size_t size() const { return static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv); }
};

struct VerifyOptions {
    FamilyOptions family;
    /// Pencil/phi classification tolerance.
    double tol_classify = default_tol_rank;
    /// How far h may sit from the type II normal form before the frame counts as not normalized.
    double tol_normal = 1e-8;
};

struct PointRecord {
    double u = 0.0, v = 0.0;
    /// Set when the point was clipped (construction or decomposition failed).
    std::optional<std::string> error_kind, error_message;
    SurfaceType surface;
    std::map<std::string, double> checks;
};

struct VerificationReport {
    std::vector<PointRecord> points;
    std::map<std::string, double> maxima;
    std::size_t clipped = 0;
    std::map<std::string, std::size_t> clip_reasons;
    std::size_t non_type_ii = 0;

    double max_of(const std::string& name) const {
        const auto it = maxima.find(name);
        return it == maxima.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
    }

    /// Every check below tol and every evaluated point of type II. Clipped cells are
    /// outside the family's domain and do not count against it.
    bool passed(double tol) const {
        if (non_type_ii > 0 || clipped == points.size()) return false;
        for (const auto& [name, m] : maxima)
            if (!(m < tol)) return false;
        return true;
    }
};

using FrameFn = std::function<FramePoint(double, double)>;
using ChristoffelFn = std::function<Christoffels<double>(double, double)>;

namespace detail {

inline double rel(const Vec4<>& r, std::initializer_list<Vec4<>> terms) {
    double s = 1.0;
    for (const auto& t : terms) s = std::max(s, norm(t));
    return norm(r) / s;
}

/// Transversal part of `w` in the frame, relative to the size of w's full expansion.
inline double transversal_part(const FrameSolver<double>& solver, const Vec4<>& w, const Vec4<>& raw) {
    const Vec4<> c = solver.solve(w);
    const Vec4<> c_raw = solver.solve(raw);
    return std::max(std::abs(c[2]), std::abs(c[3])) / std::max(1.0, max_abs(c_raw));
}

inline void structure_residuals(const FramePoint& fp, const Christoffels<double>& g, double tol_rank,
                                std::map<std::string, double>& out) {
    const Vec4<> v1 = values(fp.v1), v2 = values(fp.v2), xi1 = values(fp.xi1), xi2 = values(fp.xi2);
    const Vec4<> xuu = values(derivative(fp.v1, 0));
    const Vec4<> xuv = values(derivative(fp.v1, 1));
    const Vec4<> xvv = values(derivative(fp.v2, 1));
    out["structure_uu"] = rel(xuu - (g.g1_11 * v1 + g.g2_11 * v2 + xi2), {xuu, g.g1_11 * v1, g.g2_11 * v2, xi2});
    out["structure_uv"] = rel(xuv - (g.g2_12 * v2 + xi1), {xuv, g.g2_12 * v2, xi1});
    out["structure_vv"] = rel(xvv, {});

    const FrameSolver<double> solver({v1, v2, xi1, xi2}, tol_rank);
    const Vec4<> d1u = values(derivative(fp.xi1, 0)), d1v = values(derivative(fp.xi1, 1));
    const Vec4<> d2u = values(derivative(fp.xi2, 0)), d2v = values(derivative(fp.xi2, 1));
    out["structure_xi1_u"] = transversal_part(solver, d1u - (g.g1_11 + g.g2_12) * xi1, d1u);
    out["structure_xi1_v"] = transversal_part(solver, d1v, d1v);
    out["structure_xi2_u"] = transversal_part(solver, d2u - 2.0 * g.g2_11 * xi1 - 2.0 * g.g1_11 * xi2, d2u);
    out["structure_xi2_v"] = transversal_part(solver, d2v - 2.0 * g.g2_12 * xi1, d2v);
}

}  // namespace detail

/// Evaluates every check on the grid. Family-independent; `closed_form` adds the structure
/// equations and the Christoffel comparison.
inline VerificationReport verify_frames(const GridSpec& grid, const FrameFn& frame,
                                        const std::optional<ChristoffelFn>& closed_form, const VerifyOptions& opt) {
    VerificationReport rep;
    const Pencil target = normal_form(PencilType::II);
    for (int j = 0; j < grid.nv; ++j) {
        for (int i = 0; i < grid.nu; ++i) {
            PointRecord rec;
            rec.u = grid.u_at(i);
            rec.v = grid.v_at(j);
            try {
                const FramePoint fp = frame(rec.u, rec.v);
                const FundamentalData fd = decompose_frame(fp, opt.family.tol_rank);
                rec.surface = surface_type_of(fd, opt.tol_classify);
                const Pencil p = fd.pencil();
                rec.checks["normal_form"] = std::max(max_abs(p.h3 - target.h3), max_abs(p.h4 - target.h4));
                rec.checks["cubic_form"] = cubic_form(fd).max_abs();
                double rel_max = std::numeric_limits<double>::infinity();
                try {
                    if (is_type_ii_normal(p, opt.tol_normal)) {
                        rel_max = parallel_check_relations(fd, opt.tol_normal).max_abs();
                    } else {
                        const FramePoint nf = normalize_frame(fp, opt.tol_classify, opt.family.tol_rank);
                        rel_max = parallel_check_relations(decompose_frame(nf, opt.family.tol_rank), opt.tol_normal)
                                      .max_abs();
                    }
                } catch (const Error&) {
                }
                rec.checks["parallel_relations"] = rel_max;
                if (closed_form) {
                    const Christoffels<double> g = (*closed_form)(rec.u, rec.v);
                    detail::structure_residuals(fp, g, opt.family.tol_rank, rec.checks);
                    auto G = [&](int k, int a, int b) { return fd.christoffel(k - 1, a - 1, b - 1); };
                    rec.checks["christoffel_match"] =
                        std::max({std::abs(G(1, 1, 1) - g.g1_11), std::abs(G(2, 1, 1) - g.g2_11),
                                  std::abs(G(2, 1, 2) - g.g2_12), std::abs(G(2, 2, 1) - g.g2_12)});
                    rec.checks["christoffel_zero"] =
                        std::max({std::abs(G(1, 1, 2)), std::abs(G(1, 2, 1)), std::abs(G(1, 2, 2)),
                                  std::abs(G(2, 2, 2))});
                }
                if (rec.surface.type != PencilType::II) ++rep.non_type_ii;
            } catch (const Error& e) {
                rec.error_kind = e.kind();
                rec.error_message = e.what();
                rec.checks.clear();
                ++rep.clipped;
                ++rep.clip_reasons[e.kind()];
            }
            for (const auto& [name, val] : rec.checks) {
                auto [it, inserted] = rep.maxima.emplace(name, val);
                if (!inserted && !(it->second >= val)) it->second = val;
            }
            rep.points.push_back(std::move(rec));
        }
    }
    return rep;
}

/// Additive perturbation of the transversal fields, as expressions in (u, v).
struct TransversalOffset {
    std::array<Ast, 4> xi1, xi2;
};

inline FrameFn family_frame_fn(const FamilyKind& kind, const FamilyOptions& opt,
                               std::optional<TransversalOffset> offset = std::nullopt) {
    return [kind, opt, offset](double u, double v) {
        FramePoint fp = family_frame(kind, u, v, opt);
        if (offset) {
            fp.xi1 += eval_uv(offset->xi1, u, v, opt.order);
            fp.xi2 += eval_uv(offset->xi2, u, v, opt.order);
        }
        return fp;
    };
}

inline VerificationReport verify_family(const FamilyKind& kind, const GridSpec& grid, const VerifyOptions& opt = {},
                                        std::optional<TransversalOffset> offset = std::nullopt) {
    const FamilyOptions fo = opt.family;
    ChristoffelFn closed = [kind, fo](double u, double v) {
        return family_christoffels(kind, curve_coefficients(kind, u, fo), v);
    };
    return verify_frames(grid, family_frame_fn(kind, fo, std::move(offset)), closed, opt);
}

}  // namespace affine4
