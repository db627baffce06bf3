#pragma once

// Random generators and independent oracles shared by the unit tests and the acceptance run.

#include <affine4/expr.hpp>
#include <affine4/families.hpp>
#include <affine4/immersion.hpp>
#include <affine4/jet.hpp>
#include <affine4/linalg.hpp>
#include <affine4/pencil.hpp>

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace affine4::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// ---------------------------------------------------------------------------
// Expressions

/// Random tree over the given variables. Literals are non-negative, as the parser produces.
inline Ast random_ast(Rng& rng, int depth, bool use_v = false) {
    if (depth == 0 || uniform(rng, 0, 1) < 0.25) {
        const int pick = uniform_int(rng, 0, use_v ? 3 : 2);
        if (pick == 0) return Ast::literal(std::round(uniform(rng, 0.1, 3.0) * 100.0) / 100.0);
        if (pick == 3) return Ast::variable(Variable::v);
        return Ast::variable(Variable::u);
    }
    switch (uniform_int(rng, 0, 6)) {
        case 0: return Ast::binary(BinaryOp::add, random_ast(rng, depth - 1, use_v), random_ast(rng, depth - 1, use_v));
        case 1: return Ast::binary(BinaryOp::sub, random_ast(rng, depth - 1, use_v), random_ast(rng, depth - 1, use_v));
        case 2: return Ast::binary(BinaryOp::mul, random_ast(rng, depth - 1, use_v), random_ast(rng, depth - 1, use_v));
        case 3: return Ast::binary(BinaryOp::div, random_ast(rng, depth - 1, use_v), random_ast(rng, depth - 1, use_v));
        case 4: {
            static constexpr double exps[] = {2.0, 3.0, -1.0, 0.5, 1.5, -2.0, 4.0};
            return Ast::binary(BinaryOp::pow, random_ast(rng, depth - 1, use_v),
                               Ast::literal(exps[uniform_int(rng, 0, 6)]));
        }
        case 5: return Ast::negate(random_ast(rng, depth - 1, use_v));
        default: {
            static constexpr Elementary fs[] = {Elementary::sin, Elementary::cos,  Elementary::tan,  Elementary::exp,
                                                Elementary::ln,  Elementary::sqrt, Elementary::sinh, Elementary::cosh};
            return Ast::call(fs[uniform_int(rng, 0, 7)], random_ast(rng, depth - 1, use_v));
        }
    }
}

/// Jet derivatives 1..order against central differences (step h) of the derivative one
/// order lower; derivative 0 is compared against the plain-real evaluation.
struct FdComparison {
    double worst_relative = 0.0;
    bool value_exact = true;
};

inline std::optional<FdComparison> fd_compare(const Ast& a, double u0, int order, double h = 1e-5) {
    auto jet_at = [&](double u, int k) { return eval(a, Binding<Jet1>{Jet1::seed(0, u, k), std::nullopt}); };
    try {
        const Jet1 j = jet_at(u0, order);
        const double plain = eval(a, Binding<double>{u0, std::nullopt});
        if (!j.is_finite() || !std::isfinite(plain)) return std::nullopt;
        for (int k = 0; k <= order; ++k)
            if (std::abs(j.partial(k)) > 1e4) return std::nullopt;
        FdComparison c;
        c.value_exact = plain == j.value();
        for (int k = 1; k <= order; ++k) {
            const double fp = k == 1 ? eval(a, Binding<double>{u0 + h, std::nullopt}) : jet_at(u0 + h, k - 1).partial(k - 1);
            const double fm = k == 1 ? eval(a, Binding<double>{u0 - h, std::nullopt}) : jet_at(u0 - h, k - 1).partial(k - 1);
            if (!std::isfinite(fp) || !std::isfinite(fm)) return std::nullopt;
            const double fd = (fp - fm) / (2 * h);
            c.worst_relative = std::max(c.worst_relative, std::abs(fd - j.partial(k)) / std::max(1.0, std::abs(j.partial(k))));
        }
        return c;
    } catch (const Error&) {
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// Matrices and pencils

inline Sym2<> random_sym(Rng& rng, double r = 1.0) { return {uniform(rng, -r, r), uniform(rng, -r, r), uniform(rng, -r, r)}; }

/// Random invertible 2x2 matrix with |det| >= min_det and entries in [-2, 2].
inline Mat2<> random_gl2(Rng& rng, double min_det = 0.3) {
    while (true) {
        Mat2<> m;
        for (auto& row : m.m)
            for (auto& x : row) x = uniform(rng, -2.0, 2.0);
        if (std::abs(m.det()) >= min_det) return m;
    }
}

/// Pencil of prescribed type, moved off its normal form by a random frame change.
inline Pencil random_pencil_of_type(Rng& rng, PencilType t) {
    const Pencil n = normal_form(t);
    const double s = uniform(rng, 0.5, 2.0);
    return rho_apply(random_gl2(rng), random_gl2(rng), {s * n.h3, s * n.h4});
}

inline Pencil random_pencil(Rng& rng, int index) {
    // every eighth pencil is generic (almost surely type I or III); the rest cycle through all types
    if (index % 8 == 7) return {random_sym(rng), random_sym(rng)};
    return random_pencil_of_type(rng, all_pencil_types[index % all_pencil_types.size()]);
}

// ---------------------------------------------------------------------------
// Surfaces

inline std::string random_poly(Rng& rng, int degree) {
    std::string s = std::to_string(uniform(rng, -1.0, 1.0));
    for (int d = 1; d <= degree; ++d) {
        const double c = uniform(rng, -1.0, 1.0);
        s += (c < 0 ? " - " : " + ") + std::to_string(std::abs(c)) + "*u^" + std::to_string(d);
    }
    return "(" + s + ")";
}

/// x = alpha(u) + v beta(u) with cubic polynomial components.
inline SurfaceDef random_ruled_surface(Rng& rng) {
    std::array<Ast, 4> x;
    for (auto& c : x) c = parse(random_poly(rng, 3) + " + v*" + random_poly(rng, 3));
    return make_surface(x, std::nullopt, std::nullopt);
}

inline FamilyI1 cubic_i1() { return FamilyI1{parse_curve({"1", "u", "u^2/2", "u^3/6"})}; }
inline CurveDef exp_curve() { return parse_curve({"exp(u)", "exp(2*u)", "exp(3*u)", "exp(4*u)"}); }
inline FamilyII circle_ii() {
    return FamilyII{parse_curve({"0", "0", "cosh(u)", "sinh(u)"}), parse_curve({"cos(u)", "sin(u)", "0", "0"})};
}

/// Surface definition with explicit transversal fields.
inline SurfaceDef surface(const std::array<std::string, 4>& x, const std::array<std::string, 4>& xi1,
                          const std::array<std::string, 4>& xi2) {
    return make_surface(parse_components(x), parse_components(xi1), parse_components(xi2));
}

inline SurfaceDef surface(const std::array<std::string, 4>& x) {
    return make_surface(parse_components(x), std::nullopt, std::nullopt);
}

/// Worst relative mismatch between jet partials of h and central differences of h, the
/// latter recomputed from scratch at displaced base points.
inline double dh_fd_mismatch(const std::function<FramePoint(double, double)>& frame, double u, double v,
                             double step = 1e-5, double tol_rank = default_tol_rank) {
    const FundamentalData fd = decompose_frame(frame(u, v), tol_rank);
    const FundamentalData up = decompose_frame(frame(u + step, v), tol_rank);
    const FundamentalData um = decompose_frame(frame(u - step, v), tol_rank);
    const FundamentalData vp = decompose_frame(frame(u, v + step), tol_rank);
    const FundamentalData vm = decompose_frame(frame(u, v - step), tol_rank);
    double worst = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double du = (up.h[a][i][j].value() - um.h[a][i][j].value()) / (2 * step);
                const double dv = (vp.h[a][i][j].value() - vm.h[a][i][j].value()) / (2 * step);
                const double ju = fd.h[a][i][j].partial(1, 0), jv = fd.h[a][i][j].partial(0, 1);
                worst = std::max({worst, std::abs(du - ju) / std::max(1.0, std::abs(ju)),
                                  std::abs(dv - jv) / std::max(1.0, std::abs(jv))});
            }
    return worst;
}

/// Max relative deviation between two pencils.
inline double pencil_distance(const Pencil& a, const Pencil& b) {
    const double d = std::max(max_abs(a.h3 - b.h3), max_abs(a.h4 - b.h4));
    return d / std::max(1.0, std::max(max_abs(a), max_abs(b)));
}

/// Random element of the group fixing the type II normal form.
struct H2Element {
    Mat2<> P, Q;
};
inline H2Element random_h2(Rng& rng) {
    double a = 0.0;
    while (std::abs(a) < 0.3) a = uniform(rng, -2.0, 2.0);
    double c = 0.0;
    while (std::abs(c) < 0.3) c = uniform(rng, -2.0, 2.0);
    const double b = uniform(rng, -2.0, 2.0);
    H2Element g;
    g.P.m = {{{a, b}, {0.0, c}}};
    g.Q.m = {{{a * c, 0.0}, {2 * a * b, a * a}}};
    return g;
}

}  // namespace affine4::testing
