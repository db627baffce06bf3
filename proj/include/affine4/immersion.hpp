#pragma once

// Moving-frame decomposition of a surface immersion in R^4.
//
// For a coordinate frame {x_u, x_v, xi1, xi2} at a point, every ambient derivative is
// expanded in that basis:
//   D_{d_i} x_{d_j} = Gamma^k_ij x_k + h^3_ij xi1 + h^4_ij xi2
//   D_{d_i} xi_b    = -(A_b)^k_i x_k + tau^3_b(d_i) xi1 + tau^4_b(d_i) xi2
// All coefficients are jets, so their derivatives come for free.

#include <affine4/errors.hpp>
#include <affine4/expr.hpp>
#include <affine4/jet.hpp>
#include <affine4/linalg.hpp>
#include <affine4/pencil.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

namespace affine4 {

template <class T>
using Arr2 = std::array<T, 2>;
template <class T>
using Arr222 = Arr2<Arr2<Arr2<T>>>;

/// First-order frame {v1, v2, xi1, xi2; x} at the base point (u, v); coordinate frame,
/// so v1 = x_u and v2 = x_v as jets.
struct FramePoint {
    Vec4<Jet2> v1, v2, xi1, xi2, x;
    double u = 0.0, v = 0.0;

    std::array<Vec4<Jet2>, 4> basis() const { return {v1, v2, xi1, xi2}; }
    std::array<Vec4<Jet2>, 2> xi() const { return {xi1, xi2}; }
};

inline FramePoint make_frame(Vec4<Jet2> x, Vec4<Jet2> xi1, Vec4<Jet2> xi2, double u, double v) {
    FramePoint fp;
    fp.v1 = derivative(x, 0);
    fp.v2 = derivative(x, 1);
    fp.xi1 = std::move(xi1);
    fp.xi2 = std::move(xi2);
    fp.x = std::move(x);
    fp.u = u;
    fp.v = v;
    return fp;
}

struct FundamentalData {
    /// h[a][i][j]: a = 0 is h^3 (xi1 part), a = 1 is h^4 (xi2 part).
    Arr222<Jet2> h;
    /// gamma[k][i][j] = Gamma^k_ij.
    Arr222<Jet2> gamma;
    /// A[b](k, i) = (A_{xi_b})^k_i.
    Arr2<Mat2<Jet2>> A;
    /// tau[a][b][i] = tau^a_b(d_i): the xi_a component of nabla-perp_{d_i} xi_b.
    Arr222<Jet2> tau;

    Sym2<> h3() const { return {h[0][0][0].value(), h[0][0][1].value(), h[0][1][1].value()}; }
    Sym2<> h4() const { return {h[1][0][0].value(), h[1][0][1].value(), h[1][1][1].value()}; }
    Pencil pencil() const { return {h3(), h4()}; }
    double christoffel(int k, int i, int j) const { return gamma[k][i][j].value(); }
};

inline FundamentalData decompose_frame(const FramePoint& fp, double tol_rank = default_tol_rank) {
    const FrameSolver<Jet2> solver(fp.basis(), tol_rank);
    const std::array<Vec4<Jet2>, 2> tangent{fp.v1, fp.v2};
    FundamentalData fd;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const Vec4<Jet2> c = solver.solve(derivative(tangent[j], i));
            for (int k = 0; k < 2; ++k) fd.gamma[k][i][j] = c[k];
            fd.h[0][i][j] = c[2];
            fd.h[1][i][j] = c[3];
        }
    }
    const auto xi = fp.xi();
    for (int b = 0; b < 2; ++b) {
        for (int i = 0; i < 2; ++i) {
            const Vec4<Jet2> c = solver.solve(derivative(xi[b], i));
            for (int k = 0; k < 2; ++k) fd.A[b](k, i) = -c[k];
            fd.tau[0][b][i] = c[2];
            fd.tau[1][b][i] = c[3];
        }
    }
    return fd;
}

/// Largest relative mismatch when D_i v_j and D_i xi_b are rebuilt from the decomposition.
inline double reconstruction_residual(const FramePoint& fp, const FundamentalData& fd) {
    const std::array<Vec4<>, 4> e{values(fp.v1), values(fp.v2), values(fp.xi1), values(fp.xi2)};
    const std::array<Vec4<Jet2>, 2> tangent{fp.v1, fp.v2};
    const auto xi = fp.xi();
    double worst = 0.0;
    auto check = [&](const Vec4<>& target, const std::array<double, 4>& c) {
        Vec4<> r = target;
        double scale = std::max(1.0, norm(target));
        for (int k = 0; k < 4; ++k) {
            r -= c[k] * e[k];
            scale = std::max(scale, norm(c[k] * e[k]));
        }
        worst = std::max(worst, norm(r) / scale);
    };
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            check(values(derivative(tangent[j], i)), {fd.gamma[0][i][j].value(), fd.gamma[1][i][j].value(),
                                                      fd.h[0][i][j].value(), fd.h[1][i][j].value()});
    for (int b = 0; b < 2; ++b)
        for (int i = 0; i < 2; ++i)
            check(values(derivative(xi[b], i)), {-fd.A[b](0, i).value(), -fd.A[b](1, i).value(),
                                                 fd.tau[0][b][i].value(), fd.tau[1][b][i].value()});
    return worst;
}

struct SurfaceType {
    PencilType type = PencilType::IVd;
    Sym2<> phi;
    PhiClass phi_class = PhiClass::zero_degenerate;
};

inline SurfaceType surface_type_of(const FundamentalData& fd, double tol = default_tol_rank) {
    const Pencil p = fd.pencil();
    SurfaceType st;
    st.type = classify_pencil(p, tol);
    st.phi = semiconformal_matrix(p.h3, p.h4);
    const double scale = std::pow(span_info(p.h3, p.h4, tol).sigma_max, 2);
    st.phi_class = classify_phi(st.phi, tol, scale);
    return st;
}

inline SurfaceType surface_type_at(const FramePoint& fp, double tol = default_tol_rank,
                                   double tol_rank = default_tol_rank) {
    return surface_type_of(decompose_frame(fp, tol_rank), tol);
}

/// Components of nabla h = C^3 xi1 + C^4 xi2; C[a][i][j][k] = (nabla_{d_i} h^a)(d_j, d_k).
struct CubicForm {
    Arr2<Arr222<double>> C{};

    double max_abs() const {
        double m = 0.0;
        for (const auto& a : C)
            for (const auto& i : a)
                for (const auto& j : i)
                    for (double x : j) m = std::max(m, std::abs(x));
        return m;
    }
};

inline CubicForm cubic_form(const FundamentalData& fd) {
    for (const auto& a : fd.h)
        for (const auto& i : a)
            for (const Jet2& x : i)
                if (x.order() < 1) throw InsufficientOrder("cubic form needs second fundamental forms of order >= 1");
    CubicForm cf;
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) {
                    double s = fd.h[a][j][k].derivative(i).value();
                    for (int b = 0; b < 2; ++b) s += fd.h[b][j][k].value() * fd.tau[a][b][i].value();
                    for (int l = 0; l < 2; ++l) {
                        s -= fd.gamma[l][i][j].value() * fd.h[a][l][k].value();
                        s -= fd.gamma[l][i][k].value() * fd.h[a][j][l].value();
                    }
                    cf.C[a][i][j][k] = s;
                }
    return cf;
}

inline CubicForm cubic_form(const FramePoint& fp, double tol_rank = default_tol_rank) {
    return cubic_form(decompose_frame(fp, tol_rank));
}

/// Residuals of the relations a parallel 1-degenerate surface satisfies in a second-order
/// frame field. Vector relations are reported as their (xi1, xi2) components.
struct ParallelRelations {
    double gamma1_21 = 0.0;  // Gamma^1_21
    double gamma1_22 = 0.0;  // Gamma^1_22
    Arr2<double> normal_x1_xi1{}, normal_x2_xi1{}, normal_x1_xi2{}, normal_x2_xi2{};

    double max_abs() const {
        double m = std::max(std::abs(gamma1_21), std::abs(gamma1_22));
        for (const auto* r : {&normal_x1_xi1, &normal_x2_xi1, &normal_x1_xi2, &normal_x2_xi2})
            m = std::max({m, std::abs((*r)[0]), std::abs((*r)[1])});
        return m;
    }
};

inline bool is_type_ii_normal(const Pencil& p, double tol) {
    const Pencil n = normal_form(PencilType::II);
    return std::max(max_abs(p.h3 - n.h3), max_abs(p.h4 - n.h4)) <= tol;
}

inline ParallelRelations parallel_check_relations(const FundamentalData& fd, double tol = 1e-8) {
    if (!is_type_ii_normal(fd.pencil(), tol))
        throw NotNormalized("second fundamental forms are not in the type II normal form (E2, (E0+E1)/2)");
    auto G = [&](int k, int i, int j) { return fd.christoffel(k - 1, i - 1, j - 1); };
    // tau^a_b(X_i) with a, b in {1, 2} naming xi1, xi2
    auto t = [&](int a, int b, int i) { return fd.tau[a - 1][b - 1][i - 1].value(); };
    ParallelRelations r;
    r.gamma1_21 = G(1, 2, 1);
    r.gamma1_22 = G(1, 2, 2);
    r.normal_x1_xi1 = {t(1, 1, 1) - (G(1, 1, 1) + G(2, 1, 2)), t(2, 1, 1)};
    r.normal_x2_xi1 = {t(1, 1, 2) - (G(1, 2, 1) + G(2, 2, 2)), t(2, 1, 2)};
    r.normal_x1_xi2 = {t(1, 2, 1) - 2 * G(2, 1, 1), t(2, 2, 1) - 2 * G(1, 1, 1)};
    r.normal_x2_xi2 = {t(1, 2, 2) - 2 * G(2, 2, 1), t(2, 2, 2) - 2 * G(1, 2, 1)};
    return r;
}

// ---------------------------------------------------------------------------
// Frame changes

inline Vec4<Jet2> substitute_linear(const Vec4<Jet2>& a, const Mat2<>& P) {
    const std::array<std::array<double, 2>, 2> m = P.m;
    return {{substitute_linear(a[0], m), substitute_linear(a[1], m), substitute_linear(a[2], m),
             substitute_linear(a[3], m)}};
}

/// Acts by B = diag(P, Q) in H^1: X_i = P_i^j d_j (realized as the linear coordinate change
/// (u, v) = base + s P_1 + t P_2) and xi_a = Q_a^b xi_b. By the transformation law the new
/// second fundamental forms are rho1(P) o rho2(Q^{-1}) of the old ones.
inline FramePoint transform_frame(const FramePoint& fp, const Mat2<>& P, const Mat2<>& Q) {
    (void)inverse(P);
    (void)inverse(Q);
    const Vec4<Jet2> x = substitute_linear(fp.x, P);
    const Vec4<Jet2> xi1 = substitute_linear(fp.xi1, P);
    const Vec4<Jet2> xi2 = substitute_linear(fp.xi2, P);
    return make_frame(x, Q(0, 0) * xi1 + Q(0, 1) * xi2, Q(1, 0) * xi1 + Q(1, 1) * xi2, fp.u, fp.v);
}

/// Applies the pointwise normalization of the pencil as a constant frame change.
inline FramePoint normalize_frame(const FramePoint& fp, double tol = default_tol_rank,
                                  double tol_rank = default_tol_rank) {
    const NormalizationResult n = normalize_pencil(decompose_frame(fp, tol_rank).pencil(), tol);
    return transform_frame(fp, n.P, inverse(n.Qinv));
}

// ---------------------------------------------------------------------------
// Frames from surface definitions

inline Vec4<Jet2> eval_uv(const std::array<Ast, 4>& comps, double u, double v, int order) {
    Binding<Jet2> b{Jet2::seed(0, u, order), Jet2::seed(1, v, order)};
    return {{eval(comps[0], b), eval(comps[1], b), eval(comps[2], b), eval(comps[3], b)}};
}

/// Pair of standard basis vectors best complementing the tangent plane.
inline std::array<int, 2> complement_axes(const Vec4<>& xu, const Vec4<>& xv) {
    std::array<int, 2> best{2, 3};
    double best_det = -1.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const double d = std::abs(det4(xu, xv, unit_vec4(i), unit_vec4(j)));
            if (d > best_det) {
                best_det = d;
                best = {i, j};
            }
        }
    return best;
}

inline Vec4<Jet2> constant_vec(const Vec4<>& a, int order) {
    return {{Jet2(a[0], order), Jet2(a[1], order), Jet2(a[2], order), Jet2(a[3], order)}};
}

/// Coordinate frame of a surface definition. Without transversal fields a constant
/// complement of the tangent plane is chosen; such a frame fixes the semiconformal type
/// but carries no parallelism information.
inline FramePoint surface_frame(const SurfaceDef& s, double u, double v, int order = default_jet_order) {
    Vec4<Jet2> x = eval_uv(s.x, u, v, order);
    if (s.xi1 && s.xi2)
        return make_frame(std::move(x), eval_uv(*s.xi1, u, v, order), eval_uv(*s.xi2, u, v, order), u, v);
    const auto axes = complement_axes(values(derivative(x, 0)), values(derivative(x, 1)));
    return make_frame(std::move(x), constant_vec(unit_vec4(axes[0]), order), constant_vec(unit_vec4(axes[1]), order),
                      u, v);
}

}  // namespace affine4
