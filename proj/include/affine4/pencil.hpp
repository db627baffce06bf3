#pragma once

// Two-pencils of symmetric 2x2 forms, identified with Minkowski 3-space via
//   (a, b, c)  <->  a E0 + b E1 + c E2 = ((a + b, c), (c, a - b)),
// with q(h) = -det h = -a^2 + b^2 + c^2.

#include <affine4/errors.hpp>
#include <affine4/linalg.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

namespace affine4 {

struct MinkVec3 {
    double a = 0.0, b = 0.0, c = 0.0;
    friend bool operator==(const MinkVec3&, const MinkVec3&) = default;
};

enum class PencilType { I, II, III, IVa, IVb, IVc, IVd };

inline constexpr std::array<PencilType, 7> all_pencil_types{PencilType::I,   PencilType::II,  PencilType::III,
                                                            PencilType::IVa, PencilType::IVb, PencilType::IVc,
                                                            PencilType::IVd};

inline std::string_view to_string(PencilType t) {
    switch (t) {
        case PencilType::I: return "I";
        case PencilType::II: return "II";
        case PencilType::III: return "III";
        case PencilType::IVa: return "IVa";
        case PencilType::IVb: return "IVb";
        case PencilType::IVc: return "IVc";
        case PencilType::IVd: return "IVd";
    }
    return "?";
}

enum class PhiClass { nondegenerate_definite, nondegenerate_indefinite, one_degenerate, zero_degenerate };

inline std::string_view to_string(PhiClass c) {
    switch (c) {
        case PhiClass::nondegenerate_definite: return "nondegenerate-definite";
        case PhiClass::nondegenerate_indefinite: return "nondegenerate-indefinite";
        case PhiClass::one_degenerate: return "1-degenerate";
        case PhiClass::zero_degenerate: return "0-degenerate";
    }
    return "?";
}

/// The semiconformal class each pencil type induces.
inline PhiClass expected_phi_class(PencilType t) {
    switch (t) {
        case PencilType::I: return PhiClass::nondegenerate_definite;
        case PencilType::II: return PhiClass::one_degenerate;
        case PencilType::III: return PhiClass::nondegenerate_indefinite;
        default: return PhiClass::zero_degenerate;
    }
}

struct Pencil {
    Sym2<> h3, h4;
    friend bool operator==(const Pencil&, const Pencil&) = default;
};

inline double max_abs(const Pencil& p) { return std::max(max_abs(p.h3), max_abs(p.h4)); }

inline constexpr Sym2<> E0{1.0, 0.0, 1.0};
inline constexpr Sym2<> E1{1.0, 0.0, -1.0};
inline constexpr Sym2<> E2{0.0, 1.0, 0.0};
/// (E0 + E1) / 2
inline constexpr Sym2<> light_E{1.0, 0.0, 0.0};

/// Normal form per type; entries are exact.
inline Pencil normal_form(PencilType t) {
    switch (t) {
        case PencilType::I: return {E1, E2};
        case PencilType::II: return {E2, light_E};
        case PencilType::III: return {E0, E1};
        case PencilType::IVa: return {E1, {}};
        case PencilType::IVb: return {light_E, {}};
        case PencilType::IVc: return {E0, {}};
        case PencilType::IVd: return {};
    }
    return {};
}

inline double q(const Sym2<>& h) { return -(h.s11 * h.s22 - h.s12 * h.s12); }

inline MinkVec3 to_mink(const Sym2<>& h) { return {0.5 * (h.s11 + h.s22), 0.5 * (h.s11 - h.s22), h.s12}; }

inline Sym2<> from_mink(const MinkVec3& w) { return {w.a + w.b, w.c, w.a - w.b}; }

/// Polarization of q: <w, w'> = -a a' + b b' + c c'.
inline double mink_dot(const MinkVec3& x, const MinkVec3& y) { return -x.a * y.a + x.b * y.b + x.c * y.c; }

// ---------------------------------------------------------------------------
// Frame-change action

/// rho1(P) h = P h P^T
inline Sym2<> rho1_apply(const Mat2<>& P, const Sym2<>& h) {
    const double scale = std::max({std::abs(P(0, 0)), std::abs(P(0, 1)), std::abs(P(1, 0)), std::abs(P(1, 1))});
    if (!(std::abs(P.det()) > 1e-14 * scale * scale)) throw SingularTransform("rho1 needs det P != 0");
    // (P h)_{ij} then contract with P_{kj}
    const double a = P(0, 0), b = P(0, 1), c = P(1, 0), d = P(1, 1);
    const double x = h.s11, y = h.s12, z = h.s22;
    return {a * (a * x + b * y) + b * (a * y + b * z), c * (a * x + b * y) + d * (a * y + b * z),
            c * (c * x + d * y) + d * (c * y + d * z)};
}

inline Pencil rho1_apply(const Mat2<>& P, const Pencil& p) { return {rho1_apply(P, p.h3), rho1_apply(P, p.h4)}; }

/// rho2 with Qinv = Q^{-1}: (h3, h4) -> (Qinv11 h3 + Qinv21 h4, Qinv12 h3 + Qinv22 h4),
/// i.e. the pair, read as a row vector, is multiplied by Qinv on the right.
inline Pencil rho2_apply(const Mat2<>& Qinv, const Pencil& p) {
    (void)inverse(Qinv);  // invertibility check
    return {Qinv(0, 0) * p.h3 + Qinv(1, 0) * p.h4, Qinv(0, 1) * p.h3 + Qinv(1, 1) * p.h4};
}

/// rho(B) = rho1(P) o rho2(Q) for B = diag(P, Q) in H^1.
inline Pencil rho_apply(const Mat2<>& P, const Mat2<>& Qinv, const Pencil& p) {
    return rho1_apply(P, rho2_apply(Qinv, p));
}

// ---------------------------------------------------------------------------
// Symmetric 2x2 spectral decomposition

struct SymEigen {
    double lambda_big, lambda_small;  // |lambda_big| >= |lambda_small|
    std::array<double, 2> v_big, v_small;
};

inline SymEigen sym_eigen(const Sym2<>& h) {
    const double m = 0.5 * (h.s11 + h.s22);
    const double r = std::hypot(0.5 * (h.s11 - h.s22), h.s12);
    const double theta = 0.5 * std::atan2(2.0 * h.s12, h.s11 - h.s22);
    const std::array<double, 2> e_plus{std::cos(theta), std::sin(theta)};
    const std::array<double, 2> e_minus{-std::sin(theta), std::cos(theta)};
    SymEigen out;
    if (m >= 0) {
        out.lambda_big = m + r;
        out.v_big = e_plus;
        out.v_small = e_minus;
    } else {
        out.lambda_big = m - r;
        out.v_big = e_minus;
        out.v_small = e_plus;
    }
    out.lambda_small = out.lambda_big != 0.0 ? h.det() / out.lambda_big : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Classification

struct SpanInfo {
    int dim = 0;
    double sigma_max = 0.0, sigma_min = 0.0;
    /// Euclidean cross product m3 x m4 of the Minkowski coordinates.
    MinkVec3 cross;
};

inline SpanInfo span_info(const Sym2<>& h3, const Sym2<>& h4, double tol) {
    const MinkVec3 x = to_mink(h3), y = to_mink(h4);
    const double xx = x.a * x.a + x.b * x.b + x.c * x.c;
    const double yy = y.a * y.a + y.b * y.b + y.c * y.c;
    const double xy = x.a * y.a + x.b * y.b + x.c * y.c;
    SpanInfo s;
    s.cross = {x.b * y.c - x.c * y.b, x.c * y.a - x.a * y.c, x.a * y.b - x.b * y.a};
    const double half = 0.5 * (xx + yy);
    const double disc = std::hypot(0.5 * (xx - yy), xy);
    s.sigma_max = std::sqrt(half + disc);
    const double cross_norm = std::sqrt(s.cross.a * s.cross.a + s.cross.b * s.cross.b + s.cross.c * s.cross.c);
    s.sigma_min = s.sigma_max > 0.0 ? cross_norm / s.sigma_max : 0.0;
    if (s.sigma_max <= tol)
        s.dim = 0;
    else if (s.sigma_min <= tol * s.sigma_max)
        s.dim = 1;
    else
        s.dim = 2;
    return s;
}

/// Type of span(h3, h4) in Minkowski 3-space. Ranks are decided against tol times the
/// largest singular value; the zero pencil is detected against tol in absolute terms.
inline PencilType classify_pencil(const Sym2<>& h3, const Sym2<>& h4, double tol = default_tol_rank) {
    const SpanInfo s = span_info(h3, h4, tol);
    if (s.dim == 0) return PencilType::IVd;
    if (s.dim == 1) {
        const Sym2<>& g = max_abs(h3) >= max_abs(h4) ? h3 : h4;
        const MinkVec3 w = to_mink(g);
        const double ratio = mink_dot(w, w) / (w.a * w.a + w.b * w.b + w.c * w.c);
        if (ratio > tol) return PencilType::IVa;
        if (ratio < -tol) return PencilType::IVc;
        return PencilType::IVb;
    }
    // The plane's Minkowski normal is eta * cross; its causal character is opposite
    // to the plane's (timelike normal <=> spacelike plane).
    const MinkVec3& n = s.cross;
    const double ratio = (-n.a * n.a + n.b * n.b + n.c * n.c) / (n.a * n.a + n.b * n.b + n.c * n.c);
    if (ratio < -tol) return PencilType::I;
    if (ratio > tol) return PencilType::III;
    return PencilType::II;
}

inline PencilType classify_pencil(const Pencil& p, double tol = default_tol_rank) {
    return classify_pencil(p.h3, p.h4, tol);
}

/// Semiconformal form phi = psi^3_1 (.) psi^4_2 - psi^3_2 (.) psi^4_1.
template <class T = double>
Sym2<T> semiconformal_matrix(const Sym2<T>& h3, const Sym2<T>& h4) {
    auto entry = [&](int k, int l) {
        return 0.5 * (h3(0, k) * h4(1, l) + h3(0, l) * h4(1, k) - h3(1, k) * h4(0, l) - h3(1, l) * h4(0, k));
    };
    return {entry(0, 0), entry(0, 1), entry(1, 1)};
}

/// Eigenvalue-sign census of phi. Eigenvalues with |lambda| <= tol * reference count as
/// zero, where reference = max(scale, max |lambda|).
inline PhiClass classify_phi(const Sym2<>& phi, double tol = default_tol_rank, double scale = 0.0) {
    const SymEigen e = sym_eigen(phi);
    const double threshold = tol * std::max(scale, std::abs(e.lambda_big));
    const bool big_zero = std::abs(e.lambda_big) <= threshold;
    const bool small_zero = std::abs(e.lambda_small) <= threshold;
    if (big_zero) return PhiClass::zero_degenerate;
    if (small_zero) return PhiClass::one_degenerate;
    return (e.lambda_big > 0) == (e.lambda_small > 0) ? PhiClass::nondegenerate_definite
                                                       : PhiClass::nondegenerate_indefinite;
}

// ---------------------------------------------------------------------------
// Normalization

struct NormalizationResult {
    PencilType ptype = PencilType::IVd;
    Mat2<> P = Mat2<>::identity();
    Mat2<> Qinv = Mat2<>::identity();
    Pencil normal_pair;
};

namespace detail {

/// Orthogonal P with rows (v, v_perp): P v = e1.
inline Mat2<> rotation_to_e1(const std::array<double, 2>& v) {
    Mat2<> P;
    P(0, 0) = v[0];
    P(0, 1) = v[1];
    P(1, 0) = -v[1];
    P(1, 1) = v[0];
    return P;
}

/// P with P g P^T diagonal with entries in {-1, 0, 1}, the largest-magnitude eigenvalue
/// first. For rank-one generators the second eigenvalue is left unscaled.
inline Mat2<> diagonalize_unit(const Sym2<>& g, bool rank_one) {
    const SymEigen e = sym_eigen(g);
    Mat2<> S;
    S(0, 0) = 1.0 / std::sqrt(std::abs(e.lambda_big));
    S(1, 1) = rank_one ? 1.0 : 1.0 / std::sqrt(std::abs(e.lambda_small));
    return S * rotation_to_e1(e.v_big);
}

/// Coordinates of h in the basis (b1, b2) of a 2D subspace of Sym(2), least squares.
inline std::array<double, 2> coords_in(const Sym2<>& h, const Sym2<>& b1, const Sym2<>& b2) {
    auto dot = [](const Sym2<>& x, const Sym2<>& y) { return x.s11 * y.s11 + 2 * x.s12 * y.s12 + x.s22 * y.s22; };
    const double g11 = dot(b1, b1), g12 = dot(b1, b2), g22 = dot(b2, b2);
    const double r1 = dot(h, b1), r2 = dot(h, b2);
    const double d = g11 * g22 - g12 * g12;
    return {(g22 * r1 - g12 * r2) / d, (g11 * r2 - g12 * r1) / d};
}

/// Qinv mapping a pair lying in span(b1, b2) onto (b1, b2).
inline Mat2<> pair_to_basis(const Pencil& p, const Sym2<>& b1, const Sym2<>& b2) {
    const auto x = coords_in(p.h3, b1, b2);
    const auto y = coords_in(p.h4, b1, b2);
    // new pair = (h3, h4) Qinv; with C = [[x0, y0], [x1, y1]], want C Qinv = Id.
    Mat2<> C;
    C(0, 0) = x[0];
    C(0, 1) = y[0];
    C(1, 0) = x[1];
    C(1, 1) = y[1];
    return inverse(C);
}

}  // namespace detail

/// Chooses (P, Qinv) with rho1(P) o rho2(Qinv) (h3, h4) equal to the normal form of the
/// pencil's type. (P, Qinv) is one representative; the residual stabilizer is not fixed.
inline NormalizationResult normalize_pencil(const Sym2<>& h3, const Sym2<>& h4, double tol = default_tol_rank) {
    NormalizationResult r;
    r.ptype = classify_pencil(h3, h4, tol);
    r.normal_pair = normal_form(r.ptype);
    const Pencil in{h3, h4};

    switch (r.ptype) {
        case PencilType::IVd:
            return r;

        case PencilType::IVa:
        case PencilType::IVb:
        case PencilType::IVc: {
            // Move the dominant generator into the first slot and cancel the other.
            const bool first = max_abs(h3) >= max_abs(h4);
            const Sym2<>& g = first ? h3 : h4;
            const Sym2<>& o = first ? h4 : h3;
            const double lambda = (o.s11 * g.s11 + 2 * o.s12 * g.s12 + o.s22 * g.s22) /
                                  (g.s11 * g.s11 + 2 * g.s12 * g.s12 + g.s22 * g.s22);
            Mat2<> Q1;
            if (first) {
                Q1(0, 0) = 1.0;
                Q1(0, 1) = -lambda;
                Q1(1, 1) = 1.0;
            } else {
                Q1(1, 0) = 1.0;
                Q1(0, 1) = 1.0;
                Q1(1, 1) = -lambda;
            }
            // diag(1, -1), diag(1, 0) and diag(1, 1) up to the sign of the first entry
            r.P = detail::diagonalize_unit(g, r.ptype == PencilType::IVb);
            const Sym2<> d = rho1_apply(r.P, g);
            Mat2<> S = Mat2<>::identity();
            S(0, 0) = d.s11 < 0 ? -1.0 : 1.0;
            r.Qinv = Q1 * S;
            return r;
        }

        case PencilType::I:
        case PencilType::III: {
            // Send the q-orthogonal complement of the span to the complement of the
            // target plane: E0 for type I, E2 for type III.
            const SpanInfo s = span_info(h3, h4, tol);
            const MinkVec3 normal{-s.cross.a, s.cross.b, s.cross.c};
            Sym2<> n = from_mink(normal);
            Mat2<> P;
            if (r.ptype == PencilType::I) {
                if (n.s11 < 0) n = -1.0 * n;
                // n positive definite: n = L L^T, P = L^{-1}
                const double l11 = std::sqrt(n.s11);
                const double l21 = n.s12 / l11;
                const double l22 = std::sqrt(n.s22 - l21 * l21);
                P(0, 0) = 1.0 / l11;
                P(1, 0) = -l21 / (l11 * l22);
                P(1, 1) = 1.0 / l22;
            } else {
                // n indefinite: diagonalize to E1 = diag(1, -1), then rotate by 45 degrees to E2.
                const SymEigen e = sym_eigen(n);
                const auto& v_pos = e.lambda_big > 0 ? e.v_big : e.v_small;
                Mat2<> R = detail::rotation_to_e1(v_pos);
                const double lp = e.lambda_big > 0 ? e.lambda_big : e.lambda_small;
                const double ln = e.lambda_big > 0 ? e.lambda_small : e.lambda_big;
                Mat2<> S;
                S(0, 0) = 1.0 / std::sqrt(lp);
                S(1, 1) = 1.0 / std::sqrt(-ln);
                const double c = std::sqrt(0.5);
                Mat2<> rot;
                rot(0, 0) = c;
                rot(0, 1) = -c;
                rot(1, 0) = c;
                rot(1, 1) = c;
                P = rot * (S * R);
            }
            r.P = P;
            const Pencil moved = rho1_apply(P, in);
            r.Qinv = detail::pair_to_basis(moved, r.normal_pair.h3, r.normal_pair.h4);
            return r;
        }

        case PencilType::II: {
            // The lightlike direction l of the plane is its own q-orthogonal complement.
            // Writing l = +-v v^T, a rotation sending v to e1 moves the plane onto
            // span(E2, (E0 + E1)/2).
            const SpanInfo s = span_info(h3, h4, tol);
            const Sym2<> l = from_mink({-s.cross.a, s.cross.b, s.cross.c});
            const SymEigen e = sym_eigen(l);
            r.P = detail::rotation_to_e1(e.v_big);
            const Pencil moved = rho1_apply(r.P, in);
            r.Qinv = detail::pair_to_basis(moved, E2, light_E);
            return r;
        }
    }
    return r;
}

inline NormalizationResult normalize_pencil(const Pencil& p, double tol = default_tol_rank) {
    return normalize_pencil(p.h3, p.h4, tol);
}

/// Max componentwise deviation of rho1(P) o rho2(Qinv) (input) from the normal pair.
inline double normalization_residual(const Pencil& input, const NormalizationResult& r) {
    const Pencil image = rho_apply(r.P, r.Qinv, input);
    return std::max(max_abs(image.h3 - r.normal_pair.h3), max_abs(image.h4 - r.normal_pair.h4));
}

}  // namespace affine4
