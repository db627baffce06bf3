#pragma once

// Fixed-size linear algebra over doubles and jet scalars.

#include <affine4/errors.hpp>
#include <affine4/jet.hpp>

#include <array>
#include <cmath>
#include <utility>

namespace affine4 {

inline constexpr double default_tol_rank = 1e-9;

template <class T = double>
struct Vec4 {
    std::array<T, 4> c{};

    T& operator[](int i) { return c[i]; }
    const T& operator[](int i) const { return c[i]; }

    Vec4& operator+=(const Vec4& b) {
        for (int i = 0; i < 4; ++i) c[i] += b.c[i];
        return *this;
    }
    Vec4& operator-=(const Vec4& b) {
        for (int i = 0; i < 4; ++i) c[i] -= b.c[i];
        return *this;
    }
    friend Vec4 operator+(Vec4 a, const Vec4& b) { return a += b; }
    friend Vec4 operator-(Vec4 a, const Vec4& b) { return a -= b; }
    friend Vec4 operator-(Vec4 a) {
        for (auto& x : a.c) x = -x;
        return a;
    }
    template <class S>
    friend Vec4 operator*(const S& s, Vec4 a) {
        for (auto& x : a.c) x = s * x;
        return a;
    }
};

template <class T>
Vec4<double> values(const Vec4<T>& a) {
    return {{value_of(a[0]), value_of(a[1]), value_of(a[2]), value_of(a[3])}};
}

template <int V>
Vec4<Jet<V>> derivative(const Vec4<Jet<V>>& a, int var) {
    return {{a[0].derivative(var), a[1].derivative(var), a[2].derivative(var), a[3].derivative(var)}};
}

inline Vec4<Jet2> lift_to_uv(const Vec4<Jet1>& a) {
    return {{lift_to_uv(a[0]), lift_to_uv(a[1]), lift_to_uv(a[2]), lift_to_uv(a[3])}};
}

inline Vec4<> unit_vec4(int i) {
    Vec4<> e;
    e[i] = 1.0;
    return e;
}

inline double norm(const Vec4<>& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]); }

inline double max_abs(const Vec4<>& a) {
    double m = 0.0;
    for (double x : a.c) m = std::max(m, std::abs(x));
    return m;
}

/// 2x2 matrix, row-major: m(i, j) is row i, column j.
template <class T = double>
struct Mat2 {
    std::array<std::array<T, 2>, 2> m{};

    static Mat2 identity() {
        Mat2 r;
        r.m[0][0] = T(1.0);
        r.m[1][1] = T(1.0);
        return r;
    }

    T& operator()(int i, int j) { return m[i][j]; }
    const T& operator()(int i, int j) const { return m[i][j]; }

    T det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

    Mat2 transposed() const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = m[j][i];
        return r;
    }

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
        return r;
    }
};

inline Mat2<> inverse(const Mat2<>& a) {
    const double d = a.det();
    const double scale = std::max({std::abs(a(0, 0)), std::abs(a(0, 1)), std::abs(a(1, 0)), std::abs(a(1, 1))});
    if (!(std::abs(d) > 1e-14 * scale * scale)) throw SingularTransform("2x2 matrix is not invertible");
    Mat2<> r;
    r(0, 0) = a(1, 1) / d;
    r(0, 1) = -a(0, 1) / d;
    r(1, 0) = -a(1, 0) / d;
    r(1, 1) = a(0, 0) / d;
    return r;
}

/// Symmetric 2x2 matrix ((s11, s12), (s12, s22)).
template <class T = double>
struct Sym2 {
    T s11{}, s12{}, s22{};

    T operator()(int i, int j) const {
        if (i == 0 && j == 0) return s11;
        if (i == 1 && j == 1) return s22;
        return s12;
    }
    T det() const { return s11 * s22 - s12 * s12; }

    Sym2& operator+=(const Sym2& b) {
        s11 += b.s11;
        s12 += b.s12;
        s22 += b.s22;
        return *this;
    }
    friend Sym2 operator+(Sym2 a, const Sym2& b) { return a += b; }
    friend Sym2 operator-(Sym2 a, const Sym2& b) {
        a.s11 -= b.s11;
        a.s12 -= b.s12;
        a.s22 -= b.s22;
        return a;
    }
    friend Sym2 operator*(double k, Sym2 a) {
        a.s11 *= k;
        a.s12 *= k;
        a.s22 *= k;
        return a;
    }
    friend bool operator==(const Sym2&, const Sym2&) = default;
};

inline double max_abs(const Sym2<>& a) {
    return std::max({std::abs(a.s11), std::abs(a.s12), std::abs(a.s22)});
}

// ---------------------------------------------------------------------------
// 4x4 determinants and solves

/// Signed determinant of the matrix with the given columns (Laplace expansion along
/// the first two columns, so it works over any commutative scalar ring).
template <class T>
T det4(const Vec4<T>& c1, const Vec4<T>& c2, const Vec4<T>& c3, const Vec4<T>& c4) {
    constexpr std::array<std::pair<int, int>, 6> rows{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    // complement of rows[k] is rows[5 - k]; sign (-1)^(r1 + r2 + 1 + 2)
    constexpr std::array<double, 6> sign{1, -1, 1, 1, -1, 1};
    T acc = constant_like(c1[0], 0.0);
    for (int k = 0; k < 6; ++k) {
        const auto [a, b] = rows[k];
        const auto [p, q] = rows[5 - k];
        const T top = c1[a] * c2[b] - c1[b] * c2[a];
        const T bottom = c3[p] * c4[q] - c3[q] * c4[p];
        acc += sign[k] * (top * bottom);
    }
    return acc;
}

template <class T>
T det4(const std::array<Vec4<T>, 4>& cols) {
    return det4(cols[0], cols[1], cols[2], cols[3]);
}

/// LU factorization of a 4x4 column basis with partial pivoting on value parts.
/// Factor once, then solve for several right-hand sides.
template <class T>
class FrameSolver {
public:
    explicit FrameSolver(const std::array<Vec4<T>, 4>& cols, double tol_rank = default_tol_rank) {
        double max_norm = 0.0;
        for (const auto& c : cols) max_norm = std::max(max_norm, norm(values(c)));
        const double d = value_of(det4(cols));
        if (!(max_norm > 0.0) || !(std::abs(d) > tol_rank * std::pow(max_norm, 4)))
            throw SingularFrame("frame vectors are linearly dependent (|det| = " + std::to_string(std::abs(d)) + ")");

        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) lu_[i][j] = cols[j][i];
        for (int i = 0; i < 4; ++i) perm_[i] = i;
        for (int k = 0; k < 4; ++k) {
            int piv = k;
            for (int i = k + 1; i < 4; ++i)
                if (std::abs(value_of(lu_[i][k])) > std::abs(value_of(lu_[piv][k]))) piv = i;
            if (value_of(lu_[piv][k]) == 0.0) throw SingularFrame("zero pivot");
            std::swap(lu_[k], lu_[piv]);
            std::swap(perm_[k], perm_[piv]);
            for (int i = k + 1; i < 4; ++i) {
                lu_[i][k] = lu_[i][k] / lu_[k][k];
                for (int j = k + 1; j < 4; ++j) lu_[i][j] -= lu_[i][k] * lu_[k][j];
            }
        }
    }

    /// Coefficients x with sum_j x[j] * cols[j] = rhs.
    Vec4<T> solve(const Vec4<T>& rhs) const {
        Vec4<T> y;
        for (int i = 0; i < 4; ++i) {
            T s = rhs[perm_[i]];
            for (int j = 0; j < i; ++j) s -= lu_[i][j] * y[j];
            y[i] = s;
        }
        Vec4<T> x;
        for (int i = 3; i >= 0; --i) {
            T s = y[i];
            for (int j = i + 1; j < 4; ++j) s -= lu_[i][j] * x[j];
            x[i] = s / lu_[i][i];
        }
        return x;
    }

private:
    std::array<std::array<T, 4>, 4> lu_;
    std::array<int, 4> perm_{};
};

template <class T>
Vec4<T> solve4(const std::array<Vec4<T>, 4>& basis, const Vec4<T>& rhs, double tol_rank = default_tol_rank) {
    return FrameSolver<T>(basis, tol_rank).solve(rhs);
}

/// sum_j coef[j] * cols[j]
template <class T>
Vec4<T> combine(const std::array<Vec4<T>, 4>& cols, const Vec4<T>& coef) {
    Vec4<T> r = coef[0] * cols[0];
    for (int j = 1; j < 4; ++j) r += coef[j] * cols[j];
    return r;
}

}  // namespace affine4
