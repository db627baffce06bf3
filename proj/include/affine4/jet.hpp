#pragma once

// Truncated Taylor jets in one or two variables.
//
// A jet of order n stores the raw partial derivatives d^(i+j) f / du^i dv^j
// (not divided by factorials) for all i + j <= n, evaluated at a base point.
// Binary operations between jets of different orders are carried out at the
// smaller order, which is the largest order both operands determine.

#include <affine4/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

namespace affine4 {

inline constexpr int default_jet_order = 6;

namespace detail {

inline constexpr int max_binomial = 64;

inline const std::array<std::array<double, max_binomial + 1>, max_binomial + 1>& binomial_table() {
    static const auto table = [] {
        std::array<std::array<double, max_binomial + 1>, max_binomial + 1> t{};
        for (int n = 0; n <= max_binomial; ++n) {
            t[n][0] = t[n][n] = 1.0;
            for (int k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
        }
        return t;
    }();
    return table;
}

inline double binomial(int n, int k) { return binomial_table()[n][k]; }

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace detail

template <int Vars>
class Jet {
    static_assert(Vars == 1 || Vars == 2, "jets are univariate or bivariate");

public:
    static constexpr int variables = Vars;

    Jet() : Jet(0.0, 0) {}

    /// Constant jet: value c, every derivative zero.
    explicit Jet(double c, int order = default_jet_order) {
        check_order(order, 0);
        order_ = order;
        d_.assign(size_for(order), 0.0);
        d_[0] = c;
    }

    /// Jet of the coordinate function `var` (0 = u, 1 = v) at `value`.
    static Jet seed(int var, double value, int order) {
        check_order(order, 1);
        if (var < 0 || var >= Vars) throw InvalidOrder("seed variable out of range");
        Jet j(value, order);
        j.d_[var == 0 ? index(1, 0) : index(0, 1)] = 1.0;
        return j;
    }

    /// Jet from raw derivatives; `derivs` is laid out as `index(i, j)`.
    static Jet from_derivatives(int order, std::span<const double> derivs) {
        check_order(order, 0);
        if (static_cast<int>(derivs.size()) != size_for(order))
            throw InvalidOrder("derivative table size does not match order");
        Jet j(0.0, order);
        std::copy(derivs.begin(), derivs.end(), j.d_.begin());
        return j;
    }

    static constexpr int size_for(int order) {
        return Vars == 1 ? order + 1 : (order + 1) * (order + 2) / 2;
    }
    static constexpr int index(int i, int j = 0) {
        return Vars == 1 ? i : (i + j) * (i + j + 1) / 2 + j;
    }

    int order() const noexcept { return order_; }
    double value() const noexcept { return d_[0]; }
    std::span<const double> derivs() const noexcept { return d_; }

    /// d^(i+j) / du^i dv^j at the base point.
    double partial(int i, int j = 0) const {
        if (i < 0 || j < 0 || i + j > order_ || (Vars == 1 && j != 0))
            throw InvalidOrder("partial derivative beyond jet order");
        return d_[index(i, j)];
    }
    double& partial_ref(int i, int j = 0) { return d_[index(i, j)]; }

    /// Derivative jet with respect to `var`; one order lower.
    Jet derivative(int var = 0) const {
        if (order_ == 0) throw InvalidOrder("cannot differentiate an order-0 jet");
        if (var < 0 || var >= Vars) throw InvalidOrder("derivative variable out of range");
        Jet r(0.0, order_ - 1);
        for_each_index(order_ - 1, [&](int i, int j) {
            r.d_[index(i, j)] = var == 0 ? d_[index(i + 1, j)] : d_[index(i, j + 1)];
        });
        return r;
    }

    Jet truncated(int order) const {
        check_order(order, 0);
        if (order >= order_) return *this;
        Jet r(0.0, order);
        std::copy_n(d_.begin(), size_for(order), r.d_.begin());
        return r;
    }

    bool is_finite() const {
        return std::all_of(d_.begin(), d_.end(), [](double x) { return std::isfinite(x); });
    }

    /// Calls f(i, j) for every multi-index with i + j <= order, by increasing total degree.
    template <class F>
    static void for_each_index(int order, F&& f) {
        if constexpr (Vars == 1) {
            for (int i = 0; i <= order; ++i) f(i, 0);
        } else {
            for (int n = 0; n <= order; ++n)
                for (int j = 0; j <= n; ++j) f(n - j, j);
        }
    }

    Jet operator-() const {
        Jet r = *this;
        for (double& x : r.d_) x = -x;
        return r;
    }

    Jet& operator+=(const Jet& b) { return combine(b, 1.0); }
    Jet& operator-=(const Jet& b) { return combine(b, -1.0); }
    Jet& operator+=(double c) { d_[0] += c; return *this; }
    Jet& operator-=(double c) { d_[0] -= c; return *this; }
    Jet& operator*=(double c) {
        for (double& x : d_) x *= c;
        return *this;
    }
    Jet& operator*=(const Jet& b) { return *this = *this * b; }
    Jet& operator/=(const Jet& b) { return *this = *this / b; }
    Jet& operator/=(double c) {
        if (c == 0.0) throw DegenerateDivisor("division by zero constant");
        for (double& x : d_) x /= c;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, double c) { return a += c; }
    friend Jet operator+(double c, Jet a) { return a += c; }
    friend Jet operator-(Jet a, double c) { return a -= c; }
    friend Jet operator-(double c, const Jet& a) { return -a + c; }
    friend Jet operator*(Jet a, double c) { return a *= c; }
    friend Jet operator*(double c, Jet a) { return a *= c; }
    friend Jet operator/(Jet a, double c) { return a /= c; }
    friend Jet operator/(double c, const Jet& b) { return Jet(c, b.order_) / b; }

    // Leibniz rule.
    friend Jet operator*(const Jet& a, const Jet& b) {
        const int n = std::min(a.order_, b.order_);
        Jet r(0.0, n);
        for_each_index(n, [&](int i, int j) {
            double s = 0.0;
            for (int p = 0; p <= i; ++p) {
                const double ci = detail::binomial(i, p);
                for (int q = 0; q <= j; ++q)
                    s += ci * detail::binomial(j, q) * a.d_[index(p, q)] * b.d_[index(i - p, j - q)];
            }
            r.d_[index(i, j)] = s;
        });
        return r;
    }

    // Solves (a/b) * b = a degree by degree, so the value part is exactly a0 / b0.
    friend Jet operator/(const Jet& a, const Jet& b) {
        const double b0 = b.d_[0];
        if (b0 == 0.0 || !std::isfinite(b0))
            throw DegenerateDivisor("division by a jet with zero value part");
        const int n = std::min(a.order_, b.order_);
        Jet r(0.0, n);
        for_each_index(n, [&](int i, int j) {
            double s = a.d_[index(i, j)];
            for (int p = 0; p <= i; ++p) {
                const double ci = detail::binomial(i, p);
                for (int q = 0; q <= j; ++q) {
                    if (p == i && q == j) continue;
                    s -= ci * detail::binomial(j, q) * r.d_[index(p, q)] * b.d_[index(i - p, j - q)];
                }
            }
            r.d_[index(i, j)] = s / b0;
        });
        return r;
    }

private:
    static void check_order(int order, int min) {
        if (order < min) throw InvalidOrder("jet order must be at least " + std::to_string(min));
        if (order >= detail::max_binomial) throw InvalidOrder("jet order too large");
    }

    Jet& combine(const Jet& b, double sign) {
        if (b.order_ < order_) *this = truncated(b.order_);
        for (std::size_t k = 0; k < d_.size(); ++k) d_[k] += sign * b.d_[k];
        return *this;
    }

    int order_ = 0;
    std::vector<double> d_;
};

using Jet1 = Jet<1>;
using Jet2 = Jet<2>;

inline double value_of(double x) noexcept { return x; }
template <int V>
double value_of(const Jet<V>& x) noexcept {
    return x.value();
}

/// Constant of the same scalar kind and order as `like`.
inline double constant_like(double, double c) { return c; }
template <int V>
Jet<V> constant_like(const Jet<V>& like, double c) {
    return Jet<V>(c, like.order());
}

/// Embeds a jet in u into the bivariate ring (no v dependence).
inline Jet2 lift_to_uv(const Jet1& a) {
    Jet2 r(0.0, a.order());
    for (int i = 0; i <= a.order(); ++i) r.partial_ref(i, 0) = a.partial(i);
    return r;
}

/// f(g) from the derivatives f^(k)(g0), k = 0..order, by Taylor composition.
template <int V>
Jet<V> compose(const Jet<V>& g, std::span<const double> f_derivs) {
    const int n = g.order();
    Jet<V> delta = g;
    delta.partial_ref(0) = 0.0;
    Jet<V> r(f_derivs[0], n);
    if (n == 0) return r;
    Jet<V> power = delta;
    for (int k = 1; k <= n; ++k) {
        const double coef = f_derivs[k] / detail::factorial(k);
        if (coef != 0.0) r += coef * power;
        if (k < n) power = power * delta;
    }
    return r;
}

/// Linear change of variables (u, v) = base + s * row1 + t * row2, where row_i is row i of m.
/// The result is a jet in (s, t) at s = t = 0 of the same order.
inline Jet2 substitute_linear(const Jet2& f, const std::array<std::array<double, 2>, 2>& m) {
    const int n = f.order();
    Jet2 du(0.0, n), dv(0.0, n);
    if (n >= 1) {
        du.partial_ref(1, 0) = m[0][0];
        du.partial_ref(0, 1) = m[1][0];
        dv.partial_ref(1, 0) = m[0][1];
        dv.partial_ref(0, 1) = m[1][1];
    }
    std::vector<Jet2> du_pow{Jet2(1.0, n)}, dv_pow{Jet2(1.0, n)};
    for (int k = 1; k <= n; ++k) {
        du_pow.push_back(du_pow.back() * du);
        dv_pow.push_back(dv_pow.back() * dv);
    }
    Jet2 r(0.0, n);
    Jet2::for_each_index(n, [&](int i, int j) {
        const double c = f.partial(i, j) / (detail::factorial(i) * detail::factorial(j));
        if (c != 0.0) r += c * (du_pow[i] * dv_pow[j]);
    });
    return r;
}

// ---------------------------------------------------------------------------
// Elementary functions

enum class Elementary { sin, cos, tan, exp, ln, sqrt, sinh, cosh };

inline std::string_view name_of(Elementary f) {
    switch (f) {
        case Elementary::sin: return "sin";
        case Elementary::cos: return "cos";
        case Elementary::tan: return "tan";
        case Elementary::exp: return "exp";
        case Elementary::ln: return "ln";
        case Elementary::sqrt: return "sqrt";
        case Elementary::sinh: return "sinh";
        case Elementary::cosh: return "cosh";
    }
    return "?";
}

/// f^(k)(x0) for k = 0..order, with domain checks. Entry 0 is the plain value, so real
/// evaluation and jet evaluation agree exactly on value parts.
inline std::vector<double> elementary_derivatives(Elementary f, double x0, int order) {
    std::vector<double> d(order + 1);
    switch (f) {
        case Elementary::sin:
        case Elementary::cos: {
            const double s = std::sin(x0), c = std::cos(x0);
            const std::array<double, 4> cycle =
                f == Elementary::sin ? std::array{s, c, -s, -c} : std::array{c, -s, -c, s};
            for (int k = 0; k <= order; ++k) d[k] = cycle[k % 4];
            break;
        }
        case Elementary::sinh:
        case Elementary::cosh: {
            const double s = std::sinh(x0), c = std::cosh(x0);
            for (int k = 0; k <= order; ++k)
                d[k] = ((k % 2 == 0) == (f == Elementary::sinh)) ? s : c;
            break;
        }
        case Elementary::exp:
            std::fill(d.begin(), d.end(), std::exp(x0));
            break;
        case Elementary::ln: {
            if (!(x0 > 0.0)) throw DomainError("ln of non-positive value");
            d[0] = std::log(x0);
            double fact = 1.0;  // (k-1)!
            for (int k = 1; k <= order; ++k) {
                if (k > 1) fact *= (k - 1);
                d[k] = ((k % 2 == 1) ? 1.0 : -1.0) * fact / std::pow(x0, k);
            }
            break;
        }
        case Elementary::sqrt: {
            if (!(x0 > 0.0)) throw DomainError("sqrt of non-positive value");
            d[0] = std::sqrt(x0);
            double coef = 1.0;
            for (int k = 1; k <= order; ++k) {
                coef *= (0.5 - (k - 1));
                d[k] = coef * std::pow(x0, 0.5 - k);
            }
            break;
        }
        case Elementary::tan: {
            // d^k tan / dx^k = P_k(tan x) with P_0(t) = t and P_{k+1} = P_k' * (1 + t^2).
            const double t = std::tan(x0);
            std::vector<double> p{0.0, 1.0};
            for (int k = 0; k <= order; ++k) {
                double acc = 0.0;
                for (std::size_t m = p.size(); m-- > 0;) acc = acc * t + p[m];
                d[k] = k == 0 ? t : acc;
                std::vector<double> dp(p.size() > 1 ? p.size() - 1 : 1, 0.0);
                for (std::size_t m = 1; m < p.size(); ++m) dp[m - 1] = m * p[m];
                std::vector<double> next(dp.size() + 2, 0.0);
                for (std::size_t m = 0; m < dp.size(); ++m) {
                    next[m] += dp[m];
                    next[m + 2] += dp[m];
                }
                p = std::move(next);
            }
            break;
        }
    }
    return d;
}

/// Derivatives of x^r at x0. Integer exponents accept any base; other exponents need x0 > 0.
inline std::vector<double> power_derivatives(double x0, double r, int order) {
    const bool integral = std::nearbyint(r) == r;
    if (!integral && !(x0 > 0.0)) throw DomainError("non-integer power of non-positive value");
    if (x0 == 0.0 && r < 0.0) throw DegenerateDivisor("negative power of zero");
    std::vector<double> d(order + 1, 0.0);
    double coef = 1.0;  // r (r-1) ... (r-k+1)
    for (int k = 0; k <= order; ++k) {
        if (k > 0) coef *= (r - (k - 1));
        if (coef == 0.0) break;
        d[k] = coef * std::pow(x0, r - k);
    }
    return d;
}

inline double apply(Elementary f, double x) { return elementary_derivatives(f, x, 0)[0]; }

template <int V>
Jet<V> apply(Elementary f, const Jet<V>& x) {
    return compose(x, elementary_derivatives(f, x.value(), x.order()));
}

inline double power(double x, double r) { return power_derivatives(x, r, 0)[0]; }

template <int V>
Jet<V> power(const Jet<V>& x, double r) {
    return compose(x, power_derivatives(x.value(), r, x.order()));
}

inline double divide(double a, double b) {
    if (b == 0.0) throw DegenerateDivisor("division by zero");
    return a / b;
}
template <int V>
Jet<V> divide(const Jet<V>& a, const Jet<V>& b) {
    return a / b;
}

template <int V> Jet<V> sin(const Jet<V>& x) { return apply(Elementary::sin, x); }
template <int V> Jet<V> cos(const Jet<V>& x) { return apply(Elementary::cos, x); }
template <int V> Jet<V> tan(const Jet<V>& x) { return apply(Elementary::tan, x); }
template <int V> Jet<V> exp(const Jet<V>& x) { return apply(Elementary::exp, x); }
template <int V> Jet<V> log(const Jet<V>& x) { return apply(Elementary::ln, x); }
template <int V> Jet<V> sqrt(const Jet<V>& x) { return apply(Elementary::sqrt, x); }
template <int V> Jet<V> sinh(const Jet<V>& x) { return apply(Elementary::sinh, x); }
template <int V> Jet<V> cosh(const Jet<V>& x) { return apply(Elementary::cosh, x); }

}  // namespace affine4
