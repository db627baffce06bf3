#include "support.hpp"

#include <affine4/jet.hpp>

#include <gtest/gtest.h>

#include <numbers>

using namespace affine4;
using affine4::testing::Rng;

namespace {

std::vector<double> partials(const Jet1& j) {
    std::vector<double> d;
    for (int k = 0; k <= j.order(); ++k) d.push_back(j.partial(k));
    return d;
}

Jet1 poly_jet(double u, int order, const std::vector<double>& coef) {
    const Jet1 x = Jet1::seed(0, u, order);
    Jet1 acc(0.0, order);
    for (auto it = coef.rbegin(); it != coef.rend(); ++it) acc = acc * x + *it;
    return acc;
}

}  // namespace

TEST(Jet, ProductOfPowersIsPowerOfSum) {
    const Jet1 u = Jet1::seed(0, 1.0, 3);
    const Jet1 r = (u * u) * (u * u * u);
    EXPECT_EQ(partials(r), (std::vector<double>{1, 5, 20, 60}));
}

TEST(Jet, ConstantsAdd) {
    const Jet1 r = Jet1(2.0, 4) + Jet1(3.0, 4);
    EXPECT_EQ(r.value(), 5.0);
    for (int k = 1; k <= 4; ++k) EXPECT_EQ(r.partial(k), 0.0);
}

TEST(Jet, DivisionByZeroValueIsDegenerate) {
    EXPECT_THROW(Jet1(1.0, 3) / Jet1::seed(0, 0.0, 3), DegenerateDivisor);
    EXPECT_THROW(Jet1(1.0, 3) / 0.0, DegenerateDivisor);
}

TEST(Jet, SinTaylor) {
    const Jet1 s = sin(Jet1::seed(0, 0.0, 3));
    const auto d = partials(s);
    EXPECT_DOUBLE_EQ(d[0], 0.0);
    EXPECT_DOUBLE_EQ(d[1], 1.0);
    EXPECT_DOUBLE_EQ(d[2], 0.0);
    EXPECT_DOUBLE_EQ(d[3], -1.0);
}

TEST(Jet, ExpTaylor) {
    EXPECT_EQ(partials(exp(Jet1::seed(0, 0.0, 2))), (std::vector<double>{1, 1, 1}));
}

TEST(Jet, LogOfNegativeIsDomainError) {
    EXPECT_THROW(log(Jet1::seed(0, -24.0, 3)), DomainError);
    EXPECT_THROW(sqrt(Jet1::seed(0, -1.0, 3)), DomainError);
    EXPECT_THROW(power(Jet1::seed(0, -1.0, 3), 0.5), DomainError);
}

TEST(Jet, Seed) {
    const Jet1 u = Jet1::seed(0, 0.5, 2);
    EXPECT_EQ(partials(u), (std::vector<double>{0.5, 1.0, 0.0}));

    const Jet2 v = Jet2::seed(1, 0.3, 3);
    EXPECT_EQ(v.value(), 0.3);
    EXPECT_EQ(v.partial(0, 1), 1.0);
    Jet2::for_each_index(3, [&](int i, int j) {
        if (i + j > 0 && !(i == 0 && j == 1)) {
            EXPECT_EQ(v.partial(i, j), 0.0) << i << "," << j;
        }
    });
}

TEST(Jet, SeedOrderZeroRejected) {
    EXPECT_THROW(Jet1::seed(0, 1.0, 0), InvalidOrder);
    EXPECT_THROW(Jet2::seed(1, 1.0, 0), InvalidOrder);
}

TEST(Jet, DerivativeLowersOrder) {
    const Jet2 u = Jet2::seed(0, 2.0, 4), v = Jet2::seed(1, 3.0, 4);
    const Jet2 f = u * u * v;  // f_u = 2uv, f_uv = 2u
    const Jet2 fu = f.derivative(0);
    EXPECT_EQ(fu.order(), 3);
    EXPECT_DOUBLE_EQ(fu.value(), 12.0);
    EXPECT_DOUBLE_EQ(fu.partial(0, 1), 4.0);
    EXPECT_DOUBLE_EQ(f.partial(2, 1), 2.0);
    EXPECT_THROW(Jet1(1.0, 0).derivative(0), InvalidOrder);
}

TEST(Jet, MixedOrdersTruncateToTheLowest) {
    const Jet1 a = Jet1::seed(0, 1.0, 5), b = Jet1::seed(0, 1.0, 2);
    EXPECT_EQ((a * b).order(), 2);
    EXPECT_EQ((a + b).order(), 2);
}

TEST(Jet, QuotientMatchesProductInverse) {
    const Jet1 u = Jet1::seed(0, 0.7, 6);
    const Jet1 q = (u * u + 1.0) / (u + 2.0);
    const Jet1 back = q * (u + 2.0);
    const Jet1 want = u * u + 1.0;
    for (int k = 0; k <= 6; ++k) EXPECT_NEAR(back.partial(k), want.partial(k), 1e-12);
}

TEST(Jet, PowerAgreesWithRepeatedProduct) {
    const Jet1 u = Jet1::seed(0, 1.3, 5);
    const Jet1 p = power(u, 3.0), m = u * u * u;
    for (int k = 0; k <= 5; ++k) EXPECT_NEAR(p.partial(k), m.partial(k), 1e-12 * std::max(1.0, std::abs(m.partial(k))));
    const Jet1 inv = power(u, -1.0), q = 1.0 / u;
    for (int k = 0; k <= 5; ++k) EXPECT_NEAR(inv.partial(k), q.partial(k), 1e-12 * std::max(1.0, std::abs(q.partial(k))));
    const Jet1 r = power(u, 0.5), s = sqrt(u);
    for (int k = 0; k <= 5; ++k) EXPECT_NEAR(r.partial(k), s.partial(k), 1e-12 * std::max(1.0, std::abs(s.partial(k))));
}

TEST(Jet, IntegerPowerOfNegativeBase) {
    const Jet1 u = Jet1::seed(0, -2.0, 3);
    const Jet1 p = power(u, 3.0);
    EXPECT_DOUBLE_EQ(p.value(), -8.0);
    EXPECT_DOUBLE_EQ(p.partial(1), 12.0);
    EXPECT_DOUBLE_EQ(p.partial(2), -12.0);
    EXPECT_DOUBLE_EQ(p.partial(3), 6.0);
    EXPECT_THROW(power(Jet1::seed(0, 0.0, 2), -1.0), DegenerateDivisor);
}

TEST(Jet, ElementaryFunctionsKnownDerivatives) {
    const double x = 0.4;
    const Jet1 u = Jet1::seed(0, x, 3);
    EXPECT_NEAR(tan(u).partial(1), 1.0 / (std::cos(x) * std::cos(x)), 1e-14);
    EXPECT_NEAR(tan(u).partial(2), 2 * std::tan(x) / std::pow(std::cos(x), 2), 1e-13);
    EXPECT_NEAR(log(u).partial(3), 2.0 / (x * x * x), 1e-12);
    EXPECT_NEAR(sinh(u).partial(3), std::cosh(x), 1e-14);
    EXPECT_NEAR(cosh(u).partial(2), std::cosh(x), 1e-14);
    EXPECT_NEAR(cos(u).partial(3), std::sin(x), 1e-14);
    EXPECT_NEAR(sqrt(u).partial(2), -0.25 * std::pow(x, -1.5), 1e-13);
}

TEST(Jet, BivariateCrossPartials) {
    const Jet2 u = Jet2::seed(0, 0.2, 4), v = Jet2::seed(1, -0.5, 4);
    const Jet2 f = sin(u * v);  // f_uv = cos(uv) - uv sin(uv)
    const double w = 0.2 * -0.5;
    EXPECT_NEAR(f.partial(1, 1), std::cos(w) - w * std::sin(w), 1e-14);
    EXPECT_NEAR(f.partial(2, 0), -0.25 * std::sin(w), 1e-14);
    EXPECT_NEAR(f.partial(0, 2), -0.04 * std::sin(w), 1e-14);
}

TEST(JetProperty, MultiplicationCommutesAndAssociates) {
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        const int order = 5;
        auto rj = [&] {
            std::vector<double> d(Jet2::size_for(order));
            for (auto& x : d) x = affine4::testing::uniform(rng, -2, 2);
            return Jet2::from_derivatives(order, d);
        };
        const Jet2 a = rj(), b = rj(), c = rj();
        const Jet2 ab = a * b, ba = b * a, l = (a * b) * c, r = a * (b * c);
        Jet2::for_each_index(order, [&](int i, int j) {
            const double s = std::max(1.0, std::abs(l.partial(i, j)));
            EXPECT_NEAR(ab.partial(i, j), ba.partial(i, j), 1e-13 * std::max(1.0, std::abs(ab.partial(i, j))));
            EXPECT_NEAR(l.partial(i, j), r.partial(i, j), 1e-13 * s);
        });
    }
}

TEST(JetProperty, ChainRuleForPolynomials) {
    Rng rng(12);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> f(4), g(4);
        for (auto& x : f) x = affine4::testing::uniform(rng, -1, 1);
        for (auto& x : g) x = affine4::testing::uniform(rng, -1, 1);
        const double u0 = affine4::testing::uniform(rng, -1, 1);
        const int order = 6;
        // f(g(u)) through jet arithmetic
        const Jet1 gj = poly_jet(u0, order, g);
        Jet1 fg(0.0, order);
        for (auto it = f.rbegin(); it != f.rend(); ++it) fg = fg * gj + *it;
        // against explicit composition: Taylor expansion of f at g(u0) composed with jet of g
        const Jet1 fd = poly_jet(gj.value(), order, f);
        const Jet1 composed = compose(gj, fd.derivs());
        for (int k = 0; k <= order; ++k)
            EXPECT_NEAR(fg.partial(k), composed.partial(k), 1e-12 * std::max(1.0, std::abs(fg.partial(k))));
    }
}

TEST(JetProperty, DerivativesMatchFiniteDifferences) {
    Rng rng(2024);
    int checked = 0, attempts = 0;
    double worst = 0.0;
    while (checked < 1000) {
        ASSERT_LT(++attempts, 200000);
        const Ast a = affine4::testing::random_ast(rng, 4);
        const double u0 = affine4::testing::uniform(rng, -1.5, 1.5);
        const auto c = affine4::testing::fd_compare(a, u0, 3);
        if (!c) continue;
        // composite expressions only: skip those that are affine in u near u0
        const Jet1 j = eval(a, Binding<Jet1>{Jet1::seed(0, u0, 3), std::nullopt});
        if (std::abs(j.partial(2)) < 1e-3 && std::abs(j.partial(3)) < 1e-3) continue;
        ++checked;
        worst = std::max(worst, c->worst_relative);
        EXPECT_LT(c->worst_relative, 1e-5) << to_string(a) << " at u = " << u0;
        EXPECT_TRUE(c->value_exact) << to_string(a);
    }
    RecordProperty("worst_relative", std::to_string(worst));
    RecordProperty("attempts", attempts);
}
