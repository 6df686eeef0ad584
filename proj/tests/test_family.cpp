#include <catch2/catch_amalgamated.hpp>

#include "packlab/family.hpp"

using namespace packlab;

TEST_CASE("parabola jet at a known point") {
    Parabola f;
    auto j = f.jet(0.5, {0.25});
    CHECK(j.value == 0.1875);
    CHECK(j.grad[0] == 1.0);
    CHECK(j.hess(0, 0) == 2.0);
    CHECK(j.da == 0.25);
    CHECK(j.grad_da[0] == 1.0);
}

TEST_CASE("circle cap apex jet") {
    auto f = make_circle_cap();
    auto j = f.jet(1.0, {0.0});
    CHECK(j.value == 1.0);
    CHECK(j.grad[0] == 0.0);
    CHECK(j.hess(0, 0) == -1.0);
    CHECK(j.da == 1.0);
    CHECK(j.grad_da[0] == 0.0);
}

TEST_CASE("hoelder quadratic with beta=0 degenerates to the parabola") {
    auto h = make_hoelder_quadratic({{"beta", 0.0}});
    Parabola p;
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        double a = rng.uniform(0, 1);
        Vec<1> x{rng.uniform(0, 1)};
        auto jh = h.jet(a, x);
        auto jp = p.jet(a, x);
        CHECK(jh.value == jp.value);
        CHECK(jh.grad[0] == jp.grad[0]);
        CHECK(jh.hess(0, 0) == jp.hess(0, 0));
        CHECK(jh.da == jp.da);
    }
}

namespace {

template <class F>
void check_fd_consistency(const F& fam, int points, double tol) {
    constexpr int D = F::dim;
    Rng rng(0);
    const double h = 1e-5;
    for (int rep = 0; rep < points; ++rep) {
        double a = fam.a0 + fam.delta0 * rng.uniform(0.05, 0.95);
        Vec<D> x;
        for (int i = 0; i < D; ++i)
            x[i] = fam.domain.lo[i] + (fam.domain.hi[i] - fam.domain.lo[i]) * rng.uniform(0.05, 0.95);
        auto j = fam.jet(a, x);
        // gradient
        for (int i = 0; i < D; ++i) {
            Vec<D> xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            double fd = (fam.value(a, xp) - fam.value(a, xm)) / (2 * h);
            CHECK(std::fabs(fd - j.grad[i]) <= tol * std::max(1.0, std::fabs(j.grad[i])));
        }
        // Hessian diagonal and mixed entries
        for (int i = 0; i < D; ++i) {
            Vec<D> xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            double fd = (fam.value(a, xp) - 2 * fam.value(a, x) + fam.value(a, xm)) / (h * h);
            CHECK(std::fabs(fd - j.hess(i, i)) <= tol * std::max(1.0, std::fabs(j.hess(i, i))));
        }
        // da and grad_da
        double fda = (fam.value(a + h, x) - fam.value(a - h, x)) / (2 * h);
        CHECK(std::fabs(fda - j.da) <= tol * std::max(1.0, std::fabs(j.da)));
        for (int i = 0; i < D; ++i) {
            Vec<D> xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            double fd = (fam.value(a + h, xp) - fam.value(a + h, xm) - fam.value(a - h, xp) + fam.value(a - h, xm)) /
                        (4 * h * h);
            CHECK(std::fabs(fd - j.grad_da[i]) <= tol * std::max(1.0, std::fabs(j.grad_da[i])));
        }
    }
}

} // namespace

TEST_CASE("finite differences match analytic jets at random samples") {
    check_fd_consistency(Parabola{}, 100, 1e-5);
    check_fd_consistency(make_circle_cap(), 100, 1e-5);
    check_fd_consistency(make_hoelder_quadratic(), 100, 1e-4);
    check_fd_consistency(make_quadratic_form<2>(), 100, 1e-5);
}

TEST_CASE("validate_regularity on the parabola: constant Hessian") {
    auto r = validate_regularity(Parabola{}, 16);
    CHECK(r.c0_min == 2.0);
    CHECK(r.sup_hess == 2.0);
    CHECK(r.sup_da == 1.0);
    CHECK(r.sup_grad_da == 1.0);
    CHECK(!r.violation);
}

TEST_CASE("validate_regularity on the circle cap matches an independent grid minimum") {
    auto f = make_circle_cap({{"halfwidth", 0.5}});
    const int density = 32;
    auto r = validate_regularity(f, density);
    // Independent minimization of |det D^2 f| = a^2/(a^2-x^2)^(3/2) over the
    // same sample grid.
    double want = std::numeric_limits<double>::infinity();
    int n = 2 * density;
    for (int ia = 0; ia <= n; ++ia) {
        double a = 1.0 + double(ia) / n;
        for (int ix = 0; ix <= n; ++ix) {
            double x = -0.5 + double(ix) / n;
            double s2 = a * a - x * x;
            want = std::min(want, a * a / (s2 * std::sqrt(s2)));
        }
    }
    CHECK(r.c0_min == Catch::Approx(want).epsilon(1e-12));
    CHECK(!r.violation);
}

TEST_CASE("zero-curvature family raises the violation flag") {
    GenericFamily<1> f;
    f.name = "quartic";
    f.jet_fn = [](double a, Vec<1> x) {
        Jet<1> j;
        j.value = a * x[0] + std::pow(x[0], 4);
        j.grad[0] = a + 4 * std::pow(x[0], 3);
        j.hess(0, 0) = 12 * x[0] * x[0];
        j.da = x[0];
        j.grad_da[0] = 1;
        return j;
    };
    f.value_fn = [](double a, Vec<1> x) { return a * x[0] + std::pow(x[0], 4); };
    auto r = validate_regularity(f, 8);
    CHECK(r.violation);
    CHECK(r.c0_min == 0.0);
}

TEST_CASE("asymmetric Hessian is reported with the violation flag") {
    GenericFamily<2> f;
    f.name = "broken";
    f.jet_fn = [](double a, Vec<2> x) {
        Jet<2> j;
        j.value = a * (x[0] + x[1]) + x.norm2();
        j.grad = {a + 2 * x[0], a + 2 * x[1]};
        j.hess(0, 0) = 2;
        j.hess(1, 1) = 2;
        j.hess(0, 1) = 0.5; // deliberately unbalanced
        j.hess(1, 0) = -0.5;
        j.da = x[0] + x[1];
        j.grad_da = {1, 1};
        return j;
    };
    f.value_fn = [](double a, Vec<2> x) { return a * (x[0] + x[1]) + x.norm2(); };
    auto r = validate_regularity(f, 4);
    CHECK(r.violation);
    CHECK(r.max_hess_asymmetry > 0.9);
}

TEST_CASE("hoelder quadratic curvature modulus: bounded at its own exponent, divergent above") {
    auto f = make_hoelder_quadratic();
    const double gamma = (2 + f.alpha) * (1 + f.alpha);
    auto quotient = [&](double spacing, double exponent) {
        double worst = 0;
        for (double x = 0.05; x + spacing <= 0.95; x += spacing) {
            double h1 = f.jet(0.5, {x}).hess(0, 0);
            double h2 = f.jet(0.5, {x + spacing}).hess(0, 0);
            worst = std::max(worst, std::fabs(h1 - h2) / std::pow(spacing, exponent));
        }
        return worst;
    };
    // At the family's own exponent the quotient stays under 2 beta gamma.
    for (double sp : {1e-2, 1e-3, 1e-4}) CHECK(quotient(sp, f.alpha) <= 2 * f.beta * gamma + 1e-9);
    // At a strictly larger exponent it grows without bound: spacing / 8 must
    // at least double the quotient.
    double q1 = quotient(1e-2, 1.0);
    double q2 = quotient(1e-2 / 8, 1.0);
    double q3 = quotient(1e-2 / 64, 1.0);
    CHECK(q2 >= 2.0 * q1);
    CHECK(q3 >= 2.0 * q2);
}

TEST_CASE("value-only evaluator gets synthesized jets") {
    GenericFamily<1> f;
    f.name = "value-only";
    f.value_fn = [](double a, Vec<1> x) { return a * x[0] + x[0] * x[0]; };
    auto j = f.jet(0.5, {0.25});
    CHECK(std::fabs(j.value - 0.1875) < 1e-14);
    CHECK(std::fabs(j.grad[0] - 1.0) < 1e-9);
    CHECK(std::fabs(j.hess(0, 0) - 2.0) < 1e-5);
    CHECK(std::fabs(j.da - 0.25) < 1e-10);
    CHECK(std::fabs(j.grad_da[0] - 1.0) < 1e-6);
}
