#include <catch2/catch_amalgamated.hpp>

#include "packlab/schedule.hpp"

using namespace packlab;

TEST_CASE("tangency on the parabola has the closed form u = gap/2") {
    Parabola f;
    double gap = std::ldexp(1.0, -10);
    auto sol = solve_tangency(f, 0.5 + gap, 0.5, {0.25});
    CHECK(sol.u[0] == 0.00048828125);
    CHECK(sol.v == 0.0002443790435791015625);
    CHECK(sol.grad_residual == 0.0);
}

TEST_CASE("tangency with equal parameters is the identity") {
    auto f = make_circle_cap();
    auto sol = solve_tangency(f, 1.5, 1.5, {0.3});
    CHECK(sol.u[0] == 0.0);
    CHECK(sol.v == 0.0);
    CHECK(sol.grad_residual == 0.0);
}

TEST_CASE("tangency on the circle cap matches the similar-triangles closed form") {
    auto f = make_circle_cap();
    double gap = std::ldexp(1.0, -10);
    double a_fix = 1.0, a_mov = 1.0 + gap;
    auto sol = solve_tangency(f, a_mov, a_fix, {0.5});
    double u_want = 0.5 * (1.0 - a_mov / a_fix);
    double v_want = std::sqrt(0.75) * (1.0 - a_mov / a_fix);
    CHECK(sol.u[0] == Catch::Approx(u_want).epsilon(1e-12));
    CHECK(sol.v == Catch::Approx(v_want).epsilon(1e-12));
    CHECK(std::fabs(sol.u[0] + std::ldexp(1.0, -11)) < 1e-15);
    CHECK(sol.grad_residual <= 1e-12);
}

TEST_CASE("first-order translation closed forms") {
    Parabola p;
    auto [u, v] = first_order_translation(p, 0.7, {0.3}, 0.01);
    CHECK(u[0] == 0.005); // h = 1/2 for the parabola
    auto f = make_circle_cap();
    auto [u2, v2] = first_order_translation(f, 1.0, {0.0}, 0.01);
    CHECK(u2[0] == 0.0); // apex symmetry
    (void)v;
    (void)v2;
}

TEST_CASE("parabola: exact and first-order translations coincide") {
    Parabola f;
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        double a_fix = rng.uniform(0.1, 0.8);
        double a_mov = a_fix + std::ldexp(rng.uniform(0.5, 1.0), -int(rng.below(20)) - 4);
        Vec<1> x{rng.uniform(0.1, 0.9)};
        auto sol = solve_tangency(f, a_mov, a_fix, x);
        auto [u1, v1] = first_order_translation(f, a_mov, x, a_mov - a_fix);
        CHECK(sol.u[0] == u1[0]);
        (void)v1;
    }
}

TEST_CASE("schedule on the parabola at M=16: exact closed-form accumulation") {
    Parabola f;
    auto path = build_path<1>(16);
    auto s = build_schedule(f, path);
    CHECK(s.m == 15);
    CHECK(s.pieces == std::uint64_t(1) << 16);
    CHECK(s.max_grad_residual == 0.0);
    CHECK(s.max_value_residual <= 1e-12);

    const double scale = std::ldexp(1.0, -17); // delta0 2^-M / 2
    const std::uint64_t mod = std::uint64_t(1) << s.m;
    for (std::uint64_t n : {std::uint64_t(0), std::uint64_t(1), std::uint64_t(27), std::uint64_t(32767),
                            std::uint64_t(32768), std::uint64_t(65535), std::uint64_t(40000)}) {
        auto [u, v] = s.total(n);
        CHECK(u[0] == scale * double(n % mod));
        (void)v;
    }
    // Never-moved pieces.
    auto [u0, v0] = s.total(0);
    CHECK(u0[0] == 0.0);
    CHECK(v0 == 0.0);
    auto [u32768, v32768] = s.total(32768);
    CHECK(u32768[0] == 0.0);
    CHECK(v32768 == 0.0);

    // Partial-sum bound with C_U <= 1 (parabola closed form gives 1/2 + eps).
    CHECK(s.partial_bound_cu <= 0.5 + std::ldexp(1.0, -16));
    CHECK(s.partial_bound_cu > 0.0);
}

TEST_CASE("max total translation bound at M=16") {
    Parabola f;
    auto s = build_schedule(f, build_path<1>(16));
    s.build_totals();
    CHECK(s.max_total_u / std::ldexp(s.delta0, s.m - 16) <= 0.5 + std::ldexp(1.0, -16));
}

TEST_CASE("piecewise translation boundary conventions") {
    Parabola f;
    auto s = build_schedule(f, build_path<1>(16));
    s.build_totals();
    // Left endpoint maps to piece 0.
    auto [u, v] = piecewise_translation(s, 0.0);
    CHECK(u[0] == 0.0);
    CHECK(v == 0.0);
    // Interior of the cell owned by n = 27 (a in (a_27, a_28)).
    double w = s.piece_width();
    double a = (27.0 + 0.5) * w;
    auto [u27, v27] = piecewise_translation(s, a);
    auto total27 = s.total(27);
    CHECK(u27[0] == total27.first[0]);
    CHECK(v27 == total27.second);
    // The decomposition n = 27 composes exactly the steps {1,2,4,5} applied
    // to the floors 27, 26, 24, 16.
    Vec<1> usum{};
    double vsum = 0;
    for (int j : {1, 2, 4, 5}) {
        std::uint64_t fl = floor_at(27, j);
        usum += s.steps[j - 1].u_at(std::size_t(fl >> j));
        vsum += s.steps[j - 1].v[std::size_t(fl >> j)];
    }
    CHECK(u27[0] == usum[0]);
    CHECK(v27 == vsum);
    // Right endpoint belongs to the cell on its left.
    auto left = piecewise_translation(s, 28.0 * w);
    CHECK(left.first[0] == u27[0]);
    // Two parameters in one dyadic cell agree bitwise.
    auto p1 = piecewise_translation(s, (27.0 + 0.25) * w);
    auto p2 = piecewise_translation(s, (27.0 + 0.75) * w);
    CHECK(p1.first[0] == p2.first[0]);
    CHECK(p1.second == p2.second);
}

TEST_CASE("group coherence: pieces grouped after step j translate together, bitwise") {
    auto f = make_circle_cap();
    auto s = build_schedule(f, build_path<1>(8, 5)); // M=8 needs the override
    for (int j : {2, 3, 5}) {
        for (std::uint64_t n = 0; n < s.pieces; ++n) {
            std::uint64_t p = floor_at(n, j + 1);
            auto dn = s.accumulated_between(n, j, s.m);
            auto dp = s.accumulated_between(p, j, s.m);
            CHECK(dn.first[0] == dp.first[0]);
            CHECK(dn.second == dp.second);
        }
    }
}

TEST_CASE("first-order consistency of the step translations") {
    auto f = make_circle_cap();
    auto path = build_path<1>(8, 5);
    auto s = build_schedule(f, path);
    double worst = 0;
    for (int j = 1; j <= s.m; ++j) {
        double step = std::ldexp(s.delta0, j - 1 - s.exponent);
        const auto& st = s.steps[j - 1];
        std::uint64_t groups = s.pieces >> j;
        for (std::uint64_t p = 0; p < groups; ++p) {
            std::uint64_t n = (p << j) + (std::uint64_t(1) << (j - 1));
            auto [u1, v1] = first_order_translation(f, s.a_at(n), s.tangency_points[j - 1], step);
            worst = std::max(worst, std::fabs(st.u_at(p)[0] - u1[0]) / std::pow(step, 1.0 + f.eta));
            (void)v1;
        }
    }
    // |u_exact - u_first_order| <= C step^(1+eta) with a modest constant.
    INFO("first-order consistency constant " << worst);
    CHECK(worst < 50.0);
}

TEST_CASE("schedule refuses m > M^d without an override and accepts with one") {
    Parabola f;
    CHECK_THROWS(build_schedule(f, build_path<1>(8))); // m = 9 > 8
    auto s = build_schedule(f, build_path<1>(8, 5));
    CHECK(s.lambda_overridden);
    CHECK(s.m == 8);
}

TEST_CASE("piece budget rejects oversized scales") {
    Parabola f;
    ScheduleLimits lim;
    lim.piece_budget = 1 << 10;
    CHECK_THROWS(build_schedule(f, build_path<1>(16), lim));
}

TEST_CASE("d=2 quadratic form schedule: closed-form totals") {
    auto f = make_quadratic_form<2>();
    auto path = build_path<2>(4);
    auto s = build_schedule(f, path);
    CHECK(s.exponent == 16);
    CHECK(s.m == 5);
    // u_j = gap * Q^{-1} b = gap * (1/2, 1/2) exactly for the pure quadratic.
    const double scale = std::ldexp(1.0, -17);
    const std::uint64_t mod = std::uint64_t(1) << s.m;
    for (std::uint64_t n : {std::uint64_t(11), std::uint64_t(27), std::uint64_t(65535)}) {
        auto [u, v] = s.total(n);
        CHECK(u[0] == scale * double(n % mod));
        CHECK(u[1] == scale * double(n % mod));
        (void)v;
    }
    CHECK(s.max_grad_residual <= 1e-12);
}
