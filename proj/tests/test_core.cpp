#include <catch2/catch_amalgamated.hpp>

#include "packlab/core.hpp"

using namespace packlab;

TEST_CASE("interval union length on hand-computable input") {
    std::vector<Interval> v{{0, 1}, {0.5, 2}, {3, 4}};
    CHECK(union_length(v) == 3.0);
    std::vector<Interval> w{{3, 4}, {0.5, 2}, {0, 1}};
    CHECK(union_length(w) == 3.0);
}

TEST_CASE("interval union against brute rasterization on random families") {
    Rng rng(0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<Interval> v;
        int k = 1 + int(rng.below(20));
        for (int i = 0; i < k; ++i) {
            double a = rng.uniform(0, 10);
            double b = a + rng.uniform(0.01, 3.0);
            v.push_back({a, b});
        }
        double span_lo = v[0].lo, span_hi = v[0].hi;
        for (auto& iv : v) {
            span_lo = std::min(span_lo, iv.lo);
            span_hi = std::max(span_hi, iv.hi);
        }
        double res = 1e-6 * (span_hi - span_lo);
        std::size_t cells = std::size_t((span_hi - span_lo) / res) + 2;
        std::vector<char> mark(cells, 0);
        for (auto& iv : v) {
            std::size_t lo = std::size_t((iv.lo - span_lo) / res);
            std::size_t hi = std::min(cells - 1, std::size_t((iv.hi - span_lo) / res));
            for (std::size_t c = lo; c <= hi; ++c) mark[c] = 1;
        }
        double raster = res * double(std::count(mark.begin(), mark.end(), char(1)));
        auto copy = v;
        double exact = union_length(copy);
        CHECK(std::fabs(raster - exact) <= 1e-4 * std::max(exact, 1e-9) + 2 * res * k);
    }
}

TEST_CASE("epsilon decomposition bit and floor values") {
    auto d = epsilon_decompose(27, 8);
    std::vector<int> expect_bits{1, 1, 0, 1, 1, 0, 0, 0};
    CHECK(d.bits == expect_bits);
    CHECK(d.floors[0] == 27);
    CHECK(d.floors[1] == 26);
    CHECK(d.floors[3] == 24);
    CHECK(d.floors[4] == 16);
}

TEST_CASE("lambda is the least k with 2^k >= M^2") {
    CHECK(lambda_default(4) == 4);
    CHECK(lambda_default(8) == 6);
    CHECK(lambda_default(16) == 8);
    CHECK(lambda_default(20) == 9);
    CHECK(lambda_default(24) == 10);
    CHECK(lambda_default(32) == 10);
    CHECK(lambda_default(64) == 12);
    for (int M = 4; M <= 64; M += 2) {
        int lam = lambda_default(M);
        CHECK(std::ldexp(1.0, lam) >= double(M) * M);
        CHECK(std::ldexp(1.0, lam - 1) < double(M) * M);
    }
}

TEST_CASE("parallel block reduction is independent of the thread count") {
    const std::size_t nblocks = 64;
    auto run = [&] {
        std::vector<double> partial(nblocks, 0.0);
        parallel_blocks(nblocks, [&](std::size_t b) {
            Kahan k;
            for (int i = 0; i < 1000; ++i) k.add(std::sin(double(b * 1000 + i)));
            partial[b] = k.value();
        });
        Kahan total;
        for (double p : partial) total.add(p);
        return total.value();
    };
    double a = run();
    double b = run();
    CHECK(a == b);
}

TEST_CASE("hex float round trip is bitwise exact") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        double v = std::ldexp(rng.uniform(-1, 1), int(rng.below(60)) - 30);
        CHECK(parse_hex_double(hex_double(v)) == v);
    }
}
