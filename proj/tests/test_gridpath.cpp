#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "packlab/gridpath.hpp"

using namespace packlab;

namespace {

template <int D>
void check_path_invariants(const GridPath<D>& p) {
    // Head repeated lambda+1 times.
    for (int j = 1; j <= p.lambda + 1; ++j) CHECK(p.coords(j) == p.coords(1));
    // Unit steps after the head, in exact integer coordinates.
    for (int j = p.lambda + 1; j < p.m; ++j) {
        auto a = p.coords(j), b = p.coords(j + 1);
        int manhattan = 0, linf = 0;
        for (int i = 0; i < D; ++i) {
            manhattan += std::abs(a[i] - b[i]);
            linf = std::max(linf, std::abs(a[i] - b[i]));
        }
        CHECK(manhattan == 1);
        CHECK(linf == 1);
    }
    // Bijection onto the J^D interior grid points.
    std::set<std::array<int, D>> seen;
    for (int j = p.lambda + 1; j <= p.m; ++j) seen.insert(p.coords(j));
    std::uint64_t want = 1;
    for (int i = 0; i < D; ++i) want *= std::uint64_t(p.J);
    CHECK(seen.size() == want);
    CHECK(p.m - p.lambda == int(want));
    for (auto& c : seen)
        for (int i = 0; i < D; ++i) {
            CHECK(c[i] >= 1);
            CHECK(c[i] <= p.J);
        }
}

} // namespace

TEST_CASE("path invariants hold for all even M in [4,64], d in {1,2,3}") {
    for (int M = 4; M <= 64; M += 2) {
        check_path_invariants(build_path<1>(M));
        check_path_invariants(build_path<2>(M));
        if (M <= 20) check_path_invariants(build_path<3>(M));
    }
}

TEST_CASE("d=2 back-and-forth path matches the displayed row formula at M=8") {
    auto p = build_path<2>(8);
    // First row: (2j/M, 2/M), then the turn up.
    int base = p.lambda + 1;
    CHECK(p.point(base) == (Vec<2>{0.25, 0.25}));
    CHECK(p.point(base + 1) == (Vec<2>{0.50, 0.25}));
    CHECK(p.point(base + 2) == (Vec<2>{0.75, 0.25}));
    CHECK(p.point(base + 3) == (Vec<2>{0.75, 0.50}));
    // Second row reversed: 2(M-j-1)/M.
    CHECK(p.point(base + 4) == (Vec<2>{0.50, 0.50}));
    CHECK(p.point(base + 5) == (Vec<2>{0.25, 0.50}));
}

TEST_CASE("d=1 M=8 scales and sequence") {
    auto p = build_path<1>(8);
    CHECK(p.lambda == 6);
    CHECK(p.m == 9);
    for (int j = 1; j <= 7; ++j) CHECK(p.point(j)[0] == 0.25);
    CHECK(p.point(8)[0] == 0.50);
    CHECK(p.point(9)[0] == 0.75);
}

TEST_CASE("M=4 d=2 degenerates to a constant path at the single interior point") {
    auto p = build_path<2>(4);
    CHECK(p.J == 1);
    CHECK(p.lambda == 4);
    CHECK(p.m == 5);
    for (int j = 1; j <= 5; ++j) CHECK(p.point(j) == (Vec<2>{0.5, 0.5}));
}

TEST_CASE("lambda override is flagged and replaces the default") {
    auto p = build_path<1>(8, 5);
    CHECK(p.lambda == 5);
    CHECK(p.m == 8);
    CHECK(p.lambda_overridden);
    auto q = build_path<1>(8, 6);
    CHECK(!q.lambda_overridden);
}

TEST_CASE("path inequality at a repeated-head probe vanishes at the first admissible index") {
    auto p = build_path<1>(8);
    auto rep = path_inequality_check(p, 2.0, p.point(p.lambda + 1));
    // The head contributes nothing at j = lambda+1; later occurrences do not
    // exist for this probe, so the constant is zero.
    CHECK(rep.constant == 0.0);
}

TEST_CASE("path inequality value agrees with a hand-enumerable nine-term sum") {
    auto p = build_path<1>(8);
    Vec<1> probe{0.75};
    // probe = x_9 exactly; sum_i 2^i |0.75 - x_i|^2 for j = 9.
    double sum = 0;
    for (int i = 1; i <= 9; ++i) sum += std::ldexp(std::pow(std::fabs(0.75 - p.point(i)[0]), 2.0), i);
    double want = 64.0 * sum / 512.0;
    auto rep = path_inequality_check(p, 2.0, probe);
    CHECK(rep.arg_j == 9);
    CHECK(rep.constant == want);
}

TEST_CASE("sweep constants stay within a factor 4 band over M in {8,16,32}") {
    double c8 = path_inequality_sweep(build_path<1>(8), 2.0).constant;
    double c16 = path_inequality_sweep(build_path<1>(16), 2.0).constant;
    double c32 = path_inequality_sweep(build_path<1>(32), 2.0).constant;
    double mx = std::max({c8, c16, c32});
    double mn = std::min({c8, c16, c32});
    INFO("sweep constants " << c8 << " " << c16 << " " << c32);
    CHECK(mn > 0);
    CHECK(mx / mn <= 4.0);
}

TEST_CASE("unit-step oracle: degenerate grid gives zero") {
    auto r = snake_inequality_oracle<1>(1, 2.0);
    CHECK(r.supremum == 0.0);
    auto r2 = snake_inequality_oracle<2>(1, 2.0);
    CHECK(r2.supremum == 0.0);
}

TEST_CASE("unit-step oracle J=3 d=1: exhaustive supremum equals the frozen value") {
    auto r = snake_inequality_oracle<1>(3, 2.0);
    // Sequences of length <= 3 in {1,2,3}: the supremum 1.5 is attained by
    // the straight walks (1,2,3) and (3,2,1) at j = 3.
    CHECK(r.supremum == 1.5);
}

TEST_CASE("unit-step oracle J=3 d=2 dominates the d=1 value and is finite") {
    auto r1 = snake_inequality_oracle<1>(3, 2.0);
    auto r2 = snake_inequality_oracle<2>(3, 2.0);
    INFO("enumerated " << r2.sequences << " sequences; sup " << r2.supremum);
    CHECK(r2.supremum >= r1.supremum);
    CHECK(r2.supremum < 6.0);
    CHECK(r2.sequences < 4'000'000);
}

TEST_CASE("every unit-step sequence obeys the universal geometric bound") {
    // sum_{i<=j} 2^i |n_j-n_i|^2 <= 2^j sum_k k^2 2^-k < 6 * 2^j since
    // |n_j - n_i| <= j - i for unit steps; the enumerated suprema and the
    // canonical snake must both respect it.
    auto r = snake_inequality_oracle<2>(3, 2.0);
    CHECK(r.supremum < 6.0);
    for (int M = 4; M <= 64; M += 2) {
        CHECK(sequence_lemma_constant(build_path<1>(M), 2.0) < 6.0);
        CHECK(sequence_lemma_constant(build_path<2>(M), 2.0) < 6.0);
    }
}

TEST_CASE("oracle rejects an enumeration space beyond the budget") {
    CHECK_THROWS(snake_inequality_oracle<2>(4, 2.0, 100000));
}
