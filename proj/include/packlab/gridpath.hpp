#ifndef PACKLAB_GRIDPATH_HPP
#define PACKLAB_GRIDPATH_HPP

#include <cstdint>
#include <optional>

#include "core.hpp"

namespace packlab {

// ---------------------------------------------------------------------------
// Back-and-forth path on the interior grid points of the uniform (M/2)^d
// tiling of the unit cube, with the head point repeated lambda+1 times.
// Coordinates are kept as exact integers k (point = 2k/M per axis, k in 1..J)
// and converted to floating point only at evaluation boundaries.
// ---------------------------------------------------------------------------

template <int D>
struct GridPath {
    int M = 0;
    int J = 0;          // M/2 - 1 interior points per axis
    int lambda = 0;
    int m = 0;          // J^D + lambda
    bool lambda_overridden = false;
    std::vector<std::array<int, D>> points; // points[j-1], 1-based j in queries

    Vec<D> point(int j) const {
        Vec<D> x;
        for (int i = 0; i < D; ++i) x[i] = 2.0 * points[j - 1][i] / double(M);
        return x;
    }
    std::array<int, D> coords(int j) const { return points[j - 1]; }
};

// Builds the canonical snake path: first coordinate varies fastest, traversal
// starts at the grid point nearest the origin, and the direction of each
// coordinate flips with the parity of the higher coordinates' indices, so
// consecutive points are exactly one grid step apart.
template <int D>
GridPath<D> build_path(int M, std::optional<int> lambda_override = std::nullopt) {
    if (M < 4 || M % 2 != 0) throw std::invalid_argument("build_path: M must be even and >= 4");
    GridPath<D> p;
    p.M = M;
    p.J = M / 2 - 1;
    p.lambda = lambda_default(M);
    if (lambda_override) {
        if (*lambda_override < 0) throw std::invalid_argument("lambda_override must be >= 0");
        p.lambda_overridden = (*lambda_override != p.lambda);
        p.lambda = *lambda_override;
    }

    std::uint64_t count = 1;
    for (int i = 0; i < D; ++i) count *= std::uint64_t(p.J);

    p.m = int(count) + p.lambda;
    p.points.reserve(p.m);

    std::array<std::uint64_t, D> bases;
    {
        std::uint64_t b = 1;
        for (int i = 0; i < D; ++i) {
            bases[i] = b;
            b *= std::uint64_t(p.J);
        }
    }
    for (std::uint64_t c = 0; c < count; ++c) {
        std::array<std::uint64_t, D> digits;
        for (int i = D - 1; i >= 0; --i) {
            digits[i] = (c / bases[i]) % std::uint64_t(p.J);
        }
        // Boustrophedon order: an odd effective digit reverses the traversal
        // of everything below it, so the reversal state threads top-down.
        std::array<int, D> pt;
        bool rev = false;
        for (int i = D - 1; i >= 0; --i) {
            std::uint64_t eff = rev ? std::uint64_t(p.J) - 1 - digits[i] : digits[i];
            pt[i] = int(eff + 1);
            if (eff % 2 == 1) rev = !rev;
        }
        if (c == 0) {
            for (int j = 0; j < p.lambda + 1; ++j) p.points.push_back(pt);
        } else {
            p.points.push_back(pt);
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Empirical constant of the grid-path inequality: for a probe x whose nearest
// grid point is visited at indices j in [lambda+1, m],
//   C(x) = max over those j of M^(1+alpha) 2^(-j) sum_{i<=j} 2^i |x-x_i|^(1+alpha).
// ---------------------------------------------------------------------------

template <int D>
struct PathConstantReport {
    double constant = 0;
    int arg_j = 0;
    Vec<D> probe{};
};

template <int D>
PathConstantReport<D> path_inequality_check(const GridPath<D>& path, double exponent, Vec<D> probe) {
    if (!(exponent > 1.0 && exponent <= 2.0)) throw std::invalid_argument("exponent must be in (1, 2]");
    for (int i = 0; i < D; ++i)
        if (probe[i] < 0.0 || probe[i] > 1.0) throw std::invalid_argument("probe outside the unit cube");

    // Nearest visited grid point decides the admissible step indices.
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (int j = 1; j <= path.m; ++j) {
        double d = (probe - path.point(j)).norm();
        if (d < best - 1e-15) {
            best = d;
            best_j = j;
        }
    }
    auto near_coords = path.coords(best_j);

    PathConstantReport<D> rep;
    rep.probe = probe;
    double mexp = std::pow(double(path.M), exponent);
    for (int j = std::max(path.lambda + 1, 1); j <= path.m; ++j) {
        if (path.coords(j) != near_coords) continue;
        Kahan sum;
        for (int i = 1; i <= j; ++i) {
            double dist = (probe - path.point(i)).norm();
            sum.add(std::ldexp(std::pow(dist, exponent), i));
        }
        double c = mexp * std::ldexp(sum.value(), -j);
        if (c > rep.constant) {
            rep.constant = c;
            rep.arg_j = j;
        }
    }
    return rep;
}

// Sweep over all interior grid points as probes.
template <int D>
PathConstantReport<D> path_inequality_sweep(const GridPath<D>& path, double exponent) {
    PathConstantReport<D> best;
    for (int j = path.lambda + 1; j <= path.m; ++j) {
        auto rep = path_inequality_check(path, exponent, path.point(j));
        if (rep.constant > best.constant) best = rep;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Brute-force oracle for the elementary unit-step inequality: enumerate all
// sequences n_1..n_L (L <= J^d) in {1..J}^d with |n_{j+1} - n_j| = 1 and
// return sup over sequences and prefixes j of 2^(-j) sum_i 2^i |n_j - n_i|^beta.
// ---------------------------------------------------------------------------

struct SnakeOracleResult {
    double supremum = 0;
    std::uint64_t sequences = 0;
    std::vector<std::array<int, 2>> witness; // second coordinate 0 when d = 1
    int witness_j = 0;
};

template <int D>
SnakeOracleResult snake_inequality_oracle(int J, double beta, std::uint64_t max_sequences = 4'000'000) {
    if (J < 1) throw std::invalid_argument("J must be >= 1");
    std::uint64_t space = 1;
    for (int i = 0; i < D; ++i) space *= std::uint64_t(J);
    const std::size_t max_len = std::size_t(space);

    SnakeOracleResult res;
    std::vector<std::array<int, D>> seq;
    seq.reserve(max_len);

    auto eval_prefix = [&]() {
        int j = int(seq.size());
        const auto& nj = seq.back();
        double sum = 0;
        for (int i = 1; i <= j; ++i) {
            double d2 = 0;
            for (int t = 0; t < D; ++t) {
                double df = double(nj[t] - seq[i - 1][t]);
                d2 += df * df;
            }
            double term = d2 == 0 ? 0.0 : std::pow(d2, beta / 2.0);
            sum += std::ldexp(term, i - j);
        }
        if (sum > res.supremum) {
            res.supremum = sum;
            res.witness.clear();
            for (const auto& q : seq) res.witness.push_back({q[0], D > 1 ? q[D - 1] : 0});
            res.witness_j = j;
        }
    };

    std::vector<std::array<int, D>> starts;
    {
        std::array<int, D> cur{};
        cur.fill(1);
        for (std::uint64_t c = 0; c < space; ++c) {
            starts.push_back(cur);
            for (int i = 0; i < D; ++i) {
                if (cur[i] < J) {
                    cur[i]++;
                    break;
                }
                cur[i] = 1;
            }
        }
    }

    struct Frame {
        int next_dir; // 0..2D-1: (axis, +/-)
    };
    std::vector<Frame> stack;

    for (const auto& s : starts) {
        seq.assign(1, s);
        res.sequences++;
        eval_prefix();
        stack.assign(1, Frame{0});
        while (!stack.empty()) {
            if (res.sequences > max_sequences)
                throw std::runtime_error("snake_inequality_oracle: enumeration space too large");
            Frame& f = stack.back();
            if (f.next_dir >= 2 * D || seq.size() >= max_len) {
                stack.pop_back();
                seq.pop_back();
                continue;
            }
            int dir = f.next_dir++;
            int axis = dir / 2;
            int delta = (dir % 2 == 0) ? 1 : -1;
            auto nxt = seq.back();
            nxt[axis] += delta;
            if (nxt[axis] < 1 || nxt[axis] > J) continue;
            seq.push_back(nxt);
            res.sequences++;
            eval_prefix();
            stack.push_back(Frame{0});
        }
    }
    return res;
}

// Lemma constant of a concrete path in integer grid units, repeated head
// included: sup over prefixes j of 2^(-j) sum_i 2^i |n_j - n_i|^beta.
template <int D>
double sequence_lemma_constant(const GridPath<D>& path, double beta) {
    double sup = 0;
    for (int j = 1; j <= path.m; ++j) {
        auto nj = path.coords(j);
        double sum = 0;
        for (int i = 1; i <= j; ++i) {
            auto ni = path.coords(i);
            double d2 = 0;
            for (int t = 0; t < D; ++t) {
                double df = double(nj[t] - ni[t]);
                d2 += df * df;
            }
            double term = d2 == 0 ? 0.0 : std::pow(d2, beta / 2.0);
            sum += std::ldexp(term, i - j);
        }
        sup = std::max(sup, sum);
    }
    return sup;
}

} // namespace packlab

#endif // PACKLAB_GRIDPATH_HPP
