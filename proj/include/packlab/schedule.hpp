#ifndef PACKLAB_SCHEDULE_HPP
#define PACKLAB_SCHEDULE_HPP

#include <optional>

#include "core.hpp"
#include "family.hpp"
#include "gridpath.hpp"

namespace packlab {

// ---------------------------------------------------------------------------
// Tangency solves: translate the graph of f(a_mov, .) by (u, v) so that it
// matches f(a_fix, .) in value and gradient at a chosen point.
// ---------------------------------------------------------------------------

template <int D>
struct TangencySolution {
    Vec<D> u{};
    double v = 0;
    double grad_residual = 0;
    int iterations = 0;
    bool converged = false;
};

// First-order translation u ~ step * h(a, x) with h = (D^2_x f)^{-1} grad_x da f,
// and v ~ step * (h . grad_x f - da f). Used as the Newton initializer and as
// an approximation-quality diagnostic.
template <class F>
std::pair<Vec<F::dim>, double> first_order_translation(const F& fam, double a, Vec<F::dim> x, double step) {
    constexpr int D = F::dim;
    Jet<D> j = fam.jet(a, x);
    if (std::fabs(j.hess.det()) == 0.0) throw std::runtime_error("first_order_translation: singular Hessian");
    Vec<D> h = j.hess.solve(j.grad_da);
    Vec<D> u = h * step;
    double v = step * (h.dot(j.grad) - j.da);
    return {u, v};
}

// Newton iteration on grad_x f(a_mov, x - u) = grad_x f(a_fix, x); v is then
// set from the value equation exactly, so the value match holds to round-off
// by construction and all solver error is in the gradient residual.
template <class F>
TangencySolution<F::dim> solve_tangency(const F& fam, double a_mov, double a_fix, Vec<F::dim> x,
                                        double tol = 1e-12, int max_iters = 25) {
    constexpr int D = F::dim;
    TangencySolution<D> sol;
    Vec<D> target = fam.jet(a_fix, x).grad;

    Vec<D> u{};
    if (a_mov != a_fix) {
        auto [u0, v0] = first_order_translation(fam, a_mov, x, a_mov - a_fix);
        u = u0;
    }
    const Box<D> guard = fam.domain.enlarged(0.05);
    const double step_floor = 4.0 * std::numeric_limits<double>::epsilon() *
                              std::max({1.0, x.norm_inf(), u.norm_inf()});
    double res = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= max_iters; ++it) {
        Vec<D> y = x - u;
        if (!guard.contains(y)) throw std::runtime_error("solve_tangency: iterate escaped the enlarged domain");
        Jet<D> j = fam.jet(a_mov, y);
        Vec<D> g = j.grad - target;
        res = g.norm_inf();
        sol.iterations = it;
        if (res == 0.0) {
            sol.converged = true;
            break;
        }
        // d/du grad_x f(a_mov, x - u) = -Hess, so the Newton step solves
        // Hess * delta = g and updates u += delta. Steps below the rounding
        // floor cannot improve u; stop there so exact initializers survive
        // untouched while inexact ones get polished to machine accuracy.
        Vec<D> delta = j.hess.solve(g);
        if (delta.norm_inf() <= step_floor) {
            sol.converged = (res <= tol);
            break;
        }
        if (it == max_iters) break;
        u += delta;
    }
    if (!sol.converged && res <= tol) sol.converged = true;
    if (!sol.converged) throw std::runtime_error("solve_tangency: no convergence after iteration cap");
    sol.u = u;
    sol.grad_residual = res;
    sol.v = fam.value(a_fix, x) - fam.value(a_mov, x - u);
    return sol;
}

// ---------------------------------------------------------------------------
// Translation schedule: per-step translations u_{j,.}, v_{j,.} for the dyadic
// construction, plus derived totals. Pieces are indexed n = 0..2^E-1 where
// E = M^d; step j moves the groups n = 2^j p + 2^(j-1).
// ---------------------------------------------------------------------------

template <int D>
struct ScheduleStep {
    std::vector<double> u; // group-major, D components each
    std::vector<double> v;
    Vec<D> u_at(std::size_t p) const {
        Vec<D> r;
        for (int i = 0; i < D; ++i) r[i] = u[p * D + i];
        return r;
    }
};

template <int D>
struct TranslationSchedule {
    std::string family_name;
    int M = 0;
    int exponent = 0; // M^d
    std::uint64_t pieces = 0;
    int m = 0, lambda = 0;
    bool lambda_overridden = false;
    double a0 = 0, delta0 = 1;
    Box<D> domain{};
    std::vector<Vec<D>> tangency_points; // x_j in family coordinates

    std::vector<ScheduleStep<D>> steps; // steps[j-1]

    // Derived totals U_{m,n}, V_{m,n}; built on demand (piece-major layout).
    std::vector<double> total_u;
    std::vector<double> total_v;

    // Solver diagnostics.
    double max_grad_residual = 0;
    double max_value_residual = 0;
    int max_iterations = 0;
    double max_total_u = 0, max_total_v = 0;
    double partial_bound_cu = 0, partial_bound_cv = 0; // sup |U_{j,n}| / (delta0 2^{j-E})

    double a_at(std::uint64_t n) const { return a0 + delta0 * std::ldexp(double(n), -exponent); }
    double piece_width() const { return delta0 * std::ldexp(1.0, -exponent); }

    std::size_t group_index(std::uint64_t n, int j) const { return std::size_t(n >> j); }

    // Exact on-demand accumulation over steps (j0, j1], ascending order.
    std::pair<Vec<D>, double> accumulated_between(std::uint64_t n, int j0, int j1) const {
        Vec<D> u{};
        double v = 0;
        for (int j = j0 + 1; j <= j1; ++j) {
            if (!bit_of(n, j)) continue;
            std::size_t p = group_index(n, j);
            u += steps[j - 1].u_at(p);
            v += steps[j - 1].v[p];
        }
        return {u, v};
    }
    std::pair<Vec<D>, double> accumulated(std::uint64_t n, int j) const { return accumulated_between(n, 0, j); }
    std::pair<Vec<D>, double> total(std::uint64_t n) const { return accumulated_between(n, 0, m); }

    bool has_totals() const { return !total_v.empty(); }
    Vec<D> total_u_at(std::uint64_t n) const {
        Vec<D> r;
        for (int i = 0; i < D; ++i) r[i] = total_u[std::size_t(n) * D + i];
        return r;
    }

    // Materializes total_u/total_v with the same per-piece summation order as
    // accumulated(): ascending j. Deterministic under any parallelism.
    void build_totals() {
        if (has_totals()) return;
        total_u.assign(std::size_t(pieces) * D, 0.0);
        total_v.assign(std::size_t(pieces), 0.0);
        for (int j = 1; j <= m; ++j) {
            const auto& st = steps[j - 1];
            const std::uint64_t span = std::uint64_t(1) << j;
            const std::uint64_t half = span >> 1;
            const std::uint64_t groups = pieces >> j;
            const std::uint64_t block_groups = std::max<std::uint64_t>(1, (std::uint64_t(1) << 16) / span);
            const std::size_t nblocks = std::size_t((groups + block_groups - 1) / block_groups);
            parallel_blocks(nblocks, [&](std::size_t blk) {
                std::uint64_t p_lo = blk * block_groups;
                std::uint64_t p_hi = std::min(groups, p_lo + block_groups);
                for (std::uint64_t p = p_lo; p < p_hi; ++p) {
                    const double* up = &st.u[std::size_t(p) * D];
                    const double vv = st.v[p];
                    std::uint64_t base = p * span + half;
                    for (std::uint64_t n = base; n < base + half; ++n) {
                        for (int i = 0; i < D; ++i) total_u[std::size_t(n) * D + i] += up[i];
                        total_v[std::size_t(n)] += vv;
                    }
                }
            });
        }
        // Extremes of the totals (single pass).
        double mu = 0, mv = 0;
        for (std::uint64_t n = 0; n < pieces; ++n) {
            for (int i = 0; i < D; ++i) mu = std::max(mu, std::fabs(total_u[std::size_t(n) * D + i]));
            mv = std::max(mv, std::fabs(total_v[std::size_t(n)]));
        }
        max_total_u = mu;
        max_total_v = mv;
    }

    // Per-axis range of the x-translations across pieces (needs totals).
    Box<D> total_u_range() const {
        Box<D> r;
        r.lo = Vec<D>::constant(0);
        r.hi = Vec<D>::constant(0);
        for (std::uint64_t n = 0; n < pieces; ++n)
            for (int i = 0; i < D; ++i) {
                double v = total_u[std::size_t(n) * D + i];
                r.lo[i] = std::min(r.lo[i], v);
                r.hi[i] = std::max(r.hi[i], v);
            }
        return r;
    }
};

// Map a unit-cube grid point into the family domain.
template <int D>
Vec<D> to_domain(const Box<D>& dom, Vec<D> unit) {
    Vec<D> r;
    for (int i = 0; i < D; ++i) r[i] = dom.lo[i] + (dom.hi[i] - dom.lo[i]) * unit[i];
    return r;
}

struct ScheduleLimits {
    std::uint64_t piece_budget = std::uint64_t(1) << 25;
};

// ---------------------------------------------------------------------------
// The construction: for each step j = 1..m and each group n = 2^j p + 2^(j-1),
// translate the group so its representative is tangent to the representative
// of the group below it at the step's grid point. Within a step the groups
// are independent; steps are sequential. The moving and fixed representatives
// carry no prior translation (their indices have all bits below j clear) --
// asserted here rather than assumed.
// ---------------------------------------------------------------------------

template <class F>
TranslationSchedule<F::dim> build_schedule(const F& fam, const GridPath<F::dim>& path,
                                           ScheduleLimits limits = {}) {
    constexpr int D = F::dim;
    const int M = path.M;
    int exponent = 1;
    {
        long long e = 1;
        for (int i = 0; i < D; ++i) e *= M;
        if (e > 62) throw std::runtime_error("build_schedule: M^d exceeds the addressable range");
        exponent = int(e);
    }
    TranslationSchedule<D> s;
    s.family_name = fam.name;
    s.M = M;
    s.exponent = exponent;
    s.pieces = std::uint64_t(1) << exponent;
    if (s.pieces > limits.piece_budget)
        throw std::runtime_error("build_schedule: piece count 2^" + std::to_string(exponent) +
                                 " exceeds the piece budget; reduce M");
    s.m = path.m;
    s.lambda = path.lambda;
    s.lambda_overridden = path.lambda_overridden;
    s.a0 = fam.a0;
    s.delta0 = fam.delta0;
    s.domain = fam.domain;
    if (s.m > exponent)
        throw std::runtime_error("build_schedule: m = " + std::to_string(s.m) + " exceeds M^d = " +
                                 std::to_string(exponent) + "; the construction needs a lambda override at this scale");

    s.tangency_points.reserve(s.m);
    for (int j = 1; j <= s.m; ++j) s.tangency_points.push_back(to_domain(fam.domain, path.point(j)));

    s.steps.resize(s.m);
    const double h_piece = s.piece_width();

    struct BlockDiag {
        double res = 0, vres = 0;
        int iters = 0;
    };

    for (int j = 1; j <= s.m; ++j) {
        ScheduleStep<D>& st = s.steps[j - 1];
        const std::uint64_t groups = s.pieces >> j;
        st.u.assign(std::size_t(groups) * D, 0.0);
        st.v.assign(std::size_t(groups), 0.0);
        const Vec<D> xj = s.tangency_points[j - 1];
        const double gap = std::ldexp(h_piece, j - 1); // a_mov - a_fix = delta0 2^{j-1-E}

        if constexpr (F::tangency_gap_only) {
            // The gradient equation depends on the parameters only through
            // their gap, so one solve serves every group of this step.
            std::uint64_t n0 = std::uint64_t(1) << (j - 1);
            auto sol = solve_tangency(fam, s.a_at(n0), s.a_at(0), xj);
            s.max_grad_residual = std::max(s.max_grad_residual, sol.grad_residual);
            s.max_iterations = std::max(s.max_iterations, sol.iterations);
            const std::uint64_t block_groups = std::max<std::uint64_t>(1, std::uint64_t(1) << 14);
            const std::size_t nblocks = std::size_t((groups + block_groups - 1) / block_groups);
            std::vector<BlockDiag> diag(nblocks);
            parallel_blocks(nblocks, [&](std::size_t blk) {
                BlockDiag bd;
                std::uint64_t p_lo = blk * block_groups;
                std::uint64_t p_hi = std::min(groups, p_lo + block_groups);
                for (std::uint64_t p = p_lo; p < p_hi; ++p) {
                    std::uint64_t n = (p << j) + (std::uint64_t(1) << (j - 1));
                    double a_mov = s.a_at(n);
                    double a_fix = s.a_at(n - (std::uint64_t(1) << (j - 1)));
                    for (int i = 0; i < D; ++i) st.u[std::size_t(p) * D + i] = sol.u[i];
                    double v = fam.value(a_fix, xj) - fam.value(a_mov, xj - sol.u);
                    st.v[p] = v;
                    double vres = std::fabs(fam.value(a_fix, xj) - (fam.value(a_mov, xj - sol.u) + v));
                    bd.vres = std::max(bd.vres, vres);
                    // Gradient residual for this group's own parameters.
                    Vec<D> g = fam.jet(a_mov, xj - sol.u).grad - fam.jet(a_fix, xj).grad;
                    bd.res = std::max(bd.res, g.norm_inf());
                }
                diag[blk] = bd;
            });
            for (const auto& bd : diag) {
                s.max_grad_residual = std::max(s.max_grad_residual, bd.res);
                s.max_value_residual = std::max(s.max_value_residual, bd.vres);
            }
        } else {
            const std::uint64_t block_groups = std::max<std::uint64_t>(1, std::uint64_t(1) << 12);
            const std::size_t nblocks = std::size_t((groups + block_groups - 1) / block_groups);
            std::vector<BlockDiag> diag(nblocks);
            parallel_blocks(nblocks, [&](std::size_t blk) {
                BlockDiag bd;
                std::uint64_t p_lo = blk * block_groups;
                std::uint64_t p_hi = std::min(groups, p_lo + block_groups);
                for (std::uint64_t p = p_lo; p < p_hi; ++p) {
                    std::uint64_t n = (p << j) + (std::uint64_t(1) << (j - 1));
                    std::uint64_t n_fix = n - (std::uint64_t(1) << (j - 1));
                    // Representatives of the moving and fixed groups have not
                    // been translated in earlier steps.
                    if ((n & ((std::uint64_t(1) << (j - 1)) - 1)) != 0)
                        throw std::logic_error("moving representative carries prior translation");
                    auto sol = solve_tangency(fam, s.a_at(n), s.a_at(n_fix), xj);
                    for (int i = 0; i < D; ++i) st.u[std::size_t(p) * D + i] = sol.u[i];
                    st.v[p] = sol.v;
                    bd.res = std::max(bd.res, sol.grad_residual);
                    bd.iters = std::max(bd.iters, sol.iterations);
                    double vres = std::fabs(fam.value(s.a_at(n_fix), xj) -
                                            (fam.value(s.a_at(n), xj - sol.u) + sol.v));
                    bd.vres = std::max(bd.vres, vres);
                }
                diag[blk] = bd;
            });
            for (const auto& bd : diag) {
                s.max_grad_residual = std::max(s.max_grad_residual, bd.res);
                s.max_value_residual = std::max(s.max_value_residual, bd.vres);
                s.max_iterations = std::max(s.max_iterations, bd.iters);
            }
        }
        (void)gap;
    }

    // Partial-sum bound diagnostics: sup over j, n of |U_{j,n}| / (delta0 2^{j-E}).
    // Exact per-level interval recursion when the piece count is moderate.
    if (exponent <= 22) {
        std::vector<double> ulo(std::size_t(s.pieces) * D, 0.0), uhi(std::size_t(s.pieces) * D, 0.0);
        std::vector<double> vlo(std::size_t(s.pieces), 0.0), vhi(std::size_t(s.pieces), 0.0);
        double cu = 0, cv = 0;
        std::uint64_t blocks = s.pieces;
        for (int j = 1; j <= s.m; ++j) {
            const auto& st = s.steps[j - 1];
            blocks >>= 1;
            for (std::uint64_t b = 0; b < blocks; ++b) {
                // Children 2b (unmoved) and 2b+1 (moved by u_j[b] when at the
                // step parity); at level j the moved child gains step j's offset.
                for (int i = 0; i < D; ++i) {
                    double off = st.u[std::size_t(b) * D + i];
                    double lo = std::min(ulo[std::size_t(2 * b) * D + i], ulo[std::size_t(2 * b + 1) * D + i] + off);
                    double hi = std::max(uhi[std::size_t(2 * b) * D + i], uhi[std::size_t(2 * b + 1) * D + i] + off);
                    ulo[std::size_t(b) * D + i] = lo;
                    uhi[std::size_t(b) * D + i] = hi;
                    cu = std::max(cu, std::max(std::fabs(lo), std::fabs(hi)) / std::ldexp(s.delta0, j - exponent));
                }
                double offv = st.v[b];
                double lo = std::min(vlo[2 * b], vlo[2 * b + 1] + offv);
                double hi = std::max(vhi[2 * b], vhi[2 * b + 1] + offv);
                vlo[b] = lo;
                vhi[b] = hi;
                cv = std::max(cv, std::max(std::fabs(lo), std::fabs(hi)) / std::ldexp(s.delta0, j - exponent));
            }
        }
        s.partial_bound_cu = cu;
        s.partial_bound_cv = cv;
    }
    return s;
}

// Piecewise-constant translation at parameter a: piece n owns (a_n, a_{n+1}],
// with the left endpoint a0 mapped to piece 0.
template <int D>
std::pair<Vec<D>, double> piecewise_translation(const TranslationSchedule<D>& s, double a) {
    if (a < s.a0 || a > s.a0 + s.delta0) throw std::invalid_argument("piecewise_translation: a outside range");
    double t = (a - s.a0) / s.piece_width();
    std::uint64_t n;
    if (t <= 0)
        n = 0;
    else {
        double c = std::ceil(t);
        n = std::uint64_t(c) - 1;
        if (n >= s.pieces) n = s.pieces - 1;
    }
    if (s.has_totals()) return {s.total_u_at(n), s.total_v[std::size_t(n)]};
    return s.total(n);
}

template <int D>
std::uint64_t piece_of(const TranslationSchedule<D>& s, double a) {
    double t = (a - s.a0) / s.piece_width();
    if (t <= 0) return 0;
    std::uint64_t n = std::uint64_t(std::ceil(t)) - 1;
    return std::min(n, s.pieces - 1);
}

} // namespace packlab

#endif // PACKLAB_SCHEDULE_HPP
