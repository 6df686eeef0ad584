#ifndef PACKLAB_SURFACE_PACK_HPP
#define PACKLAB_SURFACE_PACK_HPP

#include "measure.hpp"
#include "schedule.hpp"
#include "surface.hpp"

namespace packlab {

// ---------------------------------------------------------------------------
// Charts: an orthogonal frame in which one angular piece of every S_a in the
// served parameter range is the graph of a function over a fixed rectangle.
// Rotations of the built-ins are exact: coordinate permutations with sign
// flips and multiples of pi/4.
// ---------------------------------------------------------------------------

template <int DP>
struct Chart {
    int index = 0;
    Vec<DP> dir{};       // chart axis; rot maps dir to the last coordinate
    Mat<DP> rot{};       // ambient -> chart frame (orthogonal)
    Box<DP - 1> rect{};  // graph rectangle in the chart frame
    double t_lo = 0, t_hi = 0; // root bracket along the chart vertical
};

namespace detail {

template <int DP>
Vec<DP> transpose_mul(const Mat<DP>& m, const Vec<DP>& v) {
    Vec<DP> r;
    for (int i = 0; i < DP; ++i) {
        double s = 0;
        for (int k = 0; k < DP; ++k) s += m(k, i) * v[k];
        r[i] = s;
    }
    return r;
}

template <int DP>
Mat<DP> rotate_sym(const Mat<DP>& rot, const Mat<DP>& h) {
    // rot * h * rot^T
    Mat<DP> tmp{}, out{};
    for (int i = 0; i < DP; ++i)
        for (int k = 0; k < DP; ++k) {
            double s = 0;
            for (int t = 0; t < DP; ++t) s += rot(i, t) * h(t, k);
            tmp(i, k) = s;
        }
    for (int i = 0; i < DP; ++i)
        for (int k = 0; k < DP; ++k) {
            double s = 0;
            for (int t = 0; t < DP; ++t) s += tmp(i, t) * rot(k, t);
            out(i, k) = s;
        }
    return out;
}

inline const double kHalfSqrt2 = std::sqrt(2.0) / 2.0;

// Direction sets realizable with exact rotations.
inline std::vector<Vec<2>> circle_directions(int n) {
    std::vector<Vec<2>> dirs;
    if (n == 4) {
        dirs = {{0, 1}, {1, 0}, {0, -1}, {-1, 0}};
    } else if (n == 8) {
        dirs = {{0, 1}, {kHalfSqrt2, kHalfSqrt2}, {1, 0}, {kHalfSqrt2, -kHalfSqrt2},
                {0, -1}, {-kHalfSqrt2, -kHalfSqrt2}, {-1, 0}, {-kHalfSqrt2, kHalfSqrt2}};
    }
    return dirs;
}

inline Mat<2> circle_rotation(Vec<2> dir) {
    // rows: (perp; dir) so that rot * dir = e2
    Mat<2> r;
    r(0, 0) = dir[1];
    r(0, 1) = -dir[0];
    r(1, 0) = dir[0];
    r(1, 1) = dir[1];
    return r;
}

inline std::vector<Vec<3>> sphere_directions(int n) {
    std::vector<Vec<3>> dirs;
    auto axes = [&] {
        for (int i = 0; i < 3; ++i)
            for (int sgn : {1, -1}) {
                Vec<3> v{};
                v[i] = double(sgn);
                dirs.push_back(v);
            }
    };
    if (n == 6) {
        axes();
    } else if (n == 18) {
        axes();
        for (int i = 0; i < 3; ++i)
            for (int k = i + 1; k < 3; ++k)
                for (int si : {1, -1})
                    for (int sk : {1, -1}) {
                        Vec<3> v{};
                        v[i] = si * kHalfSqrt2;
                        v[k] = sk * kHalfSqrt2;
                        dirs.push_back(v);
                    }
    }
    return dirs;
}

inline Vec<3> cross(Vec<3> a, Vec<3> b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline Mat<3> sphere_rotation(Vec<3> dir) {
    // Build exact orthonormal rows (b1; b2; dir).
    Vec<3> b1{};
    int nz = 0;
    for (int i = 0; i < 3; ++i)
        if (dir[i] != 0.0) nz++;
    if (nz == 1) {
        // axis direction: pick the next coordinate axes
        int ax = 0;
        while (dir[ax] == 0.0) ++ax;
        b1[(ax + 1) % 3] = 1.0;
    } else {
        // edge diagonal (e_i +- e_k)/sqrt(2): b1 = (e_i -+ e_k)/sqrt(2)
        int i = 0;
        while (dir[i] == 0.0) ++i;
        int k = i + 1;
        while (dir[k] == 0.0) ++k;
        b1[i] = dir[k];
        b1[k] = -dir[i];
    }
    Vec<3> b2 = cross(dir, b1);
    Mat<3> r;
    for (int c = 0; c < 3; ++c) {
        r(0, c) = b1[c];
        r(1, c) = b2[c];
        r(2, c) = dir[c];
    }
    return r;
}

// Deterministic unit-sphere sample directions.
inline std::vector<Vec<2>> cover_samples_2() {
    std::vector<Vec<2>> v;
    const int n = 4096;
    for (int i = 0; i < n; ++i) {
        double th = 2.0 * M_PI * (double(i) + 0.5) / n;
        v.push_back({std::cos(th), std::sin(th)});
    }
    return v;
}

inline std::vector<Vec<3>> cover_samples_3() {
    std::vector<Vec<3>> v;
    const int n = 8192;
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        double z = 1.0 - 2.0 * (double(i) + 0.5) / n;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double th = ga * double(i);
        v.push_back({r * std::cos(th), r * std::sin(th), z});
    }
    return v;
}

} // namespace detail

struct SectorizeInfo {
    int n_charts = 0;
    int max_multiplicity = 0;
    int min_multiplicity = 0;
    double overlap_margin = 0; // rect enlargement factor beyond bare coverage
};

// ---------------------------------------------------------------------------
// sectorize: choose the smallest exact direction set whose square/rect charts
// cover every sampled surface direction for the whole parameter range, with
// rectangles enlarged ~10% beyond bare coverage where the slope cap allows.
// Throws when no admissible set exists (range too wide: split the interval).
// ---------------------------------------------------------------------------

template <class S>
std::vector<Chart<S::ambient>> sectorize(const S& surf, double slope_cap, double a_lo, double a_hi,
                                         SectorizeInfo* info = nullptr) {
    constexpr int DP = S::ambient;
    constexpr int D = DP - 1;
    if (!(slope_cap > 0.5 && slope_cap <= 2.0)) throw std::invalid_argument("slope_cap must be in (0.5, 2]");

    if (surf.kind == SurfaceKind::graph) {
        // Already a graph: one identity chart over the base rectangle.
        Chart<DP> c;
        c.index = 0;
        c.dir = Vec<DP>{};
        c.dir[D] = 1.0;
        c.rot = Mat<DP>::identity();
        for (int i = 0; i < D; ++i) {
            c.rect.lo[i] = surf.box.lo[i];
            c.rect.hi[i] = surf.box.hi[i];
        }
        c.t_lo = surf.box.lo[D];
        c.t_hi = surf.box.hi[D];
        if (info) *info = {1, 1, 1, 0.0};
        return {c};
    }
    if (surf.kind != SurfaceKind::sphere)
        throw std::runtime_error("sectorize: no chart strategy for this surface kind");

    // Radius at which the graph slope reaches the cap, with a small validity
    // reserve for the translation shifts applied by later stages.
    const double r_val = a_lo * slope_cap / std::sqrt(1.0 + slope_cap * slope_cap) * 0.98;

    std::vector<int> candidates;
    if constexpr (DP == 2)
        candidates = {4, 8};
    else
        candidates = {6, 18};

    for (int n : candidates) {
        std::vector<Vec<DP>> dirs;
        if constexpr (DP == 2)
            dirs = detail::circle_directions(n);
        else
            dirs = detail::sphere_directions(n);
        if (int(dirs.size()) != n) continue;

        std::vector<Mat<DP>> rots;
        for (auto& d : dirs) {
            if constexpr (DP == 2)
                rots.push_back(detail::circle_rotation(d));
            else
                rots.push_back(detail::sphere_rotation(d));
        }

        std::vector<Vec<DP>> samples;
        if constexpr (DP == 2)
            samples = detail::cover_samples_2();
        else
            samples = detail::cover_samples_3();

        // Per-chart, per-axis needed half-sides from a best-chart assignment
        // of the outermost spheres' directions.
        std::vector<std::array<double, D>> need(n);
        for (auto& a : need) a.fill(0.0);
        bool assign_ok = true;
        for (const auto& s : samples) {
            int best = -1;
            double best_score = std::numeric_limits<double>::infinity();
            for (int c = 0; c < n; ++c) {
                Vec<DP> q = rots[c].mul(s);
                if (q[D] <= 0.3) continue; // stay well inside the hemisphere
                double score = 0;
                for (int i = 0; i < D; ++i) score = std::max(score, std::fabs(q[i]));
                if (score < best_score) {
                    best_score = score;
                    best = c;
                }
            }
            if (best < 0) {
                assign_ok = false;
                break;
            }
            Vec<DP> q = rots[best].mul(s);
            for (int i = 0; i < D; ++i) need[best][i] = std::max(need[best][i], std::fabs(q[i]) * a_hi);
        }
        if (!assign_ok) continue;

        // Enlarge toward a 10% overlap margin, clamped by the validity radius.
        double margin = 1.10;
        bool valid = false;
        for (; margin >= 1.005; margin -= 0.005) {
            valid = true;
            for (int c = 0; c < n; ++c) {
                double r2 = 0;
                for (int i = 0; i < D; ++i) r2 += (need[c][i] * margin) * (need[c][i] * margin);
                if (std::sqrt(r2) > r_val) valid = false;
            }
            if (valid) break;
        }
        if (!valid) continue;

        std::vector<Chart<DP>> charts(n);
        for (int c = 0; c < n; ++c) {
            charts[c].index = c;
            charts[c].dir = dirs[c];
            charts[c].rot = rots[c];
            for (int i = 0; i < D; ++i) {
                double s = std::max(need[c][i] * margin, 0.05 * a_lo);
                charts[c].rect.lo[i] = -s;
                charts[c].rect.hi[i] = s;
            }
            charts[c].t_lo = 0.25 * a_lo;
            charts[c].t_hi = 1.10 * a_hi;
        }

        // Full-cover verification at both parameter ends plus multiplicity.
        int max_mult = 0;
        int min_mult = std::numeric_limits<int>::max();
        bool covered_all = true;
        for (double a : {a_lo, a_hi}) {
            for (const auto& sdir : samples) {
                int mult = 0;
                for (int c = 0; c < n; ++c) {
                    Vec<DP> q = charts[c].rot.mul(sdir);
                    if (q[D] <= 0) continue;
                    bool in = true;
                    for (int i = 0; i < D; ++i)
                        if (std::fabs(q[i]) * a > charts[c].rect.hi[i]) in = false;
                    if (in) mult++;
                }
                max_mult = std::max(max_mult, mult);
                min_mult = std::min(min_mult, mult);
                if (mult == 0) covered_all = false;
            }
            if (!covered_all) break;
        }
        if (!covered_all) continue;

        if (info) *info = {n, max_mult, min_mult, margin - 1.0};
        return charts;
    }
    throw std::runtime_error("sectorize: no admissible chart set; parameter range too wide for the slope cap");
}

// ---------------------------------------------------------------------------
// Chart families: graph extraction by 1-D root solves of Phi along the
// rotated vertical, with jets from implicit differentiation.
// ---------------------------------------------------------------------------

template <class S>
struct ChartFamily {
    static constexpr int dim = S::ambient - 1;
    static constexpr int DP = S::ambient;
    static constexpr bool tangency_gap_only = false;

    const S* surf = nullptr;
    Chart<DP> chart;
    std::string name;
    double a0 = 0, delta0 = 1;
    Box<dim> domain{};
    double alpha = 1, eta = 1;
    double da_lip = 0;

    Vec<DP> ambient_point(Vec<dim> x, double t) const {
        Vec<DP> q;
        for (int i = 0; i < dim; ++i) q[i] = x[i];
        q[dim] = t;
        return detail::transpose_mul(chart.rot, q);
    }

    double solve_t(double a, Vec<dim> x) const {
        double lo = chart.t_lo, hi = chart.t_hi;
        double glo = surf->jet(a, ambient_point(x, lo)).value;
        double ghi = surf->jet(a, ambient_point(x, hi)).value;
        if (glo == 0.0) return lo;
        if (ghi == 0.0) return hi;
        if ((glo > 0) == (ghi > 0))
            throw std::runtime_error("chart extraction: no sign change in the vertical bracket");
        double t = 0.5 * (lo + hi);
        double prev_step = hi - lo;
        for (int it = 0; it < 100; ++it) {
            LevelJet<DP> j = surf->jet(a, ambient_point(x, t));
            double g = j.value;
            if ((g > 0) == (ghi > 0))
                hi = t;
            else
                lo = t;
            double gt = chart.rot.mul(j.grad)[dim];
            double step = (gt != 0.0) ? -g / gt : 0.0;
            double tn = t + step;
            if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
            double moved = std::fabs(tn - t);
            t = tn;
            if (g == 0.0) break;
            if (moved <= 4e-16 * std::max(1.0, std::fabs(t)) && prev_step <= 4e-16 * std::max(1.0, std::fabs(t)))
                break;
            prev_step = moved;
        }
        return t;
    }

    double value(double a, Vec<dim> x) const { return solve_t(a, x); }

    Jet<dim> jet(double a, Vec<dim> x) const {
        double t = solve_t(a, x);
        LevelJet<DP> lj = surf->jet(a, ambient_point(x, t));
        Vec<DP> g = chart.rot.mul(lj.grad);        // (phi_x, phi_t)
        Mat<DP> h = detail::rotate_sym(chart.rot, lj.hess);
        Vec<DP> gda = chart.rot.mul(lj.grad_da);   // (phi_ax, phi_at)
        const double pt = g[dim];
        Jet<dim> out;
        out.value = t;
        for (int i = 0; i < dim; ++i) out.grad[i] = -g[i] / pt;
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < dim; ++k) {
                double num = h(i, k) + h(i, dim) * out.grad[k] + h(k, dim) * out.grad[i] +
                             h(dim, dim) * out.grad[i] * out.grad[k];
                out.hess(i, k) = -num / pt;
            }
        out.da = -lj.da / pt;
        for (int i = 0; i < dim; ++i) {
            double num = gda[i] + gda[dim] * out.grad[i] + (h(dim, i) + h(dim, dim) * out.grad[i]) * out.da;
            out.grad_da[i] = -num / pt;
        }
        return out;
    }

    double da_param_lipschitz() const { return da_lip; }
};

template <class S>
ChartFamily<S> make_chart_family(const S& surf, const Chart<S::ambient>& chart, double a_lo, double a_hi) {
    ChartFamily<S> f;
    f.surf = &surf;
    f.chart = chart;
    f.name = surf.name + "-chart" + std::to_string(chart.index);
    f.a0 = a_lo;
    f.delta0 = a_hi - a_lo;
    f.domain = chart.rect;
    f.alpha = surf.alpha;
    f.eta = surf.eta;
    // Sampled Lipschitz bound for a -> da f, with a safety factor.
    double worst = 0;
    const int K = 6;
    double ha = (a_hi - a_lo) / (K + 1);
    for (int ia = 0; ia <= K; ++ia) {
        double a = a_lo + ha * ia;
        for (int ix = 0; ix <= K; ++ix) {
            Vec<ChartFamily<S>::dim> x;
            for (int i = 0; i < ChartFamily<S>::dim; ++i)
                x[i] = chart.rect.lo[i] + (chart.rect.hi[i] - chart.rect.lo[i]) * (0.08 + 0.84 * ix / double(K));
            double d1 = f.jet(a, x).da;
            double d2 = f.jet(a + ha, x).da;
            worst = std::max(worst, std::fabs(d2 - d1) / ha);
        }
    }
    f.da_lip = worst * 1.5;
    return f;
}

// Parameter-ranged, graph-shifted view of a chart family: the packing of a
// later stage sees earlier stages' translation as x -> f(a, x + u) + v.
template <class CF>
struct StageFamily {
    static constexpr int dim = CF::dim;
    static constexpr bool tangency_gap_only = false;
    const CF* base = nullptr;
    std::string name;
    double a0 = 0, delta0 = 1;
    Box<dim> domain{};
    double alpha = 1, eta = 1;
    Vec<dim> shift_u{};
    double shift_v = 0;

    Jet<dim> jet(double a, Vec<dim> x) const {
        Jet<dim> j = base->jet(a, x + shift_u);
        j.value += shift_v;
        return j;
    }
    double value(double a, Vec<dim> x) const { return base->value(a, x + shift_u) + shift_v; }
    double da_param_lipschitz() const { return base->da_param_lipschitz(); }
};

// ---------------------------------------------------------------------------
// Surface packing (closed curves in the plane, d = 1): split the parameter
// interval until the minimal chart count serves it, then run one packing
// stage per chart, each refining the parameter cells of the previous stage
// with scale M_i and delta_0 equal to the parent cell width.
// ---------------------------------------------------------------------------

template <int DP>
struct SurfacePackPart {
    double a_lo = 0, a_hi = 0;
    std::vector<Chart<DP>> charts;
    SectorizeInfo info{};
    std::vector<int> stage_scale;
    std::vector<int> stage_lambda;
    std::vector<bool> stage_degenerate; // no interior grid point at this scale
    std::vector<double> stage_max_w;
    bool flagged = false;
    std::uint64_t cells = 0;
    std::vector<Vec<DP>> w;        // final translation per parameter cell
    std::vector<Vec<DP>> w_stage1; // after stage 1
    TranslationSchedule<DP - 1> stage1_schedule; // chart-frame, for renders/tests
};

template <int DP>
struct SurfaceSchedule {
    std::string surface_name;
    int M = 0;
    int d = DP - 1;
    double slope_cap = 1.5;
    int n_charts = 0;
    int total_exponent = 0; // sum of stage scales (d = 1)
    bool flagged = false;
    double max_w_norm = 0;
    std::vector<SurfacePackPart<DP>> subs;

    // Piece width in parameter across all subintervals is uniform only within
    // a subinterval; delta reports the finest.
    double finest_delta() const {
        double d0 = std::numeric_limits<double>::infinity();
        for (const auto& s : subs) d0 = std::min(d0, (s.a_hi - s.a_lo) * std::ldexp(1.0, -total_exponent));
        return d0;
    }

    const SurfacePackPart<DP>& sub_for(double a) const {
        for (const auto& s : subs)
            if (a <= s.a_hi || &s == &subs.back()) {
                if (a >= s.a_lo - 1e-12) return s;
            }
        throw std::invalid_argument("parameter outside the packed range");
    }

    Vec<DP> w_at(double a) const {
        const auto& s = sub_for(a);
        double width = (s.a_hi - s.a_lo) / double(s.cells);
        double t = (a - s.a_lo) / width;
        std::uint64_t n = (t <= 0) ? 0 : std::min<std::uint64_t>(std::uint64_t(std::ceil(t)) - 1, s.cells - 1);
        return s.w[std::size_t(n)];
    }
};

inline std::vector<int> stage_scales_1d(int M, int n_charts) {
    int base = 2 * (M / (2 * n_charts));
    if (base < 2) throw std::runtime_error("pack_surface: M too small for the chart count (needs M >= 2N)");
    std::vector<int> scales(n_charts, base);
    int rem = M - base * n_charts;
    for (int i = 0; i < n_charts && rem > 0; ++i) {
        scales[i] += 2;
        rem -= 2;
    }
    if (rem != 0) throw std::runtime_error("pack_surface: M must be an even multiple of 2");
    return scales;
}

struct PackOptions {
    double slope_cap = 1.5;
    ScheduleLimits limits{};
    int max_splits = 64;
};

template <class S>
SurfaceSchedule<S::ambient> pack_surface(const S& surf, int M, PackOptions opts = {}) {
    constexpr int DP = S::ambient;
    static_assert(DP == 2, "materialized surface packing is for closed curves in the plane");
    if (M < 2 || M % 2 != 0) throw std::invalid_argument("pack_surface: M must be even and >= 2");

    SurfaceSchedule<DP> out;
    out.surface_name = surf.name;
    out.M = M;
    out.slope_cap = opts.slope_cap;

    // Minimal chart count at a pinpoint range decides the split target.
    SectorizeInfo pin_info;
    sectorize(surf, opts.slope_cap, surf.a0, surf.a0, &pin_info);
    const int n_min = pin_info.n_charts;
    out.n_charts = n_min;

    // Dyadic bisection of the parameter interval until the minimal chart
    // count serves each piece.
    std::vector<std::pair<double, double>> pending{{surf.a0, surf.a0 + surf.delta0}}, ready;
    int splits = 0;
    while (!pending.empty()) {
        auto [lo, hi] = pending.back();
        pending.pop_back();
        bool ok = false;
        SectorizeInfo info;
        try {
            sectorize(surf, opts.slope_cap, lo, hi, &info);
            ok = (info.n_charts == n_min);
        } catch (const std::exception&) {
            ok = false;
        }
        if (ok) {
            ready.push_back({lo, hi});
        } else {
            if (++splits > opts.max_splits) throw std::runtime_error("pack_surface: interval splitting did not converge");
            double mid = 0.5 * (lo + hi);
            pending.push_back({mid, hi});
            pending.push_back({lo, mid});
        }
    }
    std::sort(ready.begin(), ready.end());

    auto scales = stage_scales_1d(M, n_min);
    out.total_exponent = M;

    for (auto [a_lo, a_hi] : ready) {
        SurfacePackPart<DP> part;
        part.a_lo = a_lo;
        part.a_hi = a_hi;
        part.charts = sectorize(surf, opts.slope_cap, a_lo, a_hi, &part.info);
        part.stage_scale = scales;

        std::vector<Vec<DP>> level_w{Vec<DP>{}};
        double level_width = a_hi - a_lo;
        double level_a0 = a_lo;

        for (int stage = 0; stage < n_min; ++stage) {
            const int Mi = scales[std::size_t(stage)];
            const Chart<DP>& chart = part.charts[std::size_t(stage)];
            ChartFamily<S> cf = make_chart_family(surf, chart, a_lo, a_hi);

            int J = Mi / 2 - 1;
            int lam = lambda_default(Mi);
            bool degenerate = (J < 1);
            int m_def = (degenerate ? 0 : J) + lam;
            std::optional<int> lam_override;
            if (!degenerate && m_def > Mi) {
                lam_override = Mi - J;
                part.flagged = true;
            }
            if (degenerate) part.flagged = true;
            part.stage_lambda.push_back(lam_override ? *lam_override : lam);
            part.stage_degenerate.push_back(degenerate);

            const std::uint64_t children = std::uint64_t(1) << Mi;
            std::vector<Vec<DP>> next_w(level_w.size() * children);
            double child_width = level_width / double(children);
            double stage_max = 0;

            if (degenerate) {
                // No interior grid point at this scale: the stage applies no
                // translation and only refines the parameter cells.
                for (std::size_t c = 0; c < level_w.size(); ++c)
                    for (std::uint64_t k = 0; k < children; ++k) next_w[c * children + k] = level_w[c];
            } else {
                GridPath<DP - 1> path = build_path<DP - 1>(Mi, lam_override);
                for (std::size_t c = 0; c < level_w.size(); ++c) {
                    // Earlier stages' translation, seen in this chart's frame.
                    Vec<DP> wq = chart.rot.mul(level_w[c]);
                    StageFamily<ChartFamily<S>> sf;
                    sf.base = &cf;
                    sf.name = cf.name;
                    sf.a0 = level_a0 + double(c) * level_width;
                    sf.delta0 = level_width;
                    sf.domain = cf.domain;
                    sf.alpha = cf.alpha;
                    sf.eta = cf.eta;
                    for (int i = 0; i < DP - 1; ++i) sf.shift_u[i] = wq[i];
                    sf.shift_v = wq[DP - 1];

                    auto sched = build_schedule(sf, path, opts.limits);
                    if (stage == 0 && c == 0) part.stage1_schedule = sched;
                    for (std::uint64_t k = 0; k < children; ++k) {
                        auto [u, v] = sched.total(k);
                        Vec<DP> tc;
                        for (int i = 0; i < DP - 1; ++i) tc[i] = u[i];
                        tc[DP - 1] = v;
                        Vec<DP> amb = detail::transpose_mul(chart.rot, tc);
                        next_w[c * children + k] = level_w[c] + amb;
                        stage_max = std::max(stage_max, amb.norm());
                    }
                }
            }
            part.stage_max_w.push_back(stage_max);
            level_w = std::move(next_w);
            level_width = child_width;
            if (stage == 0) part.w_stage1 = level_w;
        }
        part.cells = level_w.size();
        part.w = std::move(level_w);
        for (const auto& wv : part.w) out.max_w_norm = std::max(out.max_w_norm, wv.norm());
        out.flagged = out.flagged || part.flagged;
        out.subs.push_back(std::move(part));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Surface measure, fiber flavor: per chart, the packed pieces are translated
// graphs in the chart frame; measure each chart's rotated-frame neighbourhood
// with the graph fiber kernel and sum over charts and subintervals (an
// over-estimate by at most the cover multiplicity, which sectorize reports).
// ---------------------------------------------------------------------------

template <class S>
MeasureReport surface_fiber_measure(const S& surf, const SurfaceSchedule<S::ambient>& ss, double delta,
                                    int fibers_per_chart = 256) {
    constexpr int DP = S::ambient;
    constexpr int D = DP - 1;
    static_assert(D == 1);
    Timer timer;
    Kahan total;
    for (const auto& part : ss.subs) {
        const std::uint64_t cells = part.cells;
        const double width = (part.a_hi - part.a_lo) / double(cells);
        for (const auto& chart : part.charts) {
            ChartFamily<S> cf = make_chart_family(surf, chart, part.a_lo, part.a_hi);
            std::vector<double> U(cells), V(cells);
            double ulo = 0, uhi = 0;
            for (std::uint64_t n = 0; n < cells; ++n) {
                Vec<DP> q = chart.rot.mul(part.w[std::size_t(n)]);
                U[std::size_t(n)] = q[0];
                V[std::size_t(n)] = q[1];
                ulo = std::min(ulo, q[0]);
                uhi = std::max(uhi, q[0]);
            }
            double ex_lo = cf.domain.lo[0] + ulo, ex_hi = cf.domain.hi[0] + uhi;
            std::vector<Vec<1>> bases;
            bases.reserve(fibers_per_chart);
            for (int k = 0; k < fibers_per_chart; ++k)
                bases.push_back({ex_lo + (ex_hi - ex_lo) * ((double(k) + 0.5) / fibers_per_chart)});
            double pad = cf.da_param_lipschitz() * std::pow(width, 1.0 + cf.eta);
            auto lengths = fiber_lengths(cf, U.data(), V.data(), cells, part.a_lo, width, cf.domain, bases,
                                         delta + pad);
            Kahan chart_sum;
            for (double L : lengths) chart_sum.add(L);
            total.add(chart_sum.value() * (ex_hi - ex_lo) / double(fibers_per_chart));
        }
    }
    MeasureReport r;
    r.method = "fiber";
    r.M = ss.M;
    r.d = D;
    r.alpha = surf.alpha;
    r.delta = delta;
    r.measure = total.value();
    r.normalized = r.measure * std::pow(double(ss.M), 1.0 + surf.alpha);
    r.resolution = std::uint64_t(fibers_per_chart) * std::uint64_t(ss.n_charts) * ss.subs.size();
    r.seconds = timer.seconds();
    return r;
}

// Voxel flavor: rasterize the translated curves of every parameter cell with
// the literal sample-dilation oracle.
template <class S>
MeasureReport surface_voxel_measure(const S& surf, const SurfaceSchedule<S::ambient>& ss, double delta,
                                    double cell, VoxelBudget budget = {}) {
    constexpr int DP = S::ambient;
    static_assert(DP == 2);
    Timer timer;
    Box<2> box = surf.box;
    const double spacing = delta / 2.0;
    auto sampler = [&](const std::function<void(Vec<2>)>& emit) {
        for (const auto& part : ss.subs) {
            const double width = (part.a_hi - part.a_lo) / double(part.cells);
            for (std::uint64_t n = 0; n < part.cells; ++n) {
                Vec<2> w = part.w[std::size_t(n)];
                for (double a : {part.a_lo + double(n) * width, part.a_lo + double(n + 1) * width}) {
                    int steps = int(std::ceil(2.0 * M_PI * a / spacing));
                    for (int k = 0; k < steps; ++k) {
                        double th = 2.0 * M_PI * double(k) / steps;
                        emit({w[0] + a * std::cos(th), w[1] + a * std::sin(th)});
                    }
                }
            }
        }
    };
    MeasureReport r = voxel_oracle_measure<2>(sampler, delta, cell, box, spacing, budget);
    r.M = ss.M;
    r.alpha = surf.alpha;
    r.normalized = r.measure * std::pow(double(ss.M), 1.0 + surf.alpha);
    r.seconds = timer.seconds();
    return r;
}

// Containment of every sampled translated surface in the fiber neighbourhood,
// via the owning parameter cell's chart-frame interval.
template <class S>
ContainmentReport surface_containment(const S& surf, const SurfaceSchedule<S::ambient>& ss, double delta,
                                      int params_per_sub = 64, int points_per_surface = 128) {
    constexpr int DP = S::ambient;
    static_assert(DP == 2);
    ContainmentReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    rep.worst_self_margin = std::numeric_limits<double>::infinity();
    for (const auto& part : ss.subs) {
        const double width = (part.a_hi - part.a_lo) / double(part.cells);
        std::vector<ChartFamily<S>> cfs;
        for (const auto& chart : part.charts) cfs.push_back(make_chart_family(surf, chart, part.a_lo, part.a_hi));
        for (int t = 0; t < params_per_sub; ++t) {
            double frac = (double(t) + 0.5) / params_per_sub;
            double a = part.a_lo + (part.a_hi - part.a_lo) * frac;
            std::uint64_t n = std::min<std::uint64_t>(std::uint64_t(std::ceil((a - part.a_lo) / width)) - 1,
                                                      part.cells - 1);
            Vec<2> w = part.w[std::size_t(n)];
            double an = part.a_lo + double(n) * width;
            for (int k = 0; k < points_per_surface; ++k) {
                double th = 2.0 * M_PI * (double(k) + 0.5) / points_per_surface;
                Vec<2> p{a * std::cos(th) + w[0], a * std::sin(th) + w[1]};
                // Owning chart: the one whose frame sees this direction.
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < cfs.size(); ++c) {
                    const Chart<2>& chart = part.charts[c];
                    Vec<2> dirq = chart.rot.mul(Vec<2>{std::cos(th), std::sin(th)});
                    if (dirq[1] <= 0) continue;
                    Vec<2> q = chart.rot.mul(p);
                    Vec<2> wq = chart.rot.mul(w);
                    double xt = q[0] - wq[0];
                    if (xt < chart.rect.lo[0] || xt > chart.rect.hi[0]) continue;
                    const auto& cf = cfs[c];
                    double pad = cf.da_param_lipschitz() * std::pow(width, 1.0 + cf.eta);
                    double y1 = cf.value(an, Vec<1>{xt}) + wq[1];
                    double y2 = cf.value(an + width, Vec<1>{xt}) + wq[1];
                    double lo = std::min(y1, y2) - delta - pad;
                    double hi = std::max(y1, y2) + delta + pad;
                    best = std::max(best, std::min(q[1] - lo, hi - q[1]));
                }
                rep.worst_self_margin = std::min(rep.worst_self_margin, best);
                rep.samples++;
            }
        }
    }
    rep.worst_margin = rep.worst_self_margin;
    rep.pass = rep.worst_self_margin >= 0;
    return rep;
}

} // namespace packlab

#endif // PACKLAB_SURFACE_PACK_HPP
