#ifndef PACKLAB_SURFACE_HPP
#define PACKLAB_SURFACE_HPP

#include "core.hpp"
#include "family.hpp"

namespace packlab {

// ---------------------------------------------------------------------------
// Level-set description of a 1-parameter family of hypersurfaces
// S_a = {x : Phi(a, x) = 0} in R^(d+1), with the derivative data needed by
// the chart extraction and the regularity validation.
// ---------------------------------------------------------------------------

enum class SurfaceKind { sphere, graph, generic };

template <int DP>
struct LevelJet {
    double value = 0;
    Vec<DP> grad{};
    Mat<DP> hess{};
    double da = 0;
    Vec<DP> grad_da{};
};

// Phi(a, x) = |x| - a: circles (DP = 2) and spheres (DP = 3).
template <int DP>
struct SphereLevel {
    static constexpr int ambient = DP;
    std::string name = DP == 2 ? "circle" : "sphere";
    SurfaceKind kind = SurfaceKind::sphere;
    double a0 = 1.0, delta0 = 1.0;
    Box<DP> box = [] {
        Box<DP> b;
        b.lo = Vec<DP>::constant(-2.3);
        b.hi = Vec<DP>::constant(2.3);
        return b;
    }();
    double alpha = 1.0, eta = 1.0;
    double r_inner = 0.7, r_outer = 2.3; // validation region excludes the origin

    bool in_region(Vec<DP> x) const {
        double r = x.norm();
        return r >= r_inner && r <= r_outer;
    }
    LevelJet<DP> jet(double a, Vec<DP> x) const {
        LevelJet<DP> j;
        double r = x.norm();
        j.value = r - a;
        double inv = 1.0 / r;
        for (int i = 0; i < DP; ++i) j.grad[i] = x[i] * inv;
        double inv3 = inv * inv * inv;
        for (int i = 0; i < DP; ++i)
            for (int k = 0; k < DP; ++k) j.hess(i, k) = (i == k ? inv : 0.0) - x[i] * x[k] * inv3;
        j.da = -1.0;
        return j;
    }
};

// Phi(a, x) = x3 - a x1 x2: hyperbolic paraboloids in R^3.
struct HyperbolicParaboloidLevel {
    static constexpr int ambient = 3;
    std::string name = "hyperbolic-paraboloid";
    SurfaceKind kind = SurfaceKind::generic;
    double a0 = 1.0, delta0 = 1.0;
    Box<3> box{{0.5, 0.5, -3.0}, {1.2, 1.2, 3.0}};
    double alpha = 1.0, eta = 1.0;

    bool in_region(Vec<3>) const { return true; }
    LevelJet<3> jet(double a, Vec<3> x) const {
        LevelJet<3> j;
        j.value = x[2] - a * x[0] * x[1];
        j.grad = {-a * x[1], -a * x[0], 1.0};
        j.hess(0, 1) = -a;
        j.hess(1, 0) = -a;
        j.da = -x[0] * x[1];
        j.grad_da = {-x[1], -x[0], 0.0};
        return j;
    }
};

// Phi(a, (x, y)) = y - f(a, x): a graph family viewed as a level set.
template <class F>
struct GraphLevel {
    static constexpr int ambient = F::dim + 1;
    static constexpr int DP = ambient;
    F base;
    std::string name;
    SurfaceKind kind = SurfaceKind::graph;
    double a0, delta0;
    Box<DP> box;
    double alpha, eta;

    explicit GraphLevel(F f) : base(std::move(f)) {
        name = base.name + "-graph";
        a0 = base.a0;
        delta0 = base.delta0;
        alpha = base.alpha;
        eta = base.eta;
        for (int i = 0; i < F::dim; ++i) {
            box.lo[i] = base.domain.lo[i];
            box.hi[i] = base.domain.hi[i];
        }
        // Generous vertical extent from a coarse value scan.
        double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
        for (int i = 0; i <= 32; ++i)
            for (int k = 0; k <= 8; ++k) {
                Vec<F::dim> x;
                for (int t = 0; t < F::dim; ++t)
                    x[t] = base.domain.lo[t] + (base.domain.hi[t] - base.domain.lo[t]) * i / 32.0;
                double v = base.value(a0 + delta0 * k / 8.0, x);
                vmin = std::min(vmin, v);
                vmax = std::max(vmax, v);
            }
        box.lo[F::dim] = vmin - 1.0;
        box.hi[F::dim] = vmax + 1.0;
    }

    bool in_region(Vec<DP>) const { return true; }
    LevelJet<DP> jet(double a, Vec<DP> p) const {
        Vec<F::dim> x;
        for (int i = 0; i < F::dim; ++i) x[i] = p[i];
        Jet<F::dim> bj = base.jet(a, x);
        LevelJet<DP> j;
        j.value = p[F::dim] - bj.value;
        for (int i = 0; i < F::dim; ++i) j.grad[i] = -bj.grad[i];
        j.grad[F::dim] = 1.0;
        for (int i = 0; i < F::dim; ++i)
            for (int k = 0; k < F::dim; ++k) j.hess(i, k) = -bj.hess(i, k);
        j.da = -bj.da;
        for (int i = 0; i < F::dim; ++i) j.grad_da[i] = -bj.grad_da[i];
        return j;
    }
};

// ---------------------------------------------------------------------------
// Sampled validation of the level-set regularity conditions: gradient floor,
// bordered-Hessian determinant floor (the Gaussian-curvature condition),
// Hoelder moduli, sup norms, and per-parameter nonemptiness of the zero set.
// ---------------------------------------------------------------------------

template <int DP>
double bordered_determinant(const Mat<DP>& hess, const Vec<DP>& grad) {
    Mat<DP + 1> b;
    for (int i = 0; i < DP; ++i)
        for (int k = 0; k < DP; ++k) b(i, k) = hess(i, k);
    for (int i = 0; i < DP; ++i) {
        b(i, DP) = grad[i];
        b(DP, i) = grad[i];
    }
    b(DP, DP) = 0.0;
    return b.lu_det();
}

struct SurfaceConstantsReport {
    double grad_min = 0;          // min |grad Phi|
    double bordered_min = 0;      // min |bordered determinant|
    double c_alpha_est = 0;
    double a_eta_da_est = 0;
    double a_eta_grad_est = 0;
    double sup_da = 0;
    double sup_grad = 0;
    double sup_grad_da = 0;
    double sup_hess = 0;
    bool nonempty_ok = false;
    bool violation = false;
    std::string violation_reason;

    std::vector<std::pair<std::string, double>> rows() const {
        return {
            {"grad_min", grad_min},
            {"bordered_min", bordered_min},
            {"C_alpha_est", c_alpha_est},
            {"A_eta_da_est", a_eta_da_est},
            {"A_eta_grad_est", a_eta_grad_est},
            {"sup_da_phi", sup_da},
            {"sup_grad_phi", sup_grad},
            {"sup_grad_da_phi", sup_grad_da},
            {"sup_hess_phi", sup_hess},
            {"nonempty_ok", nonempty_ok ? 1.0 : 0.0},
            {"violation", violation ? 1.0 : 0.0},
        };
    }
};

template <class S>
SurfaceConstantsReport validate_surface(const S& surf, int grid_density) {
    constexpr int DP = S::ambient;
    if (grid_density < 2) throw std::invalid_argument("grid_density must be >= 2");
    SurfaceConstantsReport r;
    r.grad_min = std::numeric_limits<double>::infinity();
    r.bordered_min = std::numeric_limits<double>::infinity();

    auto xs_all = detail::sample_box<DP>(surf.box, grid_density);
    std::vector<Vec<DP>> xs;
    for (auto& x : xs_all)
        if (surf.in_region(x)) xs.push_back(x);
    auto as = detail::sample_axis(surf.a0, surf.a0 + surf.delta0, grid_density);

    std::size_t pair_stride = 1;
    while (xs.size() * xs.size() / (2 * pair_stride) > 1'000'000) pair_stride *= 2;

    std::vector<LevelJet<DP>> row(xs.size());
    std::vector<LevelJet<DP>> prev_row;
    bool have_prev = false;
    double prev_a = 0;

    for (double a : as) {
        for (std::size_t i = 0; i < xs.size(); ++i) row[i] = surf.jet(a, xs[i]);
        for (const auto& j : row) {
            r.grad_min = std::min(r.grad_min, j.grad.norm());
            r.bordered_min = std::min(r.bordered_min, std::fabs(bordered_determinant(j.hess, j.grad)));
            r.sup_da = std::max(r.sup_da, std::fabs(j.da));
            r.sup_grad = std::max(r.sup_grad, j.grad.norm());
            r.sup_grad_da = std::max(r.sup_grad_da, j.grad_da.norm());
            r.sup_hess = std::max(r.sup_hess, j.hess.max_abs());
        }
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t k = i + pair_stride; k < xs.size(); k += pair_stride) {
                double dist = (xs[i] - xs[k]).norm();
                if (dist == 0) continue;
                double dh = 0;
                for (int t = 0; t < DP * DP; ++t) dh = std::max(dh, std::fabs(row[i].hess.m[t] - row[k].hess.m[t]));
                r.c_alpha_est = std::max(r.c_alpha_est, dh / std::pow(dist, surf.alpha));
            }
        if (have_prev) {
            double w = std::pow(std::fabs(a - prev_a), surf.eta);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                r.a_eta_da_est = std::max(r.a_eta_da_est, std::fabs(row[i].da - prev_row[i].da) / w);
                r.a_eta_grad_est = std::max(r.a_eta_grad_est, (row[i].grad - prev_row[i].grad).norm() / w);
            }
        }
        prev_row = row;
        prev_a = a;
        have_prev = true;
    }

    // Nonemptiness: for each sampled parameter, march a handful of rays from
    // the box center looking for a sign change of Phi.
    r.nonempty_ok = true;
    Vec<DP> center;
    for (int i = 0; i < DP; ++i) center[i] = 0.5 * (surf.box.lo[i] + surf.box.hi[i]);
    for (double a : as) {
        bool found = false;
        for (int dir = 0; dir < 2 * DP && !found; ++dir) {
            Vec<DP> step{};
            step[dir / 2] = (dir % 2 == 0 ? 1.0 : -1.0);
            double span = 0.5 * (surf.box.hi[dir / 2] - surf.box.lo[dir / 2]);
            double prev = std::numeric_limits<double>::quiet_NaN();
            for (int t = 0; t <= 64; ++t) {
                Vec<DP> p = center + step * (span * t / 64.0);
                if (!surf.box.contains(p) || !surf.in_region(p)) continue;
                double v = surf.jet(a, p).value;
                if (!std::isnan(prev) && ((prev <= 0 && v >= 0) || (prev >= 0 && v <= 0))) {
                    found = true;
                    break;
                }
                prev = v;
            }
        }
        if (!found) r.nonempty_ok = false;
    }

    if (!(r.grad_min > 0) || !std::isfinite(r.grad_min)) {
        r.violation = true;
        r.violation_reason = "gradient floor violated";
    } else if (!(r.bordered_min > 0)) {
        r.violation = true;
        r.violation_reason = "bordered-Hessian determinant vanishes";
    } else if (!r.nonempty_ok) {
        r.violation = true;
        r.violation_reason = "zero set not located for some parameter";
    } else if (!std::isfinite(r.sup_da) || !std::isfinite(r.sup_grad) || !std::isfinite(r.sup_hess)) {
        r.violation = true;
        r.violation_reason = "non-finite sup norm";
    }
    return r;
}

} // namespace packlab

#endif // PACKLAB_SURFACE_HPP
