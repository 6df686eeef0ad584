#ifndef PACKLAB_FAMILY_HPP
#define PACKLAB_FAMILY_HPP

#include <functional>
#include <map>
#include <string>

#include "core.hpp"

namespace packlab {

// Derivative data of a curved family f(a, x) at one point: value, spatial
// gradient and Hessian, parameter derivative and its spatial gradient.
template <int D>
struct Jet {
    double value = 0;
    Vec<D> grad{};
    Mat<D> hess{};
    double da = 0;
    Vec<D> grad_da{};
};

// ---------------------------------------------------------------------------
// Built-in families. Each provides analytic jets, its domain, the parameter
// interval, the Hoelder exponents, and analytic bounds used by the measure
// padding. `tangency_gap_only` marks families whose tangency translation
// depends on the parameters only through their difference (gradient affine
// in a with a spatially constant coefficient); the scheduler exploits this.
// ---------------------------------------------------------------------------

// f(a,x) = a.x + x^2 on a in [0,1], x in [0,1].
struct Parabola {
    static constexpr int dim = 1;
    static constexpr bool tangency_gap_only = true;
    std::string name = "parabola";
    double a0 = 0.0, delta0 = 1.0;
    Box<1> domain{{0.0}, {1.0}};
    double alpha = 1.0, eta = 1.0;

    Jet<1> jet(double a, Vec<1> x) const {
        Jet<1> j;
        j.value = a * x[0] + x[0] * x[0];
        j.grad[0] = a + 2 * x[0];
        j.hess(0, 0) = 2;
        j.da = x[0];
        j.grad_da[0] = 1;
        return j;
    }
    double value(double a, Vec<1> x) const { return a * x[0] + x[0] * x[0]; }
    // Lipschitz constant of a -> da f (condition on the parameter modulus);
    // zero: da f = x does not depend on a.
    double da_param_lipschitz() const { return 0.0; }
};

// f(a,x) = sqrt(a^2 - |x|^2); a in [1,2], |x| bounded away from a_min.
template <int D>
struct CircleCap {
    static constexpr int dim = D;
    static constexpr bool tangency_gap_only = false;
    std::string name = "circle-cap";
    double a0 = 1.0, delta0 = 1.0;
    Box<D> domain = [] {
        Box<D> b;
        b.lo = Vec<D>::constant(-0.9 / std::sqrt(double(D)));
        b.hi = Vec<D>::constant(0.9 / std::sqrt(double(D)));
        return b;
    }();
    double alpha = 1.0, eta = 1.0;

    Jet<D> jet(double a, Vec<D> x) const {
        Jet<D> j;
        double r2 = x.norm2();
        double s = std::sqrt(a * a - r2);
        j.value = s;
        double inv_s = 1.0 / s;
        double inv_s3 = inv_s * inv_s * inv_s;
        for (int i = 0; i < D; ++i) j.grad[i] = -x[i] * inv_s;
        for (int i = 0; i < D; ++i)
            for (int k = 0; k < D; ++k) j.hess(i, k) = -x[i] * x[k] * inv_s3 - (i == k ? inv_s : 0.0);
        j.da = a * inv_s;
        for (int i = 0; i < D; ++i) j.grad_da[i] = a * x[i] * inv_s3;
        return j;
    }
    double value(double a, Vec<D> x) const { return std::sqrt(a * a - x.norm2()); }
    double da_param_lipschitz() const {
        // |dda f| = |x|^2 / s^3 over the domain, maximized at a = a0, |x| max.
        double r2 = domain.hi.norm2();
        double s = std::sqrt(a0 * a0 - r2);
        return r2 / (s * s * s);
    }
};

// f(a,x) = a.x + x^2 + beta.sign(x-xc)|x-xc|^(2+alpha); kinked curvature.
struct HoelderQuadratic {
    static constexpr int dim = 1;
    static constexpr bool tangency_gap_only = true;
    std::string name = "hoelder-quadratic";
    double a0 = 0.0, delta0 = 1.0;
    Box<1> domain{{0.0}, {1.0}};
    double alpha = 0.5, eta = 1.0;
    double beta = 0.25;
    double xc = 0.5;

    // |s|^alpha via sqrt when alpha == 1/2 keeps the hot paths pow-free.
    double pow_alpha(double t) const {
        if (alpha == 0.5) return std::sqrt(t);
        return std::pow(t, alpha);
    }

    Jet<1> jet(double a, Vec<1> x) const {
        Jet<1> j;
        double s = x[0] - xc;
        double as = std::fabs(s);
        double pa = pow_alpha(as);      // |s|^alpha
        double p1 = pa * as;            // |s|^(1+alpha)
        double p2 = p1 * as;            // |s|^(2+alpha)
        double sg = s < 0 ? -1.0 : 1.0;
        j.value = a * x[0] + x[0] * x[0] + beta * sg * p2;
        j.grad[0] = a + 2 * x[0] + beta * (2 + alpha) * p1;
        j.hess(0, 0) = 2 + beta * (2 + alpha) * (1 + alpha) * sg * pa;
        j.da = x[0];
        j.grad_da[0] = 1;
        return j;
    }
    double value(double a, Vec<1> x) const {
        double s = x[0] - xc;
        double as = std::fabs(s);
        double sg = s < 0 ? -1.0 : 1.0;
        return a * x[0] + x[0] * x[0] + beta * sg * pow_alpha(as) * as * as;
    }
    double da_param_lipschitz() const { return 0.0; }
};

// f(a,x) = (1/2) x^T Q x + a b.x;  Q symmetric with |det Q| bounded below.
// b = 0 gives the parameter-independent control family.
template <int D>
struct QuadraticForm {
    static constexpr int dim = D;
    static constexpr bool tangency_gap_only = true;
    std::string name = "quadratic-form";
    double a0 = 0.0, delta0 = 1.0;
    Box<D> domain = Box<D>::unit();
    double alpha = 1.0, eta = 1.0;
    Mat<D> Q = [] {
        Mat<D> q;
        for (int i = 0; i < D; ++i) q(i, i) = 2.0;
        return q;
    }();
    Vec<D> b = Vec<D>::constant(1.0);

    Jet<D> jet(double a, Vec<D> x) const {
        Jet<D> j;
        Vec<D> qx = Q.mul(x);
        j.value = 0.5 * x.dot(qx) + a * b.dot(x);
        for (int i = 0; i < D; ++i) j.grad[i] = qx[i] + a * b[i];
        j.hess = Q;
        j.da = b.dot(x);
        j.grad_da = b;
        return j;
    }
    double value(double a, Vec<D> x) const { return 0.5 * x.dot(Q.mul(x)) + a * b.dot(x); }
    double da_param_lipschitz() const { return 0.0; }
};

// ---------------------------------------------------------------------------
// User-defined families: value-only evaluators get jets synthesized by
// centered finite differences with step 1e-5 (documented accuracy loss);
// a full jet callback may be supplied instead.
// ---------------------------------------------------------------------------

template <int D>
struct GenericFamily {
    static constexpr int dim = D;
    static constexpr bool tangency_gap_only = false;
    std::string name = "generic";
    double a0 = 0.0, delta0 = 1.0;
    Box<D> domain = Box<D>::unit();
    double alpha = 1.0, eta = 1.0;
    double fd_step = 1e-5;
    std::function<double(double, Vec<D>)> value_fn;
    std::function<Jet<D>(double, Vec<D>)> jet_fn; // optional
    double da_lip = 0.0; // sampled or user-provided bound for the padding

    Jet<D> jet(double a, Vec<D> x) const {
        if (jet_fn) return jet_fn(a, x);
        return fd_jet(a, x);
    }
    double value(double a, Vec<D> x) const {
        if (value_fn) return value_fn(a, x);
        return jet_fn(a, x).value;
    }
    double da_param_lipschitz() const { return da_lip; }

    Jet<D> fd_jet(double a, Vec<D> x) const {
        const double h = fd_step;
        Jet<D> j;
        j.value = value_fn(a, x);
        for (int i = 0; i < D; ++i) {
            Vec<D> xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            j.grad[i] = (value_fn(a, xp) - value_fn(a, xm)) / (2 * h);
            j.hess(i, i) = (value_fn(a, xp) - 2 * j.value + value_fn(a, xm)) / (h * h);
        }
        for (int i = 0; i < D; ++i)
            for (int k = i + 1; k < D; ++k) {
                Vec<D> xpp = x, xpm = x, xmp = x, xmm = x;
                xpp[i] += h; xpp[k] += h;
                xpm[i] += h; xpm[k] -= h;
                xmp[i] -= h; xmp[k] += h;
                xmm[i] -= h; xmm[k] -= h;
                double v = (value_fn(a, xpp) - value_fn(a, xpm) - value_fn(a, xmp) + value_fn(a, xmm)) / (4 * h * h);
                j.hess(i, k) = v;
                j.hess(k, i) = v;
            }
        j.da = (value_fn(a + h, x) - value_fn(a - h, x)) / (2 * h);
        for (int i = 0; i < D; ++i) {
            Vec<D> xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            j.grad_da[i] = (value_fn(a + h, xp) - value_fn(a + h, xm) - value_fn(a - h, xp) + value_fn(a - h, xm)) / (4 * h * h);
        }
        return j;
    }
};

// ---------------------------------------------------------------------------
// Sampled regularity constants: curvature floor, Hoelder quotients of the
// Hessian in x and of (da f, grad f) in a, and the sup norms the construction
// depends on. Sampling-based, not certified.
// ---------------------------------------------------------------------------

struct ConstantsReport {
    double c0_min = 0;                 // min |det D^2_x f|
    double c_alpha_est = 0;            // Hessian Hoelder-alpha quotient in x
    double a_eta_da_est = 0;           // da f Hoelder-eta quotient in a
    double a_eta_grad_est = 0;         // grad_x f Hoelder-eta quotient in a
    double sup_da = 0;
    double sup_grad = 0;
    double sup_grad_da = 0;
    double sup_hess = 0;
    double max_hess_asymmetry = 0;
    int grid_density = 0;
    bool violation = false;
    std::string violation_reason;

    std::vector<std::pair<std::string, double>> rows() const {
        return {
            {"c0_min", c0_min},
            {"C_alpha_est", c_alpha_est},
            {"A_eta_da_est", a_eta_da_est},
            {"A_eta_grad_est", a_eta_grad_est},
            {"sup_da_f", sup_da},
            {"sup_grad_f", sup_grad},
            {"sup_grad_da_f", sup_grad_da},
            {"sup_hess_f", sup_hess},
            {"max_hess_asymmetry", max_hess_asymmetry},
            {"grid_density", double(grid_density)},
            {"violation", violation ? 1.0 : 0.0},
        };
    }
};

namespace detail {

// Grid plus midpoints along one axis: 2*density+1 points.
inline std::vector<double> sample_axis(double lo, double hi, int density) {
    std::vector<double> v;
    int n = 2 * density;
    v.reserve(n + 1);
    for (int i = 0; i <= n; ++i) v.push_back(lo + (hi - lo) * double(i) / double(n));
    return v;
}

template <int D>
std::vector<Vec<D>> sample_box(const Box<D>& b, int density) {
    std::vector<std::vector<double>> axes;
    for (int i = 0; i < D; ++i) axes.push_back(sample_axis(b.lo[i], b.hi[i], density));
    std::vector<Vec<D>> out;
    std::size_t total = 1;
    for (auto& a : axes) total *= a.size();
    out.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        Vec<D> x;
        std::size_t rem = idx;
        for (int i = 0; i < D; ++i) {
            x[i] = axes[i][rem % axes[i].size()];
            rem /= axes[i].size();
        }
        out.push_back(x);
    }
    return out;
}

} // namespace detail

template <class F>
ConstantsReport validate_regularity(const F& fam, int grid_density) {
    constexpr int D = F::dim;
    if (grid_density < 2) throw std::invalid_argument("grid_density must be >= 2");

    ConstantsReport r;
    r.grid_density = grid_density;
    auto xs = detail::sample_box<D>(fam.domain, grid_density);
    auto as = detail::sample_axis(fam.a0, fam.a0 + fam.delta0, grid_density);

    r.c0_min = std::numeric_limits<double>::infinity();

    std::vector<Jet<D>> row(xs.size());
    std::vector<Jet<D>> prev_row;
    bool have_prev = false;
    double prev_a = 0;

    // Cap the number of x-pairs per parameter sample so d >= 2 stays tractable.
    std::size_t pair_stride = 1;
    while (xs.size() * xs.size() / (2 * pair_stride) > 2'000'000) pair_stride *= 2;

    for (double a : as) {
        for (std::size_t i = 0; i < xs.size(); ++i) row[i] = fam.jet(a, xs[i]);

        for (const auto& j : row) {
            double det = std::fabs(j.hess.det());
            r.c0_min = std::min(r.c0_min, det);
            r.sup_da = std::max(r.sup_da, std::fabs(j.da));
            r.sup_grad = std::max(r.sup_grad, j.grad.norm());
            r.sup_grad_da = std::max(r.sup_grad_da, j.grad_da.norm());
            r.sup_hess = std::max(r.sup_hess, j.hess.max_abs());
            r.max_hess_asymmetry = std::max(r.max_hess_asymmetry, j.hess.max_asymmetry());
        }
        // Hessian Hoelder quotient in x at this parameter.
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t k = i + pair_stride; k < xs.size(); k += pair_stride) {
                double dist = (xs[i] - xs[k]).norm();
                if (dist == 0) continue;
                double dh = 0;
                for (int t = 0; t < D * D; ++t) dh = std::max(dh, std::fabs(row[i].hess.m[t] - row[k].hess.m[t]));
                r.c_alpha_est = std::max(r.c_alpha_est, dh / std::pow(dist, fam.alpha));
            }
        }
        // Parameter Hoelder quotients against the previous a-sample.
        if (have_prev) {
            double da = std::fabs(a - prev_a);
            double w = std::pow(da, fam.eta);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                r.a_eta_da_est = std::max(r.a_eta_da_est, std::fabs(row[i].da - prev_row[i].da) / w);
                r.a_eta_grad_est = std::max(r.a_eta_grad_est, (row[i].grad - prev_row[i].grad).norm() / w);
            }
        }
        prev_row = row;
        prev_a = a;
        have_prev = true;
    }

    auto finite = [](double v) { return std::isfinite(v); };
    if (!(r.c0_min > 0)) {
        r.violation = true;
        r.violation_reason = "curvature floor c0_min <= 0";
    } else if (!finite(r.sup_da) || !finite(r.sup_grad) || !finite(r.sup_grad_da) || !finite(r.sup_hess)) {
        r.violation = true;
        r.violation_reason = "non-finite sup norm";
    } else if (r.max_hess_asymmetry > 1e-12) {
        r.violation = true;
        r.violation_reason = "Hessian asymmetry above 1e-12";
    }
    return r;
}

// ---------------------------------------------------------------------------
// Named construction from identifier + numeric parameters (config form).
// ---------------------------------------------------------------------------

using ParamMap = std::map<std::string, double>;

inline Parabola make_parabola(const ParamMap& p = {}) {
    Parabola f;
    if (auto it = p.find("a0"); it != p.end()) f.a0 = it->second;
    if (auto it = p.find("delta0"); it != p.end()) f.delta0 = it->second;
    return f;
}

inline CircleCap<1> make_circle_cap(const ParamMap& p = {}) {
    CircleCap<1> f;
    if (auto it = p.find("a0"); it != p.end()) f.a0 = it->second;
    if (auto it = p.find("delta0"); it != p.end()) f.delta0 = it->second;
    if (auto it = p.find("halfwidth"); it != p.end()) {
        double w = it->second;
        if (w <= 0 || w > f.a0 - 0.1) throw std::invalid_argument("circle-cap halfwidth must keep |x| <= a_min - 0.1");
        f.domain.lo[0] = -w;
        f.domain.hi[0] = w;
    }
    return f;
}

inline HoelderQuadratic make_hoelder_quadratic(const ParamMap& p = {}) {
    HoelderQuadratic f;
    if (auto it = p.find("alpha"); it != p.end()) f.alpha = it->second;
    if (auto it = p.find("beta"); it != p.end()) f.beta = it->second;
    if (auto it = p.find("xc"); it != p.end()) f.xc = it->second;
    if (!(f.alpha > 0 && f.alpha < 1)) throw std::invalid_argument("hoelder-quadratic needs alpha in (0,1)");
    double gamma = (2 + f.alpha) * (1 + f.alpha);
    double dip = f.beta * gamma * std::pow(0.5 + std::fabs(f.xc - 0.5), f.alpha);
    if (dip > 1.0) throw std::invalid_argument("hoelder-quadratic beta too large: curvature floor below 1");
    return f;
}

template <int D>
QuadraticForm<D> make_quadratic_form(const ParamMap& p = {}) {
    QuadraticForm<D> f;
    for (int i = 0; i < D; ++i)
        for (int k = 0; k < D; ++k) {
            auto it = p.find("q" + std::to_string(i + 1) + std::to_string(k + 1));
            if (it != p.end()) {
                f.Q(i, k) = it->second;
                f.Q(k, i) = it->second;
            }
        }
    for (int i = 0; i < D; ++i) {
        auto it = p.find("b" + std::to_string(i + 1));
        if (it != p.end()) f.b[i] = it->second;
    }
    if (std::fabs(f.Q.det()) < 1e-9) throw std::invalid_argument("quadratic-form Q violates the curvature floor");
    return f;
}

} // namespace packlab

#endif // PACKLAB_FAMILY_HPP
