#ifndef PACKLAB_MEASURE_HPP
#define PACKLAB_MEASURE_HPP

#include <chrono>

#include "core.hpp"
#include "family.hpp"
#include "schedule.hpp"

namespace packlab {

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

struct MeasureReport {
    std::string method;     // fiber | voxel
    int M = 0;
    int d = 1;
    double alpha = 1;
    double delta = 0;
    double measure = 0;     // Lebesgue estimate in the ambient space
    double normalized = 0;  // measure * M^(1+alpha) / delta0
    double collar = 0;      // contribution from fibers near the domain boundary
    double seconds = 0;
    double lower = 0;       // voxel brackets (0 for the fiber method)
    double upper = 0;
    std::uint64_t resolution = 0; // fiber count or marked-cell count
};

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// In-piece modulus-of-continuity pad: the parameter endpoints bracket the
// in-piece values up to A * w^(1+eta), A the Lipschitz/Hoelder constant of
// a -> da f.
template <class F, int D>
double fiber_pad(const F& fam, const TranslationSchedule<D>& s) {
    double w = s.piece_width();
    return fam.da_param_lipschitz() * std::pow(w, 1.0 + fam.eta);
}

// ---------------------------------------------------------------------------
// Fiber of the packed set over a base point x': one closed interval per piece
// that covers x' (endpoint values at the piece's parameter endpoints, widened
// by delta + pad), plus their union.
// ---------------------------------------------------------------------------

template <int D>
struct FiberSet {
    Vec<D> base{};
    std::vector<Interval> intervals;  // one per covering piece, piece order
    std::vector<Interval> components; // disjoint union
    double length = 0;
};

template <class F>
FiberSet<F::dim> fiber_set(const F& fam, const TranslationSchedule<F::dim>& s, Vec<F::dim> base, double delta) {
    constexpr int D = F::dim;
    if (delta <= 0) throw std::invalid_argument("fiber_set: delta must be positive");
    FiberSet<D> fs;
    fs.base = base;
    const double pad = fiber_pad(fam, s);
    const double widen = delta + pad;
    const double w = s.piece_width();
    for (std::uint64_t n = 0; n < s.pieces; ++n) {
        auto [u, v] = s.has_totals() ? std::pair<Vec<D>, double>{s.total_u_at(n), s.total_v[std::size_t(n)]}
                                     : s.total(n);
        Vec<D> xt = base - u;
        if (!s.domain.contains(xt)) continue;
        double an = s.a_at(n);
        double y1 = fam.value(an, xt) + v;
        double y2 = fam.value(an + w, xt) + v;
        fs.intervals.push_back({std::min(y1, y2) - widen, std::max(y1, y2) + widen});
    }
    fs.components = union_components(fs.intervals);
    Kahan len;
    for (const auto& c : fs.components) len.add(c.length());
    fs.length = len.value();
    return fs;
}

// ---------------------------------------------------------------------------
// Fast fiber sweep: pieces outer, fibers inner. Consecutive pieces' intervals
// overlap except at rare group boundaries, so each fiber keeps one open run
// and a short list of closed runs; the final union is exact.
// ---------------------------------------------------------------------------

namespace detail {

template <int D>
struct RunState {
    std::vector<double> lo, hi; // open run per fiber; lo > hi means closed
    std::vector<std::vector<Interval>> closed;
    void init(std::size_t nf) {
        lo.assign(nf, std::numeric_limits<double>::infinity());
        hi.assign(nf, -std::numeric_limits<double>::infinity());
        closed.assign(nf, {});
    }
    inline void feed(std::size_t f, double ilo, double ihi) {
        if (ilo <= hi[f] && ihi >= lo[f]) {
            lo[f] = std::min(lo[f], ilo);
            hi[f] = std::max(hi[f], ihi);
        } else {
            if (lo[f] <= hi[f]) closed[f].push_back({lo[f], hi[f]});
            lo[f] = ilo;
            hi[f] = ihi;
        }
    }
    inline void close(std::size_t f) {
        if (lo[f] <= hi[f]) {
            closed[f].push_back({lo[f], hi[f]});
            lo[f] = std::numeric_limits<double>::infinity();
            hi[f] = -std::numeric_limits<double>::infinity();
        }
    }
};

} // namespace detail

// Union length of the fiber over each base point. U/V are piece-major arrays
// (pieces x D and pieces); the family is inlined through the template.
template <class F>
std::vector<double> fiber_lengths(const F& fam, const double* U, const double* V, std::uint64_t pieces,
                                  double a0, double piece_w, const Box<F::dim>& domain,
                                  const std::vector<Vec<F::dim>>& bases, double widen) {
    constexpr int D = F::dim;
    const std::size_t nf = bases.size();
    std::vector<double> lengths(nf, 0.0);
    const std::size_t block = 256;
    const std::size_t nblocks = (nf + block - 1) / block;

    parallel_blocks(nblocks, [&](std::size_t blk) {
        const std::size_t f0 = blk * block;
        const std::size_t f1 = std::min(nf, f0 + block);
        const std::size_t bn = f1 - f0;
        detail::RunState<D> rs;
        rs.init(bn);
        // Base coordinates, axis-major for the inner loop.
        std::vector<double> bx(bn * D);
        for (std::size_t f = 0; f < bn; ++f)
            for (int i = 0; i < D; ++i) bx[i * bn + f] = bases[f0 + f][i];

        for (std::uint64_t n = 0; n < pieces; ++n) {
            const double* un = &U[std::size_t(n) * D];
            const double vn = V[std::size_t(n)];
            const double an = a0 + double(n) * piece_w;
            for (std::size_t f = 0; f < bn; ++f) {
                Vec<D> xt;
                bool cov = true;
                for (int i = 0; i < D; ++i) {
                    double c = bx[i * bn + f] - un[i];
                    xt[i] = c;
                    cov = cov && (c >= domain.lo[i]) && (c <= domain.hi[i]);
                }
                if (!cov) {
                    rs.close(f);
                    continue;
                }
                double y1 = fam.value(an, xt) + vn;
                double y2 = fam.value(an + piece_w, xt) + vn;
                double ilo = std::min(y1, y2) - widen;
                double ihi = std::max(y1, y2) + widen;
                rs.feed(f, ilo, ihi);
            }
        }
        for (std::size_t f = 0; f < bn; ++f) {
            rs.close(f);
            lengths[f0 + f] = union_length(rs.closed[f]);
        }
    });
    return lengths;
}

// ---------------------------------------------------------------------------
// Fiber-method measure: average fiber length over a uniform grid of base
// points covering the full x-extent of the packed set, times the base volume.
// The contribution of fibers within max|U| + 2/M of the domain boundary is
// reported separately in `collar` (it is included in `measure`).
// ---------------------------------------------------------------------------

template <class F>
MeasureReport graph_measure(const F& fam, TranslationSchedule<F::dim>& s, double delta, int fibers_per_axis) {
    constexpr int D = F::dim;
    if (fibers_per_axis < 8) throw std::invalid_argument("graph_measure: fibers_per_axis must be >= 8");
    Timer timer;
    s.build_totals();

    const Box<D> urange = s.total_u_range();
    Box<D> extent;
    for (int i = 0; i < D; ++i) {
        extent.lo[i] = s.domain.lo[i] + urange.lo[i];
        extent.hi[i] = s.domain.hi[i] + urange.hi[i];
    }
    // Interior region: all pieces cover, plus a 2/M margin.
    Box<D> interior;
    for (int i = 0; i < D; ++i) {
        interior.lo[i] = s.domain.lo[i] + urange.hi[i] + 2.0 / s.M;
        interior.hi[i] = s.domain.hi[i] + urange.lo[i] - 2.0 / s.M;
    }

    const int K = fibers_per_axis;
    std::uint64_t nf = 1;
    for (int i = 0; i < D; ++i) nf *= std::uint64_t(K);
    std::vector<Vec<D>> bases;
    bases.reserve(nf);
    for (std::uint64_t c = 0; c < nf; ++c) {
        Vec<D> x;
        std::uint64_t rem = c;
        for (int i = 0; i < D; ++i) {
            std::uint64_t k = rem % std::uint64_t(K);
            rem /= std::uint64_t(K);
            x[i] = extent.lo[i] + (extent.hi[i] - extent.lo[i]) * ((double(k) + 0.5) / double(K));
        }
        bases.push_back(x);
    }

    double widen = delta + fiber_pad(fam, s);
    auto lengths = fiber_lengths(fam, s.total_u.data(), s.total_v.data(), s.pieces, s.a0, s.piece_width(),
                                 s.domain, bases, widen);

    const double cellvol = extent.volume() / double(nf);
    Kahan total, collar;
    for (std::uint64_t f = 0; f < nf; ++f) {
        total.add(lengths[f] * cellvol);
        if (!interior.contains(bases[f])) collar.add(lengths[f] * cellvol);
    }

    MeasureReport r;
    r.method = "fiber";
    r.M = s.M;
    r.d = D;
    r.alpha = fam.alpha;
    r.delta = delta;
    r.measure = total.value();
    r.normalized = r.measure * std::pow(double(s.M), 1.0 + fam.alpha) / s.delta0;
    r.collar = collar.value();
    r.resolution = nf;
    r.seconds = timer.seconds();
    return r;
}

// ---------------------------------------------------------------------------
// Voxel oracle, graph flavor (d = 1): rasterize the Euclidean delta
// neighbourhood of the packed set column by column on a uniform cell grid.
// For each column and piece the cells whose centers lie within the marking
// radius of the piece's translated curve form one contiguous row interval
// (local line geometry with explicit curvature and slope-window slack).
// Three radii are rasterized: the sandwich brackets
//   lower: delta - cell*sqrt(2)/2 - delta/2,
//   upper: delta + cell*sqrt(2)/2 + delta/2,
// (the delta/2 term is the sampler-spacing guarantee the brackets are defined
// against) and the point estimate at delta itself.
// ---------------------------------------------------------------------------

struct VoxelBands {
    double lower = 0, point = 0, upper = 0;
};

template <class F>
MeasureReport graph_voxel_measure(const F& fam, TranslationSchedule<1>& s, double delta, double cell) {
    static_assert(F::dim == 1, "column rasterizer is one-dimensional");
    if (cell > delta / 2 + 1e-18) throw std::invalid_argument("voxel cell must be <= delta/2");
    Timer timer;
    s.build_totals();

    const double pad = fiber_pad(fam, s);
    const double w = s.piece_width();
    const Box<1> urange = s.total_u_range();

    const double cellrad = cell * std::sqrt(2.0) / 2.0;
    const double samp = delta / 2.0;
    double rho[3] = {std::max(delta - cellrad - samp, cell * 1e-3), delta, delta + cellrad + samp};

    // Column range covers the x-extent plus the largest marking radius.
    const double x_lo = s.domain.lo[0] + urange.lo[0] - rho[2] - cell;
    const double x_hi = s.domain.hi[0] + urange.hi[0] + rho[2] + cell;
    const std::int64_t cols = std::int64_t(std::ceil((x_hi - x_lo) / cell));

    // Row range from a coarse scan of the family values.
    double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
    for (int i = 0; i <= 64; ++i) {
        Vec<1> x{s.domain.lo[0] + (s.domain.hi[0] - s.domain.lo[0]) * i / 64.0};
        for (int k = 0; k <= 8; ++k) {
            double a = s.a0 + s.delta0 * k / 8.0;
            double v = fam.value(a, x);
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    y_min -= s.max_total_v + rho[2] + pad + 2 * cell;
    y_max += s.max_total_v + rho[2] + pad + 2 * cell;
    const double y0 = y_min;

    // Curvature/slope slack over the in-column window.
    ConstantsReport quick = validate_regularity(fam, 4);
    const double H = quick.sup_hess + quick.c_alpha_est * std::pow(rho[2] + cell, fam.alpha);

    const std::int64_t col_block = 2048;
    const std::size_t nblocks = std::size_t((cols + col_block - 1) / col_block);
    std::vector<std::array<std::uint64_t, 3>> counts(nblocks, {0, 0, 0});

    parallel_blocks(nblocks, [&](std::size_t blk) {
        std::int64_t c0 = std::int64_t(blk) * col_block;
        std::int64_t c1 = std::min(cols, c0 + col_block);
        std::size_t bn = std::size_t(c1 - c0);
        detail::RunState<1> rs[3];
        for (int q = 0; q < 3; ++q) rs[q].init(bn);
        // Closed runs collect integer row ranges encoded as doubles.
        for (std::uint64_t n = 0; n < s.pieces; ++n) {
            const double un = s.total_u[std::size_t(n)];
            const double vn = s.total_v[std::size_t(n)];
            const double an = s.a_at(n);
            for (std::int64_t c = c0; c < c1; ++c) {
                const double xc = x_lo + (double(c) + 0.5) * cell;
                const double xt = xc - un;
                const std::size_t f = std::size_t(c - c0);
                if (xt < s.domain.lo[0] || xt > s.domain.hi[0]) {
                    for (int q = 0; q < 3; ++q) rs[q].close(f);
                    continue;
                }
                Jet<1> j = fam.jet(an, Vec<1>{xt});
                const double y1 = j.value + vn;
                const double y2 = fam.value(an + w, Vec<1>{xt}) + vn;
                const double ymin = std::min(y1, y2) - pad;
                const double ymax = std::max(y1, y2) + pad;
                const double g = std::fabs(j.grad[0]);
                for (int q = 0; q < 3; ++q) {
                    const double win = rho[q] + 0.5 * cell;
                    const double sag = 0.5 * H * win * win;
                    double gq = (q == 0) ? std::max(0.0, g - H * win) : g + H * win;
                    double band = rho[q] * std::sqrt(1.0 + gq * gq);
                    double blo = (q == 0) ? ymin + sag - band : ymin - band - sag;
                    double bhi = (q == 0) ? ymax - sag + band : ymax + band + sag;
                    if (bhi <= blo && q == 0) {
                        rs[q].close(f);
                        continue;
                    }
                    // Integer rows whose centers fall inside the band.
                    double klo = std::ceil((blo - y0) / cell - 0.5);
                    double khi = std::floor((bhi - y0) / cell - 0.5);
                    if (khi < klo) {
                        rs[q].close(f);
                        continue;
                    }
                    rs[q].feed(f, klo, khi);
                }
            }
            // Edge half-disks: the neighbourhood sticks out past the domain
            // endpoints; mark the out-of-domain columns for point and upper.
            for (int e = 0; e < 2; ++e) {
                const double xe = (e == 0 ? s.domain.lo[0] : s.domain.hi[0]);
                const double xedge = xe + un;
                double ya = fam.value(an, Vec<1>{xe}) + vn;
                double yb = fam.value(an + w, Vec<1>{xe}) + vn;
                double ymin = std::min(ya, yb) - pad, ymax = std::max(ya, yb) + pad;
                std::int64_t ca = std::int64_t(std::floor((xedge - rho[2] - x_lo) / cell));
                std::int64_t cb = std::int64_t(std::floor((xedge + rho[2] - x_lo) / cell));
                for (std::int64_t c = std::max(ca, c0); c <= std::min(cb, c1 - 1); ++c) {
                    const double xc = x_lo + (double(c) + 0.5) * cell;
                    const double xt = xc - un;
                    if (xt >= s.domain.lo[0] && xt <= s.domain.hi[0]) continue; // covered by the band pass
                    const std::size_t f = std::size_t(c - c0);
                    double dx = std::fabs(xc - xedge);
                    for (int q = 1; q < 3; ++q) {
                        if (dx > rho[q]) continue;
                        double ry = std::sqrt(std::max(0.0, rho[q] * rho[q] - dx * dx));
                        double klo = std::ceil((ymin - ry - y0) / cell - 0.5);
                        double khi = std::floor((ymax + ry - y0) / cell - 0.5);
                        if (khi >= klo) rs[q].feed(f, klo, khi);
                    }
                }
            }
        }
        std::array<std::uint64_t, 3> cnt{0, 0, 0};
        for (int q = 0; q < 3; ++q) {
            for (std::size_t f = 0; f < bn; ++f) {
                rs[q].close(f);
                for (auto comp : union_components(std::move(rs[q].closed[f])))
                    cnt[q] += std::uint64_t(comp.hi - comp.lo) + 1;
            }
        }
        counts[blk] = cnt;
    });

    std::array<std::uint64_t, 3> total{0, 0, 0};
    for (const auto& c : counts)
        for (int q = 0; q < 3; ++q) total[q] += c[q];

    MeasureReport r;
    r.method = "voxel";
    r.M = s.M;
    r.d = 1;
    r.alpha = fam.alpha;
    r.delta = delta;
    r.lower = double(total[0]) * cell * cell;
    r.measure = double(total[1]) * cell * cell;
    r.upper = double(total[2]) * cell * cell;
    r.normalized = r.measure * std::pow(double(s.M), 1.0 + fam.alpha) / s.delta0;
    r.resolution = total[1];
    r.seconds = timer.seconds();
    return r;
}

// ---------------------------------------------------------------------------
// Voxel oracle, literal flavor: stream sample points of the set and mark
// every cell of a dense (d+1)-dimensional grid whose center lies within the
// marking radius of some sample. Used where the sample count is tractable
// (surfaces in the plane, small graph scales); brackets as above with the
// caller-supplied sampling guarantee.
// ---------------------------------------------------------------------------

template <int DP>
struct VoxelGrid {
    Box<DP> box{};
    double cell = 0;
    std::array<std::int64_t, DP> dims{};
    std::vector<std::uint8_t> marks; // 3 bits per cell: lower/point/upper

    std::uint64_t cells() const {
        std::uint64_t t = 1;
        for (auto d : dims) t *= std::uint64_t(d);
        return t;
    }
};

struct VoxelBudget {
    std::uint64_t max_cells = std::uint64_t(1) << 31;
};

template <int DP>
VoxelGrid<DP> make_voxel_grid(const Box<DP>& box, double cell, VoxelBudget budget = {}) {
    VoxelGrid<DP> g;
    g.box = box;
    g.cell = cell;
    std::uint64_t total = 1;
    for (int i = 0; i < DP; ++i) {
        g.dims[i] = std::int64_t(std::ceil((box.hi[i] - box.lo[i]) / cell)) + 1;
        total *= std::uint64_t(g.dims[i]);
        if (total > budget.max_cells)
            throw std::runtime_error("voxel budget exceeded: grid needs " + std::to_string(total) +
                                     " cells; reduce M or enlarge cells");
    }
    g.marks.assign(total, 0);
    return g;
}

template <int DP>
void voxel_stamp(VoxelGrid<DP>& g, Vec<DP> p, const double rho[3]) {
    std::array<std::int64_t, DP> lo, hi;
    for (int i = 0; i < DP; ++i) {
        lo[i] = std::max<std::int64_t>(0, std::int64_t(std::floor((p[i] - rho[2] - g.box.lo[i]) / g.cell - 0.5)));
        hi[i] = std::min<std::int64_t>(g.dims[i] - 1, std::int64_t(std::ceil((p[i] + rho[2] - g.box.lo[i]) / g.cell - 0.5)));
    }
    std::array<std::int64_t, DP> idx = lo;
    for (;;) {
        double d2 = 0;
        for (int i = 0; i < DP; ++i) {
            double c = g.box.lo[i] + (double(idx[i]) + 0.5) * g.cell;
            d2 += (c - p[i]) * (c - p[i]);
        }
        std::uint64_t flat = 0;
        for (int i = DP - 1; i >= 0; --i) flat = flat * std::uint64_t(g.dims[i]) + std::uint64_t(idx[i]);
        std::uint8_t& m = g.marks[flat];
        double dist = std::sqrt(d2);
        if (dist <= rho[0]) m |= 1;
        if (dist <= rho[1]) m |= 2;
        if (dist <= rho[2]) m |= 4;
        int axis = 0;
        while (axis < DP && ++idx[axis] > hi[axis]) {
            idx[axis] = lo[axis];
            ++axis;
        }
        if (axis == DP) break;
    }
}

// sample_spacing is the guaranteed max point spacing of the sampler (<= delta/2).
template <int DP>
MeasureReport voxel_oracle_measure(const std::function<void(const std::function<void(Vec<DP>)>&)>& sampler,
                                   double delta, double cell, const Box<DP>& box, double sample_spacing,
                                   VoxelBudget budget = {}) {
    if (cell > delta / 2 + 1e-18) throw std::invalid_argument("voxel cell must be <= delta/2");
    if (sample_spacing > delta / 2 + 1e-18)
        throw std::invalid_argument("voxel sampler spacing must be <= delta/2");
    Timer timer;
    VoxelGrid<DP> g = make_voxel_grid<DP>(box, cell, budget);
    const double cellrad = cell * std::sqrt(double(DP)) / 2.0;
    double rho[3] = {std::max(delta - cellrad - sample_spacing, cell * 1e-3), delta, delta + cellrad + sample_spacing};
    sampler([&](Vec<DP> p) { voxel_stamp(g, p, rho); });

    std::uint64_t cnt[3] = {0, 0, 0};
    for (std::uint8_t m : g.marks) {
        cnt[0] += m & 1;
        cnt[1] += (m >> 1) & 1;
        cnt[2] += (m >> 2) & 1;
    }
    double cv = std::pow(cell, DP);
    MeasureReport r;
    r.method = "voxel";
    r.d = DP - 1;
    r.delta = delta;
    r.lower = double(cnt[0]) * cv;
    r.measure = double(cnt[1]) * cv;
    r.upper = double(cnt[2]) * cv;
    r.resolution = cnt[1];
    r.seconds = timer.seconds();
    return r;
}

// ---------------------------------------------------------------------------
// Containment: sampled points of every translated graph must lie inside the
// fiber-method neighbourhood. The piece owning the parameter generates a
// fiber interval that certifies its own samples; a subset of samples is also
// checked against the full fiber union.
// ---------------------------------------------------------------------------

struct ContainmentReport {
    bool pass = false;
    double worst_margin = 0;      // signed depth inside the fiber set
    double worst_self_margin = 0; // via the owning piece's interval only
    std::uint64_t samples = 0;
};

template <class F>
ContainmentReport containment_check(const F& fam, TranslationSchedule<F::dim>& s, int samples_per_graph,
                                    double delta) {
    constexpr int D = F::dim;
    s.build_totals();
    const double pad = fiber_pad(fam, s);
    const double widen = delta + pad;
    const double w = s.piece_width();

    std::vector<std::uint64_t> pieces;
    const std::uint64_t cap = 1024;
    if (s.pieces <= 2 * cap) {
        for (std::uint64_t n = 0; n < s.pieces; ++n) pieces.push_back(n);
    } else {
        for (std::uint64_t k = 0; k < cap; ++k) pieces.push_back(k * (s.pieces / cap));
    }

    ContainmentReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    rep.worst_self_margin = std::numeric_limits<double>::infinity();

    std::vector<double> full_check_as;
    for (const std::uint64_t n : pieces) {
        const double a_left = s.a_at(n);
        const double a_mid = a_left + 0.5 * w;
        const double a_right = a_left + w;
        for (double a : {a_left, a_mid, a_right}) {
            std::uint64_t owner = piece_of(s, a);
            Vec<D> u = s.total_u_at(owner);
            double v = s.total_v[std::size_t(owner)];
            double an = s.a_at(owner);
            for (int k = 0; k < samples_per_graph; ++k) {
                Vec<D> x;
                std::uint64_t rem = std::uint64_t(k);
                int per_axis = std::max(1, int(std::round(std::pow(double(samples_per_graph), 1.0 / D))));
                for (int i = 0; i < D; ++i) {
                    std::uint64_t q = rem % std::uint64_t(per_axis);
                    rem /= std::uint64_t(per_axis);
                    x[i] = s.domain.lo[i] + (s.domain.hi[i] - s.domain.lo[i]) * ((double(q) + 0.5) / per_axis);
                }
                double y = fam.value(a, x) + v;
                double y1 = fam.value(an, x) + v;
                double y2 = fam.value(an + w, x) + v;
                double lo = std::min(y1, y2) - widen;
                double hi = std::max(y1, y2) + widen;
                double margin = std::min(y - lo, hi - y);
                rep.worst_self_margin = std::min(rep.worst_self_margin, margin);
                rep.samples++;
            }
        }
    }

    // Full-union spot checks on a handful of parameters.
    const int full_count = 8;
    for (int t = 0; t < full_count; ++t) {
        double a = s.a0 + s.delta0 * (double(t) + 0.5) / full_count;
        std::uint64_t owner = piece_of(s, a);
        Vec<D> u = s.total_u_at(owner);
        double v = s.total_v[std::size_t(owner)];
        for (int k = 0; k < 8; ++k) {
            Vec<D> x;
            for (int i = 0; i < D; ++i)
                x[i] = s.domain.lo[i] + (s.domain.hi[i] - s.domain.lo[i]) * ((double(k) + 0.5) / 8);
            Vec<D> base = x + u;
            auto fs = fiber_set(fam, s, base, delta);
            double y = fam.value(a, x) + v;
            double margin = union_depth(fs.components, y);
            rep.worst_margin = std::min(rep.worst_margin, margin);
        }
    }
    if (rep.worst_margin == std::numeric_limits<double>::infinity()) rep.worst_margin = rep.worst_self_margin;
    rep.pass = rep.worst_self_margin >= 0 && rep.worst_margin >= 0;
    return rep;
}

} // namespace packlab

#endif // PACKLAB_MEASURE_HPP
