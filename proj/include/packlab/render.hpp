#ifndef PACKLAB_RENDER_HPP
#define PACKLAB_RENDER_HPP

#include <sstream>

#include "schedule.hpp"
#include "surface_pack.hpp"

namespace packlab {

// ---------------------------------------------------------------------------
// Cross-section renders: deterministic SVG bytes for one-dimensional graph
// schedules (parabola-type strips) and circle schedules (annuli), showing
// each piece's representative after k construction steps, grouped by the
// step-k dyadic block. Also reports the numeric tangency quality: the
// largest pairwise gap between a group's curves at the step's tangency point.
// ---------------------------------------------------------------------------

struct RenderResult {
    std::string svg;
    double max_group_gap = 0;   // at the step-k tangency point
    int groups = 0;
    int curves = 0;
};

namespace detail {

inline const char* kPalette[8] = {"#1b6ca8", "#c23b22", "#1e8e3e", "#8e44ad",
                                  "#d98e04", "#0c7b93", "#a83254", "#4a6fa5"};

inline std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace detail

template <class F>
RenderResult render_graph_svg(const F& fam, const TranslationSchedule<1>& s, int k) {
    if (k < 0 || k > s.m) throw std::invalid_argument("render: step k outside [0, m]");
    if (s.pieces > 1024) throw std::invalid_argument("render: too many pieces; render at a smaller scale");
    if (s.steps.empty() && k > 0) throw std::invalid_argument("render: schedule carries no step records");

    RenderResult res;
    res.curves = int(s.pieces);
    res.groups = int(s.pieces >> k);

    const double xlo = s.domain.lo[0], xhi = s.domain.hi[0];
    double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
    const int samples = 96;

    std::vector<std::vector<std::pair<double, double>>> polys;
    std::vector<std::pair<Vec<1>, double>> offsets;
    for (std::uint64_t n = 0; n < s.pieces; ++n) {
        auto off = s.accumulated(n, k);
        offsets.push_back(off);
        std::vector<std::pair<double, double>> poly;
        for (int t = 0; t <= samples; ++t) {
            double x = xlo + (xhi - xlo) * double(t) / samples;
            double y = fam.value(s.a_at(n), Vec<1>{x}) + off.second;
            poly.push_back({x + off.first[0], y});
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
        polys.push_back(std::move(poly));
    }

    // Tangency quality at x_k within each step-k group.
    if (k >= 1) {
        Vec<1> xt = s.tangency_points[k - 1];
        for (std::uint64_t g = 0; g < (s.pieces >> k); ++g) {
            std::vector<double> vals;
            for (std::uint64_t n = g << k; n < ((g + 1) << k); ++n) {
                auto off = offsets[std::size_t(n)];
                vals.push_back(fam.value(s.a_at(n), xt - off.first) + off.second);
            }
            for (std::size_t i = 0; i < vals.size(); ++i)
                for (std::size_t j = i + 1; j < vals.size(); ++j)
                    res.max_group_gap = std::max(res.max_group_gap, std::fabs(vals[i] - vals[j]));
        }
    }

    const double w = 640, h = 480, margin = 24;
    double span_x = (xhi - xlo) * 1.3, span_y = (yhi - ylo) * 1.1 + 1e-12;
    double base_x = xlo - 0.15 * (xhi - xlo), base_y = ylo - 0.05 * (yhi - ylo);
    auto mapx = [&](double x) { return margin + (x - base_x) / span_x * (w - 2 * margin); };
    auto mapy = [&](double y) { return h - margin - (y - base_y) / span_y * (h - 2 * margin); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << int(w) << " " << int(h) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::uint64_t n = 0; n < s.pieces; ++n) {
        int group = int(n >> k);
        out << "<path fill=\"none\" stroke=\"" << detail::kPalette[group % 8] << "\" stroke-width=\"0.8\" d=\"";
        const auto& poly = polys[std::size_t(n)];
        for (std::size_t t = 0; t < poly.size(); ++t)
            out << (t == 0 ? "M" : " L") << detail::fmt6(mapx(poly[t].first)) << " "
                << detail::fmt6(mapy(poly[t].second));
        out << "\"/>\n";
    }
    out << "</svg>\n";
    res.svg = out.str();
    return res;
}

// Circle schedules: the first-stage chart schedule of the surface packing,
// drawn as full annuli translated by their accumulated offsets.
template <class S>
RenderResult render_circle_svg(const S& surf, const SurfaceSchedule<2>& ss, int k) {
    if (ss.subs.empty()) throw std::invalid_argument("render: empty surface schedule");
    const auto& part = ss.subs.front();
    const auto& sched = part.stage1_schedule; // chart-frame graph schedule
    if (k < 0 || k > sched.m) throw std::invalid_argument("render: step k outside [0, m]");
    if (sched.steps.empty() && k > 0) throw std::invalid_argument("render: stage-1 schedule carries no steps");
    const Chart<2>& chart = part.charts.front();

    RenderResult res;
    res.curves = int(sched.pieces);
    res.groups = int(sched.pieces >> k);

    std::ostringstream out;
    const double w = 640, h = 640, margin = 20;
    const double R = (surf.a0 + surf.delta0) * 1.15;
    auto mapx = [&](double x) { return margin + (x + R) / (2 * R) * (w - 2 * margin); };
    auto mapy = [&](double y) { return h - margin - (y + R) / (2 * R) * (h - 2 * margin); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << int(w) << " " << int(h) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::uint64_t n = 0; n < sched.pieces; ++n) {
        auto [u, v] = sched.accumulated(n, k);
        Vec<2> tc{u[0], v};
        Vec<2> amb = detail::transpose_mul(chart.rot, tc); // circle center shift
        double radius = sched.a_at(n);
        int group = int(n >> k);
        out << "<circle fill=\"none\" stroke=\"" << detail::kPalette[group % 8]
            << "\" stroke-width=\"0.7\" cx=\"" << detail::fmt6(mapx(amb[0])) << "\" cy=\""
            << detail::fmt6(mapy(amb[1])) << "\" r=\"" << detail::fmt6(radius / (2 * R) * (w - 2 * margin))
            << "\"/>\n";
    }
    out << "</svg>\n";
    res.svg = out.str();

    // Tangency quality in the chart frame at the step-k grid point.
    if (k >= 1) {
        ChartFamily<S> cf = make_chart_family(surf, chart, part.a_lo, part.a_hi);
        Vec<1> xt = sched.tangency_points[k - 1];
        for (std::uint64_t g = 0; g < (sched.pieces >> k); ++g) {
            std::vector<double> vals;
            for (std::uint64_t n = g << k; n < ((g + 1) << k); ++n) {
                auto [u, v] = sched.accumulated(n, k);
                vals.push_back(cf.value(sched.a_at(n), xt - u) + v);
            }
            for (std::size_t i = 0; i < vals.size(); ++i)
                for (std::size_t j = i + 1; j < vals.size(); ++j)
                    res.max_group_gap = std::max(res.max_group_gap, std::fabs(vals[i] - vals[j]));
        }
    }
    return res;
}

} // namespace packlab

#endif // PACKLAB_RENDER_HPP
