#ifndef PACKLAB_STUDY_HPP
#define PACKLAB_STUDY_HPP

#include "config.hpp"
#include "io.hpp"
#include "measure.hpp"

namespace packlab {

// Minimal even M with 2^(-M^d) <= delta.
inline int delta_to_M(double delta, int d) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta_to_M: delta must be in (0,1)");
    int L = 1;
    while (std::ldexp(1.0, -L) > delta) ++L;
    // L = smallest integer with 2^-L <= delta; now the smallest even M with M^d >= L.
    for (int M = 2; M <= (1 << 11); M += 2) {
        long long e = 1;
        for (int i = 0; i < d; ++i) e *= M;
        if (e >= L) return M;
    }
    throw std::logic_error("delta_to_M: no admissible M");
}

// ---------------------------------------------------------------------------
// Scaling study: schedules and fiber measures across an M list, a least
// squares log-log slope, and the band ratio of the normalized measures.
// ---------------------------------------------------------------------------

struct StudyRow {
    MeasureReport fiber;
    MeasureReport voxel; // populated when requested
    bool has_voxel = false;
    bool lambda_overridden = false;
};

struct StudyResult {
    std::string family;
    std::vector<StudyRow> rows;
    std::vector<std::pair<int, std::string>> skipped;
    double slope = 0;
    double band = 0;
    bool non_curved_flag = false;
    double build_seconds = 0;
    double measure_seconds = 0;
};

template <class F>
StudyResult run_scaling_study(const F& fam, const std::vector<int>& Ms, int fibers,
                              const std::string& method = "fiber", int lambda_override = -1,
                              ScheduleLimits limits = {}, double voxel_cell_rel = 0.5) {
    StudyResult res;
    res.family = fam.name;
    for (int M : Ms) {
        Timer t_build;
        GridPath<F::dim> path;
        try {
            std::optional<int> ov;
            if (lambda_override >= 0) ov = lambda_override;
            path = build_path<F::dim>(M, ov);
            long long e = 1;
            for (int i = 0; i < F::dim; ++i) e *= M;
            if (path.m > e)
                throw std::runtime_error("m = " + std::to_string(path.m) + " exceeds M^d = " + std::to_string(e));
        } catch (const std::exception& ex) {
            res.skipped.push_back({M, ex.what()});
            continue;
        }
        try {
            auto sched = build_schedule(fam, path, limits);
            res.build_seconds += t_build.seconds();
            double delta = sched.piece_width();
            StudyRow row;
            row.lambda_overridden = sched.lambda_overridden;
            Timer t_meas;
            if (method == "fiber" || method == "both") row.fiber = graph_measure(fam, sched, delta, fibers);
            if constexpr (F::dim == 1) {
                if (method == "voxel" || method == "both") {
                    row.voxel = graph_voxel_measure(fam, sched, delta, voxel_cell_rel * delta);
                    row.has_voxel = true;
                    if (method == "voxel") row.fiber = row.voxel;
                }
            }
            res.measure_seconds += t_meas.seconds();
            res.rows.push_back(std::move(row));
        } catch (const std::exception& ex) {
            res.skipped.push_back({M, ex.what()});
        }
    }
    if (res.rows.size() < 3) throw std::runtime_error("scaling study needs at least 3 admissible M values");

    // Least squares slope of ln(mu) against ln(M).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double norm_min = std::numeric_limits<double>::infinity(), norm_max = 0;
    for (const auto& row : res.rows) {
        double x = std::log(double(row.fiber.M));
        double y = std::log(row.fiber.measure);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        norm_min = std::min(norm_min, row.fiber.normalized);
        norm_max = std::max(norm_max, row.fiber.normalized);
    }
    double n = double(res.rows.size());
    res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    res.band = norm_max / norm_min;
    res.non_curved_flag = res.band > 10.0;
    return res;
}

inline std::string study_csv(const StudyResult& res) {
    std::ostringstream out;
    out << "family," << measure_csv_header() << "\n";
    for (const auto& row : res.rows) {
        out << res.family << "," << measure_csv_row(row.fiber, /*with_seconds=*/false) << "\n";
        if (row.has_voxel)
            for (const auto& line : measure_csv_rows(row.voxel, false)) out << res.family << "," << line << "\n";
    }
    out << "# slope = " << format_double(res.slope, "%.9g") << "\n";
    out << "# band = " << format_double(res.band, "%.9g") << "\n";
    if (res.non_curved_flag) out << "# flag = non-curved-packing\n";
    for (auto& [M, why] : res.skipped) out << "# skipped M=" << M << ": " << why << "\n";
    return out.str();
}

} // namespace packlab

#endif // PACKLAB_STUDY_HPP
