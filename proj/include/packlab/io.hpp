#ifndef PACKLAB_IO_HPP
#define PACKLAB_IO_HPP

#include <fstream>
#include <sstream>

#include "measure.hpp"
#include "schedule.hpp"

namespace packlab {

// ---------------------------------------------------------------------------
// Schedule persistence: plain text, one record per piece in hexadecimal float
// precision, FNV-64 checksum footer. Step-level records ride behind a flag.
// ---------------------------------------------------------------------------

inline const char* kScheduleMagic = "packlab-schedule v1";

template <int D>
std::string serialize_schedule(TranslationSchedule<D>& s, const ParamMap& family_params = {},
                               bool include_steps = false) {
    s.build_totals();
    std::ostringstream out;
    out << kScheduleMagic << "\n";
    out << "family " << s.family_name;
    for (const auto& [k, v] : family_params) out << " " << k << "=" << format_double(v);
    out << "\n";
    out << "M " << s.M << "\n";
    out << "d " << D << "\n";
    out << "m " << s.m << "\n";
    out << "lambda " << s.lambda << (s.lambda_overridden ? " override" : "") << "\n";
    out << "a0 " << hex_double(s.a0) << "\n";
    out << "delta0 " << hex_double(s.delta0) << "\n";
    out << "domain";
    for (int i = 0; i < D; ++i) out << " " << hex_double(s.domain.lo[i]) << " " << hex_double(s.domain.hi[i]);
    out << "\n";
    out << "pieces " << s.pieces << "\n";
    for (std::uint64_t n = 0; n < s.pieces; ++n) {
        out << n;
        for (int i = 0; i < D; ++i) out << " " << hex_double(s.total_u[std::size_t(n) * D + i]);
        out << " " << hex_double(s.total_v[std::size_t(n)]) << "\n";
    }
    if (include_steps) {
        out << "steps\n";
        for (int j = 1; j <= s.m; ++j) {
            const auto& st = s.steps[j - 1];
            std::uint64_t groups = s.pieces >> j;
            for (std::uint64_t p = 0; p < groups; ++p) {
                out << j << " " << p;
                for (int i = 0; i < D; ++i) out << " " << hex_double(st.u[std::size_t(p) * D + i]);
                out << " " << hex_double(st.v[std::size_t(p)]) << "\n";
            }
        }
    }
    std::string body = out.str();
    char foot[32];
    std::snprintf(foot, sizeof foot, "checksum %016llx\n", (unsigned long long)fnv1a(body));
    return body + foot;
}

template <int D>
void save_schedule(TranslationSchedule<D>& s, const std::string& path, const ParamMap& family_params = {},
                   bool include_steps = false) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_schedule: cannot open " + path);
    f << serialize_schedule(s, family_params, include_steps);
}

struct ScheduleHeader {
    std::string family_name;
    ParamMap params;
    int M = 0, d = 0;
};

inline ScheduleHeader peek_schedule_header(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_schedule: cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line != kScheduleMagic)
        throw std::runtime_error("load_schedule: version mismatch or not a schedule file");
    ScheduleHeader h;
    while (std::getline(f, line)) {
        std::istringstream is(line);
        std::string key;
        is >> key;
        if (key == "family") {
            is >> h.family_name;
            std::string kv;
            while (is >> kv) {
                auto eq = kv.find('=');
                if (eq != std::string::npos) h.params[kv.substr(0, eq)] = std::strtod(kv.c_str() + eq + 1, nullptr);
            }
        } else if (key == "M") {
            is >> h.M;
        } else if (key == "d") {
            is >> h.d;
            return h;
        }
    }
    throw std::runtime_error("load_schedule: malformed header");
}

template <int D>
TranslationSchedule<D> load_schedule(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_schedule: cannot open " + path);
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    // Verify the checksum over everything before the footer line.
    auto foot_pos = content.rfind("checksum ");
    if (foot_pos == std::string::npos) throw std::runtime_error("load_schedule: missing checksum footer");
    std::string body = content.substr(0, foot_pos);
    unsigned long long want = std::strtoull(content.c_str() + foot_pos + 9, nullptr, 16);
    if (fnv1a(body) != want) throw std::runtime_error("load_schedule: checksum failure (truncated or corrupted)");

    std::istringstream in(body);
    std::string line;
    std::getline(in, line);
    if (line != kScheduleMagic) throw std::runtime_error("load_schedule: version mismatch");

    TranslationSchedule<D> s;
    std::uint64_t pieces = 0;
    while (std::getline(in, line)) {
        std::istringstream is(line);
        std::string key;
        is >> key;
        if (key == "family") {
            is >> s.family_name;
        } else if (key == "M") {
            is >> s.M;
        } else if (key == "d") {
            int d;
            is >> d;
            if (d != D) throw std::runtime_error("load_schedule: dimension mismatch");
        } else if (key == "m") {
            is >> s.m;
        } else if (key == "lambda") {
            std::string ov;
            is >> s.lambda;
            if (is >> ov && ov == "override") s.lambda_overridden = true;
        } else if (key == "a0") {
            std::string h;
            is >> h;
            s.a0 = parse_hex_double(h);
        } else if (key == "delta0") {
            std::string h;
            is >> h;
            s.delta0 = parse_hex_double(h);
        } else if (key == "domain") {
            std::string lo, hi;
            for (int i = 0; i < D; ++i) {
                is >> lo >> hi;
                s.domain.lo[i] = parse_hex_double(lo);
                s.domain.hi[i] = parse_hex_double(hi);
            }
        } else if (key == "pieces") {
            is >> pieces;
            break;
        }
    }
    if (pieces == 0) throw std::runtime_error("load_schedule: malformed records");
    s.pieces = pieces;
    s.exponent = int(std::bit_width(pieces - 1));
    s.total_u.assign(std::size_t(pieces) * D, 0.0);
    s.total_v.assign(std::size_t(pieces), 0.0);
    for (std::uint64_t n = 0; n < pieces; ++n) {
        if (!std::getline(in, line)) throw std::runtime_error("load_schedule: malformed records");
        std::istringstream is(line);
        std::uint64_t idx;
        std::string tok;
        is >> idx;
        if (idx != n) throw std::runtime_error("load_schedule: record order corrupted");
        for (int i = 0; i < D; ++i) {
            is >> tok;
            s.total_u[std::size_t(n) * D + i] = parse_hex_double(tok);
        }
        is >> tok;
        s.total_v[std::size_t(n)] = parse_hex_double(tok);
    }
    // Optional step records.
    if (std::getline(in, line) && line == "steps") {
        s.steps.resize(s.m);
        for (int j = 1; j <= s.m; ++j) {
            s.steps[j - 1].u.assign(std::size_t(pieces >> j) * D, 0.0);
            s.steps[j - 1].v.assign(std::size_t(pieces >> j), 0.0);
        }
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream is(line);
            int j;
            std::uint64_t p;
            std::string tok;
            is >> j >> p;
            for (int i = 0; i < D; ++i) {
                is >> tok;
                s.steps[j - 1].u[std::size_t(p) * D + i] = parse_hex_double(tok);
            }
            is >> tok;
            s.steps[j - 1].v[std::size_t(p)] = parse_hex_double(tok);
        }
    }
    double mu = 0, mv = 0;
    for (std::uint64_t n = 0; n < pieces; ++n) {
        for (int i = 0; i < D; ++i) mu = std::max(mu, std::fabs(s.total_u[std::size_t(n) * D + i]));
        mv = std::max(mv, std::fabs(s.total_v[std::size_t(n)]));
    }
    s.max_total_u = mu;
    s.max_total_v = mv;
    return s;
}

// ---------------------------------------------------------------------------
// CSV: the measure schema is fixed; voxel brackets are emitted as extra rows
// so the column set stays stable.
// ---------------------------------------------------------------------------

inline std::string measure_csv_header() { return "method,M,d,alpha,delta,measure,normalized,collar,seconds"; }

inline std::string measure_csv_row(const MeasureReport& r, bool with_seconds = true) {
    std::ostringstream out;
    out << r.method << "," << r.M << "," << r.d << "," << format_double(r.alpha, "%.6g") << ","
        << format_double(r.delta) << "," << format_double(r.measure) << "," << format_double(r.normalized) << ","
        << format_double(r.collar) << "," << (with_seconds ? format_double(r.seconds, "%.3f") : std::string("0"));
    return out.str();
}

inline std::vector<std::string> measure_csv_rows(const MeasureReport& r, bool with_seconds = true) {
    std::vector<std::string> rows{measure_csv_row(r, with_seconds)};
    if (r.method == "voxel") {
        MeasureReport lo = r, hi = r;
        lo.method = "voxel_lower";
        lo.measure = r.lower;
        lo.normalized = 0;
        hi.method = "voxel_upper";
        hi.measure = r.upper;
        hi.normalized = 0;
        rows.push_back(measure_csv_row(lo, with_seconds));
        rows.push_back(measure_csv_row(hi, with_seconds));
    }
    return rows;
}

} // namespace packlab

#endif // PACKLAB_IO_HPP
