#ifndef PACKLAB_CONFIG_HPP
#define PACKLAB_CONFIG_HPP

#include <fstream>
#include <sstream>

#include "family.hpp"

namespace packlab {

// ---------------------------------------------------------------------------
// Run configuration: plain `key = value` text, one per line, '#' comments.
// Every field has a default and the struct round-trips through
// serialize -> parse identically.
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string command = "study";
    std::string family = "parabola";
    std::string surface = "circle";
    ParamMap params;                       // family parameters, key=value
    int d = 1;
    std::vector<int> M_list = {16, 20, 24};
    int fibers = 4096;
    double voxel_cell_rel = 0.5;           // cell = rel * delta
    std::string method = "fiber";          // fiber | voxel | both
    int lambda_override = -1;              // -1: paper default
    double slope_cap = 1.5;
    double delta = 0.0;                    // 0: auto (delta0 2^-M^d)
    int render_step = 3;
    int samples = 256;
    std::uint64_t seed = 0;
    std::uint64_t piece_budget = std::uint64_t(1) << 25;
    std::uint64_t voxel_budget = std::uint64_t(1) << 31;
    std::string out = "";
    std::string schedule_path = "";

    std::string serialize() const {
        std::ostringstream o;
        o << "command = " << command << "\n";
        o << "family = " << family << "\n";
        o << "surface = " << surface << "\n";
        {
            o << "params =";
            for (const auto& [k, v] : params) o << " " << k << "=" << format_double(v);
            o << "\n";
        }
        o << "d = " << d << "\n";
        {
            o << "M = ";
            for (std::size_t i = 0; i < M_list.size(); ++i) o << (i ? "," : "") << M_list[i];
            o << "\n";
        }
        o << "fibers = " << fibers << "\n";
        o << "voxel_cell_rel = " << format_double(voxel_cell_rel) << "\n";
        o << "method = " << method << "\n";
        o << "lambda_override = " << lambda_override << "\n";
        o << "slope_cap = " << format_double(slope_cap) << "\n";
        o << "delta = " << format_double(delta) << "\n";
        o << "render_step = " << render_step << "\n";
        o << "samples = " << samples << "\n";
        o << "seed = " << seed << "\n";
        o << "piece_budget = " << piece_budget << "\n";
        o << "voxel_budget = " << voxel_budget << "\n";
        o << "out = " << out << "\n";
        o << "schedule_path = " << schedule_path << "\n";
        return o.str();
    }

    void set(const std::string& key, const std::string& value) {
        auto trim = [](std::string s) {
            std::size_t a = s.find_first_not_of(" \t");
            std::size_t b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string v = trim(value);
        if (key == "command") command = v;
        else if (key == "family") family = v;
        else if (key == "surface") surface = v;
        else if (key == "params") {
            params.clear();
            std::istringstream is(v);
            std::string kv;
            while (is >> kv) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) throw std::runtime_error("config: malformed param " + kv);
                params[kv.substr(0, eq)] = std::strtod(kv.c_str() + eq + 1, nullptr);
            }
        } else if (key == "d") d = std::stoi(v);
        else if (key == "M") {
            M_list.clear();
            std::istringstream is(v);
            std::string tok;
            while (std::getline(is, tok, ',')) if (!tok.empty()) M_list.push_back(std::stoi(tok));
        } else if (key == "fibers") fibers = std::stoi(v);
        else if (key == "voxel_cell_rel") voxel_cell_rel = std::strtod(v.c_str(), nullptr);
        else if (key == "method") method = v;
        else if (key == "lambda_override") lambda_override = std::stoi(v);
        else if (key == "slope_cap") slope_cap = std::strtod(v.c_str(), nullptr);
        else if (key == "delta") delta = std::strtod(v.c_str(), nullptr);
        else if (key == "render_step") render_step = std::stoi(v);
        else if (key == "samples") samples = std::stoi(v);
        else if (key == "seed") seed = std::strtoull(v.c_str(), nullptr, 10);
        else if (key == "piece_budget") piece_budget = std::strtoull(v.c_str(), nullptr, 10);
        else if (key == "voxel_budget") voxel_budget = std::strtoull(v.c_str(), nullptr, 10);
        else if (key == "out") out = v;
        else if (key == "schedule_path") schedule_path = v;
        else throw std::runtime_error("config: unknown key " + key);
    }

    static RunConfig parse(const std::string& text) {
        RunConfig c;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(0, eq);
            std::size_t a = key.find_first_not_of(" \t");
            std::size_t b = key.find_last_not_of(" \t");
            if (a == std::string::npos) continue;
            c.set(key.substr(a, b - a + 1), line.substr(eq + 1));
        }
        return c;
    }

    static RunConfig parse_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("config: cannot open " + path);
        std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        return parse(text);
    }
};

// ---------------------------------------------------------------------------
// Family dispatch by name and dimension. The callable is instantiated once
// per concrete family type.
// ---------------------------------------------------------------------------

template <class Fn>
void with_family(const std::string& name, const ParamMap& params, int d, Fn&& fn) {
    if (name == "parabola" && d == 1) {
        fn(make_parabola(params));
    } else if (name == "circle-cap" && d == 1) {
        fn(make_circle_cap(params));
    } else if (name == "hoelder-quadratic" && d == 1) {
        fn(make_hoelder_quadratic(params));
    } else if (name == "quadratic-form" && d == 1) {
        fn(make_quadratic_form<1>(params));
    } else if (name == "quadratic-form" && d == 2) {
        fn(make_quadratic_form<2>(params));
    } else {
        throw std::runtime_error("unsupported family '" + name + "' at d=" + std::to_string(d));
    }
}

} // namespace packlab

#endif // PACKLAB_CONFIG_HPP
