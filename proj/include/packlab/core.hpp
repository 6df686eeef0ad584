#ifndef PACKLAB_CORE_HPP
#define PACKLAB_CORE_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace packlab {

// ---------------------------------------------------------------------------
// Small fixed-dimension vectors and symmetric matrices (D <= 3 in practice).
// ---------------------------------------------------------------------------

template <int D>
struct Vec {
    std::array<double, D> c{};

    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    Vec operator+(const Vec& o) const {
        Vec r;
        for (int i = 0; i < D; ++i) r.c[i] = c[i] + o.c[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r;
        for (int i = 0; i < D; ++i) r.c[i] = c[i] - o.c[i];
        return r;
    }
    Vec operator*(double s) const {
        Vec r;
        for (int i = 0; i < D; ++i) r.c[i] = c[i] * s;
        return r;
    }
    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < D; ++i) c[i] += o.c[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < D; ++i) c[i] -= o.c[i];
        return *this;
    }
    bool operator==(const Vec& o) const { return c == o.c; }

    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < D; ++i) s += c[i] * o.c[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
    double norm_inf() const {
        double s = 0;
        for (int i = 0; i < D; ++i) s = std::max(s, std::fabs(c[i]));
        return s;
    }

    static Vec constant(double v) {
        Vec r;
        r.c.fill(v);
        return r;
    }
};

template <int D>
struct Mat {
    // Row-major dense D x D.
    std::array<double, D * D> m{};

    double& operator()(int i, int j) { return m[i * D + j]; }
    double operator()(int i, int j) const { return m[i * D + j]; }

    Vec<D> mul(const Vec<D>& x) const {
        Vec<D> r;
        for (int i = 0; i < D; ++i) {
            double s = 0;
            for (int j = 0; j < D; ++j) s += (*this)(i, j) * x[j];
            r[i] = s;
        }
        return r;
    }

    double det() const {
        if constexpr (D == 1) return m[0];
        if constexpr (D == 2) return m[0] * m[3] - m[1] * m[2];
        if constexpr (D == 3) {
            return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                   m[2] * (m[3] * m[7] - m[4] * m[6]);
        }
        Mat a = *this;
        return a.lu_det();
    }

    double lu_det() {
        double d = 1;
        for (int k = 0; k < D; ++k) {
            int p = k;
            for (int i = k + 1; i < D; ++i)
                if (std::fabs((*this)(i, k)) > std::fabs((*this)(p, k))) p = i;
            if (p != k) {
                for (int j = 0; j < D; ++j) std::swap((*this)(p, j), (*this)(k, j));
                d = -d;
            }
            double piv = (*this)(k, k);
            if (piv == 0.0) return 0.0;
            d *= piv;
            for (int i = k + 1; i < D; ++i) {
                double f = (*this)(i, k) / piv;
                for (int j = k; j < D; ++j) (*this)(i, j) -= f * (*this)(k, j);
            }
        }
        return d;
    }

    // Solve A x = b by Gaussian elimination with partial pivoting.
    Vec<D> solve(Vec<D> b) const {
        Mat a = *this;
        std::array<int, D> perm;
        for (int i = 0; i < D; ++i) perm[i] = i;
        for (int k = 0; k < D; ++k) {
            int p = k;
            for (int i = k + 1; i < D; ++i)
                if (std::fabs(a(i, k)) > std::fabs(a(p, k))) p = i;
            if (p != k) {
                for (int j = 0; j < D; ++j) std::swap(a(p, j), a(k, j));
                std::swap(b[p], b[k]);
            }
            double piv = a(k, k);
            if (piv == 0.0) throw std::runtime_error("singular matrix in solve");
            for (int i = k + 1; i < D; ++i) {
                double f = a(i, k) / piv;
                for (int j = k; j < D; ++j) a(i, j) -= f * a(k, j);
                b[i] -= f * b[k];
            }
        }
        Vec<D> x;
        for (int i = D - 1; i >= 0; --i) {
            double s = b[i];
            for (int j = i + 1; j < D; ++j) s -= a(i, j) * x[j];
            x[i] = s / a(i, i);
        }
        return x;
    }

    double max_abs() const {
        double s = 0;
        for (double v : m) s = std::max(s, std::fabs(v));
        return s;
    }

    double max_asymmetry() const {
        double s = 0;
        for (int i = 0; i < D; ++i)
            for (int j = i + 1; j < D; ++j) s = std::max(s, std::fabs((*this)(i, j) - (*this)(j, i)));
        return s;
    }

    static Mat identity() {
        Mat r;
        for (int i = 0; i < D; ++i) r(i, i) = 1;
        return r;
    }
};

// Axis-parallel box.
template <int D>
struct Box {
    Vec<D> lo, hi;

    bool contains(const Vec<D>& x) const {
        for (int i = 0; i < D; ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
    Box enlarged(double frac) const {
        Box r = *this;
        for (int i = 0; i < D; ++i) {
            double pad = frac * (hi[i] - lo[i]);
            r.lo[i] -= pad;
            r.hi[i] += pad;
        }
        return r;
    }
    double volume() const {
        double v = 1;
        for (int i = 0; i < D; ++i) v *= hi[i] - lo[i];
        return v;
    }
    Vec<D> side() const { return hi - lo; }

    static Box unit() {
        Box b;
        b.lo = Vec<D>::constant(0);
        b.hi = Vec<D>::constant(1);
        return b;
    }
};

// ---------------------------------------------------------------------------
// Compensated (Neumaier) summation: fixed-order deterministic reductions.
// ---------------------------------------------------------------------------

struct Kahan {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// ---------------------------------------------------------------------------
// Dyadic piece bookkeeping: binary digits and floor values of a piece index.
// For index n and step j >= 1, bit(n,j) is the j-th binary digit of n and
// floor_at(n,j) = n - (n mod 2^(j-1)).
// ---------------------------------------------------------------------------

inline int bit_of(std::uint64_t n, int j) { return int((n >> (j - 1)) & 1u); }

inline std::uint64_t floor_at(std::uint64_t n, int j) {
    return n - (n & ((std::uint64_t(1) << (j - 1)) - 1));
}

struct EpsilonDecomposition {
    std::vector<int> bits;             // bits[j-1] = epsilon_j(n)
    std::vector<std::uint64_t> floors; // floors[j-1] = floor_at(n, j)
};

inline EpsilonDecomposition epsilon_decompose(std::uint64_t n, int m) {
    EpsilonDecomposition d;
    d.bits.resize(m);
    d.floors.resize(m);
    for (int j = 1; j <= m; ++j) {
        d.bits[j - 1] = bit_of(n, j);
        d.floors[j - 1] = floor_at(n, j);
    }
    return d;
}

// Smallest integer >= 2*log2(M), computed in exact integer arithmetic:
// the least k with 2^k >= M^2.
inline int lambda_default(int M) {
    if (M < 2) return 0;
    std::uint64_t target = std::uint64_t(M) * std::uint64_t(M);
    return int(std::bit_width(target - 1));
}

// ---------------------------------------------------------------------------
// Closed intervals on the line plus sweep-line union length.
// ---------------------------------------------------------------------------

struct Interval {
    double lo = 0, hi = 0;
    double length() const { return hi - lo; }
    bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

// Union length of a set of closed intervals; `v` is sorted in place.
inline double union_length(std::vector<Interval>& v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
        if (a.lo != b.lo) return a.lo < b.lo;
        return a.hi < b.hi;
    });
    Kahan total;
    double lo = v[0].lo, hi = v[0].hi;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i].lo > hi) {
            total.add(hi - lo);
            lo = v[i].lo;
            hi = v[i].hi;
        } else {
            hi = std::max(hi, v[i].hi);
        }
    }
    total.add(hi - lo);
    return total.value();
}

// Merge sorted-in-place intervals into disjoint components.
inline std::vector<Interval> union_components(std::vector<Interval> v) {
    std::vector<Interval> out;
    if (v.empty()) return out;
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
        if (a.lo != b.lo) return a.lo < b.lo;
        return a.hi < b.hi;
    });
    out.push_back(v[0]);
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i].lo > out.back().hi)
            out.push_back(v[i]);
        else
            out.back().hi = std::max(out.back().hi, v[i].hi);
    }
    return out;
}

// Signed depth of y inside the union (positive inside, negative outside).
inline double union_depth(const std::vector<Interval>& components, double y) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Interval& c : components) {
        double d = std::min(y - c.lo, c.hi - y);
        best = std::max(best, d);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Deterministic parallelism. Work is split into blocks whose count depends
// only on the problem size; callers combine per-block results in block order,
// so results are identical at any thread count. PACKLAB_THREADS caps workers.
// ---------------------------------------------------------------------------

inline int max_threads() {
    static int cached = [] {
        if (const char* env = std::getenv("PACKLAB_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) return std::min(v, 64);
        }
        unsigned hc = std::thread::hardware_concurrency();
        return int(std::clamp<unsigned>(hc ? hc : 1, 1, 16));
    }();
    return cached;
}

// Runs fn(block_index) for block_index in [0, nblocks).
inline void parallel_blocks(std::size_t nblocks, const std::function<void(std::size_t)>& fn) {
    int workers = std::min<std::size_t>(max_threads(), nblocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t b = next.fetch_add(1);
                if (b >= nblocks) break;
                fn(b);
            }
        });
    }
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Misc: rng, checksum, hex float formatting.
// ---------------------------------------------------------------------------

// xoshiro-free tiny deterministic generator (splitmix64) for sampled checks.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed = 0) : state(seed + 0x9e3779b97f4a7c15ULL) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }
};

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a(s.data(), s.size(), h);
}

inline std::string hex_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline double parse_hex_double(const std::string& s) {
    return std::strtod(s.c_str(), nullptr);
}

inline std::string format_double(double v, const char* fmt = "%.17g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

} // namespace packlab

#endif // PACKLAB_CORE_HPP
