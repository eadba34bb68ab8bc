#ifndef LERW_VEC_HPP
#define LERW_VEC_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace lerw {

constexpr int kMaxDim = 5;

// Point in R^d, d <= kMaxDim. Unused coordinates stay zero so norms and
// comparisons work without carrying the dimension around.
struct Vec {
    std::array<double, kMaxDim> x{};
    int dim = 0;

    Vec() = default;
    Vec(std::initializer_list<double> v) {
        for (double c : v) x[dim++] = c;
    }
    static Vec zero(int d) {
        Vec p;
        p.dim = d;
        return p;
    }

    double operator[](int i) const { return x[i]; }
    double& operator[](int i) { return x[i]; }

    friend Vec operator-(const Vec& a, const Vec& b) {
        Vec r = a;
        for (int i = 0; i < a.dim; ++i) r.x[i] -= b.x[i];
        return r;
    }
    friend Vec operator+(const Vec& a, const Vec& b) {
        Vec r = a;
        for (int i = 0; i < a.dim; ++i) r.x[i] += b.x[i];
        return r;
    }
    friend Vec operator*(double s, const Vec& a) {
        Vec r = a;
        for (int i = 0; i < a.dim; ++i) r.x[i] *= s;
        return r;
    }
    friend bool operator==(const Vec& a, const Vec& b) {
        return a.dim == b.dim && a.x == b.x;
    }

    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < dim; ++i) s += x[i] * o.x[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    // Lexicographic order on coordinates (used for tie-breaking).
    bool lex_less(const Vec& o) const {
        for (int i = 0; i < dim; ++i) {
            if (x[i] < o.x[i]) return true;
            if (x[i] > o.x[i]) return false;
        }
        return false;
    }
};

inline double dist(const Vec& a, const Vec& b) { return (a - b).norm(); }
inline double dist2(const Vec& a, const Vec& b) { return (a - b).norm2(); }

// Integer lattice point, for implicit grids and lattice bookkeeping.
struct IVec {
    std::array<std::int64_t, kMaxDim> x{};
    int dim = 0;

    IVec() = default;
    IVec(std::initializer_list<std::int64_t> v) {
        for (auto c : v) x[dim++] = c;
    }
    static IVec zero(int d) {
        IVec p;
        p.dim = d;
        return p;
    }
    std::int64_t operator[](int i) const { return x[i]; }
    std::int64_t& operator[](int i) { return x[i]; }
    friend bool operator==(const IVec& a, const IVec& b) {
        return a.dim == b.dim && a.x == b.x;
    }
};

}  // namespace lerw

#endif
