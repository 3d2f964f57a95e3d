#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace vranfair {

using Vec = std::vector<double>;

// Dense row-major matrix, small sizes (vBS count x server count and friends).
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    int size() const { return rows * cols; }

    Mat& operator+=(const Mat& o) {
        for (size_t k = 0; k < a.size(); ++k) a[k] += o.a[k];
        return *this;
    }
};

inline Mat operator+(Mat lhs, const Mat& rhs) { lhs += rhs; return lhs; }

inline Mat operator-(const Mat& lhs, const Mat& rhs) {
    Mat out = lhs;
    for (size_t k = 0; k < out.a.size(); ++k) out.a[k] -= rhs.a[k];
    return out;
}

inline double dot(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
    return s;
}

inline double sum(const Vec& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

inline double l2_dist_sq(const Vec& x, const Vec& y) {
    double s = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - y[k];
        s += d * d;
    }
    return s;
}

inline double linf_dist(const Mat& x, const Mat& y) {
    double m = 0.0;
    for (size_t k = 0; k < x.a.size(); ++k) m = std::max(m, std::fabs(x.a[k] - y.a[k]));
    return m;
}

inline double l1_dist(const Mat& x, const Mat& y) {
    double s = 0.0;
    for (size_t k = 0; k < x.a.size(); ++k) s += std::fabs(x.a[k] - y.a[k]);
    return s;
}

inline double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// In-place softmax of `z` (overwritten with the distribution), max-subtracted
// so large scores cannot overflow.
inline void softmax_inplace(Vec& z) {
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    double denom = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        denom += v;
    }
    for (double& v : z) v /= denom;
}

// Euclidean projection of `v` onto the probability simplex, by the classic
// sort-and-threshold rule.
inline Vec project_simplex(const Vec& v) {
    const int n = static_cast<int>(v.size());
    Vec u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0;
    double tau = 0.0;
    int rho = 0;
    for (int k = 0; k < n; ++k) {
        css += u[k];
        const double cand = (css - 1.0) / (k + 1);
        if (u[k] - cand > 0.0) {
            rho = k + 1;
            tau = cand;
        }
    }
    (void)rho;
    Vec out(v.size());
    for (size_t k = 0; k < v.size(); ++k) out[k] = std::max(v[k] - tau, 0.0);
    return out;
}

} // namespace vranfair
