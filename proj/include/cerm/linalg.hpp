#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace cerm {

// Factor indices used throughout: economic, physical, transition.
inline constexpr int kE = 0;
inline constexpr int kP = 1;
inline constexpr int kT = 2;

using Vec3 = std::array<double, 3>;

// Dense 3x3 matrix, row-major.
struct Mat3 {
    std::array<double, 9> m{};

    double& operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }
    double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }

    static Mat3 zero() { return Mat3{}; }

    static Mat3 identity() {
        Mat3 a;
        a(0, 0) = a(1, 1) = a(2, 2) = 1.0;
        return a;
    }

    // Build a symmetric matrix from its upper triangle.
    static Mat3 symmetric(double a00, double a01, double a02, double a11, double a12, double a22) {
        Mat3 a;
        a(0, 0) = a00;
        a(0, 1) = a(1, 0) = a01;
        a(0, 2) = a(2, 0) = a02;
        a(1, 1) = a11;
        a(1, 2) = a(2, 1) = a12;
        a(2, 2) = a22;
        return a;
    }

    Mat3 transposed() const {
        Mat3 a;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a(r, c) = (*this)(c, r);
        return a;
    }

    Mat3& operator+=(const Mat3& o) {
        for (std::size_t i = 0; i < 9; ++i) m[i] += o.m[i];
        return *this;
    }
};

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
    Vec3 r{};
    for (int i = 0; i < 3; ++i) r[static_cast<std::size_t>(i)] = a(i, 0) * v[0] + a(i, 1) * v[1] + a(i, 2) * v[2];
    return r;
}

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// v . A v
inline double quad_form(const Vec3& v, const Mat3& a) { return dot(v, a * v); }

inline Vec3 hadamard(const Vec3& a, const Vec3& b) { return Vec3{a[0] * b[0], a[1] * b[1], a[2] * b[2]}; }

inline Vec3 scaled(const Vec3& a, double s) { return Vec3{a[0] * s, a[1] * s, a[2] * s}; }

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < 9; ++i) d = std::max(d, std::abs(a.m[i] - b.m[i]));
    return d;
}

inline double max_abs(const Mat3& a) {
    double d = 0.0;
    for (double x : a.m) d = std::max(d, std::abs(x));
    return d;
}

} // namespace cerm
