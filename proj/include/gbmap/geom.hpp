#pragma once

#include <array>
#include <cmath>

namespace gbmap {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x, double y) : x(x), y(y) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
    Vec2 normalized() const { double n = norm(); return {x / n, y / n}; }
    Vec2 perp() const { return {-y, x}; }  // +90 degrees
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// 2x2 matrix, row major.
struct Mat2 {
    double a = 0.0, b = 0.0;  // row 0
    double c = 0.0, d = 0.0;  // row 1

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    double det() const { return a * d - b * c; }

    Vec2 operator*(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }

    Mat2 transpose() const { return {a, c, b, d}; }

    // Solve M x = rhs by Cramer; caller checks det.
    Vec2 solve(Vec2 rhs) const {
        double dd = det();
        return {(rhs.x * d - b * rhs.y) / dd, (a * rhs.y - rhs.x * c) / dd};
    }

    // Singular values, largest first. The smaller one comes from
    // |det| / s1, which stays accurate where the closed-form eigenvalue
    // difference cancels.
    std::array<double, 2> singular_values() const {
        double p = a * a + c * c;
        double q = b * b + d * d;
        double r = a * b + c * d;
        double tr = p + q;
        double disc = std::sqrt(std::max(0.0, (p - q) * (p - q) + 4.0 * r * r));
        double s1 = std::sqrt(std::max(0.0, 0.5 * (tr + disc)));
        double s2 = s1 > 0.0 ? std::abs(det()) / s1 : 0.0;
        return {s1, s2};
    }

    // Unit kernel direction of a (numerically) rank-1 matrix: the vector
    // orthogonal to the larger row.
    Vec2 kernel_direction() const {
        Vec2 r0{a, b}, r1{c, d};
        Vec2 r = r0.norm2() >= r1.norm2() ? r0 : r1;
        return Vec2{-r.y, r.x}.normalized();
    }
};

struct BBox {
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    bool contains(Vec2 p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
    BBox inflated(double m) const { return {xmin - m, xmax + m, ymin - m, ymax + m}; }
};

} // namespace gbmap
