#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <string>

#include "error.hpp"

namespace meandense {

inline constexpr int kMaxDim = 3;

// A point (or vector) in R^d, d in {1,2,3}. Unused trailing coordinates stay zero.
class Point {
public:
    Point() = default;

    explicit Point(int dim) : dim_(check_dim(dim)) {}

    Point(std::initializer_list<double> coords) : dim_(check_dim(static_cast<int>(coords.size()))) {
        std::copy(coords.begin(), coords.end(), c_.begin());
    }

    static Point origin(int dim) { return Point(dim); }

    int dim() const noexcept { return dim_; }
    double operator[](int k) const noexcept { return c_[static_cast<std::size_t>(k)]; }
    double& operator[](int k) noexcept { return c_[static_cast<std::size_t>(k)]; }

    Point& operator+=(const Point& o) noexcept {
        for (int k = 0; k < dim_; ++k) (*this)[k] += o[k];
        return *this;
    }
    Point& operator-=(const Point& o) noexcept {
        for (int k = 0; k < dim_; ++k) (*this)[k] -= o[k];
        return *this;
    }
    Point& operator*=(double s) noexcept {
        for (int k = 0; k < dim_; ++k) (*this)[k] *= s;
        return *this;
    }

    friend Point operator+(Point a, const Point& b) noexcept { return a += b; }
    friend Point operator-(Point a, const Point& b) noexcept { return a -= b; }
    friend Point operator*(Point a, double s) noexcept { return a *= s; }
    friend Point operator*(double s, Point a) noexcept { return a *= s; }
    friend Point operator-(Point a) noexcept { return a *= -1.0; }

    friend bool operator==(const Point&, const Point&) = default;

    std::string str() const {
        std::string out = "(";
        for (int k = 0; k < dim_; ++k) {
            if (k) out += ", ";
            out += std::to_string(c_[static_cast<std::size_t>(k)]);
        }
        return out + ")";
    }

private:
    static int check_dim(int d) {
        if (d < 1 || d > kMaxDim) throw ConfigError("dimension must be 1, 2 or 3, got " + std::to_string(d));
        return d;
    }

    std::array<double, kMaxDim> c_{};
    int dim_ = 0;
};

inline void require_same_dim(const Point& a, const Point& b) {
    if (a.dim() != b.dim())
        throw ConfigError("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}

inline double dot(const Point& a, const Point& b) noexcept {
    double s = 0.0;
    for (int k = 0; k < a.dim(); ++k) s += a[k] * b[k];
    return s;
}

inline double norm2(const Point& a) noexcept { return dot(a, a); }
inline double norm(const Point& a) noexcept { return std::sqrt(norm2(a)); }

inline double distance(const Point& a, const Point& b) {
    require_same_dim(a, b);
    return norm(a - b);
}

// Axis-aligned closed box [lo, hi].
struct Box {
    Point lo;
    Point hi;

    Box() = default;
    Box(Point lo_, Point hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        require_same_dim(lo, hi);
        for (int k = 0; k < lo.dim(); ++k)
            if (!(lo[k] <= hi[k]))
                throw ConfigError("box bounds inverted on axis " + std::to_string(k));
    }

    // [lo, hi]^d
    static Box cube(int dim, double lo, double hi) {
        Point a(dim), b(dim);
        for (int k = 0; k < dim; ++k) {
            a[k] = lo;
            b[k] = hi;
        }
        return Box(a, b);
    }

    int dim() const noexcept { return lo.dim(); }

    double side(int k) const noexcept { return hi[k] - lo[k]; }

    double volume() const noexcept {
        double v = 1.0;
        for (int k = 0; k < dim(); ++k) v *= side(k);
        return v;
    }

    bool contains(const Point& x) const noexcept {
        for (int k = 0; k < dim(); ++k)
            if (x[k] < lo[k] || x[k] > hi[k]) return false;
        return true;
    }

    bool contains(const Box& b) const noexcept { return contains(b.lo) && contains(b.hi); }

    Box dilated(double margin) const {
        Point a = lo, b = hi;
        for (int k = 0; k < dim(); ++k) {
            a[k] -= margin;
            b[k] += margin;
        }
        return Box(a, b);
    }

    // Bounding box of the closed ball B_r(c).
    static Box around(const Point& c, double r) { return Box(c, c).dilated(r); }

    friend bool operator==(const Box&, const Box&) = default;
};

// Closed ball; membership is |x - center| <= radius.
struct Ball {
    Point center;
    double radius = 0.0;

    bool contains(const Point& x) const { return distance(x, center) <= radius; }
    Box bounding_box() const { return Box::around(center, radius); }
};

struct SegmentShape {
    Point a;
    Point b;

    double length() const { return distance(a, b); }
    bool degenerate() const { return a == b; }
};

// Distance from x to the closed segment [a, b]. Degenerate segments reduce to a point.
inline double dist_point_segment(const Point& x, const SegmentShape& s) {
    require_same_dim(x, s.a);
    require_same_dim(x, s.b);
    const Point ab = s.b - s.a;
    const Point ax = x - s.a;
    const double len2 = norm2(ab);
    if (len2 == 0.0) return norm(ax);
    const double t = dot(ax, ab) / len2;
    if (t <= 0.0) return norm(ax);
    if (t >= 1.0) return norm(x - s.b);
    return norm(ax - t * ab);
}

// Liang-Barsky clip of a closed segment against a closed box.
inline std::optional<SegmentShape> clip_segment_box(const SegmentShape& s, const Box& box) {
    require_same_dim(s.a, box.lo);
    const Point dir = s.b - s.a;
    double t0 = 0.0, t1 = 1.0;
    for (int k = 0; k < box.dim(); ++k) {
        if (dir[k] == 0.0) {
            if (s.a[k] < box.lo[k] || s.a[k] > box.hi[k]) return std::nullopt;
            continue;
        }
        double ta = (box.lo[k] - s.a[k]) / dir[k];
        double tb = (box.hi[k] - s.a[k]) / dir[k];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return std::nullopt;
    }
    // Unclipped endpoints stay bit-exact; clipped ones are snapped into the box
    // so that clipping is idempotent under rounding.
    auto snap = [&box](Point p) {
        for (int k = 0; k < box.dim(); ++k) p[k] = std::clamp(p[k], box.lo[k], box.hi[k]);
        return p;
    };
    const Point a = t0 == 0.0 ? s.a : snap(s.a + t0 * dir);
    const Point b = t1 == 1.0 ? s.b : snap(s.a + t1 * dir);
    return SegmentShape{a, b};
}

// Volume b_k of the unit ball in R^k.
inline double ball_volume(int k) {
    switch (k) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw ConfigError("ball_volume: unsupported dimension " + std::to_string(k));
    }
}

} // namespace meandense
