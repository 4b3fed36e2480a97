#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "numerics.hpp"
#include "random.hpp"

namespace meandense {

inline constexpr int kDefaultQuadratureOrder = 8;

/// A typical grain Z_0(s): a compact set anchored at the origin.
///
/// Three families are supported. A point grain (n = 0) is the origin itself.
/// A segment grain (n = 1) runs from the origin to `tip`; a zero-length
/// segment is still a 1-dimensional grain of H^1-measure 0 and is measured by
/// the point-distance path. A polyline grain (n = 1) is an ordered vertex
/// list, one of which must be the origin.
class Grain {
public:
    enum class Kind { point, segment, polyline };

    static Grain point(int dim) { return Grain(Kind::point, {Point::origin(dim)}); }

    static Grain segment(const Point& tip) { return Grain(Kind::segment, {Point::origin(tip.dim()), tip}); }

    // Segment of length `length` along the unit vector `direction`.
    static Grain segment(double length, const Point& direction) {
        if (!(length >= 0.0) || !std::isfinite(length)) throw ConfigError("segment length must be finite and >= 0");
        return segment(length * direction);
    }

    // Orientation by angles: d=1 uses the sign of cos(alpha); d=2 the angle
    // alpha; d=3 azimuth alpha and polar angle `polar`.
    static Grain segment_at_angles(int dim, double length, double alpha, double polar = 0.0) {
        return segment(length, direction_from_angles(dim, alpha, polar));
    }

    static Grain polyline(std::vector<Point> vertices) {
        if (vertices.size() < 2) throw ConfigError("polyline grain needs at least two vertices");
        const int dim = vertices.front().dim();
        bool anchored = false;
        for (const auto& v : vertices) {
            require_same_dim(v, vertices.front());
            if (v == Point::origin(dim)) anchored = true;
        }
        if (!anchored) throw ConfigError("polyline grain must have the origin as one of its vertices");
        return Grain(Kind::polyline, std::move(vertices));
    }

    static Point direction_from_angles(int dim, double alpha, double polar = 0.0) {
        Point u(dim);
        switch (dim) {
        case 1: u[0] = std::cos(alpha) >= 0.0 ? 1.0 : -1.0; break;
        case 2:
            u[0] = std::cos(alpha);
            u[1] = std::sin(alpha);
            break;
        default:
            u[0] = std::sin(polar) * std::cos(alpha);
            u[1] = std::sin(polar) * std::sin(alpha);
            u[2] = std::cos(polar);
            break;
        }
        return u;
    }

    Kind kind() const noexcept { return kind_; }
    int dim() const noexcept { return vertices_.front().dim(); }
    int hausdorff_dim() const noexcept { return kind_ == Kind::point ? 0 : 1; }
    const std::vector<Point>& vertices() const noexcept { return vertices_; }

    std::size_t segment_count() const noexcept { return kind_ == Kind::point ? 0 : vertices_.size() - 1; }
    SegmentShape segment_at(std::size_t i) const { return {vertices_[i], vertices_[i + 1]}; }

    // H^n(Z_0): 1 for a point (counting measure), total length otherwise.
    double hn_measure() const {
        if (kind_ == Kind::point) return 1.0;
        CompensatedSum len;
        for (std::size_t i = 0; i < segment_count(); ++i) len.add(segment_at(i).length());
        return len.value();
    }

    double diameter() const {
        double d = 0.0;
        for (std::size_t i = 0; i < vertices_.size(); ++i)
            for (std::size_t j = i + 1; j < vertices_.size(); ++j) d = std::max(d, distance(vertices_[i], vertices_[j]));
        return d;
    }

    Box bounding_box() const {
        Point lo = vertices_.front(), hi = vertices_.front();
        for (const auto& v : vertices_)
            for (int k = 0; k < dim(); ++k) {
                lo[k] = std::min(lo[k], v[k]);
                hi[k] = std::max(hi[k], v[k]);
            }
        return Box(lo, hi);
    }

    // Euclidean distance from x to the grain (grain in its anchored position).
    double distance_to(const Point& x) const {
        if (kind_ == Kind::point) return distance(x, vertices_.front());
        double best = dist_point_segment(x, segment_at(0));
        for (std::size_t i = 1; i < segment_count(); ++i) best = std::min(best, dist_point_segment(x, segment_at(i)));
        return best;
    }

    std::string describe() const {
        switch (kind_) {
        case Kind::point: return "point";
        case Kind::segment: return "segment";
        case Kind::polyline: return "polyline";
        }
        return "unknown";
    }

    friend bool operator==(const Grain&, const Grain&) = default;

private:
    Grain(Kind kind, std::vector<Point> vertices) : kind_(kind), vertices_(std::move(vertices)) {}

    Kind kind_;
    std::vector<Point> vertices_;
};

inline double hn_measure(const Grain& g) { return g.hn_measure(); }
inline double grain_distance(const Grain& g, const Point& x) { return g.distance_to(x); }

/// Integral of h over the grain with respect to H^n.
///
/// Each segment gets a Gauss-Legendre rule of the given order, exact for
/// polynomial h of degree <= 2*order - 1. A point grain evaluates h at the
/// origin. Throws NumericError naming the point if h is not finite there.
template <class Field>
    requires std::invocable<const Field&, const Point&>
double integrate_along(const Grain& g, const Field& h, int order = kDefaultQuadratureOrder) {
    auto eval = [&h](const Point& y) {
        const double v = h(y);
        if (!std::isfinite(v)) throw NumericError("non-finite integrand at " + y.str());
        return v;
    };
    if (g.kind() == Grain::Kind::point) return eval(g.vertices().front());
    const GaussLegendreRule& rule = gauss_legendre(order);
    CompensatedSum total;
    for (std::size_t i = 0; i < g.segment_count(); ++i) {
        const SegmentShape s = g.segment_at(i);
        const double half = 0.5 * s.length();
        if (half == 0.0) continue;
        const Point dir = s.b - s.a;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = 0.5 * (rule.nodes[q] + 1.0);
            total.add(rule.weights[q] * half * eval(s.a + t * dir));
        }
    }
    return total.value();
}

/// Law of the segment length L.
struct LengthLaw {
    enum class Kind { fixed, uniform, truncated_exponential };

    Kind kind = Kind::fixed;
    double a = 1.0; // fixed length, uniform lower bound, or exponential rate
    double b = 1.0; // uniform upper bound or truncation point

    static LengthLaw fixed(double l) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("fixed length must be finite and >= 0");
        return {Kind::fixed, l, l};
    }

    static LengthLaw uniform(double lo, double hi) {
        if (!(lo >= 0.0) || !(hi >= lo) || !std::isfinite(hi))
            throw ConfigError("uniform length law needs 0 <= l_min <= l_max < inf");
        return {Kind::uniform, lo, hi};
    }

    // Exponential(rate) conditioned on L <= l_max.
    static LengthLaw truncated_exponential(double rate, double l_max) {
        if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError("exponential rate must be finite and > 0");
        if (!(l_max > 0.0) || !std::isfinite(l_max)) throw ConfigError("truncation length must be finite and > 0");
        return {Kind::truncated_exponential, rate, l_max};
    }

    // Truncation at the given quantile of the untruncated exponential.
    static LengthLaw truncated_exponential_at_quantile(double rate, double quantile = 0.9999) {
        if (!(quantile > 0.0 && quantile < 1.0)) throw ConfigError("truncation quantile must lie in (0, 1)");
        if (!(rate > 0.0)) throw ConfigError("exponential rate must be > 0");
        return truncated_exponential(rate, -std::log1p(-quantile) / rate);
    }

    double max_length() const noexcept { return kind == Kind::fixed ? a : b; }

    double sample(RandomStream& rng) const {
        switch (kind) {
        case Kind::fixed: return a;
        case Kind::uniform: return rng.uniform(a, b);
        case Kind::truncated_exponential: {
            const double mass = -std::expm1(-a * b);
            return std::min(b, -std::log1p(-rng.uniform() * mass) / a);
        }
        }
        return a;
    }

    // E[L^k]
    double moment(int k) const {
        switch (kind) {
        case Kind::fixed: return std::pow(a, k);
        case Kind::uniform:
            if (b == a) return std::pow(a, k);
            return (std::pow(b, k + 1) - std::pow(a, k + 1)) / ((k + 1) * (b - a));
        case Kind::truncated_exponential: {
            const GaussLegendreRule& rule = gauss_legendre(64);
            const double mass = -std::expm1(-a * b);
            CompensatedSum s;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double l = 0.5 * b * (rule.nodes[q] + 1.0);
                s.add(rule.weights[q] * 0.5 * b * std::pow(l, k) * a * std::exp(-a * l));
            }
            return s.value() / mass;
        }
        }
        return 0.0;
    }

    std::string name() const {
        switch (kind) {
        case Kind::fixed: return "fixed";
        case Kind::uniform: return "uniform";
        case Kind::truncated_exponential: return "truncated_exponential";
        }
        return "unknown";
    }
};

struct OrientationLaw {
    enum class Kind { fixed, uniform };

    Kind kind = Kind::uniform;
    double alpha = 0.0;
    double polar = 0.0;

    static OrientationLaw uniform() { return {Kind::uniform, 0.0, 0.0}; }
    static OrientationLaw fixed(double alpha, double polar = 0.0) { return {Kind::fixed, alpha, polar}; }
};

/// The mark law Q: either a deterministic grain or a random segment with
/// independent length and orientation.
class MarkDistribution {
public:
    enum class Kind { deterministic, segment_law };

    static MarkDistribution deterministic(Grain g) {
        MarkDistribution q(Kind::deterministic, g.dim());
        q.grain_ = std::move(g);
        return q;
    }

    static MarkDistribution segment_law(int dim, LengthLaw length, OrientationLaw orientation) {
        MarkDistribution q(Kind::segment_law, dim);
        q.length_ = length;
        q.orientation_ = orientation;
        return q;
    }

    Kind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    bool is_deterministic() const noexcept { return kind_ == Kind::deterministic; }
    const Grain& grain() const noexcept { return grain_; }
    const LengthLaw& length_law() const noexcept { return length_; }
    const OrientationLaw& orientation_law() const noexcept { return orientation_; }

    int hausdorff_dim() const noexcept { return kind_ == Kind::deterministic ? grain_.hausdorff_dim() : 1; }

    // Almost-sure bound L_max on diam Z_0.
    double diameter_bound() const { return kind_ == Kind::deterministic ? grain_.diameter() : length_.max_length(); }

    // E_Q[H^n(Z_0)]
    double expected_hn() const { return kind_ == Kind::deterministic ? grain_.hn_measure() : length_.moment(1); }

    // E[L^k] of the segment length (or of diam Z_0 for a deterministic grain).
    double length_moment(int k) const {
        return kind_ == Kind::deterministic ? std::pow(grain_.diameter(), k) : length_.moment(k);
    }

    Grain sample(RandomStream& rng) const {
        if (kind_ == Kind::deterministic) return grain_;
        const double l = length_.sample(rng);
        const Point dir = orientation_.kind == OrientationLaw::Kind::uniform
                              ? sample_direction(dim_, rng)
                              : Grain::direction_from_angles(dim_, orientation_.alpha, orientation_.polar);
        return Grain::segment(l, dir);
    }

private:
    MarkDistribution(Kind kind, int dim) : kind_(kind), dim_(dim), grain_(Grain::point(dim)) {}

    Kind kind_;
    int dim_;
    Grain grain_;
    LengthLaw length_{};
    OrientationLaw orientation_{};
};

inline Grain sample_mark(const MarkDistribution& q, RandomStream& rng) { return q.sample(rng); }

// H^1 of the part of a closed segment inside the closed ball B_r(c).
inline double segment_length_in_ball(const SegmentShape& s, const Point& c, double r) {
    const Point d = s.b - s.a;
    const double len2 = norm2(d);
    if (len2 == 0.0) return 0.0;
    const Point m = s.a - c;
    // |m + t d|^2 = r^2
    const double bq = dot(m, d) / len2;
    const double cq = (norm2(m) - r * r) / len2;
    const double disc = bq * bq - cq;
    if (disc <= 0.0) return 0.0;
    const double root = std::sqrt(disc);
    const double t0 = std::max(0.0, -bq - root);
    const double t1 = std::min(1.0, -bq + root);
    return t1 > t0 ? (t1 - t0) * std::sqrt(len2) : 0.0;
}

/// Witness of the lower density bound H^n(Z~_0 ∩ B_r(x)) >= gamma r^n for
/// x in Z_0 and r in (0, 1).
///
/// Z~_0 is Z_0 unless Z_0 is a segment or polyline shorter than 1, in which
/// case its last edge is prolonged (away from the anchor) to total length 1.
/// Connected curves of length >= 1 satisfy the bound with gamma = 1; a point
/// grain satisfies it with gamma = 1 as a counting measure.
struct RegularityCertificate {
    double gamma = 1.0;
    std::string extension_rule = "segments and polylines shorter than 1 are prolonged along their last edge to length 1";

    Grain extended(const Grain& g) const {
        if (g.kind() == Grain::Kind::point) return g;
        const double total = g.hn_measure();
        if (total >= 1.0) return g;
        std::vector<Point> v = g.vertices();
        const Point& a = v[v.size() - 2];
        const Point edge = v.back() - a;
        const double edge_len = norm(edge);
        const double need = 1.0 - total;
        if (edge_len > 0.0) {
            v.back() = v.back() + (need / edge_len) * edge;
        } else {
            Point e(g.dim());
            e[0] = 1.0;
            v.back() = v.back() + need * e;
        }
        return g.kind() == Grain::Kind::segment ? Grain::segment(v.back()) : Grain::polyline(std::move(v));
    }

    // H^n(Z~_0 ∩ B_r(x))
    double local_measure(const Grain& g, const Point& x, double r) const {
        const Grain z = extended(g);
        if (z.kind() == Grain::Kind::point) return distance(x, z.vertices().front()) <= r ? 1.0 : 0.0;
        CompensatedSum s;
        for (std::size_t i = 0; i < z.segment_count(); ++i) s.add(segment_length_in_ball(z.segment_at(i), x, r));
        return s.value();
    }

    bool holds_at(const Grain& g, const Point& x, double r) const {
        return local_measure(g, x, r) >= gamma * std::pow(r, g.hausdorff_dim()) * (1.0 - 1e-12);
    }

    // (eta(R^d) / gamma) 2^n 4^d b_d / b_{d-n} with eta = H^n restricted to Z~_0.
    double minkowski_ratio_bound(const Grain& g) const {
        const int d = g.dim();
        const int n = g.hausdorff_dim();
        const double eta_mass = extended(g).hn_measure();
        return eta_mass / gamma * std::pow(2.0, n) * std::pow(4.0, d) * ball_volume(d) / ball_volume(d - n);
    }
};

} // namespace meandense
