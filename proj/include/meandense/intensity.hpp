#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace meandense {

// Germ intensity f: R^d -> [0, inf). Every family may be translated by
// `offset`, giving y -> f(y - offset).
class IntensityField {
public:
    enum class Kind { constant, quadratic, affine, piecewise_constant };

    static IntensityField constant(int dim, double c) {
        if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("constant intensity must be finite and >= 0");
        IntensityField f(Kind::constant, dim);
        f.level_ = c;
        return f;
    }

    // f(y) = scale * |y|^2 (u^2 + v^2 in the plane).
    static IntensityField quadratic(int dim, double scale = 1.0) {
        if (!(scale >= 0.0) || !std::isfinite(scale)) throw ConfigError("quadratic scale must be finite and >= 0");
        IntensityField f(Kind::quadratic, dim);
        f.level_ = scale;
        return f;
    }

    // f(y) = max(0, a + b.y)
    static IntensityField affine(double a, Point b) {
        IntensityField f(Kind::affine, b.dim());
        f.level_ = a;
        f.gradient_ = b;
        return f;
    }

    // Value values[i] on boxes[i] (first match wins), `background` elsewhere.
    static IntensityField piecewise_constant(std::vector<Box> boxes, std::vector<double> values, double background) {
        if (boxes.empty() || boxes.size() != values.size())
            throw ConfigError("piecewise_constant needs one value per box and at least one box");
        const int dim = boxes.front().dim();
        for (double v : values)
            if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("piecewise_constant values must be finite and >= 0");
        if (!(background >= 0.0)) throw ConfigError("piecewise_constant background must be >= 0");
        IntensityField f(Kind::piecewise_constant, dim);
        f.boxes_ = std::move(boxes);
        f.values_ = std::move(values);
        f.level_ = background;
        return f;
    }

    // y -> f(y - v)
    IntensityField shifted(const Point& v) const {
        require_same_dim(v, offset_);
        IntensityField f = *this;
        f.offset_ += v;
        return f;
    }

    Kind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    const Point& offset() const noexcept { return offset_; }
    // Constant value, quadratic scale, affine intercept or piecewise background.
    double level() const noexcept { return level_; }
    const Point& gradient() const noexcept { return gradient_; }
    const std::vector<Box>& boxes() const noexcept { return boxes_; }
    const std::vector<double>& values() const noexcept { return values_; }

    double operator()(const Point& y) const noexcept {
        switch (kind_) {
        case Kind::constant: return level_;
        case Kind::quadratic: {
            double s = 0.0;
            for (int k = 0; k < dim_; ++k) {
                const double t = y[k] - offset_[k];
                s += t * t;
            }
            return level_ * s;
        }
        case Kind::affine: {
            double s = level_;
            for (int k = 0; k < dim_; ++k) s += gradient_[k] * (y[k] - offset_[k]);
            return s > 0.0 ? s : 0.0;
        }
        case Kind::piecewise_constant: {
            const Point local = y - offset_;
            for (std::size_t i = 0; i < boxes_.size(); ++i)
                if (boxes_[i].contains(local)) return values_[i];
            return level_;
        }
        }
        return 0.0;
    }

    bool is_constant() const noexcept { return kind_ == Kind::constant; }

    // Hausdorff dimension of the discontinuity set, or -1 when f is continuous.
    int discontinuity_dimension() const noexcept {
        if (kind_ != Kind::piecewise_constant) return -1;
        for (double v : values_)
            if (v != level_) return dim_ - 1;
        return -1;
    }

    // Whether the discontinuity set is H^n-negligible. Box faces are
    // (d-1)-dimensional, so a genuine jump is never negligible for n < d.
    bool discontinuities_negligible(int n) const noexcept {
        const int dd = discontinuity_dimension();
        return dd < 0 || dd < n;
    }

    std::string name() const {
        switch (kind_) {
        case Kind::constant: return "constant";
        case Kind::quadratic: return "quadratic";
        case Kind::affine: return "affine";
        case Kind::piecewise_constant: return "piecewise_constant";
        }
        return "unknown";
    }

private:
    IntensityField(Kind kind, int dim) : kind_(kind), dim_(dim), offset_(Point::origin(dim)), gradient_(dim) {}

    Kind kind_;
    int dim_;
    double level_ = 0.0;
    Point offset_;
    Point gradient_;
    std::vector<Box> boxes_;
    std::vector<double> values_;
};

// Upper bound M >= sup_{y in box} f(y); the exact supremum for the
// constant, quadratic and affine families.
inline double intensity_bound(const IntensityField& f, const Box& box) {
    if (box.dim() != f.dim()) throw ConfigError("intensity_bound: dimension mismatch");
    const Point& o = f.offset();
    switch (f.kind()) {
    case IntensityField::Kind::constant: return f.level();
    case IntensityField::Kind::quadratic: {
        double s = 0.0;
        for (int k = 0; k < box.dim(); ++k) {
            const double a = box.lo[k] - o[k], b = box.hi[k] - o[k];
            s += std::max(a * a, b * b);
        }
        return f.level() * s;
    }
    case IntensityField::Kind::affine: {
        double s = f.level();
        for (int k = 0; k < box.dim(); ++k) {
            const double g = f.gradient()[k];
            s += std::max(g * (box.lo[k] - o[k]), g * (box.hi[k] - o[k]));
        }
        return std::max(0.0, s);
    }
    case IntensityField::Kind::piecewise_constant: {
        double m = f.level();
        for (double v : f.values()) m = std::max(m, v);
        return m;
    }
    }
    return 0.0;
}

} // namespace meandense
