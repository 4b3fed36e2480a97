#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "grains.hpp"
#include "intensity.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "sausage.hpp"

namespace meandense {

/// λ_Θ(x) for a deterministic grain: the integral of y -> f(x - y) over Z_0
/// with respect to H^n. Integrating over Z_0 with the reflected argument is
/// the same as integrating f over x - Z_0.
inline double deterministic_density(const IntensityField& f, const Grain& g, const Point& x,
                                    int order = kDefaultQuadratureOrder) {
    require_same_dim(x, g.vertices().front());
    return integrate_along(g, [&](const Point& y) { return f(x - y); }, order);
}

/// Mean density λ_Θ(x) = E_Q[ ∫_{x - Z_0(s)} f dH^n ].
///
/// The mark expectation is a Monte Carlo average over `mark_draws` samples
/// of Q, except for a deterministic Q where the single quadrature is exact
/// and the standard error is 0.
inline Estimate exact_density(const IntensityField& f, const MarkDistribution& q, const Point& x,
                              std::uint64_t mark_draws, RandomStream& rng, int order = kDefaultQuadratureOrder) {
    if (q.is_deterministic()) return {deterministic_density(f, q.grain(), x, order), 0.0};
    if (mark_draws == 0) throw ConfigError("exact_density: mark_draws must be positive");
    MeanVariance acc;
    for (std::uint64_t i = 0; i < mark_draws; ++i) acc.add(deterministic_density(f, q.sample(rng), x, order));
    return {acc.mean(), acc.standard_error()};
}

// (x1^2 + x2^2) E[L] + E[L^3]/3: planar segments with uniform orientation
// under f(u, v) = u^2 + v^2.
inline double analytic_segment_density(double mean_length, double third_moment, const Point& x) {
    if (x.dim() != 2) throw ConfigError("analytic_segment_density is defined for d = 2 only");
    return (x[0] * x[0] + x[1] * x[1]) * mean_length + third_moment / 3.0;
}

struct CapacityEstimate {
    Estimate probability; // P(x ∈ Θ ⊕ r)
    Estimate mass;        // Λ(Z^{x,r})
};

/// P(x ∈ Θ ⊕ r) = 1 - exp(-Λ(Z^{x,r})), where Λ(Z^{x,r}) is the expected
/// intensity mass of the reflected sausages (x - Z_0(s)) ⊕ r.
///
/// Each mark draw gets `points_per_mark` uniform proposals on the bounding
/// box of its sausage; a deterministic Q uses a single draw with all
/// `mc_points`. The probability error is propagated by the delta method.
inline CapacityEstimate capacity_probability(const IntensityField& f, const MarkDistribution& q, const Point& x,
                                             double r, std::uint64_t mc_points, RandomStream& rng,
                                             std::uint64_t points_per_mark = 64) {
    if (!(r > 0.0) || !(r < 2.0)) throw ConfigError("capacity_probability: r must lie in (0, 2)");
    if (mc_points == 0 || points_per_mark == 0) throw ConfigError("capacity_probability: need Monte Carlo points");
    auto reflected = [&](const Point& z) { return f(x - z); };
    Estimate mass;
    if (q.is_deterministic()) {
        mass = sausage_integral_local(q.grain(), reflected, r, mc_points, rng);
    } else {
        const std::uint64_t draws = std::max<std::uint64_t>(2, (mc_points + points_per_mark - 1) / points_per_mark);
        MeanVariance acc;
        for (std::uint64_t i = 0; i < draws; ++i)
            acc.add(sausage_integral_local(q.sample(rng), reflected, r, points_per_mark, rng).value);
        mass = {acc.mean(), acc.standard_error()};
    }
    const double void_prob = std::exp(-mass.value);
    return {{-std::expm1(-mass.value), void_prob * mass.standard_error}, mass};
}

struct DensityField {
    enum class Method { exact_quadrature, analytic, stationary, convolution };

    std::vector<Point> grid;
    std::vector<double> values;
    std::vector<double> standard_errors;
    Method method = Method::exact_quadrature;

    static std::string method_name(Method m) {
        switch (m) {
        case Method::exact_quadrature: return "exact_quadrature";
        case Method::analytic: return "analytic";
        case Method::stationary: return "stationary";
        case Method::convolution: return "convolution";
        }
        return "unknown";
    }

    // Columns x1..xd, value, standard_error, method.
    void write_csv(std::ostream& out) const {
        const int d = grid.empty() ? 1 : grid.front().dim();
        std::vector<std::string> header;
        for (int k = 1; k <= d; ++k) header.push_back("x" + std::to_string(k));
        header.insert(header.end(), {"value", "standard_error", "method"});
        CsvWriter csv(out, header);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (int k = 0; k < d; ++k) csv << grid[i][k];
            csv << values[i] << standard_errors[i] << method_name(method);
            csv.end_row();
        }
    }
};

/// Exact density over a grid; point i uses the stream derive_stream(seed, i)
/// so the field does not depend on the thread count.
inline DensityField exact_density_field(const IntensityField& f, const MarkDistribution& q,
                                        const std::vector<Point>& grid, std::uint64_t mark_draws, std::uint64_t seed,
                                        unsigned threads = 1, int order = kDefaultQuadratureOrder) {
    DensityField field;
    field.grid = grid;
    field.values.resize(grid.size());
    field.standard_errors.resize(grid.size());
    if (q.is_deterministic())
        field.method = DensityField::Method::convolution;
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        RandomStream rng = derive_stream(seed, i);
        const Estimate e = exact_density(f, q, grid[i], mark_draws, rng, order);
        field.values[i] = e.value;
        field.standard_errors[i] = e.standard_error;
    });
    return field;
}

/// Tensor Gauss-Legendre quadrature of the exact density over a box, with
/// `order` nodes per axis. Node i uses derive_stream(seed, i); the error
/// combines the independent per-node Monte Carlo errors.
inline Estimate density_box_integral(const IntensityField& f, const MarkDistribution& q, const Box& box, int order,
                                     std::uint64_t mark_draws, std::uint64_t seed, unsigned threads = 1) {
    const GaussLegendreRule& rule = gauss_legendre(order);
    const int d = box.dim();
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) total *= rule.nodes.size();
    std::vector<Point> nodes;
    std::vector<double> weights;
    nodes.reserve(total);
    weights.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Point p(d);
        double w = 1.0;
        std::size_t rest = flat;
        for (int k = 0; k < d; ++k) {
            const std::size_t j = rest % rule.nodes.size();
            rest /= rule.nodes.size();
            const double half = 0.5 * box.side(k);
            p[k] = box.lo[k] + half * (rule.nodes[j] + 1.0);
            w *= half * rule.weights[j];
        }
        nodes.push_back(p);
        weights.push_back(w);
    }
    const DensityField field = exact_density_field(f, q, nodes, mark_draws, seed, threads);
    CompensatedSum value, var;
    for (std::size_t i = 0; i < total; ++i) {
        value.add(weights[i] * field.values[i]);
        var.add(weights[i] * weights[i] * field.standard_errors[i] * field.standard_errors[i]);
    }
    return {value.value(), std::sqrt(var.value())};
}

} // namespace meandense
