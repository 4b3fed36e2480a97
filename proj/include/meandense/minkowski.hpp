#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "csv.hpp"
#include "grains.hpp"
#include "intensity.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "sausage.hpp"

namespace meandense {

/// μ(S ⊕ r) = ∫_{S⊕r} f(y) dy for the grain S in its anchored position.
inline Estimate sausage_integral(const Grain& s, const IntensityField& f, double r, std::uint64_t mc_points,
                                 RandomStream& rng) {
    if (!(r > 0.0) || !(r < 2.0)) throw ConfigError("sausage_integral: r must lie in (0, 2)");
    if (f.dim() != s.dim()) throw ConfigError("sausage_integral: dimension mismatch");
    return sausage_integral_local(s, f, r, mc_points, rng);
}

struct MinkowskiRun {
    Grain set = Grain::point(1);
    IntensityField intensity = IntensityField::constant(1, 1.0);
    std::vector<double> r_grid;  // decreasing, in (0, 2)
    std::uint64_t mc_points = 1'000'000;
    std::vector<Estimate> ratios; // μ(S⊕r) / (b_{d-n} r^{d-n})
    double target = 0.0;          // ∫_S f dH^n
};

/// Estimates the Minkowski ratios on every radius. Radius i draws from
/// derive_stream(seed, i); the target is an independent quadrature.
inline MinkowskiRun run_minkowski(const Grain& s, const IntensityField& f, std::vector<double> r_grid,
                                  std::uint64_t mc_points, std::uint64_t seed, unsigned threads = 1) {
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (!(r_grid[i] > 0.0 && r_grid[i] < 2.0)) throw ConfigError("minkowski radii must lie in (0, 2)");
        if (i && !(r_grid[i] < r_grid[i - 1])) throw ConfigError("minkowski radii must be strictly decreasing");
    }
    MinkowskiRun run;
    run.set = s;
    run.intensity = f;
    run.r_grid = std::move(r_grid);
    run.mc_points = mc_points;
    run.ratios.resize(run.r_grid.size());
    const int codim = s.dim() - s.hausdorff_dim();
    parallel_for(run.r_grid.size(), threads, [&](std::size_t i) {
        RandomStream rng = derive_stream(seed, i);
        const double r = run.r_grid[i];
        const Estimate mu = sausage_integral(s, f, r, mc_points, rng);
        const double norm = ball_volume(codim) * std::pow(r, codim);
        run.ratios[i] = {mu.value / norm, mu.standard_error / norm};
    });
    run.target = integrate_along(s, f);
    return run;
}

struct ContentLimit {
    double limit_estimate = 0.0;
    double limit_se = 0.0;
    double target = 0.0;
    double abs_error = 0.0;
    bool within_band = false; // |limit - target| <= 3 se + 2% of |target|
};

/// Linear-in-r extrapolation to r = 0 through the ratios at the two smallest
/// radii.
inline ContentLimit content_limit(const MinkowskiRun& run) {
    if (run.r_grid.size() < 3 || run.ratios.size() != run.r_grid.size())
        throw ConfigError("content_limit needs at least three radii with ratios");
    const std::size_t last = run.r_grid.size() - 1;
    const double r1 = run.r_grid[last], r2 = run.r_grid[last - 1];
    const Estimate& q1 = run.ratios[last];
    const Estimate& q2 = run.ratios[last - 1];
    const double w1 = r2 / (r2 - r1), w2 = -r1 / (r2 - r1);
    ContentLimit out;
    out.limit_estimate = w1 * q1.value + w2 * q2.value;
    out.limit_se = std::hypot(w1 * q1.standard_error, w2 * q2.standard_error);
    out.target = run.target;
    out.abs_error = std::abs(out.limit_estimate - out.target);
    out.within_band = out.abs_error <= 3.0 * out.limit_se + 0.02 * std::abs(out.target);
    return out;
}

struct BoundCheck {
    bool holds = false;
    double bound = 0.0;
    double worst_margin = 0.0; // bound - largest ratio
};

/// Uniform bound H^d(S⊕r)/(b_{d-n} r^{d-n}) <= (η(R^d)/γ) 2^n 4^d b_d/b_{d-n}
/// for r < 2, with η = H^n restricted to the certificate's extension of S.
/// The ratios must come from f ≡ 1.
inline BoundCheck bound_check(const MinkowskiRun& run, const RegularityCertificate& cert) {
    if (!run.intensity.is_constant() || run.intensity.level() != 1.0)
        throw ConfigError("bound_check needs ratios computed with f = 1");
    BoundCheck out;
    out.bound = cert.minkowski_ratio_bound(run.set);
    double worst = 0.0;
    for (const auto& q : run.ratios) worst = std::max(worst, q.value);
    out.worst_margin = out.bound - worst;
    out.holds = out.worst_margin > 0.0;
    return out;
}

// Columns r, ratio, se, bound, target, limit_estimate.
inline void write_minkowski_csv(std::ostream& out, const MinkowskiRun& run, const ContentLimit& limit,
                                double bound) {
    CsvWriter csv(out, {"r", "ratio", "se", "bound", "target", "limit_estimate"});
    for (std::size_t i = 0; i < run.r_grid.size(); ++i) {
        csv << run.r_grid[i] << run.ratios[i].value << run.ratios[i].standard_error << bound << run.target
            << limit.limit_estimate;
        csv.end_row();
    }
}

} // namespace meandense
