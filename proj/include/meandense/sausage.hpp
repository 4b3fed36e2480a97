#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>

#include "grains.hpp"
#include "numerics.hpp"
#include "random.hpp"

namespace meandense {

/// Monte Carlo estimate of the integral of h over the closed r-neighbourhood
/// Z ⊕ r of a grain in its anchored position.
///
/// Proposals are uniform on the bounding box of Z dilated by r; each one
/// contributes h(z) if dist(z, Z) <= r and 0 otherwise. The standard error
/// comes from the sample variance of these contributions.
template <class Field>
    requires std::invocable<const Field&, const Point&>
Estimate sausage_integral_local(const Grain& z, const Field& h, double r, std::uint64_t points, RandomStream& rng) {
    if (points == 0) throw ConfigError("sausage integral needs at least one Monte Carlo point");
    const Box box = z.bounding_box().dilated(r);
    const double vol = box.volume();
    MeanVariance acc;
    for (std::uint64_t i = 0; i < points; ++i) {
        const Point y = sample_in_box(box, rng);
        double v = 0.0;
        if (z.distance_to(y) <= r) {
            v = h(y);
            if (!std::isfinite(v)) throw NumericError("non-finite integrand at " + y.str());
        }
        acc.add(v);
    }
    return {vol * acc.mean(), vol * acc.standard_error()};
}

} // namespace meandense
