#pragma once

#include <cstdint>
#include <vector>

#include "grains.hpp"
#include "intensity.hpp"
#include "random.hpp"
#include "sausage.hpp"

namespace meandense {

struct MarkedGerm {
    Point germ;
    Grain grain;

    friend bool operator==(const MarkedGerm&, const MarkedGerm&) = default;
};

struct MarkedGermSample {
    std::vector<MarkedGerm> germs;
    Box window_used;
    double intensity_bound_used = 0.0;
    std::uint64_t proposals = 0;

    friend bool operator==(const MarkedGermSample&, const MarkedGermSample&) = default;
};

/// Marked Poisson process with intensity measure f(y) dy Q(ds) restricted to `box`.
///
/// Thinning: N ~ Poisson(M vol(box)) proposals uniform in the box, each kept
/// with probability f(y)/M, kept points receive an independent mark. Draw
/// order per proposal is fixed (coordinates, acceptance, mark) so the sample
/// is a deterministic function of the stream state.
inline MarkedGermSample sample_germs(const IntensityField& f, const MarkDistribution& q, const Box& box,
                                     RandomStream& rng) {
    if (f.dim() != box.dim() || q.dim() != box.dim()) throw ConfigError("sample_germs: dimension mismatch");
    MarkedGermSample out;
    out.window_used = box;
    const double bound = intensity_bound(f, box);
    out.intensity_bound_used = bound;
    if (bound <= 0.0) return out;
    out.proposals = sample_poisson(bound * box.volume(), rng);
    for (std::uint64_t i = 0; i < out.proposals; ++i) {
        Point y = sample_in_box(box, rng);
        if (rng.uniform() * bound < f(y)) out.germs.push_back({y, q.sample(rng)});
    }
    return out;
}

struct FinitenessDiagnostic {
    bool finite = false;
    Estimate integral; // E_Q of the integral of f over (-Z_0(s)) ⊕ R
};

/// Checks that the expected intensity mass of the reflected R-sausage is
/// finite. Each mark draw gets an inner sausage estimate with
/// `points_per_mark` proposals; the reported error covers both levels.
inline FinitenessDiagnostic check_finiteness(const IntensityField& f, const MarkDistribution& q, double R,
                                             RandomStream& rng, std::uint64_t mark_draws = 10'000,
                                             std::uint64_t points_per_mark = 256) {
    if (!(R > 0.0)) throw ConfigError("check_finiteness: R must be > 0");
    if (!std::isfinite(q.diameter_bound())) throw ConfigError("check_finiteness: mark law needs a diameter bound");
    auto reflected = [&f](const Point& z) { return f(-z); };
    MeanVariance acc;
    FinitenessDiagnostic d;
    try {
        for (std::uint64_t i = 0; i < mark_draws; ++i) {
            const Grain g = q.sample(rng);
            acc.add(sausage_integral_local(g, reflected, R, points_per_mark, rng).value);
        }
    } catch (const NumericError&) {
        return d;
    }
    d.integral = {acc.mean(), acc.standard_error()};
    d.finite = std::isfinite(d.integral.value) && std::isfinite(d.integral.standard_error);
    return d;
}

} // namespace meandense
