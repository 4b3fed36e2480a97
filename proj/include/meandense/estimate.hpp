#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "boolean.hpp"
#include "csv.hpp"
#include "exact.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace meandense {

/// Everything needed to simulate i.i.d. copies of Θ.
struct Scenario {
    std::string id = "scenario";
    IntensityField intensity = IntensityField::constant(2, 0.0);
    MarkDistribution marks = MarkDistribution::segment_law(2, LengthLaw::fixed(1.0), OrientationLaw::uniform());

    int dim() const noexcept { return intensity.dim(); }
    int hausdorff_dim() const noexcept { return marks.hausdorff_dim(); }
    int codim() const noexcept { return dim() - hausdorff_dim(); }
};

// b_{d-n} r^{d-n}
inline double ball_normalizer(int codim, double r) { return ball_volume(codim) * std::pow(r, codim); }

/// Bandwidth R_N = c0 N^{-beta}. R_N -> 0 and N R_N^{d-n} -> inf exactly
/// when 0 < beta < 1/(d-n).
struct BandwidthSchedule {
    double c0 = 1.0;
    double beta = 1.0 / 3.0;

    // beta = 1/(d-n+2), the usual kernel density rate heuristic.
    static BandwidthSchedule default_for(int codim) { return {1.0, 1.0 / (codim + 2)}; }

    void validate(int codim) const {
        const double upper = 1.0 / codim;
        if (!(c0 > 0.0) || !std::isfinite(c0)) throw ConfigError("bandwidth.c0 must be a positive finite number");
        if (!(beta > 0.0 && beta < upper))
            throw ConfigError("bandwidth.beta = " + format_double(beta) + " outside the admissible interval (0, " +
                              format_double(upper) + ") for d - n = " + std::to_string(codim));
    }

    double radius(std::uint64_t n) const { return c0 * std::pow(static_cast<double>(n), -beta); }
};

struct EstimateReport {
    Point x;
    std::uint64_t N = 0;
    double R_N = 0.0;
    double lambda_hat = 0.0;
    double standard_error = 0.0;     // binomial plug-in
    double empirical_variance = 0.0; // standard_error^2
    std::optional<double> exact_lambda;
    std::optional<double> finite_r_mean_oracle;
};

// Indicator totals -> λ̂ with the binomial plug-in error.
inline EstimateReport density_from_hits(const Point& x, std::uint64_t hits, std::uint64_t n, double radius,
                                        int codim) {
    if (!(radius > 0.0)) throw ConfigError("bandwidth radius must be > 0");
    if (n == 0) throw ConfigError("no realizations");
    const double norm = ball_normalizer(codim, radius);
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    EstimateReport rep;
    rep.x = x;
    rep.N = n;
    rep.R_N = radius;
    rep.lambda_hat = static_cast<double>(hits) / (static_cast<double>(n) * norm);
    rep.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n)) / norm;
    rep.empirical_variance = rep.standard_error * rep.standard_error;
    return rep;
}

namespace detail {
inline void require_common_scenario(std::span<const BooleanRealization> rs) {
    if (rs.empty()) throw ConfigError("no realizations");
    const auto& first = rs.front();
    for (const auto& r : rs)
        if (!(r.observation_window() == first.observation_window()) || r.r_max() != first.r_max() ||
            r.hausdorff_dim() != first.hausdorff_dim())
            throw ConfigError("realizations come from different scenarios");
}

inline std::uint64_t count_hits(std::span<const BooleanRealization> rs, const Point& x, double r) {
    require_common_scenario(rs);
    std::uint64_t hits = 0;
    for (const auto& real : rs) hits += real.hits(x, r) ? 1 : 0;
    return hits;
}
} // namespace detail

/// T̂^N(B_r(x)): the fraction of realizations hitting the closed ball.
inline double empirical_capacity(std::span<const BooleanRealization> rs, const Point& x, double r) {
    return static_cast<double>(detail::count_hits(rs, x, r)) / static_cast<double>(rs.size());
}

/// λ̂^N(x) = #{i : Θ_i ∩ B_R(x) ≠ ∅} / (N b_{d-n} R^{d-n}).
inline EstimateReport density_estimate(std::span<const BooleanRealization> rs, const Point& x, double radius) {
    if (!(radius > 0.0)) throw ConfigError("density_estimate: R_N must be > 0");
    const std::uint64_t hits = detail::count_hits(rs, x, radius);
    return density_from_hits(x, hits, rs.size(), radius, rs.front().dim() - rs.front().hausdorff_dim());
}

/// Mean number of grains hitting B_r(x), divided by b_{d-n} r^{d-n}.
/// Its expectation is Λ(Z^{x,r}) / (b_{d-n} r^{d-n}).
inline Estimate count_estimate(std::span<const BooleanRealization> rs, const Point& x, double r) {
    if (!(r > 0.0)) throw ConfigError("count_estimate: r must be > 0");
    detail::require_common_scenario(rs);
    MeanVariance acc;
    for (const auto& real : rs) acc.add(static_cast<double>(real.hit_count(x, r)));
    const double norm = ball_normalizer(rs.front().dim() - rs.front().hausdorff_dim(), r);
    return {acc.mean() / norm, acc.standard_error() / norm};
}

/// Half the slope at r = 0 of the empirical contact distribution
/// r -> T̂(B_r(x)), fitted by least squares through the origin over r_grid
/// (H(0, x) = P(x ∈ Θ) = 0 for lower-dimensional grains). Only for n = d - 1,
/// where b_{d-n} = 2.
inline double contact_slope(std::span<const double> r_grid, std::span<const double> capacities) {
    return 0.5 * least_squares_slope(r_grid, capacities, true);
}

inline double contact_derivative(std::span<const BooleanRealization> rs, const Point& x,
                                 std::span<const double> r_grid) {
    detail::require_common_scenario(rs);
    if (rs.front().hausdorff_dim() != rs.front().dim() - 1)
        throw ConfigError("contact_derivative requires n = d - 1");
    if (r_grid.size() < 2) throw ConfigError("contact_derivative needs at least two radii");
    std::vector<double> caps;
    caps.reserve(r_grid.size());
    for (double r : r_grid) {
        if (!(r > 0.0)) throw ConfigError("contact_derivative: radii must be > 0");
        caps.push_back(empirical_capacity(rs, x, r));
    }
    return contact_slope(r_grid, caps);
}

/// Histogram density estimate card{i : |X_i - x| <= R} / (N 2R); the n = 0,
/// d = 1 case of λ̂ with closed intervals.
inline double histogram_reduction(std::span<const double> samples, double x, double radius) {
    if (!(radius > 0.0)) throw ConfigError("histogram_reduction: R must be > 0");
    if (samples.empty()) throw ConfigError("histogram_reduction: no samples");
    std::uint64_t count = 0;
    for (double s : samples) count += std::abs(x - s) <= radius ? 1 : 0;
    return static_cast<double>(count) / (static_cast<double>(samples.size()) * (2.0 * radius));
}

// ---------------------------------------------------------------------------
// Streaming replicates. Large studies never hold all realizations: each
// replicate i is simulated from derive_stream(seed, i), queried, and dropped.

struct Query {
    Point x;
    double r = 0.0;
};

struct QueryTally {
    std::uint64_t hits = 0;     // realizations with Θ_i ∩ B_r(x) ≠ ∅
    std::uint64_t count = 0;    // total grains hitting
    std::uint64_t count_sq = 0; // sum of squared per-realization counts
};

// Smallest window containing every query ball.
inline Box query_window(std::span<const Query> queries) {
    if (queries.empty()) throw ConfigError("no queries");
    Box w = Box::around(queries.front().x, queries.front().r);
    for (const auto& q : queries) {
        const Box b = Box::around(q.x, q.r);
        for (int k = 0; k < w.dim(); ++k) {
            w.lo[k] = std::min(w.lo[k], b.lo[k]);
            w.hi[k] = std::max(w.hi[k], b.hi[k]);
        }
    }
    return w;
}

inline double max_radius(std::span<const Query> queries) {
    double r = 0.0;
    for (const auto& q : queries) r = std::max(r, q.r);
    return r;
}

/// Simulates `replicates` realizations on the smallest window holding all
/// query balls and tallies hits and hit counts per query. Integer totals make
/// the result independent of the thread count.
inline std::vector<QueryTally> tally_replicates(const Scenario& sc, std::span<const Query> queries,
                                                std::uint64_t replicates, std::uint64_t seed, unsigned threads) {
    const Box window = query_window(queries);
    const double r_max = max_radius(queries);
    using Tallies = std::vector<QueryTally>;
    return reduce_blocks(
        replicates, threads, Tallies(queries.size()),
        [&](Tallies& acc, std::size_t i) {
            RandomStream rng = derive_stream(seed, i);
            const BooleanRealization real = simulate(sc.intensity, sc.marks, window, r_max, rng);
            for (std::size_t q = 0; q < queries.size(); ++q) {
                const std::uint64_t c = real.hit_count(queries[q].x, queries[q].r);
                acc[q].hits += c > 0 ? 1 : 0;
                acc[q].count += c;
                acc[q].count_sq += c * c;
            }
        },
        [](Tallies& total, const Tallies& part) {
            for (std::size_t q = 0; q < total.size(); ++q) {
                total[q].hits += part[q].hits;
                total[q].count += part[q].count;
                total[q].count_sq += part[q].count_sq;
            }
        });
}

// Count estimate and its standard error from a tally.
inline Estimate count_from_tally(const QueryTally& t, std::uint64_t n, double r, int codim) {
    const double norm = ball_normalizer(codim, r);
    const double nd = static_cast<double>(n);
    const double mean = static_cast<double>(t.count) / nd;
    const double var = n > 1 ? std::max(0.0, (static_cast<double>(t.count_sq) - nd * mean * mean) / (nd - 1.0)) : 0.0;
    return {mean / norm, std::sqrt(var / nd) / norm};
}

/// Mean and standard error of H^n(Θ ∩ A) over independent realizations
/// simulated on A itself.
inline Estimate mean_measure_in_region(const Scenario& sc, const Box& region, std::uint64_t replicates,
                                       std::uint64_t seed, unsigned threads) {
    MeanVariance acc = reduce_blocks(
        replicates, threads, MeanVariance{},
        [&](MeanVariance& a, std::size_t i) {
            RandomStream rng = derive_stream(seed, i);
            a.add(simulate(sc.intensity, sc.marks, region, 0.0, rng).measure_in_region(region));
        },
        [](MeanVariance& total, const MeanVariance& part) { total.merge(part); });
    return {acc.mean(), acc.standard_error()};
}

// ---------------------------------------------------------------------------
// Convergence studies.

struct StudyRow {
    Point x;
    std::uint64_t N = 0;
    double R_N = 0.0;
    double lambda_hat = 0.0; // mean over replications
    double se = 0.0;         // standard error of that mean
    double exact = 0.0;
    double bias = 0.0;
    double variance = 0.0; // across replications
    double mse = 0.0;
};

struct RegionCheck {
    std::uint64_t N = 0;
    double estimated = 0.0; // Σ mean λ̂ Δx
    double exact = 0.0;     // Σ λ Δx
    double relative_error = 0.0;
};

struct StudyTable {
    std::string scenario_id;
    std::vector<StudyRow> rows;
    std::vector<RegionCheck> region;

    // Columns scenario_id, x1..xd, N, R_N, lambda_hat, se, exact, bias, variance, mse.
    void write_csv(std::ostream& out) const {
        const int d = rows.empty() ? 1 : rows.front().x.dim();
        std::vector<std::string> header{"scenario_id"};
        for (int k = 1; k <= d; ++k) header.push_back("x" + std::to_string(k));
        header.insert(header.end(), {"N", "R_N", "lambda_hat", "se", "exact", "bias", "variance", "mse"});
        CsvWriter csv(out, header);
        for (const auto& r : rows) {
            csv << scenario_id;
            for (int k = 0; k < d; ++k) csv << r.x[k];
            csv << r.N << r.R_N << r.lambda_hat << r.se << r.exact << r.bias << r.variance << r.mse;
            csv.end_row();
        }
    }

    void write_region_csv(std::ostream& out) const {
        CsvWriter csv(out, {"scenario_id", "N", "estimated_integral", "exact_integral", "relative_error"});
        for (const auto& r : region) {
            csv << scenario_id << r.N << r.estimated << r.exact << r.relative_error;
            csv.end_row();
        }
    }
};

struct StudyOptions {
    std::vector<std::uint64_t> n_grid;
    std::uint64_t replications = 10;
    std::uint64_t mark_draws = 20'000; // for the exact side
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::vector<double> cell_volumes; // Δx per grid point; empty disables the region check
};

/// Bias, variance and MSE of λ̂^N against the exact density for every N in
/// the grid and every x. Replication j at sample size N uses the seed
/// derive_seed(derive_seed(seed, N), j).
inline StudyTable convergence_study(const Scenario& sc, const std::vector<Point>& x_grid,
                                    const BandwidthSchedule& schedule, const StudyOptions& opt) {
    schedule.validate(sc.codim());
    if (x_grid.empty()) throw ConfigError("convergence_study: empty x grid");
    if (opt.n_grid.empty() || opt.replications == 0) throw ConfigError("convergence_study: empty N grid");
    for (std::size_t i = 1; i < opt.n_grid.size(); ++i)
        if (opt.n_grid[i] <= opt.n_grid[i - 1]) throw ConfigError("convergence_study: N grid must be increasing");
    if (!opt.cell_volumes.empty() && opt.cell_volumes.size() != x_grid.size())
        throw ConfigError("convergence_study: one cell volume per grid point");

    const DensityField exact =
        exact_density_field(sc.intensity, sc.marks, x_grid, opt.mark_draws, derive_seed(opt.seed, ~0ULL), opt.threads);

    StudyTable table;
    table.scenario_id = sc.id;
    for (const std::uint64_t n : opt.n_grid) {
        const double radius = schedule.radius(n);
        std::vector<Query> queries;
        for (const auto& x : x_grid) queries.push_back({x, radius});
        std::vector<MeanVariance> per_x(x_grid.size());
        std::vector<CompensatedSum> sq_err(x_grid.size());
        const std::uint64_t n_seed = derive_seed(opt.seed, n);
        for (std::uint64_t j = 0; j < opt.replications; ++j) {
            const auto tallies = tally_replicates(sc, queries, n, derive_seed(n_seed, j), opt.threads);
            for (std::size_t i = 0; i < x_grid.size(); ++i) {
                const double lam = density_from_hits(x_grid[i], tallies[i].hits, n, radius, sc.codim()).lambda_hat;
                per_x[i].add(lam);
                sq_err[i].add((lam - exact.values[i]) * (lam - exact.values[i]));
            }
        }
        CompensatedSum region_hat, region_exact;
        for (std::size_t i = 0; i < x_grid.size(); ++i) {
            StudyRow row;
            row.x = x_grid[i];
            row.N = n;
            row.R_N = radius;
            row.lambda_hat = per_x[i].mean();
            row.se = per_x[i].standard_error();
            row.exact = exact.values[i];
            row.bias = row.lambda_hat - row.exact;
            row.variance = per_x[i].variance();
            row.mse = sq_err[i].value() / static_cast<double>(opt.replications);
            table.rows.push_back(row);
            if (!opt.cell_volumes.empty()) {
                region_hat.add(row.lambda_hat * opt.cell_volumes[i]);
                region_exact.add(row.exact * opt.cell_volumes[i]);
            }
        }
        if (!opt.cell_volumes.empty()) {
            RegionCheck rc{n, region_hat.value(), region_exact.value(), 0.0};
            rc.relative_error = std::abs(rc.estimated - rc.exact) / std::abs(rc.exact);
            table.region.push_back(rc);
        }
    }
    return table;
}

} // namespace meandense
