#include <sys/wait.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <meandense/meandense.hpp>

using namespace meandense;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const MarkDistribution kUnitSegments =
    MarkDistribution::segment_law(2, LengthLaw::fixed(1.0), OrientationLaw::uniform());

Scenario quadratic_segments() { return {"quadratic_segments", IntensityField::quadratic(2), kUnitSegments}; }
Scenario stationary() { return {"stationary", IntensityField::constant(2, 1.0), kUnitSegments}; }

unsigned threads() { return resolve_threads(0); }

Outcome quadratic_segments_reproduction() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Point> grid;
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i) grid.push_back({-1.0 + 0.5 * i, -1.0 + 0.5 * j});
    const DensityField field = exact_density_field(IntensityField::quadratic(2), kUnitSegments, grid, 20000,
                                                   derive_seed(kSeed, 1), threads());
    const double elapsed = seconds_since(t0);
    double worst = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double target = norm2(grid[i]) + 1.0 / 3.0;
        const double err = std::abs(field.values[i] - target);
        const double tol = std::max(3.0 * field.standard_errors[i], 1e-3);
        ok = ok && err <= tol;
        worst = std::max(worst, err / tol);
    }
    return {ok && elapsed < 60.0, fmt("25 points, worst |err|/tol = %.3f, %.2f s", worst, elapsed)};
}

Outcome estimator_consistency() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t n = 100000;
    const double radius = std::pow(static_cast<double>(n), -1.0 / 3.0);
    const std::vector<Query> qs{{{0.0, 0.0}, radius}, {{1.0, 0.0}, radius}};
    const auto t = tally_replicates(quadratic_segments(), qs, n, derive_seed(kSeed, 2), threads());
    const double targets[] = {1.0 / 3.0, 4.0 / 3.0};
    bool ok = true;
    std::string d;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const auto rep = density_from_hits(qs[i].x, t[i].hits, n, radius, 1);
        const double z = (rep.lambda_hat - targets[i]) / rep.standard_error;
        ok = ok && std::abs(z) <= 3.0;
        d += fmt("x=%s lambda_hat=%.4f (target %.4f, z=%.2f); ", qs[i].x.str().c_str(), rep.lambda_hat, targets[i], z);
    }
    const double elapsed = seconds_since(t0);
    return {ok && elapsed < 600.0, d + fmt("%.2f s", elapsed)};
}

Outcome fixed_radius_identities() {
    const double r = 0.1;
    const std::uint64_t n = 1000, experiments = 200;
    const double p = -std::expm1(-(0.2 + 0.01 * std::numbers::pi));
    const double mean_oracle = p / (2.0 * r);
    const double var_oracle = p * (1.0 - p) / (static_cast<double>(n) * 4.0 * r * r);
    const Query q{{0.0, 0.0}, r};
    MeanVariance mv;
    for (std::uint64_t e = 0; e < experiments; ++e) {
        const auto t = tally_replicates(stationary(), std::span(&q, 1), n, derive_seed(derive_seed(kSeed, 3), e),
                                        threads());
        mv.add(density_from_hits(q.x, t[0].hits, n, r, 1).lambda_hat);
    }
    const double z = (mv.mean() - mean_oracle) / mv.standard_error();
    const double ratio = mv.variance() / var_oracle;
    return {std::abs(z) <= 3.0 && ratio >= 0.7 && ratio <= 1.4,
            fmt("mean %.5f vs %.5f (z=%.2f), variance ratio %.3f", mv.mean(), mean_oracle, z, ratio)};
}

Outcome stationary_corollary() {
    const Scenario sc{"random_length", IntensityField::constant(2, 2.0),
                      MarkDistribution::segment_law(2, LengthLaw::uniform(0.5, 1.5), OrientationLaw::uniform())};
    const std::vector<Point> grid{{0.0, 0.0}, {0.5, -0.5}, {2.0, 1.0}};
    const std::uint64_t n = 100000;
    const double radius = std::pow(static_cast<double>(n), -1.0 / 3.0);
    std::vector<Query> qs;
    for (const auto& x : grid) qs.push_back({x, radius});
    const auto t = tally_replicates(sc, qs, n, derive_seed(kSeed, 4), threads());
    const DensityField field = exact_density_field(sc.intensity, sc.marks, grid, 20000, derive_seed(kSeed, 5), threads());
    bool ok = true;
    double worst_est = 0.0, worst_exact = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto rep = density_from_hits(grid[i], t[i].hits, n, radius, 1);
        const double ze = std::abs(rep.lambda_hat - 2.0) / rep.standard_error;
        const double zx = std::abs(field.values[i] - 2.0) / field.standard_errors[i];
        ok = ok && ze <= 3.0 && zx <= 3.0;
        worst_est = std::max(worst_est, ze);
        worst_exact = std::max(worst_exact, zx);
    }
    const auto [lo, hi] = std::minmax_element(field.values.begin(), field.values.end());
    const double se = std::hypot(field.standard_errors[static_cast<std::size_t>(lo - field.values.begin())],
                                 field.standard_errors[static_cast<std::size_t>(hi - field.values.begin())]);
    const double spread = *hi - *lo;
    ok = ok && spread <= 3.0 * se;
    return {ok, fmt("worst |z| estimator %.2f, exact %.2f; max-min %.2e vs 3 SE %.2e", worst_est, worst_exact, spread,
                    3.0 * se)};
}

// Composite Simpson rule on [0, 1] with 2000 panels.
double simpson(const std::function<double(double)>& g) {
    const int m = 2000;
    double s = g(0.0) + g(1.0);
    for (int k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * g(static_cast<double>(k) / m);
    return s / (3.0 * m);
}

Outcome deterministic_corollary() {
    const auto f = IntensityField::quadratic(2);
    const Grain s = Grain::segment_at_angles(2, 1.0, 0.0);
    RandomStream rng(derive_seed(kSeed, 6));
    double worst_closed = 0.0, worst_oracle = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Point x = sample_in_box(Box::cube(2, -2, 2), rng);
        const double closed = x[0] * x[0] - x[0] + 1.0 / 3.0 + x[1] * x[1];
        const double oracle = simpson([&](double t) { return f(x - Point{t, 0.0}); });
        worst_oracle = std::max(worst_oracle, std::abs(oracle - closed));
        worst_closed = std::max(worst_closed, std::abs(deterministic_density(f, s, x) - closed));
    }
    return {worst_closed <= 1e-9 && worst_oracle <= 1e-9,
            fmt("20 points, max |impl - closed| %.1e, max |quadrature - closed| %.1e", worst_closed, worst_oracle)};
}

Outcome minkowski_content() {
    const Grain s = Grain::segment_at_angles(2, 1.0, 0.0);
    const std::vector<double> radii{0.2, 0.1, 0.05, 0.02};
    const auto quad = run_minkowski(s, IntensityField::quadratic(2), radii, 1'000'000, derive_seed(kSeed, 7), threads());
    const ContentLimit lim = content_limit(quad);
    const double rel = std::abs(lim.limit_estimate - 1.0 / 3.0) / (1.0 / 3.0);
    const auto one = run_minkowski(s, IntensityField::constant(2, 1.0), radii, 1'000'000, derive_seed(kSeed, 8), threads());
    double worst = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i)
        worst = std::max(worst, std::abs(one.ratios[i].value - (1.0 + std::numbers::pi * radii[i] / 2.0)) /
                                    one.ratios[i].standard_error);
    const BoundCheck b = bound_check(one, RegularityCertificate{});
    return {rel <= 0.02 && worst <= 3.0 && b.holds && b.worst_margin > 0.0,
            fmt("limit %.5f (%.2f%% off 1/3), worst f=1 |z| %.2f, bound %.2f margin %.2f", lim.limit_estimate,
                100.0 * rel, worst, b.bound, b.worst_margin)};
}

Outcome measure_level_identity() {
    const Box a = Box::cube(2, 0, 1);
    bool ok = true;
    std::string d;
    std::uint64_t k = 9;
    for (const Scenario& sc : {stationary(), quadratic_segments()}) {
        const Estimate m = mean_measure_in_region(sc, a, 10000, derive_seed(kSeed, k++), threads());
        const Estimate q = density_box_integral(sc.intensity, sc.marks, a, 8, 20000, derive_seed(kSeed, k++), threads());
        const double se = std::hypot(m.standard_error, q.standard_error);
        const double z = (m.value - q.value) / se;
        ok = ok && std::abs(z) <= 3.0;
        d += fmt("%s: mean %.4f vs quadrature %.4f (z=%.2f); ", sc.id.c_str(), m.value, q.value, z);
    }
    return {ok, d};
}

Outcome histogram_equivalence() {
    RandomStream rng(derive_seed(kSeed, 13));
    std::vector<double> samples(1000);
    std::vector<BooleanRealization> embedded;
    for (auto& x : samples) {
        x = rng.uniform();
        embedded.emplace_back(std::vector<MarkedGerm>{{Point{x}, Grain::point(1)}}, Box::cube(1, -1, 2), 0.5, 0.5, 0);
    }
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const double radius = rng.uniform(0.001, 0.5);
        const double x = rng.uniform();
        const double h = histogram_reduction(samples, x, radius);
        const double l = density_estimate(embedded, Point{x}, radius).lambda_hat;
        mismatches += std::bit_cast<std::uint64_t>(h) != std::bit_cast<std::uint64_t>(l);
    }
    const std::size_t n = 100000;
    std::vector<double> u(n);
    for (auto& x : u) x = rng.uniform();
    const double radius = std::pow(static_cast<double>(n), -1.0 / 3.0);
    const double h = histogram_reduction(u, 0.5, radius);
    const double p = h * 2.0 * radius;
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n)) / (2.0 * radius);
    const double z = (h - 1.0) / se;
    return {mismatches == 0 && std::abs(z) <= 3.0,
            fmt("%d/1000 bit mismatches; uniform estimate at 0.5 = %.4f (z=%.2f)", mismatches, h, z)};
}

Outcome grain_count_route() {
    const std::vector<double> radii{0.2, 0.1, 0.05};
    const std::uint64_t n = 100000;
    std::vector<Query> qs;
    for (double r : radii) qs.push_back({{0.0, 0.0}, r});
    const auto t = tally_replicates(quadratic_segments(), qs, n, derive_seed(kSeed, 14), threads());
    bool decreasing = true, dominates = true;
    std::string d;
    double prev = std::numeric_limits<double>::infinity();
    double last = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double c = count_from_tally(t[i], n, radii[i], 1).value;
        const double l = density_from_hits(qs[i].x, t[i].hits, n, radii[i], 1).lambda_hat;
        decreasing = decreasing && c < prev;
        dominates = dominates && c >= l;
        prev = last = c;
        d += fmt("r=%.2f count %.4f; ", radii[i], c);
    }
    const double rel = std::abs(last - 1.0 / 3.0) / (1.0 / 3.0);
    d += fmt("final %.1f%% off 1/3", 100.0 * rel);
    return {decreasing && dominates && rel <= 0.10, d};
}

Outcome contact_route() {
    const std::vector<double> radii{0.02, 0.04, 0.06, 0.08};
    const std::vector<Point> grid{{0.0, 0.0}, {0.5, 0.5}};
    const std::uint64_t n = 100000;
    std::vector<Query> qs;
    for (const auto& x : grid)
        for (double r : radii) qs.push_back({x, r});
    const auto t = tally_replicates(stationary(), qs, n, derive_seed(kSeed, 15), threads());
    const DensityField field = exact_density_field(IntensityField::constant(2, 1.0), kUnitSegments, grid, 1000,
                                                   derive_seed(kSeed, 16), threads());
    bool ok = true;
    std::string d;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> caps;
        for (std::size_t k = 0; k < radii.size(); ++k)
            caps.push_back(static_cast<double>(t[g * radii.size() + k].hits) / static_cast<double>(n));
        const double half = contact_slope(radii, caps);
        const double rel = std::abs(half - field.values[g]) / field.values[g];
        ok = ok && rel <= 0.10;
        d += fmt("x=%s half slope %.4f vs %.4f (%.1f%%); ", grid[g].str().c_str(), half, field.values[g], 100.0 * rel);
    }
    return {ok, d};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome thread_determinism() {
    const fs::path root = fs::temp_directory_path() / "meandense_acceptance";
    fs::remove_all(root);
    const std::vector<std::pair<std::string, std::string>> runs{
        {"exact", "quadratic_segments"}, {"estimate", "random_length"}, {"study", "stationary"},
        {"minkowski", "unit_segment"}, {"simulate", "quadratic_segments"}, {"oracle", "points_1d"}};
    int differing = 0, files = 0;
    std::string bad;
    for (const auto& [sub, cfg] : runs) {
        const fs::path config = fs::path(MEANDENSE_CONFIG_DIR) / (cfg + ".cfg");
        fs::path dirs[2];
        for (int k = 0; k < 2; ++k) {
            const unsigned th = k == 0 ? 1 : 8;
            dirs[k] = root / (sub + "_" + std::to_string(th));
            const std::string cmd = std::string(MEANDENSE_CLI) + " " + sub + " --config " + config.string() +
                                    " --seed 99 --threads " + std::to_string(th) + " --out " + dirs[k].string() +
                                    " >/dev/null 2>&1";
            const int raw = std::system(cmd.c_str());
            if (!WIFEXITED(raw) || WEXITSTATUS(raw) != 0) return {false, sub + " exited abnormally"};
        }
        for (const auto& e : fs::directory_iterator(dirs[0])) {
            if (e.path().extension() != ".csv") continue;
            ++files;
            if (slurp(e.path()) != slurp(dirs[1] / e.path().filename())) {
                ++differing;
                bad += " " + sub + "/" + e.path().filename().string();
            }
        }
    }
    fs::remove_all(root);
    return {differing == 0 && files >= 6, fmt("%d CSVs compared across 6 sub-commands, %d differ", files, differing) + bad};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"quadratic-segments reproduction", quadratic_segments_reproduction},
        {"estimator consistency", estimator_consistency},
        {"fixed-r mean and variance", fixed_radius_identities},
        {"stationary corollary", stationary_corollary},
        {"deterministic-grain corollary", deterministic_corollary},
        {"generalized Minkowski content", minkowski_content},
        {"measure-level identity", measure_level_identity},
        {"n=0 histogram equivalence", histogram_equivalence},
        {"grain-count route", grain_count_route},
        {"contact-distribution route", contact_route},
        {"thread determinism", thread_determinism}};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
