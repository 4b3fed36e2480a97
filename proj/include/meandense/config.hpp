#pragma once

// Scenario files are flat `key = value` lines; sections are dotted key
// prefixes. `#` starts a comment. Lists are comma-separated, point lists
// separate points with `;`. See configs/*.cfg for complete examples.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "estimate.hpp"
#include "grains.hpp"
#include "intensity.hpp"

namespace meandense {

struct ScenarioConfig {
    int d = 2;
    int n = 1;
    Scenario scenario;
    std::optional<Box> window;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> N;
    std::vector<std::uint64_t> n_grid;
    std::optional<BandwidthSchedule> schedule;
    std::optional<double> fixed_r;
    std::vector<Point> x_grid;
    std::vector<double> cell_volumes; // set when x_grid.kind = cells
    std::uint64_t replications = 1;
    std::string output = "out";

    std::uint64_t mark_draws = 100'000;
    int quadrature_order = kDefaultQuadratureOrder;
    std::vector<double> minkowski_r_grid{0.2, 0.1, 0.05, 0.02};
    std::uint64_t minkowski_mc_points = 1'000'000;
    std::vector<double> oracle_r_grid{0.2, 0.1, 0.05, 0.025};
    std::uint64_t oracle_mc_points = 1'000'000;

    // Parsed key/value pairs in key order, echoed into run manifests.
    std::map<std::string, std::string> entries;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> to_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::optional<std::uint64_t> to_u64(const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
        // Accept integral scientific notation such as 1e5.
        const auto d = to_double(s);
        if (d && *d >= 0.0 && *d <= 1.8e19 && std::floor(*d) == *d) return static_cast<std::uint64_t>(*d);
        return std::nullopt;
    }
    return v;
}

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "scenario_id", "d", "n", "seed", "N", "N_grid", "replications", "output",
        "intensity.kind", "intensity.value", "intensity.scale", "intensity.offset", "intensity.intercept",
        "intensity.gradient", "intensity.boxes", "intensity.values", "intensity.background",
        "marks.kind", "marks.grain", "marks.grain.length", "marks.grain.angle", "marks.grain.polar",
        "marks.grain.vertices", "marks.length.law", "marks.length.value", "marks.length.min", "marks.length.max",
        "marks.length.rate", "marks.length.quantile", "marks.orientation", "marks.orientation.angle",
        "marks.orientation.polar", "window.lo", "window.hi", "bandwidth.c0", "bandwidth.beta", "bandwidth.r",
        "x_grid.kind", "x_grid.points", "x_grid.lo", "x_grid.hi", "x_grid.counts", "exact.mark_draws",
        "exact.order", "minkowski.r_grid", "minkowski.mc_points", "oracle.r_grid", "oracle.mc_points"};
    return keys;
}

// Typed access to the key/value map; every problem is appended to `errors`.
class Reader {
public:
    Reader(const std::map<std::string, std::string>& kv, std::vector<std::string>& errors) : kv_(kv), errors_(errors) {}

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::optional<std::string> text(const std::string& key, bool required = false) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) {
            if (required) errors_.push_back(key + ": required key is missing");
            return std::nullopt;
        }
        return it->second;
    }

    std::optional<double> number(const std::string& key, bool required = false) const {
        const auto t = text(key, required);
        if (!t) return std::nullopt;
        const auto v = to_double(*t);
        if (!v) errors_.push_back(key + ": expected a finite number, got '" + *t + "'");
        return v;
    }

    std::optional<std::uint64_t> count(const std::string& key, bool required = false) const {
        const auto t = text(key, required);
        if (!t) return std::nullopt;
        const auto v = to_u64(*t);
        if (!v) errors_.push_back(key + ": expected a non-negative integer, got '" + *t + "'");
        return v;
    }

    std::optional<std::vector<double>> numbers(const std::string& key, bool required = false) const {
        const auto t = text(key, required);
        if (!t) return std::nullopt;
        std::vector<double> out;
        for (const auto& part : split(*t, ',')) {
            const auto v = to_double(part);
            if (!v) {
                errors_.push_back(key + ": expected a comma-separated list of numbers, got '" + *t + "'");
                return std::nullopt;
            }
            out.push_back(*v);
        }
        return out;
    }

    std::optional<std::vector<std::uint64_t>> counts(const std::string& key, bool required = false) const {
        const auto t = text(key, required);
        if (!t) return std::nullopt;
        std::vector<std::uint64_t> out;
        for (const auto& part : split(*t, ',')) {
            const auto v = to_u64(part);
            if (!v) {
                errors_.push_back(key + ": expected a comma-separated list of integers, got '" + *t + "'");
                return std::nullopt;
            }
            out.push_back(*v);
        }
        return out;
    }

    std::optional<Point> point(const std::string& key, int d, bool required = false) const {
        const auto v = numbers(key, required);
        if (!v) return std::nullopt;
        if (static_cast<int>(v->size()) != d) {
            errors_.push_back(key + ": expected " + std::to_string(d) + " coordinates, got " +
                              std::to_string(v->size()));
            return std::nullopt;
        }
        Point p(d);
        for (int k = 0; k < d; ++k) p[k] = (*v)[static_cast<std::size_t>(k)];
        return p;
    }

    std::optional<std::vector<Point>> points(const std::string& key, int d, bool required = false) const {
        const auto t = text(key, required);
        if (!t) return std::nullopt;
        std::vector<Point> out;
        for (const auto& part : split(*t, ';')) {
            std::vector<double> c;
            for (const auto& s : split(part, ',')) {
                const auto v = to_double(s);
                if (!v) {
                    errors_.push_back(key + ": malformed point list '" + *t + "'");
                    return std::nullopt;
                }
                c.push_back(*v);
            }
            if (static_cast<int>(c.size()) != d) {
                errors_.push_back(key + ": every point needs " + std::to_string(d) + " coordinates");
                return std::nullopt;
            }
            Point p(d);
            for (int k = 0; k < d; ++k) p[k] = c[static_cast<std::size_t>(k)];
            out.push_back(p);
        }
        return out;
    }

    void fail(const std::string& msg) const { errors_.push_back(msg); }

private:
    const std::map<std::string, std::string>& kv_;
    std::vector<std::string>& errors_;
};

inline std::optional<IntensityField> read_intensity(const Reader& in, int d) {
    const auto kind = in.text("intensity.kind", true);
    if (!kind) return std::nullopt;
    std::optional<IntensityField> f;
    try {
        if (*kind == "constant") {
            if (auto c = in.number("intensity.value", true)) {
                if (*c < 0.0) in.fail("intensity.value: must be >= 0 (intensity is non-negative)");
                else f = IntensityField::constant(d, *c);
            }
        } else if (*kind == "quadratic") {
            const double scale = in.number("intensity.scale").value_or(1.0);
            if (scale < 0.0) in.fail("intensity.scale: must be >= 0");
            else f = IntensityField::quadratic(d, scale);
        } else if (*kind == "affine") {
            const auto a = in.number("intensity.intercept", true);
            const auto b = in.point("intensity.gradient", d, true);
            if (a && b) f = IntensityField::affine(*a, *b);
        } else if (*kind == "piecewise_constant") {
            const auto values = in.numbers("intensity.values", true);
            const auto bg = in.number("intensity.background").value_or(0.0);
            const auto raw = in.text("intensity.boxes", true);
            if (values && raw) {
                std::vector<Box> boxes;
                for (const auto& part : split(*raw, ';')) {
                    std::vector<double> c;
                    for (const auto& s : split(part, ','))
                        if (auto v = to_double(s)) c.push_back(*v);
                    if (static_cast<int>(c.size()) != 2 * d) {
                        in.fail("intensity.boxes: each box needs " + std::to_string(2 * d) + " numbers (lo..., hi...)");
                        return std::nullopt;
                    }
                    Point lo(d), hi(d);
                    for (int k = 0; k < d; ++k) {
                        lo[k] = c[static_cast<std::size_t>(k)];
                        hi[k] = c[static_cast<std::size_t>(k + d)];
                    }
                    boxes.emplace_back(lo, hi);
                }
                f = IntensityField::piecewise_constant(std::move(boxes), *values, bg);
            }
        } else {
            in.fail("intensity.kind: unknown family '" + *kind +
                    "' (admissible: constant, quadratic, affine, piecewise_constant)");
        }
        if (f && in.has("intensity.offset"))
            if (auto off = in.point("intensity.offset", d)) f = f->shifted(*off);
    } catch (const ConfigError& e) {
        in.fail(std::string("intensity: ") + e.what());
        return std::nullopt;
    }
    return f;
}

inline std::optional<MarkDistribution> read_marks(const Reader& in, int d) {
    const auto kind = in.text("marks.kind", true);
    if (!kind) return std::nullopt;
    try {
        if (*kind == "deterministic") {
            const std::string g = in.text("marks.grain").value_or("segment");
            if (g == "point") return MarkDistribution::deterministic(Grain::point(d));
            if (g == "segment") {
                const auto len = in.number("marks.grain.length", true);
                if (!len) return std::nullopt;
                if (*len <= 0.0) {
                    in.fail("marks.grain.length: must be > 0 (use marks.grain = point for a point grain)");
                    return std::nullopt;
                }
                return MarkDistribution::deterministic(Grain::segment_at_angles(
                    d, *len, in.number("marks.grain.angle").value_or(0.0), in.number("marks.grain.polar").value_or(0.0)));
            }
            if (g == "polyline") {
                const auto v = in.points("marks.grain.vertices", d, true);
                if (!v) return std::nullopt;
                return MarkDistribution::deterministic(Grain::polyline(*v));
            }
            in.fail("marks.grain: unknown grain '" + g + "' (admissible: point, segment, polyline)");
            return std::nullopt;
        }
        if (*kind == "segment_law") {
            const auto law = in.text("marks.length.law", true);
            if (!law) return std::nullopt;
            std::optional<LengthLaw> length;
            if (*law == "fixed") {
                if (auto l = in.number("marks.length.value", true)) {
                    if (*l <= 0.0) in.fail("marks.length.value: must be > 0");
                    else length = LengthLaw::fixed(*l);
                }
            } else if (*law == "uniform") {
                const auto lo = in.number("marks.length.min", true);
                const auto hi = in.number("marks.length.max", true);
                if (lo && hi) {
                    if (!(*lo >= 0.0 && *hi > *lo)) in.fail("marks.length: need 0 <= min < max");
                    else length = LengthLaw::uniform(*lo, *hi);
                }
            } else if (*law == "truncated_exponential") {
                const auto rate = in.number("marks.length.rate", true);
                if (rate && *rate <= 0.0) in.fail("marks.length.rate: must be > 0");
                else if (rate) {
                    if (auto mx = in.number("marks.length.max")) {
                        if (*mx <= 0.0) in.fail("marks.length.max: must be > 0");
                        else length = LengthLaw::truncated_exponential(*rate, *mx);
                    } else {
                        const double q = in.number("marks.length.quantile").value_or(0.9999);
                        if (!(q > 0.0 && q < 1.0)) in.fail("marks.length.quantile: must lie in (0, 1)");
                        else length = LengthLaw::truncated_exponential_at_quantile(*rate, q);
                    }
                }
            } else {
                in.fail("marks.length.law: unknown law '" + *law +
                        "' (admissible: fixed, uniform, truncated_exponential)");
            }
            const std::string orient = in.text("marks.orientation").value_or("uniform");
            OrientationLaw o;
            if (orient == "uniform") o = OrientationLaw::uniform();
            else if (orient == "fixed")
                o = OrientationLaw::fixed(in.number("marks.orientation.angle").value_or(0.0),
                                          in.number("marks.orientation.polar").value_or(0.0));
            else {
                in.fail("marks.orientation: unknown law '" + orient + "' (admissible: uniform, fixed)");
                return std::nullopt;
            }
            if (!length) return std::nullopt;
            return MarkDistribution::segment_law(d, *length, o);
        }
        in.fail("marks.kind: unknown mark law '" + *kind + "' (admissible: deterministic, segment_law)");
    } catch (const ConfigError& e) {
        in.fail(std::string("marks: ") + e.what());
    }
    return std::nullopt;
}

} // namespace detail

/// Parses and validates a scenario. Every violation found is reported in a
/// single ValidationError.
inline ScenarioConfig parse_config(std::string_view text) {
    using namespace detail;
    std::vector<std::string> errors;
    ScenarioConfig cfg;

    std::istringstream lines{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
            continue;
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (!known_keys().count(key)) {
            errors.push_back(key + ": unknown key");
            continue;
        }
        if (cfg.entries.count(key)) errors.push_back(key + ": duplicate key");
        cfg.entries[key] = value;
    }

    const Reader in(cfg.entries, errors);
    cfg.scenario.id = in.text("scenario_id").value_or("scenario");
    if (cfg.scenario.id.find(',') != std::string::npos) errors.push_back("scenario_id: must not contain commas");

    const auto d = in.count("d", true);
    const auto n = in.count("n", true);
    bool dims_ok = false;
    if (d && (*d < 1 || *d > 3)) errors.push_back("d: must lie in {1, 2, 3}");
    else if (d && n) {
        if (*n >= *d)
            errors.push_back("n: lower-dimensional grains are required, 0 <= n < d = " + std::to_string(*d) +
                             " (n = d is the trivial volume-fraction case)");
        else
            dims_ok = true;
    }
    if (!dims_ok) throw ValidationError(errors.empty() ? std::vector<std::string>{"d, n: invalid"} : errors);
    cfg.d = static_cast<int>(*d);
    cfg.n = static_cast<int>(*n);

    const auto intensity = read_intensity(in, cfg.d);
    const auto marks = read_marks(in, cfg.d);
    if (intensity && !intensity->discontinuities_negligible(cfg.n))
        errors.push_back("intensity: the discontinuity set (box faces, dimension " +
                         std::to_string(intensity->discontinuity_dimension()) + ") is not H^" +
                         std::to_string(cfg.n) + "-negligible");
    if (marks) {
        if (marks->hausdorff_dim() != cfg.n)
            errors.push_back("n: mark law produces " + std::to_string(marks->hausdorff_dim()) +
                             "-dimensional grains but n = " + std::to_string(cfg.n));
        if (!std::isfinite(marks->expected_hn())) errors.push_back("marks: E_Q[H^n(Z_0)] must be finite");
        if (intensity && intensity->kind() == IntensityField::Kind::quadratic &&
            !std::isfinite(marks->length_moment(3)))
            errors.push_back("marks: E[L^3] must be finite for a quadratic intensity");
    }
    if (intensity && marks) cfg.scenario = Scenario{cfg.scenario.id, *intensity, *marks};

    if (in.has("window.lo") || in.has("window.hi")) {
        const auto lo = in.point("window.lo", cfg.d, true);
        const auto hi = in.point("window.hi", cfg.d, true);
        if (lo && hi) {
            bool ok = true;
            for (int k = 0; k < cfg.d; ++k) ok = ok && (*lo)[k] < (*hi)[k];
            if (!ok) errors.push_back("window: must be nonempty, window.lo < window.hi on every axis");
            else cfg.window = Box(*lo, *hi);
        }
    }

    cfg.seed = in.count("seed").value_or(0);
    if (auto v = in.count("N")) {
        if (*v == 0) errors.push_back("N: must be >= 1");
        cfg.N = *v;
    }
    if (auto g = in.counts("N_grid")) {
        cfg.n_grid = *g;
        for (std::size_t i = 0; i < g->size(); ++i)
            if ((*g)[i] == 0 || (i && (*g)[i] <= (*g)[i - 1])) {
                errors.push_back("N_grid: must be strictly increasing positive integers");
                break;
            }
    }
    if (auto v = in.count("replications")) {
        if (*v == 0) errors.push_back("replications: must be >= 1");
        cfg.replications = *v;
    }
    cfg.output = in.text("output").value_or("out");

    if (in.has("bandwidth.beta") || in.has("bandwidth.c0")) {
        BandwidthSchedule s = BandwidthSchedule::default_for(cfg.d - cfg.n);
        s.c0 = in.number("bandwidth.c0").value_or(s.c0);
        s.beta = in.number("bandwidth.beta").value_or(s.beta);
        try {
            s.validate(cfg.d - cfg.n);
            cfg.schedule = s;
        } catch (const ConfigError& e) {
            errors.push_back(e.what());
        }
    }
    if (auto r = in.number("bandwidth.r")) {
        if (!(*r > 0.0 && *r < 2.0)) errors.push_back("bandwidth.r: fixed radius must lie in (0, 2)");
        cfg.fixed_r = *r;
    }

    const std::string grid_kind = in.text("x_grid.kind").value_or(in.has("x_grid.points") ? "list" : "lattice");
    if (grid_kind == "list") {
        if (auto pts = in.points("x_grid.points", cfg.d, true)) cfg.x_grid = *pts;
    } else if (grid_kind == "lattice" || grid_kind == "cells") {
        if (in.has("x_grid.lo") || in.has("x_grid.hi") || in.has("x_grid.counts")) {
            const auto lo = in.point("x_grid.lo", cfg.d, true);
            const auto hi = in.point("x_grid.hi", cfg.d, true);
            const auto counts = in.counts("x_grid.counts", true);
            if (lo && hi && counts) {
                if (static_cast<int>(counts->size()) != cfg.d ||
                    std::any_of(counts->begin(), counts->end(), [](auto c) { return c == 0; })) {
                    errors.push_back("x_grid.counts: need d positive counts");
                } else {
                    const bool cells = grid_kind == "cells";
                    std::size_t total = 1;
                    for (auto c : *counts) total *= c;
                    double cell_vol = 1.0;
                    for (int k = 0; k < cfg.d; ++k)
                        cell_vol *= ((*hi)[k] - (*lo)[k]) / static_cast<double>((*counts)[static_cast<std::size_t>(k)]);
                    for (std::size_t flat = 0; flat < total; ++flat) {
                        Point p(cfg.d);
                        std::size_t rest = flat;
                        for (int k = 0; k < cfg.d; ++k) {
                            const auto m = (*counts)[static_cast<std::size_t>(k)];
                            const auto j = rest % m;
                            rest /= m;
                            const double a = (*lo)[k], b = (*hi)[k];
                            if (cells)
                                p[k] = a + (b - a) * (static_cast<double>(j) + 0.5) / static_cast<double>(m);
                            else
                                p[k] = m == 1 ? 0.5 * (a + b)
                                              : a + (b - a) * static_cast<double>(j) / static_cast<double>(m - 1);
                        }
                        cfg.x_grid.push_back(p);
                        if (cells) cfg.cell_volumes.push_back(cell_vol);
                    }
                }
            }
        }
    } else {
        errors.push_back("x_grid.kind: unknown grid '" + grid_kind + "' (admissible: list, lattice, cells)");
    }

    if (auto v = in.count("exact.mark_draws")) {
        if (*v == 0) errors.push_back("exact.mark_draws: must be >= 1");
        cfg.mark_draws = *v;
    }
    if (auto v = in.count("exact.order")) {
        if (*v < 1 || *v > 64) errors.push_back("exact.order: must lie in [1, 64]");
        cfg.quadrature_order = static_cast<int>(*v);
    }
    auto read_radii = [&](const std::string& key, std::vector<double>& dst) {
        if (auto r = in.numbers(key)) {
            for (std::size_t i = 0; i < r->size(); ++i)
                if (!((*r)[i] > 0.0 && (*r)[i] < 2.0) || (i && (*r)[i] >= (*r)[i - 1])) {
                    errors.push_back(key + ": radii must be strictly decreasing and lie in (0, 2)");
                    return;
                }
            dst = *r;
        }
    };
    read_radii("minkowski.r_grid", cfg.minkowski_r_grid);
    read_radii("oracle.r_grid", cfg.oracle_r_grid);
    if (auto v = in.count("minkowski.mc_points")) {
        if (*v == 0) errors.push_back("minkowski.mc_points: must be >= 1");
        cfg.minkowski_mc_points = *v;
    }
    if (auto v = in.count("oracle.mc_points")) {
        if (*v == 0) errors.push_back("oracle.mc_points: must be >= 1");
        cfg.oracle_mc_points = *v;
    }

    if (!errors.empty()) throw ValidationError(errors);
    return cfg;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

} // namespace meandense
